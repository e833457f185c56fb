#pragma once

// Assembly of <:phi^2:> and d/dtau (a^2 <:phi^2:>) from the decomposition
// Q_s + Q_c + Q_0. The conformal-vacuum part Q_c splits into the linear term
// L1 (closed form through the cosine-integral kernel), the quadratic term L2
// and the order >= 3 remainder L_c summed from the Dyson representation.
// All epsilon-damped k-integrals are replaced by absolutely convergent
// rewritings; the single kernel
//   c1(Delta) = int_{w0}^inf cos(2 k0 Delta) sqrt(k0^2-w0^2)/k0^2 dk0
//             = -(gamma + log(2 w0 Delta) + f3(w0 Delta))
// carries every remaining conditionally convergent piece.

#include <cmath>
#include <vector>

#include "sce/errors.hpp"
#include "sce/geometry.hpp"
#include "sce/grid.hpp"
#include "sce/kgrid.hpp"
#include "sce/logkernel.hpp"
#include "sce/params.hpp"
#include "sce/special_functions.hpp"

namespace sce {

// Smooth part and boundary kernel of c1 sampled at grid offsets.
struct CosineKernel {
  double w0 = 0.0;
  double h = 0.0;
  std::vector<double> S;   // S[m] = -(gamma + log(2 w0) + f3(w0 m h)); c1 = S - log Delta
  std::vector<double> Wp;  // Wp[m] = w0 f3'(w0 m h)
};

inline CosineKernel build_cosine_kernel(double w0, const TimeGrid& g) {
  if (!(w0 > 0.0)) fail(errc::non_positive_initial_frequency, "c1 kernel requires w0 > 0");
  CosineKernel ck;
  ck.w0 = w0;
  ck.h = g.h();
  ck.S.resize(g.n);
  ck.Wp.resize(g.n);
  double base = euler_gamma + std::log(2.0 * w0);
  for (std::size_t m = 0; m < g.n; ++m) {
    double z = w0 * static_cast<double>(m) * ck.h;
    ck.S[m] = -(base + f3_kernel(z));
    ck.Wp[m] = w0 * f3_kernel_prime(z);
  }
  return ck;
}

// int g(eta) c1(tau - eta) deta for all grid points.
inline std::vector<double> convolve_c1(const std::vector<double>& g, const CosineKernel& ck) {
  std::vector<double> out = convolve_pl_kernel(g, ck.S, ck.h);
  std::vector<double> lg = convolve_pl_log(g, ck.h, -1.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += lg[i];
  return out;
}

// Pointwise c1 for off-grid offsets (cosine counterterm of Q_s^d).
inline double c1_pointwise(const CosineKernel& ck, double delta) {
  if (!(delta > 0.0)) fail(errc::config_error, "c1 is singular at zero offset");
  return -(euler_gamma + std::log(2.0 * ck.w0 * delta) + f3_kernel(ck.w0 * delta));
}

struct QcPair {
  std::vector<double> Qc, Qcd;
  std::vector<double> TV;   // T_{tau0}[V]
  std::vector<double> TVp;  // T_{tau0}[V'] (diagnostic; V'' from finite differences)
  std::vector<double> Qf, Qfd;
  double lc_tail_bound = 0.0;   // analytic k-integral tail beyond kmax
  double lc_err_estimate = 0.0; // Dyson truncation propagated through the sum
  double c_delta = 0.0;         // measured ||Qf||/||V||
  double c_delta_d = 0.0;       // measured ||Qfd||/||V'||
};

namespace edetail {

// second-order finite differences of fp (one-sided at the ends)
inline std::vector<double> fd_derivative(const std::vector<double>& f, double h) {
  std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

}  // namespace edetail

// Q_c and Q_c^d for the potential V with derivative Vp on the grid. The mode
// table supplies the Dyson pieces for the n >= 3 remainder.
inline QcPair q_c_pair(const std::vector<double>& V, const std::vector<double>& Vp,
                       const CosineKernel& ck, const ModeTable& mt, const TimeGrid& g,
                       const std::vector<double>* Vpp = nullptr) {
  const std::size_t n = g.n;
  const double h = g.h();
  if (std::abs(V[0]) > 1e-12 * (max_abs(V) + 1e-300))
    fail(errc::config_error, "q_c_pair requires V(tau0) = 0");

  QcPair out;
  out.TV = t_apply_from_derivative(Vp, h);
  std::vector<double> Vpp_fd = Vpp ? *Vpp : edetail::fd_derivative(Vp, h);
  out.TVp = t_apply_from_derivative(Vpp_fd, h);

  // L1 = T[V] + (1/8pi^2) conv(V', S); boundary form for the derivative
  std::vector<double> convS = convolve_pl_kernel(Vp, ck.S, h);
  std::vector<double> convW = convolve_pl_kernel(Vp, ck.Wp, h);
  std::vector<double> L1(n), Bd(n);
  for (std::size_t i = 0; i < n; ++i) {
    L1[i] = out.TV[i] + inv_8pi2 * convS[i];
    Bd[i] = inv_8pi2 * (ck.S[0] * Vp[i] - ck.S[i] * Vp[0]) - inv_8pi2 * convW[i];
  }

  // L2 pieces; kappa2 = c1/(4 pi^2)
  const double k2c = 1.0 / (4.0 * M_PI * M_PI);
  std::vector<double> IV = cumtrapz(V, h);
  std::vector<double> VIV(n), V2(n), VpIV(n);
  for (std::size_t i = 0; i < n; ++i) {
    VIV[i] = V[i] * IV[i];
    V2[i] = V[i] * V[i];
    VpIV[i] = Vp[i] * IV[i];
  }
  std::vector<double> C2 = convolve_c1(V, ck);  // doubles as P(eta) for the inner integral
  std::vector<double> VP(n);
  for (std::size_t i = 0; i < n; ++i) VP[i] = V[i] * C2[i] * k2c;
  std::vector<double> A2 = cumtrapz(VP, h);
  std::vector<double> D2 = convolve_c1(VIV, ck);
  std::vector<double> cV2 = convolve_c1(V2, ck);
  std::vector<double> cVp = convolve_c1(Vp, ck);
  std::vector<double> cVpIV = convolve_c1(VpIV, ck);
  std::vector<double> L2(n), L2d(n);
  for (std::size_t i = 0; i < n; ++i) {
    L2[i] = A2[i] - k2c * (IV[i] * C2[i] - D2[i]);
    L2d[i] = k2c * (cV2[i] - (IV[i] * cVp[i] - cVpIV[i]));
  }

  // L_c: orders >= 3 summed over the k-grid
  const std::size_t nk = mt.grid.k.size();
  std::vector<std::vector<double>> rk(nk), rkd(nk);
  parallel_for(nk, [&](std::size_t idx) {
    const ModeEntry& e = mt.entries[idx];
    std::vector<double> r(n), rd(n);
    for (std::size_t i = 0; i < n; ++i) {
      cplx s2 = e.c0[i] + e.c1[i] + e.c2[i];
      cplx s2p = e.c0p[i] + e.c1p[i] + e.c2p[i];
      cplx ct = e.ct[i], ctp = e.ctp[i];
      r[i] = 2.0 * (std::conj(s2) * ct).real() + std::norm(ct) +
             2.0 * (std::conj(e.c1[i]) * e.c2[i]).real() + std::norm(e.c2[i]);
      rd[i] = 2.0 * (std::conj(s2p) * ct + std::conj(s2) * ctp).real() +
              2.0 * (std::conj(ct) * ctp).real() +
              2.0 * (std::conj(e.c1p[i]) * e.c2[i] + std::conj(e.c1[i]) * e.c2p[i]).real() +
              2.0 * (std::conj(e.c2[i]) * e.c2p[i]).real();
    }
    rk[idx] = std::move(r);
    rkd[idx] = std::move(rd);
  });
  const double c_meas = 1.0 / (2.0 * M_PI * M_PI);
  std::vector<double> Lc(n, 0.0), Lcd(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    KahanSum s, sd;
    for (std::size_t idx = 0; idx < nk; ++idx) {
      double k = mt.grid.k[idx];
      double w = mt.grid.w[idx] * c_meas * k * k;
      s.add(w * rk[idx][i]);
      sd.add(w * rkd[idx][i]);
    }
    Lc[i] = s.value();
    Lcd[i] = sd.value();
  }

  // analytic tail of the remainder beyond kmax and the truncation estimate
  double Vl1 = 0.0;
  for (std::size_t i = 1; i < n; ++i) Vl1 += 0.5 * h * (std::abs(V[i - 1]) + std::abs(V[i]));
  double kmax = mt.grid.k.back();
  double zmax = Vl1 / kmax;
  out.lc_tail_bound = c_meas * (4.0 / 3.0) * Vl1 * Vl1 * Vl1 * std::exp(2.0 * zmax) / kmax;
  {
    KahanSum es;
    for (std::size_t idx = 0; idx < nk; ++idx) {
      const ModeEntry& e = mt.entries[idx];
      double k = mt.grid.k[idx];
      double amp = 1.0 / std::sqrt(2.0 * e.mp.k0);
      es.add(mt.grid.w[idx] * c_meas * k * k * 2.0 * amp * e.tail_bound);
    }
    out.lc_err_estimate = es.value();
  }

  out.Qc.resize(n);
  out.Qcd.resize(n);
  out.Qf.resize(n);
  out.Qfd.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.Qc[i] = L1[i] + L2[i] + Lc[i];
    out.Qcd[i] = out.TVp[i] + Bd[i] + L2d[i] + Lcd[i];
    out.Qf[i] = out.Qc[i] - out.TV[i];
    out.Qfd[i] = Bd[i] + L2d[i] + Lcd[i];
  }
  double vn = max_abs(V), vpn = max_abs(Vp);
  out.c_delta = vn > 0 ? max_abs(out.Qf) / vn : 0.0;
  out.c_delta_d = vpn > 0 ? max_abs(out.Qfd) / vpn : 0.0;
  return out;
}

// Q_f = Q_c - T[V], Q_f^d = Q_c^d - T[V']; kept as the spec operation even
// though q_c_pair already carries the well-conditioned difference.
struct QfPair {
  std::vector<double> Qf, Qfd;
  double c_delta = 0.0, c_delta_d = 0.0;
};

inline QfPair q_f_pair(const std::vector<double>& V, const std::vector<double>& Vp,
                       const QcPair& qc) {
  QfPair out;
  out.Qf.resize(qc.Qc.size());
  out.Qfd.resize(qc.Qc.size());
  for (std::size_t i = 0; i < qc.Qc.size(); ++i) {
    out.Qf[i] = qc.Qc[i] - qc.TV[i];
    out.Qfd[i] = qc.Qcd[i] - qc.TVp[i];
  }
  double vn = max_abs(V), vpn = max_abs(Vp);
  out.c_delta = vn > 0 ? max_abs(out.Qf) / vn : 0.0;
  out.c_delta_d = vpn > 0 ? max_abs(out.Qfd) / vpn : 0.0;
  if (!std::isfinite(out.c_delta) || !std::isfinite(out.c_delta_d))
    fail(errc::tail_not_converged, "Q_f continuity constant is not finite");
  return out;
}

// Local remainder Q_0, Q_0^d of the Hadamard subtraction.
struct Q0Pair {
  std::vector<double> Q0, Q0d;
};

inline Q0Pair q_0_pair(const Trajectory& tr, const InitialData& init, const Params& p) {
  const std::size_t n = tr.grid.n;
  Q0Pair out;
  out.Q0.resize(n);
  out.Q0d.resize(n);
  const double m2 = p.m * p.m;
  const double sx = p.six_xi_m1();
  const double w0 = init.w0();
  const double pi2_8 = 8.0 * M_PI * M_PI;
  for (std::size_t i = 0; i < n; ++i) {
    double a = tr.a[i], ap = tr.ap[i], X = tr.X[i], Xp = tr.Xp[i];
    double w2 = m2 * a * a + sx * X;  // a^2 (m^2 + (xi - 1/6) R)
    double L = std::log(w0 / a);
    out.Q0[i] = w2 / pi2_8 * L - init.w0sq / (2.0 * pi2_8) + p.alpha1 * m2 * a * a +
                p.alpha2 * 6.0 * X;
    double w2p = 2.0 * m2 * a * ap + sx * Xp;  // d/dtau of w^2
    out.Q0d[i] = w2p / pi2_8 * L - ap / a * w2 / pi2_8 + 2.0 * p.alpha1 * m2 * a * ap +
                 p.alpha2 * 6.0 * Xp;
  }
  return out;
}

struct ExpectationBundle {
  std::vector<double> a2phi2;    // Qs + Qc + Q0 (this exact sum)
  std::vector<double> phi2;      // a2phi2 / a^2
  std::vector<double> d_a2phi2;  // Qsd + Qcd + Q0d
  std::vector<double> Qs, Qc, Q0, Qsd, Qcd, Q0d, Qf, Qfd;
  double tail_estimate = 0.0;  // k-integral tail + truncation, for phi2
};

inline ExpectationBundle assemble(const Trajectory& tr, const std::vector<double>& Qs,
                                  const std::vector<double>& Qsd, const QcPair& qc,
                                  const Q0Pair& q0) {
  const std::size_t n = tr.grid.n;
  ExpectationBundle b;
  b.Qs = Qs;
  b.Qsd = Qsd;
  b.Qc = qc.Qc;
  b.Qcd = qc.Qcd;
  b.Q0 = q0.Q0;
  b.Q0d = q0.Q0d;
  b.Qf = qc.Qf;
  b.Qfd = qc.Qfd;
  b.a2phi2.resize(n);
  b.phi2.resize(n);
  b.d_a2phi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.a2phi2[i] = Qs[i] + qc.Qc[i] + q0.Q0[i];
    b.phi2[i] = b.a2phi2[i] / (tr.a[i] * tr.a[i]);
    b.d_a2phi2[i] = Qsd[i] + qc.Qcd[i] + q0.Q0d[i];
  }
  b.tail_estimate = qc.lc_tail_bound + qc.lc_err_estimate;
  return b;
}

}  // namespace sce
