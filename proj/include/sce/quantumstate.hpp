#pragma once

// State regularity checks, the state-dependent sums Q_s and Q_s^d, the
// initial energy density and the constraint-satisfying state tuner. The
// shipped family is the adiabatic-like Phi = 1/(2 k0), E = k0/2; a bump
// s C k^{-5/2} on [p1, p2] added to sqrt(E - 1/(4 Phi)) tunes the initial
// energy density onto the Friedmann constraint.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sce/errors.hpp"
#include "sce/expectation.hpp"
#include "sce/grid.hpp"
#include "sce/kgrid.hpp"
#include "sce/modes.hpp"
#include "sce/params.hpp"
#include "sce/special_functions.hpp"

namespace sce {

struct StateSpec {
  enum class Family { vacuum, tabulated };
  Family family = Family::vacuum;
  int s = +1;
  // tabulated Phi(k), E(k); ascending k, interpolated log-log
  std::vector<double> tab_k, tab_phi, tab_E;
  // optional bump perturbation
  bool has_bump = false;
  double bump_C = 0.0, bump_p1 = 0.0, bump_p2 = 0.0;

  static double interp_loglog(const std::vector<double>& xs, const std::vector<double>& ys,
                              double x) {
    if (xs.size() < 2) fail(errc::config_error, "state table needs at least two rows");
    std::size_t j = 1;
    while (j + 1 < xs.size() && xs[j] < x) ++j;
    double x0 = std::log(xs[j - 1]), x1 = std::log(xs[j]);
    double y0 = std::log(ys[j - 1]), y1 = std::log(ys[j]);
    double t = (std::log(x) - x0) / (x1 - x0);
    return std::exp(y0 + t * (y1 - y0));
  }

  double phi(double k, double k0) const {
    if (family == Family::vacuum) return 1.0 / (2.0 * k0);
    return interp_loglog(tab_k, tab_phi, k);
  }
  double energy_base(double k, double k0) const {
    if (family == Family::vacuum) return 0.5 * k0;
    return interp_loglog(tab_k, tab_E, k);
  }
  // sqrt(E - 1/(4 Phi)) of the base family; >= 0 or it is no state at all.
  // The vacuum family saturates the bound identically; returning literal
  // zero avoids sqrt(rounding) noise in the k -> infinity tails.
  double rootE_base(double k, double k0) const {
    if (family == Family::vacuum) return 0.0;
    double ph = phi(k, k0);
    double E = energy_base(k, k0);
    double ex = E - 1.0 / (4.0 * ph);
    if (ex <= 0.0) {
      if (ex > -1e-12 * E) return 0.0;  // saturated up to rounding
      fail(errc::energy_below_heisenberg_bound,
           "E(k) < 1/(4 Phi(k)) at k = " + std::to_string(k));
    }
    if (ex < 1e-12 * E) return 0.0;  // saturation within rounding noise
    return std::sqrt(ex);
  }
  double bump_delta(double k) const {
    if (!has_bump || bump_C == 0.0) return 0.0;
    if (k < bump_p1 || k > bump_p2) return 0.0;
    return bump_C * std::pow(k, -2.5);
  }
  // rho'(tau0) = s (rootE_base + bump)
  double rho_prime(double k, double k0) const {
    return static_cast<double>(s) * (rootE_base(k, k0) + bump_delta(k));
  }
  double energy(double k, double k0) const {
    double ph = phi(k, k0);
    double re = rootE_base(k, k0) + bump_delta(k);
    return re * re + 1.0 / (4.0 * ph);
  }
  std::pair<cplx, cplx> initial_values(double k, double k0) const {
    double ph = phi(k, k0);
    double rho = std::sqrt(ph);
    return {cplx(rho, 0.0), cplx(rho_prime(k, k0), 1.0 / (2.0 * rho))};
  }
};

// ---------------------------------------------------------------------------
// regularity
// ---------------------------------------------------------------------------

struct RegularityCheck {
  TailFit fit;
  double max_tail = 0.0;
  bool pass = false;
};

struct RegularityReport {
  RegularityCheck phi2;     // |zeta|^2 - C^H at tau0
  RegularityCheck dphi2;    // d/dtau of the same at tau0
  RegularityCheck energy;   // energy-density integrand at tau0
  bool pass = false;
};

namespace qdetail {

// energy-density mode integrand at tau0 (k^2 measure included), bump excluded.
// For the vacuum family the subtraction is regrouped analytically,
//   val - CH = -w0^4/(4k (k0+k)^2) + u w0^2/(4 k k0 (k0+k)) + N/(16 k (k^2+a^2/l^2)),
// u = (6xi-1)(X0 + a0'^2/a0^2), which avoids the k eps cancellation noise of
// the naive difference at large k. Other families subtract in extended
// precision.
inline double rho_integrand(const StateSpec& spec, const InitialData& init, const Params& p,
                            double k, bool with_bump) {
  double k0 = std::sqrt(k * k + init.w0sq);
  double a0 = init.a0, H0 = init.H0();
  double sx = p.six_xi_m1();
  double m2 = p.m * p.m;
  double a2 = a0 * a0, a4 = a2 * a2;
  double lam = p.lambda_scale;
  double num = a4 * m2 * m2 + 12.0 * p.xi_m_sixth() * m2 * a4 * H0 * H0 +
               a4 * p.xi_m_sixth() * p.xi_m_sixth() * init.two_I00();
  bool bump_active = with_bump && spec.has_bump && spec.bump_C != 0.0 &&
                     k >= spec.bump_p1 && k <= spec.bump_p2;
  if (spec.family == StateSpec::Family::vacuum && !bump_active) {
    double w0sq = init.w0sq;
    double u = sx * (init.X0 + a0 * a0 * H0 * H0);
    double diff = -w0sq * w0sq / (4.0 * k * (k0 + k) * (k0 + k)) +
                  u * w0sq / (4.0 * k * k0 * (k0 + k)) +
                  num / (16.0 * k * (k * k + a2 / (lam * lam)));
    return k * k * diff;
  }
  long double ph = spec.phi(k, k0);
  long double re = spec.rootE_base(k, k0) + (with_bump ? spec.bump_delta(k) : 0.0);
  long double E = re * re + 1.0L / (4.0L * ph);
  long double rr = std::sqrt((double)ph) * static_cast<double>(spec.s) * re;
  long double val = 0.5L * E + 0.5L * (k * k + a2 * m2 - sx * a2 * H0 * H0) * ph +
                    a0 * H0 * sx * 2.0L * rr;
  long double CH = 0.5L * k + (a2 * m2 - a2 * H0 * H0 * sx) / (4.0L * k) -
                   (long double)num / (16.0L * k * (k * k + a2 / (lam * lam)));
  return k * k * static_cast<double>(val - CH);
}

}  // namespace qdetail

// Evaluates the three integrands at tau0 on the k-grid and fits tail power
// laws. The bump is compactly supported and cannot change the tail class.
inline RegularityReport check_regularity(const StateSpec& spec, const InitialData& init,
                                         const Params& p, const KGrid& kg) {
  RegularityReport rep;
  const double vp0 = init.vprime0(p);
  std::vector<double> i1(kg.k.size()), i2(kg.k.size()), i3(kg.k.size());
  for (std::size_t i = 0; i < kg.k.size(); ++i) {
    double k = kg.k[i];
    double k0 = std::sqrt(k * k + init.w0sq);
    double ph = spec.phi(k, k0);
    i1[i] = k * k * (ph - 1.0 / (2.0 * k0));
    double ddt = 2.0 * std::sqrt(ph) * static_cast<double>(spec.s) * spec.rootE_base(k, k0);
    i2[i] = k * k * (ddt + vp0 / (4.0 * k0 * k0 * k0));
    i3[i] = qdetail::rho_integrand(spec, init, p, k, false);
  }
  double kmax = kg.k.back();
  double floor1 = 1e-13 * (init.w0sq + 1.0);
  auto judge = [&](const std::vector<double>& v, RegularityCheck* c) {
    c->fit = fit_power_tail(kg, v, floor1);
    std::size_t n = v.size();
    for (std::size_t i = n - n / 8; i < n; ++i) c->max_tail = std::max(c->max_tail, std::abs(v[i]));
    c->pass = (c->fit.exponent >= 1.15) || (c->max_tail <= floor1 * kmax);
  };
  judge(i1, &rep.phi2);
  judge(i2, &rep.dphi2);
  judge(i3, &rep.energy);
  rep.pass = rep.phi2.pass && rep.dphi2.pass && rep.energy.pass;
  return rep;
}

// ---------------------------------------------------------------------------
// energy density at tau0
// ---------------------------------------------------------------------------

namespace qdetail {

// composite Gauss-Legendre in log k with a fitted power-law tail correction
inline double integrate_logk(const std::function<double(double)>& f, double klo, double khi,
                             int panels_per_decade = 8) {
  double decades = std::log10(khi / klo);
  int panels = std::max(8, static_cast<int>(std::ceil(decades * panels_per_decade)));
  double dl = std::log(khi / klo) / panels;
  double total = 0.0;
  for (int j = 0; j < panels; ++j) {
    double l0 = std::log(klo) + j * dl;
    total += detail::gl16([&](double l) { double k = std::exp(l); return f(k) * k; }, l0, l0 + dl);
  }
  return total;
}

}  // namespace qdetail

// <:rho:>(tau0): mode integral over the state plus the local curvature and
// renormalization terms. G_0^0 = -3 H^2 on flat FLRW.
inline double energy_density_initial(const StateSpec& spec, const InitialData& init,
                                     const Params& p) {
  const double w0 = init.w0();
  const double kscale = std::max({w0, init.a0 * p.m, init.a0 / p.lambda_scale});
  const double klo = 1e-4 * w0, khi = 3e3 * kscale;
  auto f = [&](double k) { return qdetail::rho_integrand(spec, init, p, k, false); };
  double Ik = qdetail::integrate_logk(f, klo, khi);
  // closure below klo (integrand ~ k^2 there) and fitted tail beyond khi
  Ik += f(klo) * klo / 3.0;
  {
    KGrid tailg = KGrid::logspaced(khi / 4.0, khi, 24);
    std::vector<double> tv(tailg.k.size());
    for (std::size_t i = 0; i < tailg.k.size(); ++i) tv[i] = f(tailg.k[i]);
    TailFit fit = fit_power_tail(tailg, tv, 1e-290);
    if (!fit.integrable)
      fail(errc::tail_not_converged,
           "energy-density integrand tail is not integrable (state not sufficiently regular?)");
    double sign = tv.back() >= 0.0 ? 1.0 : -1.0;
    Ik += sign * fit.tail_integral;
  }
  // exact bump correction on [p1, p2]
  if (spec.has_bump && spec.bump_C != 0.0) {
    auto fb = [&](double k) {
      double k0 = std::sqrt(k * k + init.w0sq);
      double ph = spec.phi(k, k0);
      double re = spec.rootE_base(k, k0);
      double d = spec.bump_delta(k);
      double dE = 2.0 * re * d + d * d;                               // |zeta'|^2 shift
      double dRe = std::sqrt(ph) * static_cast<double>(spec.s) * d;   // Re(conj zeta zeta') shift
      return k * k * (0.5 * dE + init.a0 * init.H0() * p.six_xi_m1() * 2.0 * dRe);
    };
    Ik += qdetail::integrate_logk(fb, spec.bump_p1, spec.bump_p2, 16);
  }
  const double a0 = init.a0, H0 = init.H0();
  const double a4 = a0 * a0 * a0 * a0;
  double rho = Ik / (2.0 * M_PI * M_PI * a4);
  double R0 = init.R0;
  double xm = p.xi_m_sixth();
  rho += -std::pow(H0, 4) / (960.0 * M_PI * M_PI) +
         xm * xm * 3.0 * H0 * H0 * R0 / (8.0 * M_PI * M_PI) + p.betaT1 * std::pow(p.m, 4) -
         p.betaT2 * p.m * p.m * (-3.0 * H0 * H0) + p.betaT34 * 0.5 * init.two_I00();
  return rho;
}

// ---------------------------------------------------------------------------
// constraint tuner
// ---------------------------------------------------------------------------

struct TuneReport {
  double rho_base = 0.0;
  double rho_target = 0.0;
  double rho_final = 0.0;
  double residual = 0.0;   // |H0^2 - (8 pi G/3) rho - Lambda/3|
  double scale = 0.0;
  double C = 0.0, p1 = 0.0, p2 = 0.0;
  bool already_compatible = false;
};

// Selects a bump (C, p1, p2) with p1 = 10 w0 so that the Friedmann constraint
// holds at tau0 to relative tolerance tol. The quadratic-in-C bump response
// seeds a bracketed bisection on the exact quadrature.
inline StateSpec tune_state_to_constraint(const StateSpec& spec0, const InitialData& init,
                                          const Params& p, double tol = 1e-8,
                                          TuneReport* report = nullptr) {
  if (p.xi == 1.0 / 6.0) fail(errc::config_error, "tuner requires xi != 1/6");
  const double H0 = init.H0();
  const double target = (3.0 * H0 * H0 - p.Lambda) / (8.0 * M_PI * p.G);
  const double rho0 = energy_density_initial(spec0, init, p);
  const double scale =
      std::max({H0 * H0, std::abs(8.0 * M_PI * p.G / 3.0 * rho0), 1e-30});
  TuneReport rep;
  rep.rho_base = rho0;
  rep.rho_target = target;
  rep.scale = scale;
  auto residual_of = [&](double rho) {
    return std::abs(H0 * H0 - 8.0 * M_PI * p.G / 3.0 * rho - p.Lambda / 3.0);
  };
  StateSpec tuned = spec0;
  tuned.has_bump = true;
  tuned.bump_C = 0.0;
  tuned.bump_p1 = 10.0 * init.w0();
  tuned.bump_p2 = 20.0 * init.w0();
  if (residual_of(rho0) <= tol * scale) {
    rep.already_compatible = true;
    rep.rho_final = rho0;
    rep.residual = residual_of(rho0);
    rep.C = 0.0;
    rep.p1 = tuned.bump_p1;
    rep.p2 = tuned.bump_p2;
    if (report) *report = rep;
    return tuned;
  }

  const double p1 = 10.0 * init.w0();
  const double drho_needed = target - rho0;
  const double a4 = std::pow(init.a0, 4);
  const double C_max = 1e12;

  for (int doubling = 1; doubling <= 16; ++doubling) {
    double p2 = p1 * std::pow(2.0, doubling);
    // quadratic response coefficients: drho = alpha C^2 + beta C
    double alpha = (1.0 / (p1 * p1) - 1.0 / (p2 * p2)) / (8.0 * M_PI * M_PI * a4);
    auto beta_int = [&](double k) {
      double k0 = std::sqrt(k * k + init.w0sq);
      double ph = spec0.phi(k, k0);
      double re = spec0.rootE_base(k, k0);
      return k * k * std::pow(k, -2.5) *
             (re + 2.0 * init.a0 * H0 * p.six_xi_m1() * static_cast<double>(spec0.s) *
                       std::sqrt(ph));
    };
    double beta = qdetail::integrate_logk(beta_int, p1, p2, 16) / (2.0 * M_PI * M_PI * a4);
    double disc = beta * beta + 4.0 * alpha * drho_needed;
    if (disc < 0.0) continue;  // enlarge p2: the log(p2/p1) term grows the range
    double r1 = (-beta + std::sqrt(disc)) / (2.0 * alpha);
    double r2 = (-beta - std::sqrt(disc)) / (2.0 * alpha);
    double seed = std::abs(r1) <= std::abs(r2) ? r1 : r2;
    if (std::abs(seed) > C_max) continue;

    auto f_of_C = [&](double C) {
      StateSpec s = spec0;
      s.has_bump = true;
      s.bump_C = C;
      s.bump_p1 = p1;
      s.bump_p2 = p2;
      return energy_density_initial(s, init, p) - target;
    };
    // bracket around the seed on its monotone branch
    double vertex = -beta / (2.0 * alpha);
    double lo, hi;
    if (seed >= vertex) {
      lo = vertex;
      hi = std::max(seed * 2.0 - vertex, vertex + 1e-6 * (1.0 + std::abs(seed)));
      while (f_of_C(hi) < 0.0 && hi < C_max) hi = vertex + 2.0 * (hi - vertex);
      if (f_of_C(lo) > 0.0) continue;
    } else {
      hi = vertex;
      lo = std::min(seed * 2.0 - vertex, vertex - 1e-6 * (1.0 + std::abs(seed)));
      while (f_of_C(lo) < 0.0 && lo > -C_max) lo = vertex - 2.0 * (vertex - lo);
      if (f_of_C(hi) > 0.0) continue;
    }
    double flo = f_of_C(lo);
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = f_of_C(mid);
      if ((fm <= 0.0) == (flo <= 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
      double rho_mid = fm + target;
      if (residual_of(rho_mid) <= tol * scale) {
        tuned.bump_C = mid;
        tuned.bump_p1 = p1;
        tuned.bump_p2 = p2;
        rep.C = mid;
        rep.p1 = p1;
        rep.p2 = p2;
        rep.rho_final = rho_mid;
        rep.residual = residual_of(rho_mid);
        if (report) *report = rep;
        return tuned;
      }
    }
  }
  fail(errc::constraint_unreachable,
       "no bump within the p2/C bracket reaches the Friedmann constraint; enlarge C_max "
       "or adjust Lambda");
}

// ---------------------------------------------------------------------------
// Q_s and Q_s^d
// ---------------------------------------------------------------------------

struct QsPair {
  std::vector<double> Qs, Qsd;
  double err_estimate = 0.0;
  double max_bogoliubov_dev = 0.0;  // max | |A|^2 - |B|^2 - 1 |
};

namespace qdetail {

// Bump-induced change of the Q_s integrands in the chi^0 approximation.
// With u = zeta0' - i k0 zeta0 and v = zeta0' + i k0 zeta0 (tau0-referenced
// phases pulled out), |B|^2 = |u|^2/(2 k0)... the per-k integrands reduce to
//   Qs_k  = (|u|^2 + Re(ab e^{i theta})) / (2 k0^2),   ab = -v conj(u),
//   Qsd_k = -Im(ab e^{i theta}) / k0,                  theta = 2 k0 (tau-tau0),
// and the bump shifts u -> u + s Delta, v -> v + s Delta with Delta = C k^{-5/2}.
// Only the difference to the no-bump state is accumulated here; the bounded
// first-order chi - chi^0 correction goes into the error estimate.
inline void band_contribution(const StateSpec& spec, const InitialData& init, double Vl1,
                              const TimeGrid& g, std::vector<double>* Qs,
                              std::vector<double>* Qsd, double* err) {
  if (!spec.has_bump || spec.bump_C == 0.0) return;
  const double w0sq = init.w0sq;
  const double kappa1 = std::sqrt(spec.bump_p1 * spec.bump_p1 + w0sq);
  const double kappa2 = std::sqrt(spec.bump_p2 * spec.bump_p2 + w0sq);
  const std::size_t max_panels = 512;
  double panel_w = 0.5 * M_PI / std::max(g.length(), 1e-12);
  std::size_t panels =
      std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil((kappa2 - kappa1) / panel_w)));
  double kappa_split = kappa2;
  if (panels > max_panels) {
    panels = max_panels;
    kappa_split = kappa1 + panel_w * static_cast<double>(max_panels);
  }

  const auto& xs = detail::gl16_nodes();
  const auto& ws = detail::gl16_weights();
  const double c_meas = 1.0 / (2.0 * M_PI * M_PI);
  struct Node {
    double cs, csd;  // coefficients of the Qs / Qsd contributions
    double du2;      // |u_with|^2 - |u_base|^2
    cplx dab;        // ab_with - ab_base
    cplx rot, cur;   // e^{2 i k0 h}, running phase
  };
  std::vector<Node> nodes;
  nodes.reserve(panels * 16);
  double pw = (kappa_split - kappa1) / static_cast<double>(panels);
  for (std::size_t j = 0; j < panels; ++j) {
    double mid = kappa1 + (static_cast<double>(j) + 0.5) * pw;
    for (std::size_t q = 0; q < 16; ++q) {
      double k0 = mid + 0.5 * pw * xs[q];
      double k2 = k0 * k0 - w0sq;
      if (k2 <= 0.0) continue;
      double k = std::sqrt(k2);
      if (k < spec.bump_p1 || k > spec.bump_p2) continue;
      double rho = std::sqrt(spec.phi(k, k0));
      double sre = static_cast<double>(spec.s) * spec.rootE_base(k, k0);
      double sD = static_cast<double>(spec.s) * spec.bump_delta(k);
      cplx u_b(sre, 1.0 / (2.0 * rho) - k0 * rho);
      cplx v_b(sre, 1.0 / (2.0 * rho) + k0 * rho);
      cplx u_w = u_b + sD, v_w = v_b + sD;
      Node nd;
      nd.du2 = std::norm(u_w) - std::norm(u_b);
      nd.dab = -(v_w * std::conj(u_w)) + (v_b * std::conj(u_b));
      double base = ws[q] * 0.5 * pw * c_meas * k * k0;  // int ... k^2 dk in the k0 variable
      nd.cs = base / (2.0 * k0 * k0);
      nd.csd = base / k0;
      nd.rot = std::exp(cplx(0.0, 2.0 * k0 * g.h()));
      nd.cur = cplx(1.0, 0.0);
      nodes.push_back(nd);
    }
  }

  double band_scale = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    KahanSum s, sd;
    for (auto& nd : nodes) {
      cplx abe = nd.dab * nd.cur;
      s.add(nd.cs * (nd.du2 + abe.real()));
      sd.add(nd.csd * (-abe.imag()));
      nd.cur *= nd.rot;
    }
    (*Qs)[i] += s.value();
    (*Qsd)[i] += sd.value();
    band_scale = std::max({band_scale, std::abs(s.value()), std::abs(sd.value())});
  }

  // chi - chi^0 correction: relative O(||V||_1 / k0) over the band
  *err += 4.0 * Vl1 / kappa1 * band_scale;

  // asymptotic remainder beyond kappa_split (vacuum-form terms, k ~ k0)
  if (kappa_split < kappa2 - 1e-12 * kappa2) {
    double C = spec.bump_C;
    double sC = static_cast<double>(spec.s) * C;
    double A = kappa_split, Bk = kappa2;
    for (std::size_t i = 1; i < g.n; ++i) {
      double c = 2.0 * (g.tau(i) - g.tau0);
      double t1 = 0.5 * C * C *
                  (0.5 * (1.0 / (A * A) - 1.0 / (Bk * Bk)) - osc_cos_over_k3(c, A, Bk));
      double t2 = 0.5 * std::sqrt(2.0) * sC * osc_sin_over_k2(c, A, Bk);
      double d1 = std::sqrt(2.0) * sC * osc_cos_over_k(c, A, Bk);
      (*Qs)[i] += c_meas * (t1 + t2);
      (*Qsd)[i] += c_meas * d1;
    }
    *err += c_meas * (0.5 * C * C / (3.0 * A * A * A) +
                      w0sq / (A * A) * (std::abs(sC) / std::sqrt(A) + C * C / (A * A)));
  }
}

}  // namespace qdetail

// Q_s[V] and Q_s^d[V] given the Bogoliubov data of the state. For the vacuum
// family only the bump band and the cosine counterterm contribute. vprime0
// multiplies the counterterm; a state with vprime0 != 0 and no compensating
// B(k) tail is not sufficiently regular and is rejected.
inline QsPair q_s_pair(const StateSpec& spec, const InitialData& init, const Params& p,
                       const ModeTable& mt, const CosineKernel& ck, const TimeGrid& g,
                       double Vl1 = 0.0) {
  QsPair out;
  out.Qs.assign(g.n, 0.0);
  out.Qsd.assign(g.n, 0.0);
  const double vp0 = init.vprime0(p);

  if (spec.family == StateSpec::Family::tabulated) {
    const std::size_t nk = mt.grid.k.size();
    std::vector<std::vector<double>> qk(nk), qkd(nk);
    std::vector<double> dev(nk, 0.0);
    parallel_for(nk, [&](std::size_t idx) {
      const ModeEntry& e = mt.entries[idx];
      double k = mt.grid.k[idx];
      auto [z0, z0p] = spec.initial_values(k, e.mp.k0);
      auto [c0, c0p] = conformal_vacuum_initial(e.mp, g.tau0);
      BogoliubovPair ab = bogoliubov_coefficients(z0, z0p, c0, c0p);
      dev[idx] = std::abs(std::norm(ab.A) - std::norm(ab.B) - 1.0);
      std::vector<double> q(g.n), qd(g.n);
      for (std::size_t i = 0; i < g.n; ++i) {
        cplx chi = e.full.chi[i], chip = e.full.chip[i];
        cplx ABb = ab.A * std::conj(ab.B);
        q[i] = 2.0 * std::norm(ab.B) * std::norm(chi) + 2.0 * (ABb * chi * chi).real();
        qd[i] = 2.0 * std::norm(ab.B) * 2.0 * (std::conj(chi) * chip).real() +
                4.0 * (ABb * chi * chip).real();
      }
      qk[idx] = std::move(q);
      qkd[idx] = std::move(qd);
    });
    const double c_meas = 1.0 / (2.0 * M_PI * M_PI);
    std::vector<double> tails(nk);
    for (std::size_t i = 0; i < g.n; ++i) {
      KahanSum s, sd;
      for (std::size_t idx = 0; idx < nk; ++idx) {
        double k = mt.grid.k[idx];
        double w = mt.grid.w[idx] * c_meas * k * k;
        s.add(w * qk[idx][i]);
        sd.add(w * qkd[idx][i]);
      }
      out.Qs[i] = s.value();
      out.Qsd[i] = sd.value();
    }
    for (std::size_t idx = 0; idx < nk; ++idx) {
      out.max_bogoliubov_dev = std::max(out.max_bogoliubov_dev, dev[idx]);
      tails[idx] = c_meas * mt.grid.k[idx] * mt.grid.k[idx] * qk[idx][g.n - 1];
    }
    TailFit fit = fit_power_tail(mt.grid, tails, 1e-280);
    if (!fit.integrable)
      fail(errc::tail_not_converged, "Q_s integrand tail is not integrable on the k-grid");
    out.err_estimate += std::abs(fit.tail_integral);
  }

  // bump band (analytic chi^0 forms)
  double band_err = 0.0;
  qdetail::band_contribution(spec, init, Vl1, g, &out.Qs, &out.Qsd, &band_err);
  out.err_estimate += band_err;

  // cosine counterterm (V'(tau0)/(8 pi^2)) c1(tau - tau0)
  if (vp0 != 0.0) {
    if (spec.family == StateSpec::Family::vacuum)
      fail(errc::state_not_regular,
           "the adiabatic-like family is not sufficiently regular when V'(tau0) != 0; "
           "supply a tabulated state with the compensating B(k) tail or initial data with "
           "V'(tau0) = 0");
    for (std::size_t i = 1; i < g.n; ++i)
      out.Qsd[i] += vp0 * inv_8pi2 * c1_pointwise(ck, g.tau(i) - g.tau0);
  }
  return out;
}

}  // namespace sce
