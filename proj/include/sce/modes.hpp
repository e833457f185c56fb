#pragma once

// Temporal mode functions chi_k of the conformal vacuum and the physical
// state's modes zeta_k = A chi + B conj(chi). The direct integrator is an
// exponential-midpoint stepper whose step matrices are unimodular, so the
// Wronskian chi' conj(chi) - chi conj(chi') = i is conserved to rounding;
// the Dyson route keeps the recursive terms and their analytic tail bound.

#include <cmath>
#include <complex>
#include <vector>

#include "sce/errors.hpp"
#include "sce/grid.hpp"
#include "sce/params.hpp"

namespace sce {

struct ModeParams {
  double k = 0.0;   // comoving wavenumber
  double k0 = 0.0;  // initial frequency sqrt(k^2 + w0^2)

  ModeParams() = default;
  ModeParams(double kk, double w0sq) : k(kk), k0(std::sqrt(kk * kk + w0sq)) {
    if (!(k0 > 0.0)) fail(errc::non_positive_initial_frequency, "k0 must be positive");
  }
};

struct ModeSolution {
  std::vector<cplx> chi;
  std::vector<cplx> chip;
};

inline cplx wronskian(const cplx& chi, const cplx& chip) {
  return chip * std::conj(chi) - chi * std::conj(chip);
}

// chi(tau0) = e^{i k0 tau0}/sqrt(2 k0), chi'(tau0) = i k0 e^{i k0 tau0}/sqrt(2 k0).
inline std::pair<cplx, cplx> conformal_vacuum_initial(const ModeParams& mp, double tau0) {
  cplx phase = std::exp(cplx(0.0, mp.k0 * tau0));
  cplx chi0 = phase / std::sqrt(2.0 * mp.k0);
  return {chi0, cplx(0.0, mp.k0) * chi0};
}

// ---------------------------------------------------------------------------
// direct integration
// ---------------------------------------------------------------------------

// chi'' + (k0^2 + V) chi = 0, exponential midpoint. Each step applies
//   [cos(w h), sin(w h)/w; -w sin(w h), cos(w h)]     (w^2 > 0)
// or its hyperbolic counterpart; det = 1 in either branch.
inline ModeSolution solve_mode_ode(const ModeParams& mp, const std::vector<double>& V,
                                   const TimeGrid& g) {
  if (V.size() != g.n) fail(errc::config_error, "solve_mode_ode: V size mismatch");
  ModeSolution s;
  s.chi.resize(g.n);
  s.chip.resize(g.n);
  auto [c0, c0p] = conformal_vacuum_initial(mp, g.tau0);
  s.chi[0] = c0;
  s.chip[0] = c0p;
  const double h = g.h();
  for (std::size_t i = 0; i + 1 < g.n; ++i) {
    double w2 = mp.k0 * mp.k0 + 0.5 * (V[i] + V[i + 1]);
    double m00, m01, m10;
    if (w2 > 0.0) {
      double w = std::sqrt(w2);
      m00 = std::cos(w * h);
      m01 = std::sin(w * h) / w;
      m10 = -w * std::sin(w * h);
    } else if (w2 < 0.0) {
      double nu = std::sqrt(-w2);
      m00 = std::cosh(nu * h);
      m01 = std::sinh(nu * h) / nu;
      m10 = nu * std::sinh(nu * h);
    } else {
      m00 = 1.0;
      m01 = h;
      m10 = 0.0;
    }
    s.chi[i + 1] = m00 * s.chi[i] + m01 * s.chip[i];
    s.chip[i + 1] = m10 * s.chi[i] + m00 * s.chip[i];
  }

  // |chi| <= |chi(tau0)| exp(||V||_1 / k0) pointwise
  double cum = 0.0;
  double c0abs = std::abs(c0);
  for (std::size_t i = 0; i < g.n; ++i) {
    if (i > 0) cum += 0.5 * h * (std::abs(V[i - 1]) + std::abs(V[i]));
    double bound = c0abs * std::exp(cum / mp.k0);
    if (std::abs(s.chi[i]) > bound * (1.0 + 1e-9))
      fail(errc::gronwall_violation, "mode solution exceeds its a-priori bound");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Dyson series
// ---------------------------------------------------------------------------

struct DysonModes {
  std::vector<std::vector<cplx>> term;    // term[n][i], n = 0..N
  std::vector<std::vector<cplx>> term_p;  // derivatives
  std::vector<double> z;                  // z_i = (1/k0) int_{tau0}^{tau_i} |V|
  double tail_bound = 0.0;                // sup_tau sum_{n > N} of the analytic bound
  ModeSolution sum() const {
    ModeSolution s;
    std::size_t n = term.front().size();
    s.chi.assign(n, cplx{});
    s.chip.assign(n, cplx{});
    for (std::size_t o = 0; o < term.size(); ++o)
      for (std::size_t i = 0; i < n; ++i) {
        s.chi[i] += term[o][i];
        s.chip[i] += term_p[o][i];
      }
    return s;
  }
};

// Recursive terms chi^n = -int sin(k0(tau-eta))/k0 V chi^{n-1}; each term is
// checked against the analytic bound |chi^n| <= z^n / (sqrt(2 k0) n!).
inline DysonModes dyson_terms(const ModeParams& mp, const std::vector<double>& V,
                              const TimeGrid& g, std::size_t N) {
  if (V.size() != g.n) fail(errc::config_error, "dyson_terms: V size mismatch");
  if (std::abs(V[0]) > 1e-12 * (max_abs(V) + 1e-300))
    fail(errc::config_error, "dyson_terms requires V(tau0) = 0");
  const double h = g.h();
  const double k0 = mp.k0;
  DysonModes d;
  d.term.resize(N + 1);
  d.term_p.resize(N + 1);
  d.z.assign(g.n, 0.0);
  for (std::size_t i = 1; i < g.n; ++i)
    d.z[i] = d.z[i - 1] + 0.5 * h * (std::abs(V[i - 1]) + std::abs(V[i])) / k0;

  d.term[0].resize(g.n);
  d.term_p[0].resize(g.n);
  double amp = 1.0 / std::sqrt(2.0 * k0);
  for (std::size_t i = 0; i < g.n; ++i) {
    cplx ph = std::exp(cplx(0.0, k0 * g.tau(i)));
    d.term[0][i] = amp * ph;
    d.term_p[0][i] = cplx(0.0, k0) * amp * ph;
  }

  std::vector<cplx> src(g.n);
  double nfact = 1.0;
  for (std::size_t n = 1; n <= N; ++n) {
    nfact *= static_cast<double>(n);
    for (std::size_t i = 0; i < g.n; ++i) src[i] = V[i] * d.term[n - 1][i];
    auto& cur = d.term[n];
    auto& curp = d.term_p[n];
    cur.assign(g.n, cplx{});
    curp.assign(g.n, cplx{});
    for (std::size_t i = 1; i < g.n; ++i) {
      cplx acc{}, accp{};
      double ti = g.tau(i);
      for (std::size_t j = 0; j <= i; ++j) {
        double w = (j == 0 || j == i) ? 0.5 : 1.0;
        double dt = ti - g.tau(j);
        acc += w * (std::sin(k0 * dt) / k0) * src[j];
        accp += w * std::cos(k0 * dt) * src[j];
      }
      cur[i] = -h * acc;
      curp[i] = -h * accp;
    }
    for (std::size_t i = 0; i < g.n; ++i) {
      double bound = std::pow(d.z[i], static_cast<double>(n)) / (std::sqrt(2.0 * k0) * nfact);
      if (std::abs(cur[i]) > bound * (1.0 + 1e-6) + 1e-14 * amp)
        fail(errc::gronwall_violation, "Dyson term exceeds its analytic bound");
    }
  }

  // tail: sum_{n > N} z^n/n! <= z^{N+1}/(N+1)! e^z
  double zmax = d.z.back();
  double tail = std::pow(zmax, static_cast<double>(N + 1)) * std::exp(zmax);
  for (std::size_t j = 1; j <= N + 1; ++j) tail /= static_cast<double>(j);
  d.tail_bound = tail / std::sqrt(2.0 * k0);
  return d;
}

// Truncated series with its analytic tail bound; fails if the bound cannot be
// pushed below tol at the requested order.
inline std::pair<ModeSolution, double> solve_mode_dyson(const ModeParams& mp,
                                                        const std::vector<double>& V,
                                                        const TimeGrid& g, std::size_t N,
                                                        double tol = 0.0) {
  DysonModes d = dyson_terms(mp, V, g, N);
  if (tol > 0.0 && d.tail_bound > tol)
    fail(errc::truncation_bound_too_large,
         "Dyson tail bound " + std::to_string(d.tail_bound) + " exceeds tolerance; raise N "
         "or shrink the interval");
  return {d.sum(), d.tail_bound};
}

// Order needed so that the analytic tail bound drops below tol.
inline std::size_t dyson_order_for(double zmax, double k0, double tol, std::size_t nmax = 40) {
  double amp = 1.0 / std::sqrt(2.0 * k0);
  double term = amp * std::exp(zmax);
  for (std::size_t N = 0; N <= nmax; ++N) {
    term *= zmax / static_cast<double>(N + 1);
    if (term < tol) return std::max<std::size_t>(N, 1);
  }
  fail(errc::dyson_order_insufficient, "Dyson series converges too slowly at this k");
}

// ---------------------------------------------------------------------------
// state initial values and Bogoliubov coefficients
// ---------------------------------------------------------------------------

// zeta(tau0) = sqrt(Phi), zeta'(tau0) = s sqrt(E - 1/(4 Phi)) + i/(2 sqrt(Phi)),
// the theta(tau0) = 0 phase convention.
inline std::pair<cplx, cplx> state_initial_values(double Phi, double E, int s) {
  if (!(Phi > 0.0)) fail(errc::config_error, "Phi must be positive");
  double excess = E - 1.0 / (4.0 * Phi);
  if (excess < 0.0) {
    if (excess < -1e-12 * E)
      fail(errc::energy_below_heisenberg_bound,
           "E(k) < 1/(4 Phi(k)): no normalizable initial data");
    excess = 0.0;  // saturated bound up to rounding
  }
  double rho = std::sqrt(Phi);
  double rhop = static_cast<double>(s) * std::sqrt(excess);
  return {cplx(rho, 0.0), cplx(rhop, 1.0 / (2.0 * rho))};
}

struct BogoliubovPair {
  cplx A;
  cplx B;
};

// zeta = A chi + B conj(chi); Wronskian projections. |A|^2 - |B|^2 = 1 is
// asserted (tolerance 1e-10).
inline BogoliubovPair bogoliubov_coefficients(cplx zeta0, cplx zeta0p, cplx chi0, cplx chi0p) {
  BogoliubovPair p;
  p.A = cplx(0.0, -1.0) * (zeta0p * std::conj(chi0) - zeta0 * std::conj(chi0p));
  p.B = cplx(0.0, 1.0) * (zeta0p * chi0 - zeta0 * chi0p);
  double dev = std::norm(p.A) - std::norm(p.B) - 1.0;
  if (std::abs(dev) > 1e-10)
    fail(errc::normalization_violation,
         "|A|^2 - |B|^2 deviates from 1 by " + std::to_string(dev));
  return p;
}

}  // namespace sce
