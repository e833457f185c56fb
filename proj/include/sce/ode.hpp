#pragma once

// Second order linear solves f'' + (k^2 + W) f = h written as the retarded
// Volterra equation
//   f(tau) = hom(tau) + int_{tau0}^tau sin(k (tau-eta))/k (h - W f)(eta) deta
// and discretized with trapezoidal product weights. The kernel vanishes on
// the diagonal, so the marching scheme is explicit.

#include <cmath>
#include <complex>
#include <vector>

#include "sce/errors.hpp"
#include "sce/grid.hpp"

namespace sce {

template <class T>
struct SecondOrderSolution {
  std::vector<T> f;
  std::vector<T> fp;
};

namespace detail {

inline double sinc_kernel(double k, double dt) {
  if (k == 0.0) return dt;
  return std::sin(k * dt) / k;
}

template <class T>
void gronwall_check(const TimeGrid& g, double k, const std::vector<double>& W,
                    const std::vector<double>& h, T f0, T f0p, const std::vector<T>& f) {
  const double habs = g.h();
  const double Wmax = max_abs(W);
  const double hmax = max_abs(h);
  double cum_h = 0.0, cum_W = 0.0;
  const double slack = 1e-9;
  for (std::size_t i = 0; i < g.n; ++i) {
    double dt = g.tau(i) - g.tau0;
    double bound = (std::abs(f0) + dt * std::abs(f0p) + dt * dt * hmax) *
                   std::exp(dt * dt * Wmax);
    if (i > 0) {
      cum_h += 0.5 * habs * (std::abs(h[i - 1]) + std::abs(h[i]));
      cum_W += 0.5 * habs * (std::abs(W[i - 1]) + std::abs(W[i]));
    }
    if (k > 0.0) {
      double bk = (std::abs(f0) + std::abs(f0p) / k + cum_h / k) * std::exp(cum_W / k);
      bound = std::min(bound, bk);
    }
    if (std::abs(f[i]) > bound * (1.0 + slack) + 1e-300)
      fail(errc::gronwall_violation,
           "solution exceeds its a-priori bound at tau index " + std::to_string(i));
  }
}

}  // namespace detail

// Solves f'' + (k^2 + W) f = h_src with initial data (f0, f0p) at tau0.
// W and h_src are sampled on the grid; k >= 0. Checks the a-priori bounds
// after the march and throws GronwallViolation on failure (an integrator
// diagnostic, not a physics error).
template <class T>
SecondOrderSolution<T> solve_linear_second_order(const TimeGrid& g, double k,
                                                 const std::vector<double>& W,
                                                 const std::vector<double>& h_src, T f0, T f0p,
                                                 bool check_bounds = true) {
  const std::size_t n = g.n;
  if (W.size() != n || h_src.size() != n)
    fail(errc::config_error, "solve_linear_second_order: sample size mismatch");
  const double dt = g.h();
  std::vector<T> f(n), rhs(n);  // rhs = h - W f
  SecondOrderSolution<T> out;

  for (std::size_t i = 0; i < n; ++i) {
    double t = g.tau(i) - g.tau0;
    T hom;
    if (k == 0.0)
      hom = f0 + f0p * t;
    else
      hom = f0 * std::cos(k * t) + f0p * (std::sin(k * t) / k);
    // trapezoid over [tau0, tau_i]; the j = i term has zero kernel weight
    T acc{};
    for (std::size_t j = 0; j < i; ++j) {
      double w = (j == 0) ? 0.5 : 1.0;
      acc += w * detail::sinc_kernel(k, t - (g.tau(j) - g.tau0)) * rhs[j];
    }
    f[i] = hom + dt * acc;
    rhs[i] = h_src[i] - W[i] * f[i];
  }

  // f' = hom' + int cos(k (tau-eta)) rhs(eta) deta
  std::vector<T> fp(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = g.tau(i) - g.tau0;
    T homp;
    if (k == 0.0)
      homp = f0p;
    else
      homp = -f0 * k * std::sin(k * t) + f0p * std::cos(k * t);
    T acc{};
    for (std::size_t j = 0; j <= i; ++j) {
      double w = (j == 0 || j == i) ? 0.5 : 1.0;
      acc += w * std::cos(k * (t - (g.tau(j) - g.tau0))) * rhs[j];
    }
    if (i == 0) acc = T{};
    fp[i] = homp + dt * acc;
  }

  if (check_bounds) detail::gronwall_check(g, k, W, h_src, f0, f0p, f);
  out.f = std::move(f);
  out.fp = std::move(fp);
  return out;
}

}  // namespace sce
