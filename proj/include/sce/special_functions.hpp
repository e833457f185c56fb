#pragma once

// Sine/cosine integrals, the exponential integral and the auxiliary kernel
// functions f1, f2, f3 used by the mode-sum convolutions. Si/Ci follow the
// usual scheme: power series near the origin, complex continued fraction for
// E1(i x) elsewhere.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include "sce/errors.hpp"
#include "sce/grid.hpp"

namespace sce {

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

namespace detail {

// 16-point Gauss-Legendre rule on [-1, 1].
inline const std::array<double, 16>& gl16_nodes() {
  static const std::array<double, 16> x = {
      -0.9894009349916499325961542, -0.9445750230732325760779884,
      -0.8656312023878317438804679, -0.7554044083550030338951012,
      -0.6178762444026437484466718, -0.4580167776572273863424194,
      -0.2816035507792589132304605, -0.0950125098376374401853193,
      0.0950125098376374401853193,  0.2816035507792589132304605,
      0.4580167776572273863424194,  0.6178762444026437484466718,
      0.7554044083550030338951012,  0.8656312023878317438804679,
      0.9445750230732325760779884,  0.9894009349916499325961542};
  return x;
}

inline const std::array<double, 16>& gl16_weights() {
  static const std::array<double, 16> w = {
      0.0271524594117540948517806, 0.0622535239386478928628438,
      0.0951585116824927848099251, 0.1246289712555338720524763,
      0.1495959888165767320815017, 0.1691565193950025381893121,
      0.1826034150449235888667637, 0.1894506104550684962853967,
      0.1894506104550684962853967, 0.1826034150449235888667637,
      0.1691565193950025381893121, 0.1495959888165767320815017,
      0.1246289712555338720524763, 0.0951585116824927848099251,
      0.0622535239386478928628438, 0.0271524594117540948517806};
  return w;
}

template <class Fn>
inline double gl16(Fn&& f, double a, double b) {
  const auto& xs = gl16_nodes();
  const auto& ws = gl16_weights();
  double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < 16; ++i) s += ws[i] * f(c + r * xs[i]);
  return s * r;
}

template <class Fn>
inline cplx gl16_cplx(Fn&& f, double a, double b) {
  const auto& xs = gl16_nodes();
  const auto& ws = gl16_weights();
  double c = 0.5 * (a + b), r = 0.5 * (b - a);
  cplx s = 0.0;
  for (std::size_t i = 0; i < 16; ++i) s += ws[i] * f(c + r * xs[i]);
  return s * r;
}

// E1(z) by the continued fraction, modified Lentz. Valid away from the
// negative real axis; used here for Re z >= 0, |z| >= 2.
inline cplx e1_continued_fraction(cplx z) {
  const double tiny = 1e-300;
  cplx b = z + 1.0;
  cplx c = 1.0 / tiny;
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 1; i <= 200; ++i) {
    cplx a = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    cplx del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-z);
}

}  // namespace detail

// Sine integral Si(x) = int_0^x sin t / t dt and cosine integral
// Ci(x) = gamma + log x + int_0^x (cos t - 1)/t dt, x > 0.
inline void si_ci(double x, double* si, double* ci) {
  const double ax = std::abs(x);
  if (ax == 0.0) {
    *si = 0.0;
    *ci = -std::numeric_limits<double>::infinity();
    return;
  }
  if (ax <= 2.0) {
    // power series
    double x2 = ax * ax;
    double term = ax;
    double s = ax;
    for (int k = 1; k < 40; ++k) {
      // sin series: (-1)^k x^{2k+1} / ((2k+1)(2k+1)!)
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      double add = term / (2.0 * k + 1.0);
      s += add;
      if (std::abs(add) < 1e-18 * std::abs(s)) break;
    }
    double c = 0.0;
    double t2 = 1.0;
    for (int k = 1; k < 40; ++k) {
      t2 *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
      double add = t2 / (2.0 * k);
      c += add;
      if (std::abs(add) < 1e-18) break;
    }
    *si = (x < 0 ? -s : s);
    *ci = euler_gamma + std::log(ax) + c;
    return;
  }
  cplx e1 = detail::e1_continued_fraction(cplx(0.0, ax));
  double ci_v = -e1.real();
  double si_v = 0.5 * M_PI + e1.imag();
  *ci = ci_v;
  *si = (x < 0 ? -si_v : si_v);  // Ci is even up to the log branch; callers use x > 0
}

inline double Ci(double x) {
  double s, c;
  si_ci(x, &s, &c);
  return c;
}

inline double Si(double x) {
  double s, c;
  si_ci(x, &s, &c);
  return s;
}

// Exponential integral E1(x), x > 0.
inline double E1(double x) {
  if (!(x > 0.0)) fail(errc::config_error, "E1 requires x > 0");
  if (x <= 1.0) {
    // E1 = -gamma - log x + sum (-1)^{k+1} x^k / (k k!)
    double s = 0.0, term = 1.0;
    for (int k = 1; k <= 40; ++k) {
      term *= -x / k;
      double add = -term / k;
      s += add;
      if (std::abs(add) < 1e-18 * (std::abs(s) + 1e-30)) break;
    }
    return -euler_gamma - std::log(x) + s;
  }
  return detail::e1_continued_fraction(cplx(x, 0.0)).real();
}

// f2(z) = Ci(2z) - gamma - log(2z), smooth, f2(0) = 0.
inline double f2_kernel(double z) {
  if (z == 0.0) return 0.0;
  double w = 2.0 * z;
  if (w <= 2.0) {
    double w2 = w * w;
    double c = 0.0, t = 1.0;
    for (int k = 1; k < 40; ++k) {
      t *= -w2 / ((2.0 * k - 1.0) * (2.0 * k));
      double add = t / (2.0 * k);
      c += add;
      if (std::abs(add) < 1e-18) break;
    }
    return c;
  }
  return Ci(w) - euler_gamma - std::log(w);
}

// f2'(z) = (cos(2z) - 1)/z.
inline double f2_kernel_prime(double z) {
  if (std::abs(z) < 1e-8) return -2.0 * z;
  return (std::cos(2.0 * z) - 1.0) / z;
}

namespace detail {

// g(u) = (u - sqrt(u^2-1))/u^2 = 1/(u^2 (u + sqrt(u^2-1))) on the rotated
// contour u = 1 + i t. The principal square root is the right branch here.
inline cplx f1_g(double t) {
  cplx u(1.0, t);
  cplx r = std::sqrt(u * u - 1.0);
  return 1.0 / (u * u * (u + r));
}

// Integrals int_0^inf e^{-2 z t} f1_g(1+it) (2i-2t)^pow dt for pow in {0, 1}.
// f1_g has a sqrt branch point at t = 0; the substitution t = sigma^2 makes
// the integrand smooth there. Beyond t = 1 logarithmic panels run until the
// t^{-3} (or e^{-2 z t}) decay exhausts the contribution.
inline cplx f1_laplace_integral(double z, int pow) {
  auto integrand = [&](double t) -> cplx {
    cplx g = f1_g(t);
    if (pow == 1) g *= cplx(-2.0 * t, 2.0);
    return g * std::exp(-2.0 * z * t);
  };
  cplx total = 0.0;
  // t in [0, 1] via t = sigma^2
  {
    auto in_sigma = [&](double s) -> cplx { return integrand(s * s) * 2.0 * s; };
    const int panels = 10;
    for (int j = 0; j < panels; ++j)
      total += gl16_cplx(in_sigma, static_cast<double>(j) / panels,
                         static_cast<double>(j + 1) / panels);
  }
  // t in [1, t_max] in log panels with early exit
  double t_max = std::min(std::max(1e5, 25.0 / std::max(z, 1e-12)), 1e9);
  double s_end = std::log(t_max);
  double ds = 0.4;
  for (double s = 0.0; s < s_end; s += ds) {
    auto in_s = [&](double u) -> cplx {
      double t = std::exp(u);
      return integrand(t) * t;
    };
    cplx panel = gl16_cplx(in_s, s, std::min(s + ds, s_end));
    total += panel;
    if (std::abs(panel) < 1e-18 * (std::abs(total) + 1e-30) && s > 3.0) break;
  }
  return total;
}

}  // namespace detail

// f1(z) = int_1^inf cos(2 z u) (u - sqrt(u^2-1))/u^2 du, f1(0) = 1 - log 2.
inline double f1_kernel(double z) {
  cplx I = detail::f1_laplace_integral(z, 0);
  cplx pref = cplx(0.0, 1.0) * std::exp(cplx(0.0, 2.0 * z));
  return (pref * I).real();
}

// d/dz [i e^{2iz} Q(z)] = i e^{2iz} (2i Q + Q') with Q' carrying the -2t factor;
// the pow=1 integral is exactly (2i - 2t) under the same weight.
inline double f1_kernel_prime(double z) {
  cplx I1 = detail::f1_laplace_integral(z, 1);
  cplx pref = cplx(0.0, 1.0) * std::exp(cplx(0.0, 2.0 * z));
  return (pref * I1).real();
}

// f3 = f1 + f2 and its derivative; the smooth parts of the mode-sum kernel.
inline double f3_kernel(double z) { return f1_kernel(z) + f2_kernel(z); }
inline double f3_kernel_prime(double z) { return f1_kernel_prime(z) + f2_kernel_prime(z); }

// Mollified step: theta_eps(x) rises smoothly from 0 to 1 over [-eps, eps].
inline double smoothstep(double y) {
  if (y <= -1.0) return 0.0;
  if (y >= 1.0) return 1.0;
  double y2 = y * y;
  return 0.5 + (35.0 / 32.0) * (y - y * y2 + 0.6 * y2 * y2 * y - y2 * y2 * y2 * y / 7.0);
}

inline double smoothstep_deriv(double y) {
  if (y <= -1.0 || y >= 1.0) return 0.0;
  double t = 1.0 - y * y;
  return (35.0 / 32.0) * t * t * t;
}

// Oscillatory moments int_A^B cos(ck)/k^n dk and the sine versions, n = 1..3.
// Used for the large-k tails of the band integrals.
inline double osc_cos_over_k(double c, double A, double B) { return Ci(c * B) - Ci(c * A); }
inline double osc_sin_over_k(double c, double A, double B) { return Si(c * B) - Si(c * A); }
inline double osc_cos_over_k2(double c, double A, double B) {
  return (std::cos(c * A) / A - std::cos(c * B) / B) - c * osc_sin_over_k(c, A, B);
}
inline double osc_sin_over_k2(double c, double A, double B) {
  return (std::sin(c * A) / A - std::sin(c * B) / B) + c * osc_cos_over_k(c, A, B);
}
inline double osc_cos_over_k3(double c, double A, double B) {
  return 0.5 * (std::cos(c * A) / (A * A) - std::cos(c * B) / (B * B)) -
         0.5 * c * osc_sin_over_k2(c, A, B);
}
inline double osc_sin_over_k3(double c, double A, double B) {
  return 0.5 * (std::sin(c * A) / (A * A) - std::sin(c * B) / (B * B)) +
         0.5 * c * osc_cos_over_k2(c, A, B);
}

}  // namespace sce
