#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "sce/errors.hpp"

namespace sce {

using cplx = std::complex<double>;

// Uniform grid on [tau0, tau1] with n nodes, tau_i = tau0 + i*h.
struct TimeGrid {
  double tau0 = 0.0;
  double tau1 = 1.0;
  std::size_t n = 3;

  TimeGrid() = default;
  TimeGrid(double t0, double t1, std::size_t nn) : tau0(t0), tau1(t1), n(nn) {
    if (!(tau1 > tau0)) fail(errc::config_error, "TimeGrid requires tau1 > tau0");
    if (n < 3) fail(errc::config_error, "TimeGrid requires n >= 3");
  }

  double h() const { return (tau1 - tau0) / static_cast<double>(n - 1); }
  double tau(std::size_t i) const { return tau0 + static_cast<double>(i) * h(); }
  double length() const { return tau1 - tau0; }

  bool operator==(const TimeGrid& o) const {
    return tau0 == o.tau0 && tau1 == o.tau1 && n == o.n;
  }
};

// Running integral by the trapezoidal rule; out[0] = 0.
inline std::vector<double> cumtrapz(const std::vector<double>& f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i)
    out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return out;
}

inline double trapz(const std::vector<double>& f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

inline double max_abs(const std::vector<double>& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs(const std::vector<cplx>& f) {
  double m = 0.0;
  for (const cplx& v : f) m = std::max(m, std::abs(v));
  return m;
}

template <class T>
inline std::vector<T> zeros_like(const std::vector<T>& f) {
  return std::vector<T>(f.size(), T{});
}

}  // namespace sce
