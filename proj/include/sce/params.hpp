#pragma once

#include <cmath>

#include "sce/errors.hpp"

namespace sce {

// Physical and renormalization constants. Units use hbar = c = 1 and an
// arbitrary mass unit; G is an input, not fixed to Planck units.
struct Params {
  double m = 1.0;            // field mass, > 0
  double xi = 0.0;           // curvature coupling, != 1/6
  double Lambda = 0.0;       // cosmological constant
  double G = 1.0;            // Newton constant
  double lambda_scale = 1.0; // Hadamard length scale, > 0
  double alpha1 = 0.0;       // phi^2 renormalization constants
  double alpha2 = 0.0;
  double beta1 = 0.0;        // trace renormalization constants
  double beta2 = 0.0;
  double beta3 = 0.0;
  double betaT1 = 0.0;       // energy-density renormalization constants
  double betaT2 = 0.0;
  double betaT34 = 0.0;      // combination betaT3 - betaT4/3

  void validate() const {
    if (!(m > 0.0)) fail(errc::config_error, "mass m must be positive");
    if (xi == 1.0 / 6.0) fail(errc::config_error, "coupling xi must differ from 1/6");
    if (!(lambda_scale > 0.0)) fail(errc::config_error, "lambda_scale must be positive");
  }

  double six_xi_m1() const { return 6.0 * xi - 1.0; }
  double xi_m_sixth() const { return xi - 1.0 / 6.0; }
};

// Initial conditions for the scale factor and the derived curvature data.
struct InitialData {
  double tau0 = 0.0;
  double a0 = 1.0;
  double a0p = 0.0;
  double a0pp = 0.0;
  double a0ppp = 0.0;
  // derived
  double X0 = 0.0;    // a0''/a0
  double X0p = 0.0;   // a0'''/a0 - a0''*a0'/a0^2
  double R0 = 0.0;    // 6*X0/a0^2
  double w0sq = 0.0;  // a0^2 m^2 + (xi - 1/6) R0 a0^2 = Omega_k^2(tau0) at k = 0

  double w0() const { return std::sqrt(w0sq); }
  double H0() const { return a0p / (a0 * a0); }             // Hubble rate at tau0
  double dotH0() const { return X0 / (a0 * a0) - 2.0 * a0p * a0p / (a0 * a0 * a0 * a0); }
  double ddotH0() const {
    double a2 = a0 * a0;
    return X0p / (a0 * a2) - 6.0 * X0 * a0p / (a2 * a2) +
           8.0 * a0p * a0p * a0p / (a2 * a2 * a2);
  }
  // 2 I_0^0 at tau0 (cosmological-time dots converted to conformal derivatives)
  double two_I00() const {
    double H = H0(), dH = dotH0(), ddH = ddotH0();
    return 216.0 * H * H * dH - 36.0 * dH * dH + 72.0 * H * ddH;
  }
  double vprime0(const Params& p) const {
    return 2.0 * p.m * p.m * a0 * a0p + p.six_xi_m1() * X0p;
  }
};

inline InitialData derive_initial_conditions(double tau0, double a0, double a0p, double a0pp,
                                             double a0ppp, const Params& p) {
  p.validate();
  if (!(a0 > 0.0)) fail(errc::non_positive_scale_factor, "a0 must be positive");
  InitialData d;
  d.tau0 = tau0;
  d.a0 = a0;
  d.a0p = a0p;
  d.a0pp = a0pp;
  d.a0ppp = a0ppp;
  d.X0 = a0pp / a0;
  d.X0p = a0ppp / a0 - a0pp * a0p / (a0 * a0);
  d.R0 = 6.0 * d.X0 / (a0 * a0);
  d.w0sq = a0 * a0 * p.m * p.m + p.xi_m_sixth() * d.R0 * a0 * a0;
  if (!(d.w0sq > 0.0))
    fail(errc::non_positive_initial_frequency,
         "initial frequency squared w0^2 must be positive (got " + std::to_string(d.w0sq) + ")");
  return d;
}

}  // namespace sce
