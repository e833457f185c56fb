#pragma once

// FLRW kinematics driven by X' = (a''/a)': reconstructs a, V', R and the
// curvature scalars entering the trace source. a solves a'' = X a through
// the same Volterra discretization used by the non-local operators.

#include <cmath>
#include <vector>

#include "sce/errors.hpp"
#include "sce/grid.hpp"
#include "sce/ode.hpp"
#include "sce/params.hpp"

namespace sce {

struct Trajectory {
  TimeGrid grid;
  std::vector<double> Xp;   // X' = dX/dtau, the dynamical variable
  std::vector<double> X;    // a''/a
  std::vector<double> a;    // scale factor
  std::vector<double> ap;   // a'
  std::vector<double> V;    // m^2 (a^2 - a0^2) + (6 xi - 1)(X - X0)
  std::vector<double> Vp;   // 2 m^2 a a' + (6 xi - 1) X'
  std::vector<double> R;    // 6 X / a^2
  std::vector<double> H;    // a'/a^2, Hubble rate in cosmological time
  std::vector<double> riem_minus_ricci;  // R_abcd R^abcd - R_ab R^ab
  std::vector<double> I00;  // 2 I_0^0
};

// X = X0 + int Xp; a from a'' = X a; V and V' from their definitions.
// Asserts a > 0 and the a-priori bound on ||a - a0||.
inline Trajectory build_trajectory(const std::vector<double>& Xp, const InitialData& init,
                                   const TimeGrid& grid, const Params& params) {
  if (Xp.size() != grid.n) fail(errc::config_error, "build_trajectory: Xp size mismatch");
  Trajectory tr;
  tr.grid = grid;
  tr.Xp = Xp;
  tr.X = cumtrapz(Xp, grid.h());
  for (double& x : tr.X) x += init.X0;

  std::vector<double> W(grid.n), zero(grid.n, 0.0);
  for (std::size_t i = 0; i < grid.n; ++i) W[i] = -tr.X[i];
  auto sol = solve_linear_second_order<double>(grid, 0.0, W, zero, init.a0, init.a0p);
  tr.a = std::move(sol.f);
  tr.ap = std::move(sol.fp);

  for (std::size_t i = 0; i < grid.n; ++i)
    if (!(tr.a[i] > 0.0))
      fail(errc::scale_factor_vanishes,
           "a(tau) <= 0 at tau = " + std::to_string(grid.tau(i)) + "; shrink the interval");

  const double m2 = params.m * params.m;
  const double sx = params.six_xi_m1();
  tr.V.resize(grid.n);
  tr.Vp.resize(grid.n);
  tr.R.resize(grid.n);
  tr.H.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    double a = tr.a[i];
    tr.V[i] = m2 * (a * a - init.a0 * init.a0) + sx * (tr.X[i] - init.X0);
    tr.Vp[i] = 2.0 * m2 * a * tr.ap[i] + sx * tr.Xp[i];
    tr.R[i] = 6.0 * tr.X[i] / (a * a);
    tr.H[i] = tr.ap[i] / (a * a);
  }

  // first bound of the a[X] lemma, checked with a small slack
  double dt = grid.length();
  double Xmax = max_abs(tr.X);
  double bound = dt * (std::abs(init.a0p) + std::abs(init.a0) * 0.5 * dt * Xmax) *
                 std::exp(0.5 * dt * dt * Xmax);
  for (std::size_t i = 0; i < grid.n; ++i)
    if (std::abs(tr.a[i] - init.a0) > bound * (1.0 + 1e-9) + 1e-14 * std::abs(init.a0))
      fail(errc::gronwall_violation, "||a - a0|| exceeds its a-priori bound");
  return tr;
}

// Fills riem_minus_ricci and I00 = 2 I_0^0 from a, a', X, X'. Dots are
// cosmological-time derivatives: dot f = f'/a.
inline void curvature_invariants(Trajectory& tr) {
  const std::size_t n = tr.grid.n;
  tr.riem_minus_ricci.resize(n);
  tr.I00.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a = tr.a[i], ap = tr.ap[i], X = tr.X[i], Xp = tr.Xp[i];
    double a2 = a * a, a4 = a2 * a2;
    // 12 (a'^4 / a^8 - a'' a'^2 / a^7) with a'' = X a
    tr.riem_minus_ricci[i] = 12.0 * (ap * ap * ap * ap / (a4 * a4) - X * ap * ap / (a4 * a2));
    double H = ap / a2;
    double dH = X / a2 - 2.0 * ap * ap / a4;
    double ddH = Xp / (a * a2) - 6.0 * X * ap / a4 + 8.0 * ap * ap * ap / (a4 * a2);
    tr.I00[i] = 216.0 * H * H * dH - 36.0 * dH * dH + 72.0 * H * ddH;
  }
}

}  // namespace sce
