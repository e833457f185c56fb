#pragma once

// The traced-equation machinery: the local source S, the auxiliary field F
// solving (aF)'' + (a^2 M_c - X)(aF) = a^3 S, the contraction map
//   C[X'] = X0' - (2 m^2/(6 xi - 1))(a a' - a0 a0')
//         - (1/(6 xi - 1)) Tinv[ Q0^d + Qf^d + Qs^d - (6 c_xi X' + d(a^2 F)) ]
// and the Picard iteration with interval adaptation.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sce/errors.hpp"
#include "sce/expectation.hpp"
#include "sce/geometry.hpp"
#include "sce/grid.hpp"
#include "sce/kgrid.hpp"
#include "sce/logkernel.hpp"
#include "sce/modes.hpp"
#include "sce/params.hpp"
#include "sce/quantumstate.hpp"

namespace sce {

struct CouplingConstants {
  double c_xi = 0.0;  // beta3 / (3 (1/6 - xi))
  double M_c = 0.0;   // -m^2 / (3 (1/6 - xi))
  explicit CouplingConstants(const Params& p) {
    double d = 3.0 * (1.0 / 6.0 - p.xi);
    if (d == 0.0) fail(errc::config_error, "coupling constants undefined at xi = 1/6");
    c_xi = p.beta3 / d;
    M_c = -p.m * p.m / d;
  }
};

// S = (1/(3(xi-1/6))) (beta1 m^4 - Lambda/(2 pi G) + R/(8 pi G) + beta2 m^2 R
//     + beta3 M_c R + (6xi-1)^2 R^2 / 1152 pi^2 + (RR - RicRic)/2880 pi^2)
inline std::vector<double> source_S(const Trajectory& tr, const Params& p) {
  if (tr.riem_minus_ricci.size() != tr.grid.n)
    fail(errc::config_error, "source_S needs curvature invariants populated");
  CouplingConstants cc(p);
  const double pref = 1.0 / (3.0 * (p.xi - 1.0 / 6.0));
  const double m4 = std::pow(p.m, 4);
  const double sx2 = p.six_xi_m1() * p.six_xi_m1();
  std::vector<double> S(tr.grid.n);
  for (std::size_t i = 0; i < tr.grid.n; ++i) {
    double R = tr.R[i];
    S[i] = pref * (p.beta1 * m4 - p.Lambda / (2.0 * M_PI * p.G) + R / (8.0 * M_PI * p.G) +
                   p.beta2 * p.m * p.m * R + p.beta3 * cc.M_c * R +
                   sx2 * R * R / (1152.0 * M_PI * M_PI) +
                   tr.riem_minus_ricci[i] / (2880.0 * M_PI * M_PI));
  }
  return S;
}

struct FSolution {
  std::vector<double> F, Fp;
  std::vector<double> Ft, Ftp;   // aF and (aF)'
  std::vector<double> d_a2F;     // d/dtau (a^2 F) = a' (aF) + a (aF)'
};

// Solves P_c F = S with initial data (F0, F0p) through the tilde variables.
inline FSolution solve_F(const Trajectory& tr, const std::vector<double>& S,
                         const CouplingConstants& cc, double F0, double F0p) {
  const std::size_t n = tr.grid.n;
  std::vector<double> W(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a = tr.a[i];
    W[i] = a * a * cc.M_c - tr.X[i];
    h[i] = a * a * a * S[i];
  }
  double Ft0 = tr.a[0] * F0;
  double Ft0p = tr.ap[0] * F0 + tr.a[0] * F0p;
  auto sol = solve_linear_second_order<double>(tr.grid, 0.0, W, h, Ft0, Ft0p);
  FSolution out;
  out.Ft = std::move(sol.f);
  out.Ftp = std::move(sol.fp);
  out.F.resize(n);
  out.Fp.resize(n);
  out.d_a2F.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.F[i] = out.Ft[i] / tr.a[i];
    out.Fp[i] = (out.Ftp[i] - tr.ap[i] * out.F[i]) / tr.a[i];
    out.d_a2F[i] = tr.ap[i] * out.Ft[i] + tr.a[i] * out.Ftp[i];
  }
  return out;
}

struct SolverConfig {
  double tau1 = 1.0;
  std::size_t n = 257;
  double delta = 0.0;  // ball radius; 0 -> max(1, |X0'|)
  double tol = 1e-7;
  std::size_t max_iter = 80;
  double shrink_factor = 0.5;
  double k_min_factor = 1e-3;
  double k_max = 0.0;  // 0 -> automatic
  std::size_t k_nodes = 128;
  double mode_tol = 1e-9;
  double kernel_tol = 1e-5;
  double start_offset = 0.0;  // Picard start X0' + offset
};

struct SolveContext {
  InitialData init;
  Params params;
  StateSpec state;
  TimeGrid grid;
  KGrid kgrid;
  CosineKernel ck;
  KernelTable ktab;
  CouplingConstants cc;
  double delta = 1.0;

  SolveContext(const InitialData& i, const Params& p, const StateSpec& st,
               const TimeGrid& g, const SolverConfig& cfg)
      : init(i), params(p), state(st), grid(g), cc(p) {
    double w0 = init.w0();
    double kmin = cfg.k_min_factor * w0;
    double kmax = cfg.k_max > 0.0 ? cfg.k_max : 60.0 * std::max(w0, p.m * init.a0);
    kmax = std::min(kmax, 1.0 / g.h());
    if (kmax < 8.0 * kmin) kmax = 8.0 * kmin;
    kgrid = KGrid::logspaced(kmin, kmax, cfg.k_nodes);
    ck = build_cosine_kernel(w0, g);
    ktab = build_kernel_table(g.length(), g.n, cfg.kernel_tol);
    delta = cfg.delta > 0.0 ? cfg.delta : std::max(1.0, std::abs(init.X0p));
  }
};

struct ContractionDiagnostics {
  Trajectory traj;
  ExpectationBundle bundle;
  FSolution fs;
  std::vector<double> bracket;
  std::vector<double> tinv;
  double bracket0 = 0.0;
  double wronskian_max_dev = 0.0;
  double qs_err = 0.0;
  double phi2_0 = 0.0, dphi2_0 = 0.0;
};

// One full evaluation of the contraction map.
inline std::vector<double> contraction_map(const std::vector<double>& Xp, SolveContext& ctx,
                                           ContractionDiagnostics* diag = nullptr,
                                           double mode_tol = 1e-9) {
  const TimeGrid& g = ctx.grid;
  const Params& p = ctx.params;
  const InitialData& init = ctx.init;
  const double sx = p.six_xi_m1();

  // ball membership: candidates satisfy X'(tau0) = X0' (the ball of the
  // fixed-point theorem pins the initial value) and stay within delta
  if (std::abs(Xp[0] - init.X0p) > 1e-12 * (1.0 + std::abs(init.X0p)))
    fail(errc::config_error, "candidate X' must equal X0' at tau0");
  double dev = 0.0;
  for (double v : Xp) dev = std::max(dev, std::abs(v - init.X0p));
  if (dev > ctx.delta * (1.0 + 1e-12))
    fail(errc::out_of_ball, "input X' leaves the ball B_delta");

  Trajectory tr = build_trajectory(Xp, init, g, p);
  curvature_invariants(tr);

  // standing assumption Omega_k^2 > 0: w(tau)^2 = a^2 m^2 + (6 xi - 1) X
  for (std::size_t i = 0; i < g.n; ++i) {
    double w2 = p.m * p.m * tr.a[i] * tr.a[i] + sx * tr.X[i];
    if (!(w2 > 1e-6 * init.w0sq))
      fail(errc::frequency_not_positive,
           "Omega^2 loses positivity inside the interval; shrink it");
  }

  ModeTable mt = build_mode_table(ctx.kgrid, init.w0sq, tr.V, g, mode_tol);

  double Vl1 = 0.0;
  for (std::size_t i = 1; i < g.n; ++i)
    Vl1 += 0.5 * g.h() * (std::abs(tr.V[i - 1]) + std::abs(tr.V[i]));

  QcPair qc = q_c_pair(tr.V, tr.Vp, ctx.ck, mt, g);
  Q0Pair q0 = q_0_pair(tr, init, p);
  QsPair qs = q_s_pair(ctx.state, init, p, mt, ctx.ck, g, Vl1);
  ExpectationBundle bundle = assemble(tr, qs.Qs, qs.Qsd, qc, q0);

  // F initial data from the tau0 values of the bundle
  double a0 = init.a0, a0p = init.a0p;
  double phi2_0 = bundle.a2phi2[0] / (a0 * a0);
  double dphi2_0 = (bundle.d_a2phi2[0] - 2.0 * a0 * a0p * phi2_0) / (a0 * a0);
  double R0p = (6.0 * init.X0p - 12.0 * init.X0 * a0p / a0) / (a0 * a0);
  double F0 = phi2_0 - ctx.cc.c_xi * init.R0;
  double F0p = dphi2_0 - ctx.cc.c_xi * R0p;
  std::vector<double> S = source_S(tr, p);
  FSolution fs = solve_F(tr, S, ctx.cc, F0, F0p);

  // bracket fed to the inverse operator; vanishes at tau0 by construction
  std::vector<double> bracket(g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    bracket[i] = q0.Q0d[i] + qc.Qfd[i] + qs.Qsd[i] -
                 (6.0 * ctx.cc.c_xi * Xp[i] + fs.d_a2F[i]);
  double br_scale = max_abs(bracket) + 1e-300;
  double bracket0 = bracket[0];
  if (std::abs(bracket0) > 1e-7 * br_scale)
    fail(errc::nonzero_initial_value,
         "bracket does not vanish at tau0: " + std::to_string(bracket0));
  bracket[0] = 0.0;

  std::vector<double> tinv = t_inverse_apply(bracket, ctx.ktab);

  std::vector<double> out(g.n);
  const double m2 = p.m * p.m;
  for (std::size_t i = 0; i < g.n; ++i)
    out[i] = init.X0p - (2.0 * m2 / sx) * (tr.a[i] * tr.ap[i] - a0 * a0p) - tinv[i] / sx;

  double odev = 0.0;
  for (double v : out) odev = std::max(odev, std::abs(v - init.X0p));
  if (odev > ctx.delta)
    fail(errc::out_of_ball, "C[X'] leaves the ball B_delta; shrink the interval");

  if (diag) {
    diag->traj = std::move(tr);
    diag->bundle = std::move(bundle);
    diag->fs = std::move(fs);
    diag->bracket = std::move(bracket);
    diag->tinv = std::move(tinv);
    diag->bracket0 = bracket0;
    diag->qs_err = qs.err_estimate;
    diag->phi2_0 = phi2_0;
    diag->dphi2_0 = dphi2_0;
    double wd = 0.0;
    for (const auto& e : mt.entries)
      for (std::size_t i = 0; i < g.n; ++i)
        wd = std::max(wd, std::abs(wronskian(e.full.chi[i], e.full.chip[i]) - cplx(0.0, 1.0)));
    diag->wronskian_max_dev = wd;
  }
  return out;
}

struct SolveReport {
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> deltas;
  std::vector<double> ratios;
  std::vector<double> shrink_history;  // tau1 of every attempted interval
  double final_tau1 = 0.0;
  double final_delta = 0.0;
  double last_q = 0.0;
  double bracket0 = 0.0;
  double wronskian_max_dev = 0.0;
  double res_trace_max = 0.0;   // inverted-form trace residual (6xi-1)(X' - C[X'])
  double res_state_max = 0.0;   // sup |phi2 - c_xi R - F|
  double constraint_residual = 0.0;
  double scale = 0.0;
  double tail_estimate = 0.0;
  double qs_err = 0.0;
};

struct Solution {
  Trajectory traj;
  ExpectationBundle bundle;
  FSolution fs;
  std::vector<double> res_trace;  // (6xi-1)(X' - C[X']) on the grid
  std::vector<double> res_state;  // phi2 - c_xi R - F
  SolveReport report;
};

// Picard iteration from X' = X0' with interval halving on non-contraction.
inline Solution fixed_point_solve(const InitialData& init, const Params& p,
                                  const StateSpec& state, const SolverConfig& cfg) {
  Solution sol;
  SolveReport& rep = sol.report;
  const double h0 = (cfg.tau1 - init.tau0) / static_cast<double>(cfg.n - 1);
  double tau1 = cfg.tau1;

  rep.scale = std::max({std::pow(p.m, 4), std::abs(p.Lambda) / p.G, 1e-30});

  for (;;) {
    if (tau1 - init.tau0 < 32.0 * h0)
      fail(errc::interval_underflow,
           "interval shrank below 32 initial steps without convergence");
    rep.shrink_history.push_back(tau1);
    TimeGrid grid(init.tau0, tau1, cfg.n);
    SolveContext ctx(init, p, state, grid, cfg);

    // the start offset ramps up from zero so that X'(tau0) = X0' holds for
    // every candidate handed to the map
    std::vector<double> x(grid.n, init.X0p);
    if (cfg.start_offset != 0.0) {
      double ell = 0.05 * grid.length();
      for (std::size_t i = 0; i < grid.n; ++i)
        x[i] += cfg.start_offset * (1.0 - std::exp(-(grid.tau(i) - init.tau0) / ell));
    }
    double prev_delta = 0.0;
    std::size_t bad_q = 0;
    bool shrink = false;

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
      std::vector<double> xn;
      try {
        xn = contraction_map(x, ctx, nullptr, cfg.mode_tol);
      } catch (const error& e) {
        if (e.code() == errc::out_of_ball || e.code() == errc::frequency_not_positive ||
            e.code() == errc::scale_factor_vanishes) {
          shrink = true;
          break;
        }
        throw;
      }
      ++rep.iterations;
      double d = 0.0;
      for (std::size_t i = 0; i < grid.n; ++i) d = std::max(d, std::abs(xn[i] - x[i]));
      rep.deltas.push_back(d);
      if (prev_delta > 0.0) {
        double q = d / prev_delta;
        rep.ratios.push_back(q);
        rep.last_q = q;
        if (q >= 1.0) {
          if (++bad_q >= 3) {
            shrink = true;
            x = std::move(xn);
            break;
          }
        } else {
          bad_q = 0;
        }
      }
      prev_delta = d;
      x = std::move(xn);
      if (d < cfg.tol) {
        // final diagnostic evaluation at the fixed point
        ContractionDiagnostics diag;
        std::vector<double> xc = contraction_map(x, ctx, &diag, cfg.mode_tol);
        rep.converged = true;
        rep.final_tau1 = tau1;
        rep.final_delta = d;
        rep.bracket0 = diag.bracket0;
        rep.wronskian_max_dev = diag.wronskian_max_dev;
        rep.qs_err = diag.qs_err;
        rep.tail_estimate = diag.bundle.tail_estimate;
        sol.traj = std::move(diag.traj);
        sol.bundle = std::move(diag.bundle);
        sol.fs = std::move(diag.fs);
        sol.res_trace.resize(grid.n);
        sol.res_state.resize(grid.n);
        const double sx = p.six_xi_m1();
        for (std::size_t i = 0; i < grid.n; ++i) {
          sol.res_trace[i] = sx * (x[i] - xc[i]);
          sol.res_state[i] =
              sol.bundle.phi2[i] - ctx.cc.c_xi * sol.traj.R[i] - sol.fs.F[i];
        }
        rep.res_trace_max = max_abs(sol.res_trace);
        rep.res_state_max = max_abs(sol.res_state);
        double H0 = init.H0();
        double rho0 = energy_density_initial(state, init, p);
        rep.constraint_residual =
            std::abs(H0 * H0 - 8.0 * M_PI * p.G / 3.0 * rho0 - p.Lambda / 3.0);
        return sol;
      }
    }
    if (!shrink) fail(errc::max_iter_exceeded, "Picard iteration exhausted max_iter");
    tau1 = init.tau0 + (tau1 - init.tau0) * cfg.shrink_factor;
  }
}

// Pointwise residual diagnostics for a candidate trajectory: re-evaluates the
// map once and reports both the inverted-form trace residual and the
// undifferentiated state residual.
struct ResidualReport {
  std::vector<double> res_trace;
  std::vector<double> res_state;
};

inline ResidualReport residual_trace_equation(const std::vector<double>& Xp,
                                              const InitialData& init, const Params& p,
                                              const StateSpec& state, const SolverConfig& cfg,
                                              const TimeGrid& grid) {
  SolveContext ctx(init, p, state, grid, cfg);
  ctx.delta = 1e300;  // diagnostics must not reject off-ball candidates
  ContractionDiagnostics diag;
  std::vector<double> xc = contraction_map(Xp, ctx, &diag, cfg.mode_tol);
  ResidualReport rr;
  rr.res_trace.resize(grid.n);
  rr.res_state.resize(grid.n);
  const double sx = p.six_xi_m1();
  for (std::size_t i = 0; i < grid.n; ++i) {
    rr.res_trace[i] = sx * (Xp[i] - xc[i]);
    rr.res_state[i] = diag.bundle.phi2[i] - ctx.cc.c_xi * diag.traj.R[i] - diag.fs.F[i];
  }
  return rr;
}

}  // namespace sce
