#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sce/geometry.hpp"
#include "sce/ode.hpp"
#include "sce/params.hpp"

using namespace sce;

TEST_CASE("derive_initial_conditions: arithmetic and failure modes") {
  Params p;
  p.m = 1.0;
  p.xi = 0.0;

  auto d = derive_initial_conditions(0.0, 1.0, 0.0, 0.0, 0.0, p);
  CHECK(d.X0 == 0.0);
  CHECK(d.X0p == 0.0);
  CHECK(d.R0 == 0.0);
  CHECK(d.w0sq == Catch::Approx(1.0));

  auto d2 = derive_initial_conditions(0.0, 2.0, 0.0, 1.0, 0.0, p);
  CHECK(d2.X0 == Catch::Approx(0.5));
  CHECK(d2.X0p == 0.0);
  CHECK(d2.R0 == Catch::Approx(0.75));

  // R0 = -6, w0^2 = 1 + (-1/6)(-6) = 2
  auto d3 = derive_initial_conditions(0.0, 1.0, 0.0, -1.0, 0.0, p);
  CHECK(d3.R0 == Catch::Approx(-6.0));
  CHECK(d3.w0sq == Catch::Approx(2.0));

  CHECK_THROWS_AS(derive_initial_conditions(0.0, -1.0, 0.0, 0.0, 0.0, p), error);
  try {
    derive_initial_conditions(0.0, 1.0, 0.0, 2.0, 0.0, p);  // w0sq = 1 - 2 < 0
    FAIL("expected NonPositiveInitialFrequency");
  } catch (const error& e) {
    CHECK(e.code() == errc::non_positive_initial_frequency);
  }
}

TEST_CASE("linear second order solver: free motion, oscillator, cosh oracle") {
  TimeGrid g(0.0, 1.0, 2049);
  std::vector<double> zero(g.n, 0.0);

  auto lin = solve_linear_second_order<double>(g, 0.0, zero, zero, 1.0, 2.0);
  for (std::size_t i = 0; i < g.n; i += 512)
    CHECK(lin.f[i] == Catch::Approx(1.0 + 2.0 * g.tau(i)).margin(1e-14));

  auto osc = solve_linear_second_order<double>(g, 1.0, zero, zero, 1.0, 0.0);
  for (std::size_t i = 0; i < g.n; i += 512)
    CHECK(osc.f[i] == Catch::Approx(std::cos(g.tau(i))).margin(1e-13));

  // W = -c constant: f = cosh(sqrt(c) tau) to relative 1e-8
  double c = 2.25;
  TimeGrid gf(0.0, 1.0, 8193);
  std::vector<double> W(gf.n, -c), z2(gf.n, 0.0);
  auto ch = solve_linear_second_order<double>(gf, 0.0, W, z2, 1.0, 0.0);
  double ref = std::cosh(std::sqrt(c) * 1.0);
  CHECK(std::abs(ch.f.back() - ref) / ref < 1e-8);
}

TEST_CASE("build_trajectory: static, cosh and exact initial node") {
  Params p;
  p.m = 1.0;
  p.xi = 0.0;
  auto init = derive_initial_conditions(0.0, 1.0, 0.0, 0.0, 0.0, p);
  TimeGrid g(0.0, 1.0, 513);
  std::vector<double> Xp(g.n, 0.0);

  auto tr = build_trajectory(Xp, init, g, p);
  for (std::size_t i = 0; i < g.n; i += 128) {
    CHECK(tr.a[i] == Catch::Approx(1.0).margin(1e-13));
    CHECK(tr.V[i] == Catch::Approx(0.0).margin(1e-13));
    CHECK(tr.R[i] == Catch::Approx(0.0).margin(1e-13));
  }
  CHECK(tr.V[0] == 0.0);  // exact by construction

  // X == c > 0 constant: a = cosh(sqrt(c) tau)
  double c = 0.49;
  auto init_c = derive_initial_conditions(0.0, 1.0, 0.0, c, 0.0, p);
  TimeGrid gf(0.0, 1.0, 8193);
  std::vector<double> Xp0(gf.n, 0.0);
  auto trc = build_trajectory(Xp0, init_c, gf, p);
  double ref = std::cosh(std::sqrt(c));
  CHECK(std::abs(trc.a.back() - ref) / ref < 1e-8);
  CHECK(trc.V[0] == 0.0);
}

TEST_CASE("grid refinement: order >= 2 convergence of a(tau1)") {
  Params p;
  p.m = 1.0;
  p.xi = 0.1;
  double c = 0.8;
  auto init = derive_initial_conditions(0.0, 1.0, 0.0, c, 0.0, p);
  double ref = std::cosh(std::sqrt(c));
  std::vector<double> errs;
  for (std::size_t n : {129u, 257u, 513u}) {
    TimeGrid g(0.0, 1.0, n);
    std::vector<double> Xp(g.n, 0.0);
    auto tr = build_trajectory(Xp, init, g, p);
    errs.push_back(std::abs(tr.a.back() - ref));
  }
  CHECK(errs[0] / errs[1] > 3.5);
  CHECK(errs[1] / errs[2] > 3.5);
}

TEST_CASE("scale factor vanishing raises the dedicated error") {
  Params p;
  p.m = 1.0;
  p.xi = 0.0;
  // strong negative X drives a through zero: a'' = X a with X ~ -40
  auto init = derive_initial_conditions(0.0, 1.0, -0.2, -0.15, 0.0, p);
  TimeGrid g(0.0, 4.0, 257);
  std::vector<double> Xp(g.n, -20.0);
  try {
    auto tr = build_trajectory(Xp, init, g, p);
    FAIL("expected ScaleFactorVanishes");
  } catch (const error& e) {
    CHECK(e.code() == errc::scale_factor_vanishes);
  }
}

TEST_CASE("curvature invariants: static, radiation-like and de Sitter") {
  TimeGrid g(-2.0, -0.5, 257);
  Trajectory tr;
  tr.grid = g;
  tr.a.assign(g.n, 1.0);
  tr.ap.assign(g.n, 0.0);
  tr.X.assign(g.n, 0.0);
  tr.Xp.assign(g.n, 0.0);
  curvature_invariants(tr);
  CHECK(tr.riem_minus_ricci[10] == 0.0);
  CHECK(tr.I00[10] == 0.0);

  // a(tau) = tau at tau = 1: a' = 1, a'' = 0 -> riem - ricci = 12
  Trajectory tr2;
  tr2.grid = TimeGrid(0.5, 1.5, 3);
  tr2.a = {0.5, 1.0, 1.5};
  tr2.ap = {1.0, 1.0, 1.0};
  tr2.X = {0.0, 0.0, 0.0};
  tr2.Xp = {0.0, 0.0, 0.0};
  curvature_invariants(tr2);
  CHECK(tr2.riem_minus_ricci[1] == Catch::Approx(12.0).epsilon(1e-12));

  // de Sitter a = -1/(H tau) on tau < 0: R = 12 H^2 constant to 1e-10
  double H = 1.3;
  Trajectory ds;
  ds.grid = TimeGrid(-2.0, -0.5, 129);
  ds.a.resize(129);
  ds.ap.resize(129);
  ds.X.resize(129);
  ds.Xp.resize(129);
  ds.R.resize(129);
  for (std::size_t i = 0; i < 129; ++i) {
    double t = ds.grid.tau(i);
    ds.a[i] = -1.0 / (H * t);
    ds.ap[i] = 1.0 / (H * t * t);
    ds.X[i] = 2.0 / (t * t);
    ds.Xp[i] = -4.0 / (t * t * t);
    ds.R[i] = 6.0 * ds.X[i] / (ds.a[i] * ds.a[i]);
  }
  curvature_invariants(ds);
  for (std::size_t i = 0; i < 129; i += 16) {
    CHECK(ds.R[i] == Catch::Approx(12.0 * H * H).epsilon(1e-10));
    double Hub = ds.ap[i] / (ds.a[i] * ds.a[i]);
    CHECK(Hub == Catch::Approx(H).epsilon(1e-12));
    CHECK(ds.riem_minus_ricci[i] == Catch::Approx(-12.0 * std::pow(H, 4)).epsilon(1e-10));
    CHECK(std::abs(ds.I00[i]) < 1e-9);
  }
}

TEST_CASE("a'' = X a residual at grid points") {
  Params p;
  p.m = 1.0;
  p.xi = 0.0;
  auto init = derive_initial_conditions(0.0, 1.0, 0.1, 0.05, 0.02, p);
  TimeGrid g(0.0, 1.0, 513);
  std::vector<double> Xp(g.n);
  for (std::size_t i = 0; i < g.n; ++i) Xp[i] = 0.02 * std::cos(2.0 * g.tau(i));
  auto tr = build_trajectory(Xp, init, g, p);
  double h = g.h();
  double scale = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) scale = std::max(scale, std::abs(tr.X[i] * tr.a[i]));
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < g.n; ++i) {
    double fd = (tr.a[i + 1] - 2.0 * tr.a[i] + tr.a[i - 1]) / (h * h);
    worst = std::max(worst, std::abs(fd - tr.X[i] * tr.a[i]));
  }
  CHECK(worst < 50.0 * h * h * std::max(scale, 1.0));
}
