#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "sce/logkernel.hpp"

using namespace sce;

TEST_CASE("T on the zero function and on constant derivative") {
  TimeGrid g(0.0, 1.0, 1025);
  std::vector<double> f(g.n, 0.0), fp(g.n, 0.0);
  auto out = t_apply(f, fp, g.h());
  for (double v : out) CHECK(v == 0.0);

  // f' = c: T[f](x) = -c (x log x - x)/(8 pi^2), exact for the product rule
  double c = 1.7;
  for (std::size_t i = 0; i < g.n; ++i) {
    f[i] = c * g.tau(i);
    fp[i] = c;
  }
  out = t_apply(f, fp, g.h());
  for (std::size_t i = 1; i < g.n; i += 100) {
    double x = g.tau(i);
    double ref = -c * (x * std::log(x) - x) * inv_8pi2;
    CHECK(out[i] == Catch::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("T against refined quadrature for an oscillatory derivative") {
  // f'(eta) = sin(eta), evaluate at x = 1
  TimeGrid g(0.0, 1.0, 2049);
  std::vector<double> f(g.n), fp(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    f[i] = 1.0 - std::cos(g.tau(i));
    fp[i] = std::sin(g.tau(i));
  }
  auto out = t_apply(f, fp, g.h());
  auto integrand = [](double y) { return std::sin(y) * std::log1p(-y); };
  // int_0^1 sin(y) log(1-y) dy via the substitution 1-y = e^{-u}
  auto sub = [&](double u) { return std::sin(1.0 - std::exp(-u)) * (-u) * std::exp(-u); };
  double ref = -oracles::adaptive_simpson(sub, 0.0, 40.0, 1e-14, 48) * inv_8pi2;
  (void)integrand;
  CHECK(out.back() == Catch::Approx(ref).margin(1e-7));
}

TEST_CASE("inconsistent derivative is rejected") {
  TimeGrid g(0.0, 1.0, 257);
  std::vector<double> f(g.n), fp(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    f[i] = std::sin(g.tau(i));
    fp[i] = -2.0 * std::sin(g.tau(i));  // wrong by far
  }
  try {
    t_apply(f, fp, g.h());
    FAIL("expected InconsistentDerivative");
  } catch (const error& e) {
    CHECK(e.code() == errc::inconsistent_derivative);
  }
}

TEST_CASE("pointwise kernel against the branch-cut oracle") {
  for (double x : {1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0}) {
    double mine = kernel_Kc(x);
    double ref = oracles::kernel_Kc_branchcut(x);
    CHECK(mine == Catch::Approx(ref).epsilon(5e-5));
  }
}

TEST_CASE("kernel decay: |Kc(x)| <= c/x on [1, 100]") {
  double cfit = 0.0;
  for (double x = 1.0; x <= 10.0; x *= 1.5) cfit = std::max(cfit, x * std::abs(kernel_Kc(x)));
  for (double x = 10.0; x <= 100.0; x *= 1.7)
    CHECK(std::abs(kernel_Kc(x)) <= 1.05 * cfit / x);
}

TEST_CASE("local integrability and C_inf monotonicity") {
  double c0 = cinf_of(1e-3), c1 = cinf_of(1e-2), c2 = cinf_of(1e-1), c3 = cinf_of(1.0);
  CHECK(c0 > 0.0);
  CHECK(c0 < c1);
  CHECK(c1 < c2);
  CHECK(c2 < c3);
  // int_0^{0.01} |K| finite and < int_0^{0.1} |K|
  CHECK(std::isfinite(c1));
}

TEST_CASE("Laplace identity for the computed kernel") {
  for (double s : {2.0, M_E, 10.0}) {
    CHECK(laplace_identity_residual(s) < 1e-3);
  }
}

TEST_CASE("kernel table, inversion roundtrip and linearity") {
  TimeGrid g(0.0, 1.0, 513);
  KernelTable tab = build_kernel_table(g.length(), g.n, 1e-5);
  CHECK(tab.c_inf == Catch::Approx(cinf_of(1.0)).epsilon(2e-4));

  std::vector<double> f(g.n), fp(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    f[i] = std::sin(g.tau(i));
    fp[i] = std::cos(g.tau(i));
  }
  auto Tf = t_apply(f, fp, g.h());
  auto back = t_inverse_apply(Tf, tab);
  double sup = 0.0, supf = max_abs(f);
  for (std::size_t i = 0; i < g.n; ++i)
    sup = std::max(sup, std::abs(back[i] - (f[i] - f[0])));
  CHECK(sup <= 1e-3 * supf);

  // linearity: T^{-1}[2h] = 2 T^{-1}[h] up to rounding
  std::vector<double> Tf2(Tf);
  for (double& v : Tf2) v *= 2.0;
  auto back2 = t_inverse_apply(Tf2, tab);
  for (std::size_t i = 0; i < g.n; i += 64)
    CHECK(back2[i] == Catch::Approx(2.0 * back[i]).margin(1e-15 + 1e-12 * std::abs(back[i])));

  // nonzero initial value rejected
  std::vector<double> bad(g.n, 1.0);
  try {
    t_inverse_apply(bad, tab);
    FAIL("expected NonzeroInitialValue");
  } catch (const error& e) {
    CHECK(e.code() == errc::nonzero_initial_value);
  }
}

TEST_CASE("causality: output up to tau unaffected by later samples") {
  TimeGrid g(0.0, 1.0, 257);
  KernelTable tab = build_kernel_table(g.length(), g.n, 1e-5);
  std::vector<double> h1(g.n), h2(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    h1[i] = std::sin(3.0 * g.tau(i));
    h2[i] = h1[i] + (g.tau(i) > 0.5 ? 10.0 : 0.0);
  }
  h1[0] = h2[0] = 0.0;
  auto o1 = t_inverse_apply(h1, tab);
  auto o2 = t_inverse_apply(h2, tab);
  for (std::size_t i = 0; i < g.n; ++i) {
    if (g.tau(i) <= 0.5) CHECK(o1[i] == o2[i]);  // bitwise
  }

  // translation covariance of T: identical samples give identical output
  std::vector<double> fp(g.n);
  for (std::size_t i = 0; i < g.n; ++i) fp[i] = std::cos(2.0 * g.tau(i));
  auto a = t_apply_from_derivative(fp, g.h());
  auto b = t_apply_from_derivative(fp, g.h());  // same origin-free computation
  for (std::size_t i = 0; i < g.n; i += 32) CHECK(a[i] == b[i]);
}

TEST_CASE("roundtrip on a family of smooth functions with refinement order") {
  auto run = [&](std::size_t n) {
    TimeGrid g(0.0, 1.0, n);
    KernelTable tab = build_kernel_table(g.length(), g.n, 1e-5);
    double worst = 0.0;
    for (int fam = 0; fam < 5; ++fam) {
      std::vector<double> f(g.n), fp(g.n);
      for (std::size_t i = 0; i < g.n; ++i) {
        double x = g.tau(i);
        switch (fam) {
          case 0: f[i] = x * x; fp[i] = 2.0 * x; break;
          case 1: f[i] = std::sin(2.0 * x); fp[i] = 2.0 * std::cos(2.0 * x); break;
          case 2: f[i] = std::exp(-x); fp[i] = -std::exp(-x); break;
          case 3: f[i] = x; fp[i] = 1.0; break;
          default: f[i] = std::cos(3.0 * x); fp[i] = -3.0 * std::sin(3.0 * x); break;
        }
      }
      auto Tf = t_apply(f, fp, g.h());
      auto back = t_inverse_apply(Tf, tab);
      double sup = 0.0, supf = max_abs(f);
      for (std::size_t i = 0; i < g.n; ++i)
        sup = std::max(sup, std::abs(back[i] - (f[i] - f[0])));
      worst = std::max(worst, sup / supf);
    }
    return worst;
  };
  double e_coarse = run(257);
  double e_fine = run(513);
  CHECK(e_coarse <= 1e-3);
  CHECK(e_fine < e_coarse);
  CHECK(e_coarse / e_fine > 1.8);  // observed order >= 1
}

TEST_CASE("unboundedness demonstration") {
  double x1 = 0.3, x2 = 0.6, r = 0.95;
  // pointwise limit -(1/8pi^2) log(x - x1) inside (x1, x2)
  auto res = unboundedness_demo(1e-6, x1, x2, r);
  CHECK(res.sup_f == Catch::Approx(1.0).margin(1e-12));
  double xprobe = 0.45;
  std::size_t best = 0;
  for (std::size_t i = 0; i < res.xs.size(); ++i)
    if (std::abs(res.xs[i] - xprobe) < std::abs(res.xs[best] - xprobe)) best = i;
  double expect = -inv_8pi2 * std::log(res.xs[best] - x1);
  CHECK(res.Tf[best] == Catch::Approx(expect).margin(1e-3));

  // slope of sup-norm against log(1/eps) approaches 1/(8 pi^2)
  std::vector<double> eps = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> sup;
  for (double e : eps) sup.push_back(unboundedness_demo(e, x1, x2, r).sup_norm);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    double x = std::log(1.0 / eps[i]);
    sx += x;
    sy += sup[i];
    sxx += x * x;
    sxy += x * sup[i];
  }
  double n = static_cast<double>(eps.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == Catch::Approx(inv_8pi2).epsilon(0.10));
}

TEST_CASE("kernel table cache: bit-exact hit") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "sce_ktab_test.bin";
  KernelTable t1 = build_kernel_table(0.5, 129, 1e-5);
  save_kernel_table(t1, path.string());
  KernelTable t2;
  REQUIRE(load_kernel_table(path.string(), 0.5, 129, 1e-5, &t2));
  CHECK(t2.A == t1.A);  // bitwise
  CHECK(t2.B == t1.B);
  CHECK(t2.c_inf == t1.c_inf);
  KernelTable t3;
  CHECK_FALSE(load_kernel_table(path.string(), 0.5, 128, 1e-5, &t3));
  fs::remove(path);
}
