#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sce/special_functions.hpp"

using namespace sce;

TEST_CASE("sine and cosine integrals against reference values") {
  // Abramowitz & Stegun style anchors
  CHECK(Si(1.0) == Catch::Approx(0.9460830703671830).epsilon(1e-12));
  CHECK(Si(10.0) == Catch::Approx(1.6583475942188740).epsilon(1e-12));
  CHECK(Ci(1.0) == Catch::Approx(0.3374039229009681).epsilon(1e-12));
  CHECK(Ci(10.0) == Catch::Approx(-0.0454564330044554).epsilon(1e-10));
  CHECK(Ci(0.5) == Catch::Approx(-0.1777840788066129).epsilon(1e-12));
  // Si(x) -> pi/2
  CHECK(Si(500.0) == Catch::Approx(0.5 * M_PI).margin(3e-3));
}

TEST_CASE("exponential integral E1") {
  CHECK(E1(1.0) == Catch::Approx(0.21938393439552026).epsilon(1e-12));
  CHECK(E1(0.5) == Catch::Approx(0.5597735947761607).epsilon(1e-12));
  CHECK(E1(10.0) == Catch::Approx(4.156968929685325e-6).epsilon(1e-10));
}

TEST_CASE("f2 matches its Ci definition and derivative") {
  for (double z : {1e-4, 0.3, 1.0, 4.0, 25.0}) {
    double direct = Ci(2.0 * z) - euler_gamma - std::log(2.0 * z);
    CHECK(f2_kernel(z) == Catch::Approx(direct).margin(1e-13));
  }
  CHECK(f2_kernel(0.0) == 0.0);
  // derivative by finite differences
  for (double z : {0.2, 1.7}) {
    double fd = (f2_kernel(z + 1e-6) - f2_kernel(z - 1e-6)) / 2e-6;
    CHECK(f2_kernel_prime(z) == Catch::Approx(fd).margin(1e-7));
  }
}

TEST_CASE("f1 anchors: value at zero and independent oscillatory quadrature") {
  CHECK(f1_kernel(0.0) == Catch::Approx(1.0 - std::log(2.0)).epsilon(1e-10));
  for (double z : {0.4, 1.3, 5.0}) {
    CHECK(f1_kernel(z) == Catch::Approx(oracles::f1_oracle(z)).margin(3e-9));
  }
  for (double z : {0.15, 0.9, 3.0}) {
    double fd = (f1_kernel(z + 1e-6) - f1_kernel(z - 1e-6)) / 2e-6;
    CHECK(f1_kernel_prime(z) == Catch::Approx(fd).margin(1e-6));
  }
}

TEST_CASE("smoothstep mollifier") {
  CHECK(smoothstep(-1.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(0.0) == Catch::Approx(0.5));
  double fd = (smoothstep(0.3 + 1e-7) - smoothstep(0.3 - 1e-7)) / 2e-7;
  CHECK(smoothstep_deriv(0.3) == Catch::Approx(fd).margin(1e-6));
}

TEST_CASE("oscillatory moment identities") {
  double c = 1.7, A = 2.0, B = 9.0;
  auto ref = [&](auto f) { return oracles::adaptive_simpson(f, A, B, 1e-13, 44); };
  CHECK(osc_cos_over_k(c, A, B) ==
        Catch::Approx(ref([&](double k) { return std::cos(c * k) / k; })).margin(1e-11));
  CHECK(osc_sin_over_k2(c, A, B) ==
        Catch::Approx(ref([&](double k) { return std::sin(c * k) / (k * k); })).margin(1e-11));
  CHECK(osc_cos_over_k3(c, A, B) ==
        Catch::Approx(ref([&](double k) { return std::cos(c * k) / (k * k * k); })).margin(1e-11));
  CHECK(osc_sin_over_k3(c, A, B) ==
        Catch::Approx(ref([&](double k) { return std::sin(c * k) / (k * k * k); })).margin(1e-11));
}
