#pragma once

// Log-spaced wavenumber grid with trapezoidal weights in log k, the small-k
// closure and the fitted power-law tail estimate, plus the per-k mode table
// used by the state sums.

#include <cmath>
#include <vector>

#include "sce/errors.hpp"
#include "sce/grid.hpp"
#include "sce/modes.hpp"
#include "sce/parallel.hpp"

namespace sce {

struct KGrid {
  std::vector<double> k;  // ascending, k[0] > 0
  std::vector<double> w;  // quadrature weights for int dk

  static KGrid logspaced(double kmin, double kmax, std::size_t nodes) {
    if (!(kmin > 0.0) || !(kmax > kmin) || nodes < 8)
      fail(errc::config_error, "KGrid requires 0 < kmin < kmax and >= 8 nodes");
    KGrid g;
    g.k.resize(nodes);
    g.w.assign(nodes, 0.0);
    double dl = std::log(kmax / kmin) / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) g.k[i] = kmin * std::exp(dl * static_cast<double>(i));
    // trapezoid in log k: int f dk = int f k dlog k
    for (std::size_t i = 0; i < nodes; ++i) {
      double wl = (i == 0 || i + 1 == nodes) ? 0.5 : 1.0;
      g.w[i] = wl * dl * g.k[i];
    }
    return g;
  }
};

// Integrates samples f_i (already including any k^2 measure factors) over the
// grid; the [0, kmin] closure assumes f ~ k^2 near zero.
inline double kgrid_integrate(const KGrid& g, const std::vector<double>& f) {
  KahanSum s;
  for (std::size_t i = 0; i < g.k.size(); ++i) s.add(g.w[i] * f[i]);
  s.add(f[0] * g.k[0] / 3.0);
  return s.value();
}

struct TailFit {
  double coefficient = 0.0;
  double exponent = 0.0;
  double tail_integral = 0.0;  // int_{kmax}^inf c k^{-p} dk when p > 1
  bool integrable = false;
};

// Least-squares fit of log |f| against log k over the top octave.
inline TailFit fit_power_tail(const KGrid& g, const std::vector<double>& f,
                              double abs_floor = 0.0) {
  TailFit t;
  std::size_t n = g.k.size();
  double ktop = g.k.back();
  std::size_t lo = n;
  while (lo > 0 && g.k[lo - 1] > 0.5 * ktop) --lo;
  if (n - lo < 4) lo = n >= 6 ? n - 6 : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  double fmax = 0.0;
  for (std::size_t i = lo; i < n; ++i) fmax = std::max(fmax, std::abs(f[i]));
  if (fmax <= abs_floor) {
    // numerically zero tail: treat as infinitely steep
    t.exponent = 1e3;
    t.integrable = true;
    return t;
  }
  for (std::size_t i = lo; i < n; ++i) {
    double v = std::abs(f[i]);
    if (v < 1e-300) continue;
    double x = std::log(g.k[i]), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 3) {
    t.exponent = 0.0;
    return t;
  }
  double d = cnt * sxx - sx * sx;
  double slope = (cnt * sxy - sx * sy) / d;
  double inter = (sy - slope * sx) / cnt;
  t.exponent = -slope;
  t.coefficient = std::exp(inter);
  if (t.exponent > 1.05) {
    t.integrable = true;
    t.tail_integral = t.coefficient * std::pow(ktop, 1.0 - t.exponent) / (t.exponent - 1.0);
  }
  return t;
}

// Per-k mode data along a trajectory: the full solution plus the low Dyson
// orders and the n >= 3 remainder pieces feeding the mode sums.
struct ModeEntry {
  ModeParams mp;
  ModeSolution full;            // chi, chi'
  std::vector<cplx> c0, c0p;    // order 0
  std::vector<cplx> c1, c1p;    // order 1
  std::vector<cplx> c2, c2p;    // order 2
  std::vector<cplx> ct, ctp;    // sum of orders >= 3 (Dyson route) or full - orders
  bool dyson = false;           // remainder computed from pure Dyson terms
  double tail_bound = 0.0;
};

struct ModeTable {
  KGrid grid;
  std::vector<ModeEntry> entries;
};

// Builds the table for a given potential V on the time grid. Per k the Dyson
// route is used when z = ||V||_1/k0 <= z_switch, direct integration otherwise.
inline ModeTable build_mode_table(const KGrid& kg, double w0sq, const std::vector<double>& V,
                                  const TimeGrid& tg, double tol = 1e-9,
                                  double z_switch = 0.5) {
  ModeTable t;
  t.grid = kg;
  t.entries.resize(kg.k.size());
  double Vl1 = 0.0;
  for (std::size_t i = 1; i < tg.n; ++i)
    Vl1 += 0.5 * tg.h() * (std::abs(V[i - 1]) + std::abs(V[i]));

  parallel_for(kg.k.size(), [&](std::size_t idx) {
    ModeEntry& e = t.entries[idx];
    e.mp = ModeParams(kg.k[idx], w0sq);
    double z = Vl1 / e.mp.k0;
    std::size_t n = tg.n;
    if (z <= z_switch) {
      std::size_t N = dyson_order_for(z, e.mp.k0, tol);
      N = std::max<std::size_t>(N, 3);
      DysonModes d = dyson_terms(e.mp, V, tg, N);
      e.dyson = true;
      e.tail_bound = d.tail_bound;
      e.c0 = d.term[0];
      e.c0p = d.term_p[0];
      e.c1 = d.term[1];
      e.c1p = d.term_p[1];
      e.c2 = d.term[2];
      e.c2p = d.term_p[2];
      e.ct.assign(n, cplx{});
      e.ctp.assign(n, cplx{});
      for (std::size_t o = 3; o < d.term.size(); ++o)
        for (std::size_t i = 0; i < n; ++i) {
          e.ct[i] += d.term[o][i];
          e.ctp[i] += d.term_p[o][i];
        }
      e.full = d.sum();
    } else {
      e.full = solve_mode_ode(e.mp, V, tg);
      DysonModes d = dyson_terms(e.mp, V, tg, 2);
      e.dyson = false;
      e.tail_bound = 0.0;
      e.c0 = d.term[0];
      e.c0p = d.term_p[0];
      e.c1 = d.term[1];
      e.c1p = d.term_p[1];
      e.c2 = d.term[2];
      e.c2p = d.term_p[2];
      e.ct.assign(n, cplx{});
      e.ctp.assign(n, cplx{});
      for (std::size_t i = 0; i < n; ++i) {
        e.ct[i] = e.full.chi[i] - e.c0[i] - e.c1[i] - e.c2[i];
        e.ctp[i] = e.full.chip[i] - e.c0p[i] - e.c1p[i] - e.c2p[i];
      }
    }
  });
  return t;
}

}  // namespace sce
