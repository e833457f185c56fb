#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sce {

// Thread cap shared by all parallel loops. 0 means hardware concurrency.
// The SCE_THREADS environment variable overrides the default; the CLI flag
// --threads overrides both.
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};
  return cap;
}

inline void set_max_threads(unsigned n) { thread_cap().store(n); }

inline unsigned effective_threads(std::size_t items) {
  unsigned cap = thread_cap().load();
  if (cap == 0) {
    if (const char* env = std::getenv("SCE_THREADS")) {
      long v = std::strtol(env, nullptr, 10);
      if (v > 0) cap = static_cast<unsigned>(v);
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (cap == 0 || cap > hw) cap = hw;
  if (items < cap) cap = static_cast<unsigned>(items);
  return cap == 0 ? 1 : cap;
}

// Runs fn(i) for i in [0, items). Work is split by index blocks; each fn(i)
// must write only to its own slot so results are independent of the thread
// count. Reductions over the results must be done afterwards in index order
// (bitwise reproducible sums).
template <class Fn>
inline void parallel_for(std::size_t items, Fn&& fn) {
  unsigned nt = effective_threads(items);
  if (nt <= 1) {
    for (std::size_t i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= items) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// Compensated (Kahan) accumulator; used for the fixed-order reductions.
struct KahanSum {
  double sum = 0.0;
  double cor = 0.0;
  void add(double x) {
    double y = x - cor;
    double t = sum + y;
    cor = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace sce
