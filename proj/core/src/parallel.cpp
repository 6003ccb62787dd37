#include "dislocore/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace dislocore {

namespace {

int env_thread_cap() {
  static const int cap = [] {
    if (const char* s = std::getenv("DISLOCORE_THREADS")) {
      const int v = std::atoi(s);
      if (v > 0) return v;
    }
    return 0;
  }();
  return cap;
}

}  // namespace

int effective_threads(int request) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int n = request > 0 ? request : hw;
  if (n > hw) n = hw;
  if (const int cap = env_thread_cap(); cap > 0 && n > cap) n = cap;
  return n < 1 ? 1 : n;
}

void parallel_chunks(std::size_t n, std::size_t grain,
                     const std::function<void(std::size_t, std::size_t)>& fn,
                     int threads) {
  if (n == 0) return;
  if (grain == 0) grain = 1;
  const std::size_t nchunks = (n + grain - 1) / grain;
  const int workers = effective_threads(threads);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t b = c * grain;
    const std::size_t e = std::min(n, b + grain);
    fn(b, e);
  };

  if (workers == 1 || nchunks == 1) {
    for (std::size_t c = 0; c < nchunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      run_chunk(c);
    }
  };
  std::vector<std::thread> pool;
  const int spawn = std::min<std::size_t>(workers, nchunks);
  pool.reserve(spawn - 1);
  for (int t = 1; t < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

double tree_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n == 1) return values[0];
  const std::size_t half = n / 2;
  return tree_sum(values.subspan(0, half)) + tree_sum(values.subspan(half));
}

double deterministic_sum(std::size_t n, std::size_t grain,
                         const std::function<double(std::size_t)>& term,
                         int threads) {
  if (n == 0) return 0.0;
  if (grain == 0) grain = 1;
  const std::size_t nchunks = (n + grain - 1) / grain;
  std::vector<double> partials(nchunks, 0.0);
  parallel_chunks(
      n, grain,
      [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += term(i);
        partials[b / grain] = s;
      },
      threads);
  return tree_sum(partials);
}

}  // namespace dislocore
