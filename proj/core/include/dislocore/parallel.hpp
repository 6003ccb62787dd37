#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dislocore {

// Effective worker count: min(request, hardware, DISLOCORE_THREADS).
// request <= 0 means "as many as allowed".
int effective_threads(int request = 0);

// Runs fn(begin, end) over fixed-size chunks of [0, n). The chunk grid depends
// only on n and grain, never on the worker count, so per-chunk results are
// reproducible across thread counts.
void parallel_chunks(std::size_t n, std::size_t grain,
                     const std::function<void(std::size_t, std::size_t)>& fn,
                     int threads = 0);

// Pairwise (binary tree) reduction in fixed index order.
double tree_sum(std::span<const double> values);

// Chunked sum of term(i) over [0, n): each chunk is summed sequentially,
// chunk partials are combined by tree_sum. Bit-stable across thread counts.
double deterministic_sum(std::size_t n, std::size_t grain,
                         const std::function<double(std::size_t)>& term,
                         int threads = 0);

inline constexpr std::size_t kDefaultGrain = 2048;

}  // namespace dislocore
