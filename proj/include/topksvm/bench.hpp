#ifndef TOPKSVM_BENCH_HPP
#define TOPKSVM_BENCH_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace topksvm {

struct BenchRow {
  std::size_t dim = 0;
  std::size_t k = 0;
  std::string method;  // "knapsack" or "topk_simplex"
  double seconds = 0.0;
};

// For every dimension, draws `samples` points a ~ N(0, I) and times, per k,
// the knapsack projection (upper = 1/k, rhs = 1) against the full top-k
// simplex projection onto Delta_k(1). Seconds are totals over the samples.
// Single-threaded.
std::vector<BenchRow> bench_projections(std::span<const std::size_t> dims,
                                        std::span<const std::size_t> ks,
                                        std::size_t samples,
                                        std::uint64_t seed);

}  // namespace topksvm

#endif  // TOPKSVM_BENCH_HPP
