#include "topksvm/bench.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

#include "topksvm/numkit.hpp"
#include "topksvm/projections.hpp"

namespace topksvm {

std::vector<BenchRow> bench_projections(std::span<const std::size_t> dims,
                                        std::span<const std::size_t> ks,
                                        std::size_t samples,
                                        std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("bench: samples must be >= 1");
  for (std::size_t d : dims) {
    for (std::size_t k : ks) {
      if (k < 1 || k > d) {
        throw std::invalid_argument("bench: k=" + std::to_string(k) +
                                    " invalid for dim " + std::to_string(d));
      }
    }
  }

  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  volatile double sink = 0.0;

  for (std::size_t d : dims) {
    std::vector<double> knapsack_s(ks.size(), 0.0);
    std::vector<double> simplex_s(ks.size(), 0.0);
    Vector a(d);
    for (std::size_t s = 0; s < samples; ++s) {
      for (double& v : a) v = normal(rng);
      for (std::size_t q = 0; q < ks.size(); ++q) {
        const double kd = static_cast<double>(ks[q]);
        auto t0 = clock::now();
        const ProjectionResult kn = project_knapsack(a, 0.0, 1.0 / kd, 1.0);
        auto t1 = clock::now();
        const ProjectionResult sx = project_topk_simplex(a, {ks[q], 1.0, 0.0});
        auto t2 = clock::now();
        knapsack_s[q] += std::chrono::duration<double>(t1 - t0).count();
        simplex_s[q] += std::chrono::duration<double>(t2 - t1).count();
        sink = sink + kn.t + sx.t;
      }
    }
    for (std::size_t q = 0; q < ks.size(); ++q) {
      rows.push_back({d, ks[q], "knapsack", knapsack_s[q]});
      rows.push_back({d, ks[q], "topk_simplex", simplex_s[q]});
    }
  }
  return rows;
}

}  // namespace topksvm
