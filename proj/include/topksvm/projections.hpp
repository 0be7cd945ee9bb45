#ifndef TOPKSVM_PROJECTIONS_HPP
#define TOPKSVM_PROJECTIONS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "topksvm/numkit.hpp"

namespace topksvm {

// Where a coordinate of the solution sits relative to its two thresholds.
enum class Side : std::uint8_t {
  upper,   // x_i = u
  middle,  // lower < x_i < u
  lower,   // x_i = lower bound (0 for the top-k sets)
};

// Every projection below has the form x = min(max(lower, a - t), u) and
// reports the thresholds it used. `x` is always recomputed from (t, u), so
// the reconstruction is exact.
struct ProjectionResult {
  Vector x;
  double t = 0.0;
  double u = 0.0;
  std::vector<Side> partition;
  // Set when the biased cone search found no consistent partition and
  // returned zero. Should not happen for rho = 0.
  bool fallback = false;
};

// The biased projection problem
//   min ||a - x||^2 + rho <1,x>^2  over  Delta_k(r),
//   Delta_k(r) = { x : <1,x> <= r, 0 <= x_i <= <1,x>/k }.
struct TopKSimplexSpec {
  std::size_t k = 1;
  double r = 1.0;
  double rho = 0.0;

  void validate() const;
};

/// Continuous quadratic knapsack: argmin ||a - x||^2 subject to
/// <1,x> = rhs and lower <= x_i <= upper. Variable fixing, no sort.
ProjectionResult project_knapsack(std::span<const double> a, double lower,
                                  double upper, double rhs);

/// Same problem solved by sorting the breakpoints of <1, x(t)>.
/// Slower; kept as a cross-check for the variable-fixing solver.
ProjectionResult project_knapsack_sorted(std::span<const double> a,
                                         double lower, double upper,
                                         double rhs);

/// Biased projection onto the top-k cone { 0 <= x_i <= <1,x>/k }.
/// Requires 1 <= k <= len(a) and rho >= 0.
ProjectionResult project_topk_cone(std::span<const double> a, std::size_t k,
                                   double rho);

/// Biased projection onto the top-k simplex Delta_k(r).
ProjectionResult project_topk_simplex(std::span<const double> a,
                                      const TopKSimplexSpec& spec);

/// Biased projection onto { <1,x> <= r, 0 <= x_i <= cap }.
ProjectionResult project_capped_simplex(std::span<const double> a, double cap,
                                        double r, double rho);

/// Biased projection onto { <1,x> <= r, 0 <= x_i <= 1/k }, the domain of the
/// conjugate of the averaged top-k hinge loss.
ProjectionResult project_topk_box(std::span<const double> a, std::size_t k,
                                  double r, double rho);

/// Biased projection onto { x : (x, t) in Delta_k(r) for some t >= 0 },
/// i.e. Delta_k(r) in one more dimension with the extra coordinate left
/// free. Equals Delta_{k-1}(r) intersected with { x_i <= r/k } for k >= 2
/// and Delta_1(r) for k = 1. Requires 1 <= k <= len(a) + 1.
ProjectionResult project_topk_lifted(std::span<const double> a, std::size_t k,
                                     double r, double rho);

}  // namespace topksvm

#endif  // TOPKSVM_PROJECTIONS_HPP
