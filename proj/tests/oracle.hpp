// Brute-force reference implementations used only by the tests.
#ifndef TOPKSVM_TESTS_ORACLE_HPP
#define TOPKSVM_TESTS_ORACLE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace oracle {

enum class Set {
  knapsack,  // <1,x> = rhs, lower <= x_i <= upper; rho ignored
  cone,      // 0 <= x_i <= <1,x>/k
  simplex,   // cone and <1,x> <= r
  box,       // 0 <= x_i <= cap, <1,x> <= r
  lifted,    // (x, t) in Delta_k(r) for some t >= 0
};

struct Problem {
  Set set = Set::simplex;
  std::size_t k = 1;
  double r = 1.0;
  double rho = 0.0;
  double cap = 1.0;
  double lower = 0.0;
  double upper = 1.0;
  double rhs = 1.0;
};

// argmin ||a - x||^2 + rho <1,x>^2 over the set, by enumerating every
// assignment of coordinates to {lower bound, free, upper bound} together
// with the sum constraint active or not. Each face is solved in closed form
// and the best feasible candidate wins. Only for len(a) <= 10.
std::vector<double> project(std::span<const double> a, const Problem& p);

// Same enumeration shared by several problems on one point.
std::vector<std::vector<double>> project_all(std::span<const double> a,
                                             std::span<const Problem> problems);

double objective(std::span<const double> a, std::span<const double> x,
                 double rho);

// Loss values as linear programs over the conjugate domain, maximized by
// enumerating the vertices. v is the shifted margin vector a + c.
double topk_alpha_via_vertices(std::span<const double> v, std::size_t k);
double topk_beta_via_vertices(std::span<const double> v, std::size_t k);

}  // namespace oracle

#endif
