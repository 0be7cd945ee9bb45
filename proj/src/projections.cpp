#include "topksvm/projections.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace topksvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Comparisons against partition windows get this much room, relative to the
// magnitude of the input, so that rounding at a breakpoint does not reject
// the right partition.
constexpr double kWindowSlack = 1e-12;

double input_scale(std::span<const double> a) {
  double s = 1.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

ProjectionResult finalize(std::span<const double> a, double lower, double u,
                          double t) {
  ProjectionResult res;
  res.t = t;
  res.u = u;
  res.x.resize(a.size());
  res.partition.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a[i] - t;
    if (v <= lower) {
      res.partition[i] = Side::lower;
    } else if (v >= u) {
      res.partition[i] = Side::upper;
    } else {
      res.partition[i] = Side::middle;
    }
    res.x[i] = std::min(std::max(lower, v), u);
  }
  return res;
}

ProjectionResult zero_projection(std::span<const double> a, double u = 0.0) {
  double t = 0.0;
  for (double v : a) t = std::max(t, v);
  return finalize(a, 0.0, u, t);
}

void check_knapsack(std::span<const double> a, double lower, double upper,
                    double rhs) {
  if (a.empty()) throw std::invalid_argument("knapsack: empty input");
  require_finite(a, "knapsack");
  if (!std::isfinite(lower) || !std::isfinite(upper) || !std::isfinite(rhs)) {
    throw std::invalid_argument("knapsack: non-finite bound");
  }
  if (lower > upper) {
    throw std::invalid_argument("knapsack: lower bound exceeds upper bound");
  }
  const double d = static_cast<double>(a.size());
  const double tol = 1e-12 * std::max(1.0, std::abs(rhs));
  if (rhs < d * lower - tol || rhs > d * upper + tol) {
    throw std::invalid_argument("knapsack: rhs " + std::to_string(rhs) +
                                " outside [" + std::to_string(d * lower) +
                                ", " + std::to_string(d * upper) + "]");
  }
}

// The k largest entries: their sum, the k-th largest and the (k+1)-th
// largest (-inf when k = d). Linear time.
struct TopKStats {
  double sum = 0.0;
  double kth = 0.0;
  double next = -kInf;
};

TopKStats top_k_stats(std::span<const double> a, std::size_t k) {
  Vector work(a.begin(), a.end());
  std::nth_element(work.begin(), work.begin() + (k - 1), work.end(),
                   std::greater<>());
  TopKStats s;
  s.kth = work[k - 1];
  s.sum = std::accumulate(work.begin(), work.begin() + k, 0.0);
  for (std::size_t i = k; i < work.size(); ++i) s.next = std::max(s.next, work[i]);
  return s;
}

// Case 2 of the cone projection: the k largest coordinates share the value
// u, the rest are zero. Returns nothing if the thresholds are inconsistent.
std::optional<ProjectionResult> constant_projection(std::span<const double> a,
                                                    std::size_t k, double rho,
                                                    const TopKStats& s,
                                                    double slack) {
  const double kd = static_cast<double>(k);
  const double u = s.sum / (kd + rho * kd * kd);
  const double t_hi = s.kth - u;
  if (s.next > t_hi + slack) return std::nullopt;
  const double t = std::min(std::max(0.0, s.next), t_hi);
  return finalize(a, 0.0, u, t);
}

}  // namespace

void TopKSimplexSpec::validate() const {
  if (k < 1) throw std::invalid_argument("top-k simplex: k must be >= 1");
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("top-k simplex: r must be finite and >= 0");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("top-k simplex: rho must be finite and >= 0");
  }
}

ProjectionResult project_knapsack(std::span<const double> a, double lower,
                                  double upper, double rhs) {
  check_knapsack(a, lower, upper, rhs);

  // Variable fixing: guess t from the free set, then fix every coordinate
  // on the side whose total violation is larger. Each round removes at
  // least one coordinate.
  Vector free(a.begin(), a.end());
  double target = rhs;
  double lower_fixed_max = -kInf;  // max over fixed-at-lower of a_i - lower
  double upper_fixed_min = kInf;   // min over fixed-at-upper of a_i - upper
  double t = 0.0;
  bool solved = false;

  while (!free.empty()) {
    t = (sum(free) - target) / static_cast<double>(free.size());
    double below = 0.0;
    double above = 0.0;
    for (double v : free) {
      const double x = v - t;
      if (x < lower) {
        below += lower - x;
      } else if (x > upper) {
        above += x - upper;
      }
    }
    if (below == above) {
      solved = true;
      break;
    }
    std::size_t keep = 0;
    if (below > above) {
      for (double v : free) {
        if (v - t <= lower) {
          target -= lower;
          lower_fixed_max = std::max(lower_fixed_max, v - lower);
        } else {
          free[keep++] = v;
        }
      }
    } else {
      for (double v : free) {
        if (v - t >= upper) {
          target -= upper;
          upper_fixed_min = std::min(upper_fixed_min, v - upper);
        } else {
          free[keep++] = v;
        }
      }
    }
    free.resize(keep);
  }

  // Everything fixed: any t in [lower_fixed_max, upper_fixed_min] works.
  // Take the largest one.
  if (!solved) {
    t = std::isfinite(upper_fixed_min) ? upper_fixed_min : lower_fixed_max;
  }
  return finalize(a, lower, upper, t);
}

ProjectionResult project_knapsack_sorted(std::span<const double> a,
                                         double lower, double upper,
                                         double rhs) {
  check_knapsack(a, lower, upper, rhs);
  const std::size_t d = a.size();

  // Sweep t upward. At a_i - upper coordinate i leaves its upper bound, at
  // a_i - lower it reaches its lower bound.
  struct Event {
    double at;
    bool to_lower;
    double value;
  };
  std::vector<Event> events;
  events.reserve(2 * d);
  for (double v : a) {
    events.push_back({v - upper, false, v});
    events.push_back({v - lower, true, v});
  }
  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    if (x.at != y.at) return x.at < y.at;
    return !x.to_lower && y.to_lower;
  });

  const double tol = 1e-12 * std::max(1.0, std::abs(rhs));
  const double slack = kWindowSlack * input_scale(a);
  std::size_t n_up = d;
  std::size_t n_free = 0;
  std::size_t n_low = 0;
  double free_sum = 0.0;
  double prev = -kInf;
  double t = events.back().at;
  bool found = false;

  for (std::size_t e = 0; e <= events.size() && !found; ) {
    const double next = e < events.size() ? events[e].at : kInf;
    const double fixed = static_cast<double>(n_up) * upper +
                         static_cast<double>(n_low) * lower;
    if (n_free > 0) {
      const double cand =
          (fixed + free_sum - rhs) / static_cast<double>(n_free);
      if (cand >= prev - slack && cand <= next + slack) {
        t = cand;
        found = true;
        break;
      }
    } else if (std::abs(fixed - rhs) <= tol) {
      t = n_up > 0 ? next : prev;
      found = true;
      break;
    }
    if (e == events.size()) break;
    // Apply all events at this position.
    const double at = events[e].at;
    while (e < events.size() && events[e].at == at) {
      if (events[e].to_lower) {
        --n_free;
        ++n_low;
        free_sum -= events[e].value;
      } else {
        --n_up;
        ++n_free;
        free_sum += events[e].value;
      }
      ++e;
    }
    prev = at;
  }

  if (found) {
    // Re-sum the free set once to shed the drift of the running sum.
    double fixed = 0.0;
    double fsum = 0.0;
    std::size_t nf = 0;
    for (double v : a) {
      const double x = v - t;
      if (x <= lower) {
        fixed += lower;
      } else if (x >= upper) {
        fixed += upper;
      } else {
        fsum += v;
        ++nf;
      }
    }
    if (nf > 0) t = (fixed + fsum - rhs) / static_cast<double>(nf);
  }
  return finalize(a, lower, upper, t);
}

ProjectionResult project_topk_cone(std::span<const double> a, std::size_t k,
                                   double rho) {
  const std::size_t d = a.size();
  if (k < 1 || k > d) {
    throw std::invalid_argument("top-k cone: k=" + std::to_string(k) +
                                " out of range [1, " + std::to_string(d) + "]");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("top-k cone: rho must be finite and >= 0");
  }
  require_finite(a, "top-k cone");

  const double slack = kWindowSlack * input_scale(a);
  const TopKStats stats = top_k_stats(a, k);
  if (stats.sum <= 0.0) return zero_projection(a);
  if (auto c = constant_projection(a, k, rho, stats, slack)) return *c;

  // General case: sorted partitions U = [0, nu), M = [nu, nu + nm),
  // L = the rest, with 0 <= nu < k <= nu + nm <= d. The thresholds solve a
  // 2x2 linear system; accept the first pair that is consistent with its
  // own partition.
  const Vector v = sorted_desc_with_index(a).values;
  Vector prefix(d + 1, 0.0);
  for (std::size_t i = 0; i < d; ++i) prefix[i + 1] = prefix[i] + v[i];

  const double kd = static_cast<double>(k);
  for (std::size_t nu = 0; nu < k; ++nu) {
    const double nud = static_cast<double>(nu);
    const double sum_u = prefix[nu];
    const double max_u_floor = nu > 0 ? v[nu - 1] : kInf;  // min over U
    for (std::size_t nm = std::max<std::size_t>(1, k - nu); nu + nm <= d;
         ++nm) {
      const double nmd = static_cast<double>(nm);
      const double sum_m = prefix[nu + nm] - sum_u;
      const double denom =
          (kd - nud) * (kd - nud) + (nud + rho * kd * kd) * nmd;
      const double u = (nmd * sum_u + (kd - nud) * sum_m) / denom;
      const double t_prime = (nud * (1.0 + rho * kd) * sum_m -
                              (kd - nud + rho * kd * nmd) * sum_u) /
                             denom;
      const double t = t_prime + rho * u * kd;

      const double max_l = nu + nm < d ? v[nu + nm] : -kInf;
      const double min_m = v[nu + nm - 1];
      const double max_m = v[nu];
      if (max_l <= t + slack && t <= min_m + slack &&
          max_m <= t + u + slack && t + u <= max_u_floor + slack) {
        return finalize(a, 0.0, u, t);
      }
    }
  }

  // Only reachable for rho > 0, where the zero test above is sufficient but
  // not necessary.
  ProjectionResult res = zero_projection(a);
  res.fallback = true;
  return res;
}

ProjectionResult project_topk_simplex(std::span<const double> a,
                                      const TopKSimplexSpec& spec) {
  spec.validate();
  const std::size_t d = a.size();
  if (d == 0) throw std::invalid_argument("top-k simplex: empty input");
  if (spec.k > d) {
    throw std::invalid_argument("top-k simplex: k=" + std::to_string(spec.k) +
                                " exceeds dimension " + std::to_string(d));
  }
  require_finite(a, "top-k simplex");
  if (spec.r == 0.0) return zero_projection(a);

  const double slack = kWindowSlack * input_scale(a);
  const double kd = static_cast<double>(spec.k);
  const TopKStats stats = top_k_stats(a, spec.k);
  if (stats.sum <= 0.0) return zero_projection(a);

  // Constant cone solution that already satisfies the radius bound.
  if (auto c = constant_projection(a, spec.k, spec.rho, stats, slack)) {
    if (kd * c->u <= spec.r) return *c;
  }

  // Assume <1,x> = r and check the sign of the radius multiplier.
  ProjectionResult kn = project_knapsack(a, 0.0, spec.r / kd, spec.r);
  double sum_upper = 0.0;
  double n_upper = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (kn.partition[i] == Side::upper) {
      sum_upper += a[i];
      n_upper += 1.0;
    }
  }
  const double p = sum_upper - n_upper * (kn.t + kn.u);
  const double multiplier = kn.t + p / kd - spec.rho * spec.r;
  if (multiplier >= -slack) return kn;

  return project_topk_cone(a, spec.k, spec.rho);
}

ProjectionResult project_capped_simplex(std::span<const double> a, double cap,
                                        double r, double rho) {
  const std::size_t d = a.size();
  if (d == 0) throw std::invalid_argument("capped simplex: empty input");
  if (!(cap >= 0.0) || !std::isfinite(cap)) {
    throw std::invalid_argument("capped simplex: cap must be finite and >= 0");
  }
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("capped simplex: r must be finite and >= 0");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("capped simplex: rho must be finite and >= 0");
  }
  require_finite(a, "capped simplex");
  if (r == 0.0 || cap == 0.0) return zero_projection(a, cap);

  // Sum constraint active: plain knapsack, valid when its multiplier t
  // satisfies t >= rho * r.
  if (r < static_cast<double>(d) * cap) {
    ProjectionResult kn = project_knapsack(a, 0.0, cap, r);
    if (kn.t >= rho * r) return kn;
  }
  if (rho == 0.0) return finalize(a, 0.0, cap, 0.0);

  // Sum constraint inactive: t = rho * <1, x(t)>. The left side minus the
  // right side is strictly increasing in t, so exactly one interval between
  // breakpoints holds the root.
  struct Event {
    double at;
    bool to_lower;
    double value;
  };
  std::vector<Event> events;
  events.reserve(2 * d);
  for (double v : a) {
    events.push_back({v - cap, false, v});
    events.push_back({v, true, v});
  }
  std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
    if (x.at != y.at) return x.at < y.at;
    return !x.to_lower && y.to_lower;
  });

  const double slack = kWindowSlack * input_scale(a);
  const double inv_rho = 1.0 / rho;
  std::size_t n_up = d;
  std::size_t n_mid = 0;
  double mid_sum = 0.0;
  double prev = -kInf;
  double t = 0.0;
  for (std::size_t e = 0;;) {
    const double next = e < events.size() ? events[e].at : kInf;
    t = (cap * static_cast<double>(n_up) + mid_sum) /
        (inv_rho + static_cast<double>(n_mid));
    if (t >= prev - slack && t <= next + slack) break;
    if (e == events.size()) break;
    const double at = events[e].at;
    while (e < events.size() && events[e].at == at) {
      if (events[e].to_lower) {
        --n_mid;
        mid_sum -= events[e].value;
      } else {
        --n_up;
        ++n_mid;
        mid_sum += events[e].value;
      }
      ++e;
    }
    prev = at;
  }
  return finalize(a, 0.0, cap, t);
}

ProjectionResult project_topk_box(std::span<const double> a, std::size_t k,
                                  double r, double rho) {
  if (k < 1) throw std::invalid_argument("top-k box: k must be >= 1");
  return project_capped_simplex(a, 1.0 / static_cast<double>(k), r, rho);
}

ProjectionResult project_topk_lifted(std::span<const double> a, std::size_t k,
                                     double r, double rho) {
  if (k < 1) throw std::invalid_argument("lifted top-k: k must be >= 1");
  if (k == 1) return project_topk_simplex(a, {1, r, rho});
  if (k > a.size() + 1) {
    throw std::invalid_argument("lifted top-k: k=" + std::to_string(k) +
                                " exceeds dimension + 1");
  }
  // The set is Delta_{k-1}(r) cut by the box x_i <= r/k. If the projection
  // onto either piece lands in the other, it is the answer. Otherwise both
  // caps bind at the optimum, which pins <1,x> = r (k-1)/k.
  const double kd = static_cast<double>(k);
  const double cap = r / kd;
  const double slack = kWindowSlack * std::max(input_scale(a), r);

  ProjectionResult cone_part = project_topk_simplex(a, {k - 1, r, rho});
  if (*std::max_element(cone_part.x.begin(), cone_part.x.end()) <=
      cap + slack) {
    return cone_part;
  }
  ProjectionResult box_part = project_capped_simplex(a, cap, r, rho);
  const double box_sum = sum(box_part.x);
  if (*std::max_element(box_part.x.begin(), box_part.x.end()) <=
      box_sum / (kd - 1.0) + slack) {
    return box_part;
  }
  return project_knapsack(a, 0.0, cap, r * (kd - 1.0) / kd);
}

}  // namespace topksvm
