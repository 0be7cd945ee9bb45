#include "topksvm/losses.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace topksvm {

std::string_view to_string(LossVariant v) noexcept {
  switch (v) {
    case LossVariant::topk_alpha:
      return "alpha";
    case LossVariant::topk_beta:
      return "beta";
  }
  return "unknown";
}

LossVariant parse_loss_variant(std::string_view s) {
  if (s == "alpha") return LossVariant::topk_alpha;
  if (s == "beta") return LossVariant::topk_beta;
  throw std::invalid_argument("unknown loss variant '" + std::string(s) +
                              "' (expected alpha or beta)");
}

MarginVector::MarginVector(Vector margins, std::size_t label)
    : a_(std::move(margins)), y_(label) {
  if (y_ >= a_.size()) {
    throw std::invalid_argument("margin vector: label out of range");
  }
  if (a_[y_] != 0.0) {
    throw std::invalid_argument("margin vector: ground-truth margin must be 0");
  }
  require_finite(a_, "margin vector");
}

MarginVector MarginVector::from_scores(std::span<const double> scores,
                                       std::size_t label) {
  if (label >= scores.size()) {
    throw std::invalid_argument("margin vector: label out of range");
  }
  Vector a(scores.size());
  const double sy = scores[label];
  for (std::size_t j = 0; j < scores.size(); ++j) a[j] = scores[j] - sy;
  a[label] = 0.0;
  return MarginVector(std::move(a), label);
}

Vector MarginVector::shifted() const {
  Vector h(a_);
  for (std::size_t j = 0; j < h.size(); ++j) {
    if (j != y_) h[j] += 1.0;
  }
  return h;
}

namespace {

void check_loss_k(std::size_t k, std::size_t m) {
  if (k < 1 || k >= m) {
    throw std::invalid_argument("loss: k=" + std::to_string(k) +
                                " must satisfy 1 <= k < m=" +
                                std::to_string(m));
  }
}

}  // namespace

double loss_primal(const MarginVector& mv, const LossSpec& spec) {
  check_loss_k(spec.k, mv.size());
  Vector h = mv.shifted();
  const double kd = static_cast<double>(spec.k);
  if (spec.variant == LossVariant::topk_alpha) {
    return std::max(0.0, sum_top_k(h, spec.k) / kd);
  }
  for (double& v : h) v = std::max(0.0, v);
  return sum_top_k(h, spec.k) / kd;
}

double topk_margin_loss(const MarginVector& mv, std::size_t k) {
  const Vector h = mv.shifted();
  return std::max(0.0, kth_largest(h, k));
}

bool in_topk_simplex(std::span<const double> b, std::size_t k, double r,
                     double tol) {
  if (k < 1) return false;
  const double s = sum(b);
  if (s > r + tol) return false;
  const double cap = s / static_cast<double>(k);
  return std::all_of(b.begin(), b.end(), [&](double v) {
    return v >= -tol && v <= cap + tol;
  });
}

bool in_topk_box(std::span<const double> b, std::size_t k, double r,
                 double tol) {
  if (k < 1) return false;
  if (sum(b) > r + tol) return false;
  const double cap = 1.0 / static_cast<double>(k);
  return std::all_of(b.begin(), b.end(), [&](double v) {
    return v >= -tol && v <= cap + tol;
  });
}

bool in_topk_lifted(std::span<const double> b, std::size_t k, double r,
                    double tol) {
  if (k < 1) return false;
  const double s = sum(b);
  double bmax = 0.0;
  for (double v : b) {
    if (v < -tol) return false;
    bmax = std::max(bmax, v);
  }
  // Some t >= 0 with b_i <= (s + t)/k, t <= (s + t)/k and s + t <= r.
  const double kd = static_cast<double>(k);
  const double t_lo = std::max(0.0, kd * bmax - s);
  double t_hi = r - s;
  if (k > 1) t_hi = std::min(t_hi, s / (kd - 1.0));
  return t_lo <= t_hi + kd * tol;
}

double loss_conjugate(std::span<const double> b, std::size_t label,
                      const LossSpec& spec) {
  if (label >= b.size()) {
    throw std::invalid_argument("loss conjugate: label out of range");
  }
  require_finite(b, "loss conjugate");
  const bool feasible = spec.variant == LossVariant::topk_alpha
                            ? in_topk_simplex(b, spec.k, 1.0)
                            : in_topk_box(b, spec.k, 1.0);
  if (!feasible) return std::numeric_limits<double>::infinity();
  // <c, b> with c = 1 - e_y.
  return -(sum(b) - b[label]);
}

int topk_error(std::span<const double> scores, std::size_t label,
               std::size_t k) {
  if (label >= scores.size()) {
    throw std::invalid_argument("topk_error: label out of range");
  }
  return kth_largest(scores, k) > scores[label] ? 1 : 0;
}

}  // namespace topksvm
