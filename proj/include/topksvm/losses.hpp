#ifndef TOPKSVM_LOSSES_HPP
#define TOPKSVM_LOSSES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "topksvm/numkit.hpp"

namespace topksvm {

enum class LossVariant : std::uint8_t {
  topk_alpha = 0,  // max{0, (1/k) sum_{j<=k} (a+c)_[j]}
  topk_beta = 1,   // (1/k) sum_{j<=k} max{0, (a+c)_[j]}
};

std::string_view to_string(LossVariant v) noexcept;
LossVariant parse_loss_variant(std::string_view s);

struct LossSpec {
  LossVariant variant = LossVariant::topk_alpha;
  std::size_t k = 1;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

// Margins of one example relative to its ground-truth class:
// a_j = <w_j, x> - <w_y, x>, so a_y = 0.
class MarginVector {
 public:
  MarginVector(Vector margins, std::size_t label);
  static MarginVector from_scores(std::span<const double> scores,
                                  std::size_t label);

  std::span<const double> margins() const noexcept { return a_; }
  std::size_t label() const noexcept { return y_; }
  std::size_t size() const noexcept { return a_.size(); }

  /// a + c with c = 1 - e_y.
  Vector shifted() const;

 private:
  Vector a_;
  std::size_t y_;
};

double loss_primal(const MarginVector& mv, const LossSpec& spec);

/// max{0, (a+c)_[k]}: the top-k error with margin 1, as a nonconvex loss.
/// Evaluation only.
double topk_margin_loss(const MarginVector& mv, std::size_t k);

/// Membership tolerance for Delta_k and its box variant.
inline constexpr double kDomainTolerance = 1e-9;

bool in_topk_simplex(std::span<const double> b, std::size_t k, double r,
                     double tol = kDomainTolerance);
bool in_topk_box(std::span<const double> b, std::size_t k, double r,
                 double tol = kDomainTolerance);

/// b extended by one coordinate t >= 0 lies in Delta_k(r). For k >= 2 this
/// is Delta_{k-1}(r) with the extra cap b_i <= r/k. It is the dual domain
/// of the alpha loss once the ground-truth coordinate is fixed to zero.
bool in_topk_lifted(std::span<const double> b, std::size_t k, double r,
                    double tol = kDomainTolerance);

/// -<c, b> on the loss's conjugate domain (Delta_k for alpha, the box set
/// for beta), +infinity outside it.
double loss_conjugate(std::span<const double> b, std::size_t label,
                      const LossSpec& spec);

/// 1 iff the k-th largest score strictly exceeds the ground-truth score.
/// k = len(scores) is allowed and always gives 0.
int topk_error(std::span<const double> scores, std::size_t label,
               std::size_t k);

}  // namespace topksvm

#endif  // TOPKSVM_LOSSES_HPP
