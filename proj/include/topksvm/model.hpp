#ifndef TOPKSVM_MODEL_HPP
#define TOPKSVM_MODEL_HPP

#include <cstdint>
#include <vector>

#include "topksvm/losses.hpp"
#include "topksvm/numkit.hpp"

namespace topksvm {

// A trained linear top-k SVM: W is d x m, column j scores class j.
struct Model {
  Matrix W;
  LossSpec loss;
  double lambda = 0.0;
  std::vector<std::int64_t> label_values;

  std::size_t num_features() const noexcept { return W.rows(); }
  std::size_t num_classes() const noexcept { return W.cols(); }

  friend bool operator==(const Model&, const Model&) = default;
};

}  // namespace topksvm

#endif  // TOPKSVM_MODEL_HPP
