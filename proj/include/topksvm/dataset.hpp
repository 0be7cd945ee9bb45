#ifndef TOPKSVM_DATASET_HPP
#define TOPKSVM_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "topksvm/numkit.hpp"

namespace topksvm {

// Training set S = {(x_i, y_i)}. Classes are stored 0-based internally;
// label_values[j] is the label as it appeared in the input for class j, so
// the 1-based class index of the math is labels[i] + 1.
struct Dataset {
  Matrix X;                               // d x n, one column per example
  std::vector<std::size_t> labels;        // n entries in [0, m)
  std::vector<std::int64_t> label_values; // m entries, strictly increasing

  std::size_t num_examples() const noexcept { return X.cols(); }
  std::size_t num_features() const noexcept { return X.rows(); }
  std::size_t num_classes() const noexcept { return label_values.size(); }

  /// Checks shapes, label range and finiteness. Throws std::invalid_argument.
  void validate() const;
};

/// Builds a dataset from raw label values, mapping the distinct values in
/// increasing order to classes 0..m-1.
Dataset make_dataset(Matrix X, std::span<const std::int64_t> raw_labels);

/// Same, but against a fixed label table. Raw labels missing from the
/// table are rejected.
Dataset make_dataset(Matrix X, std::span<const std::int64_t> raw_labels,
                     std::vector<std::int64_t> label_values);

}  // namespace topksvm

#endif  // TOPKSVM_DATASET_HPP
