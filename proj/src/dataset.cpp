#include "topksvm/dataset.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace topksvm {

void Dataset::validate() const {
  if (X.cols() == 0) throw std::invalid_argument("dataset: no examples");
  if (X.rows() == 0) throw std::invalid_argument("dataset: no features");
  if (labels.size() != X.cols()) {
    throw std::invalid_argument("dataset: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(X.cols()) +
                                " examples");
  }
  if (label_values.empty()) throw std::invalid_argument("dataset: no classes");
  if (!std::is_sorted(label_values.begin(), label_values.end()) ||
      std::adjacent_find(label_values.begin(), label_values.end()) !=
          label_values.end()) {
    throw std::invalid_argument("dataset: label table must be strictly increasing");
  }
  for (std::size_t y : labels) {
    if (y >= label_values.size()) {
      throw std::invalid_argument("dataset: class index out of range");
    }
  }
  require_finite(X.values(), "dataset features");
}

Dataset make_dataset(Matrix X, std::span<const std::int64_t> raw_labels) {
  std::vector<std::int64_t> table(raw_labels.begin(), raw_labels.end());
  std::sort(table.begin(), table.end());
  table.erase(std::unique(table.begin(), table.end()), table.end());
  return make_dataset(std::move(X), raw_labels, std::move(table));
}

Dataset make_dataset(Matrix X, std::span<const std::int64_t> raw_labels,
                     std::vector<std::int64_t> label_values) {
  Dataset data;
  data.X = std::move(X);
  data.label_values = std::move(label_values);
  data.labels.reserve(raw_labels.size());
  for (std::int64_t raw : raw_labels) {
    auto it = std::lower_bound(data.label_values.begin(),
                               data.label_values.end(), raw);
    if (it == data.label_values.end() || *it != raw) {
      throw std::invalid_argument("dataset: label " + std::to_string(raw) +
                                  " not in label table");
    }
    data.labels.push_back(
        static_cast<std::size_t>(it - data.label_values.begin()));
  }
  data.validate();
  return data;
}

}  // namespace topksvm
