#include "topksvm/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace topksvm {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw std::invalid_argument("matrix: expected " +
                                std::to_string(rows_ * cols_) +
                                " values, got " +
                                std::to_string(values_.size()));
  }
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

double Matrix::squared_norm() const noexcept { return dot(values_, values_); }

void require_finite(std::span<const double> v, std::string_view what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) +
                                  ": non-finite entry");
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum(std::span<const double> v) noexcept {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

namespace {

void check_rank(std::span<const double> v, std::size_t k, const char* who) {
  if (k < 1 || k > v.size()) {
    throw std::invalid_argument(std::string(who) + ": k=" + std::to_string(k) +
                                " out of range [1, " +
                                std::to_string(v.size()) + "]");
  }
}

}  // namespace

double sum_top_k(std::span<const double> v, std::size_t k) {
  check_rank(v, k, "sum_top_k");
  if (k == v.size()) return sum(v);
  Vector work(v.begin(), v.end());
  std::nth_element(work.begin(), work.begin() + (k - 1), work.end(),
                   std::greater<>());
  return std::accumulate(work.begin(), work.begin() + k, 0.0);
}

double kth_largest(std::span<const double> v, std::size_t k) {
  check_rank(v, k, "kth_largest");
  Vector work(v.begin(), v.end());
  std::nth_element(work.begin(), work.begin() + (k - 1), work.end(),
                   std::greater<>());
  return work[k - 1];
}

SortedDesc sorted_desc_with_index(std::span<const double> v) {
  SortedDesc out;
  out.order.resize(v.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
  out.values.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out.values[j] = v[out.order[j]];
  return out;
}

void rank1_update(Matrix& W, std::span<const double> x,
                  std::span<const double> delta) {
  if (W.rows() != x.size() || W.cols() != delta.size()) {
    throw std::invalid_argument("rank1_update: shape mismatch");
  }
  for (std::size_t j = 0; j < delta.size(); ++j) {
    const double dj = delta[j];
    if (dj == 0.0) continue;
    auto w = W.col(j);
    for (std::size_t r = 0; r < x.size(); ++r) w[r] += x[r] * dj;
  }
}

}  // namespace topksvm
