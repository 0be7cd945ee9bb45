#ifndef TOPKSVM_NUMKIT_HPP
#define TOPKSVM_NUMKIT_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace topksvm {

using Vector = std::vector<double>;

// Dense column-major matrix. Column j is contiguous, which is what the
// solver wants: w_j in W (d x m), x_i in X (d x n), a_i in A (m x n).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return values_[c * rows_ + r];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[c * rows_ + r];
  }

  std::span<double> col(std::size_t c) noexcept {
    return {values_.data() + c * rows_, rows_};
  }
  std::span<const double> col(std::size_t c) const noexcept {
    return {values_.data() + c * rows_, rows_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  void fill(double v);
  double squared_norm() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Throws std::invalid_argument naming `what` if any entry is NaN or Inf.
void require_finite(std::span<const double> v, std::string_view what);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double sum(std::span<const double> v) noexcept;

/// Sum of the k largest entries. O(d) by selection.
double sum_top_k(std::span<const double> v, std::size_t k);

/// The k-th largest entry (1-based k), selected by value.
double kth_largest(std::span<const double> v, std::size_t k);

struct SortedDesc {
  std::vector<std::size_t> order;  // order[j] = original index of j-th largest
  Vector values;                   // values[j] = v[order[j]]
};

/// Stable descending sort; equal values keep ascending original index order.
SortedDesc sorted_desc_with_index(std::span<const double> v);

/// W <- W + x * delta^T, with W of shape len(x) x len(delta).
void rank1_update(Matrix& W, std::span<const double> x,
                  std::span<const double> delta);

}  // namespace topksvm

#endif  // TOPKSVM_NUMKIT_HPP
