#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace paththresh {

using Vector = std::vector<double>;

/// Dense column-major matrix. Columns are contiguous because every hot loop
/// in the library walks a design-matrix column (X_j^T v, projections).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[j * rows_ + i];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[j * rows_ + i];
  }

  std::span<double> col(std::size_t j) {
    assert(j < cols_);
    return {data_.data() + j * rows_, rows_};
  }
  std::span<const double> col(std::size_t j) const {
    assert(j < cols_);
    return {data_.data() + j * rows_, rows_};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  /// Appends a column; the matrix must have `rows()` rows (or be 0x0).
  void push_col(std::span<const double> v) {
    if (cols_ == 0 && rows_ == 0) rows_ = v.size();
    assert(v.size() == rows_);
    data_.insert(data_.end(), v.begin(), v.end());
    ++cols_;
  }

  void pop_col() {
    assert(cols_ > 0);
    data_.resize(data_.size() - rows_);
    --cols_;
  }

  void reserve_cols(std::size_t cols) { data_.reserve(rows_ * cols); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace paththresh
