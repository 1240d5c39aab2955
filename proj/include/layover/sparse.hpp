#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace layover {

/// Compressed sparse row storage, built row by row.
class SparseRows {
 public:
  explicit SparseRows(std::size_t cols = 0) : cols_(cols) { start_.push_back(0); }

  std::size_t rows() const { return start_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return index_.size(); }

  /// Appends a coefficient to the row under construction. Exact zeros are dropped.
  void push(std::int32_t col, double value) {
    if (value == 0.0) return;
    index_.push_back(col);
    value_.push_back(value);
  }
  void finish_row() { start_.push_back(index_.size()); }

  std::span<const std::int32_t> row_index(std::size_t r) const {
    return {index_.data() + start_[r], start_[r + 1] - start_[r]};
  }
  std::span<const double> row_value(std::size_t r) const {
    return {value_.data() + start_[r], start_[r + 1] - start_[r]};
  }
  std::size_t row_nonzeros(std::size_t r) const { return start_[r + 1] - start_[r]; }

  double row_dot(std::size_t r, std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t k = start_[r]; k < start_[r + 1]; ++k) s += value_[k] * x[index_[k]];
    return s;
  }

  void reserve(std::size_t rows, std::size_t nnz) {
    start_.reserve(rows + 1);
    index_.reserve(nnz);
    value_.reserve(nnz);
  }

  // Raw arrays, for solvers that build their own column view.
  const std::vector<std::size_t>& starts() const { return start_; }
  const std::vector<std::int32_t>& indices() const { return index_; }
  const std::vector<double>& values() const { return value_; }

  friend bool operator==(const SparseRows&, const SparseRows&) = default;

 private:
  std::size_t cols_;
  std::vector<std::size_t> start_;
  std::vector<std::int32_t> index_;
  std::vector<double> value_;
};

/// Small row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

}  // namespace layover
