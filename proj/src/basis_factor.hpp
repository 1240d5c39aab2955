#pragma once

// LU factorization of a simplex basis [A | -I] with product-form updates.
//
// Logical columns are peeled off: if R_S are the rows whose logical is
// nonbasic and S the basic structural columns, only the square kernel
// K = A(R_S, S) is factorized. Column and row singletons of K are pivoted
// out as triangular factors; the remaining bump goes to the sparse LU.

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace layover::lp {

struct ColumnMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> start;
  std::vector<std::int32_t> index;
  std::vector<double> value;
};

class BasisFactor {
 public:
  explicit BasisFactor(const ColumnMatrix& a) : a_(a) {}

  /// Factorizes the basis given by `head` (variable per position; variables
  /// >= a.cols are logicals of row var - a.cols). Returns false if singular.
  bool factor(const std::vector<std::int32_t>& head);

  /// Solves B x = rhs in place (rhs indexed by row, result by basis position).
  void ftran(std::vector<double>& rhs) const;
  /// Solves B^T y = rhs in place (rhs indexed by position, result by row).
  void btran(std::vector<double>& rhs) const;

  /// Replaces the column at `pos` by the one whose FTRAN image is `column`.
  void update(std::size_t pos, const std::vector<double>& column);

  std::size_t updates() const { return etas_.size(); }
  std::size_t eta_nonzeros() const { return eta_index_.size(); }
  std::size_t kernel_size() const { return kernel_cols_.size(); }
  std::size_t bump_size() const { return bump_cols_.size(); }

 private:
  struct Eta {
    std::size_t pos;
    double pivot;
    std::size_t begin;
    std::size_t end;
  };

  void base_ftran(std::vector<double>& rhs) const;
  void base_btran(std::vector<double>& rhs) const;
  void kernel_solve(std::vector<double>& b, std::vector<double>& x) const;
  void kernel_solve_transposed(std::vector<double>& d, std::vector<double>& y) const;

  struct Pivot {
    std::int32_t row;
    std::int32_t col;
    double value;
  };

  const ColumnMatrix& a_;
  std::vector<std::int32_t> head_;
  // Kernel bookkeeping.
  std::vector<std::int32_t> kernel_rows_;     // kernel row -> matrix row
  std::vector<std::int32_t> kernel_cols_;     // kernel col -> basis position
  std::vector<std::int32_t> row_to_kernel_;   // matrix row -> kernel row or -1
  std::vector<std::int32_t> logical_pos_;     // matrix row -> basis position of its logical or -1
  // Kernel in both orientations (kernel-local indices).
  std::vector<std::size_t> krow_start_, kcol_start_;
  std::vector<std::int32_t> krow_col_, kcol_row_;
  std::vector<double> krow_val_, kcol_val_;
  std::vector<Pivot> upper_;  // column-singleton pivots, in elimination order
  std::vector<Pivot> lower_;  // row-singleton pivots, in elimination order
  std::vector<std::int32_t> bump_rows_, bump_cols_;
  std::vector<std::int32_t> bump_row_index_, bump_col_index_;  // kernel index -> bump index or -1
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>> lu_;
  mutable Eigen::VectorXd work_;
  mutable std::vector<double> kb_, kx_;
  // Product-form etas.
  std::vector<Eta> etas_;
  std::vector<std::int32_t> eta_index_;
  std::vector<double> eta_value_;
};

}  // namespace layover::lp
