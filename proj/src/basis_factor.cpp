#include "basis_factor.hpp"

#include <cmath>

namespace layover::lp {

bool BasisFactor::factor(const std::vector<std::int32_t>& head) {
  head_ = head;
  etas_.clear();
  eta_index_.clear();
  eta_value_.clear();
  const std::size_t m = a_.rows;
  const auto ncols = static_cast<std::int32_t>(a_.cols);
  logical_pos_.assign(m, -1);
  kernel_cols_.clear();
  for (std::size_t pos = 0; pos < head_.size(); ++pos) {
    if (head_[pos] >= ncols) {
      logical_pos_[head_[pos] - ncols] = static_cast<std::int32_t>(pos);
    } else {
      kernel_cols_.push_back(static_cast<std::int32_t>(pos));
    }
  }
  kernel_rows_.clear();
  row_to_kernel_.assign(m, -1);
  for (std::size_t r = 0; r < m; ++r) {
    if (logical_pos_[r] < 0) {
      row_to_kernel_[r] = static_cast<std::int32_t>(kernel_rows_.size());
      kernel_rows_.push_back(static_cast<std::int32_t>(r));
    }
  }
  lu_.reset();
  upper_.clear();
  lower_.clear();
  bump_rows_.clear();
  bump_cols_.clear();
  if (kernel_rows_.size() != kernel_cols_.size()) return false;
  const std::size_t k = kernel_cols_.size();
  kb_.assign(k, 0.0);
  kx_.assign(k, 0.0);
  if (k == 0) return true;

  // Kernel, column-wise then row-wise.
  kcol_start_.assign(k + 1, 0);
  kcol_row_.clear();
  kcol_val_.clear();
  for (std::size_t c = 0; c < k; ++c) {
    const auto var = static_cast<std::size_t>(head_[kernel_cols_[c]]);
    for (std::size_t e = a_.start[var]; e < a_.start[var + 1]; ++e) {
      const auto kr = row_to_kernel_[a_.index[e]];
      if (kr < 0) continue;
      kcol_row_.push_back(kr);
      kcol_val_.push_back(a_.value[e]);
    }
    kcol_start_[c + 1] = kcol_row_.size();
  }
  krow_start_.assign(k + 1, 0);
  for (auto r : kcol_row_) ++krow_start_[static_cast<std::size_t>(r) + 1];
  for (std::size_t r = 0; r < k; ++r) krow_start_[r + 1] += krow_start_[r];
  krow_col_.resize(kcol_row_.size());
  krow_val_.resize(kcol_row_.size());
  {
    std::vector<std::size_t> fill(krow_start_.begin(), krow_start_.end() - 1);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t e = kcol_start_[c]; e < kcol_start_[c + 1]; ++e) {
        const auto dst = fill[static_cast<std::size_t>(kcol_row_[e])]++;
        krow_col_[dst] = static_cast<std::int32_t>(c);
        krow_val_[dst] = kcol_val_[e];
      }
    }
  }

  // Singleton elimination. Pivots must dominate a fixed threshold to keep the triangles stable.
  constexpr double kMinPivot = 1e-9;
  std::vector<char> row_alive(k, 1), col_alive(k, 1);
  std::vector<std::int32_t> col_count(k), row_count(k);
  for (std::size_t c = 0; c < k; ++c) col_count[c] = static_cast<std::int32_t>(kcol_start_[c + 1] - kcol_start_[c]);
  for (std::size_t r = 0; r < k; ++r) row_count[r] = static_cast<std::int32_t>(krow_start_[r + 1] - krow_start_[r]);
  std::vector<std::int32_t> queue;
  for (std::size_t c = 0; c < k; ++c) {
    if (col_count[c] == 0) return false;
    if (col_count[c] == 1) queue.push_back(static_cast<std::int32_t>(c));
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const auto c = static_cast<std::size_t>(queue[qi]);
    if (!col_alive[c] || col_count[c] != 1) continue;
    std::int32_t row = -1;
    double val = 0.0;
    for (std::size_t e = kcol_start_[c]; e < kcol_start_[c + 1]; ++e) {
      if (row_alive[static_cast<std::size_t>(kcol_row_[e])]) row = kcol_row_[e], val = kcol_val_[e];
    }
    if (row < 0 || std::abs(val) < kMinPivot) continue;
    upper_.push_back({row, static_cast<std::int32_t>(c), val});
    col_alive[c] = 0;
    row_alive[static_cast<std::size_t>(row)] = 0;
    for (std::size_t e = krow_start_[row]; e < krow_start_[row + 1]; ++e) {
      const auto c2 = static_cast<std::size_t>(krow_col_[e]);
      if (!col_alive[c2]) continue;
      if (--col_count[c2] == 1) queue.push_back(static_cast<std::int32_t>(c2));
      if (col_count[c2] == 0) return false;
    }
  }
  // Row counts over the surviving columns.
  queue.clear();
  for (std::size_t r = 0; r < k; ++r) {
    if (!row_alive[r]) continue;
    std::int32_t cnt = 0;
    for (std::size_t e = krow_start_[r]; e < krow_start_[r + 1]; ++e) cnt += col_alive[static_cast<std::size_t>(krow_col_[e])];
    row_count[r] = cnt;
    if (cnt == 0) return false;
    if (cnt == 1) queue.push_back(static_cast<std::int32_t>(r));
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const auto r = static_cast<std::size_t>(queue[qi]);
    if (!row_alive[r] || row_count[r] != 1) continue;
    std::int32_t col = -1;
    double val = 0.0;
    for (std::size_t e = krow_start_[r]; e < krow_start_[r + 1]; ++e) {
      if (col_alive[static_cast<std::size_t>(krow_col_[e])]) col = krow_col_[e], val = krow_val_[e];
    }
    if (col < 0 || std::abs(val) < kMinPivot) continue;
    lower_.push_back({static_cast<std::int32_t>(r), col, val});
    row_alive[r] = 0;
    col_alive[static_cast<std::size_t>(col)] = 0;
    for (std::size_t e = kcol_start_[col]; e < kcol_start_[col + 1]; ++e) {
      const auto r2 = static_cast<std::size_t>(kcol_row_[e]);
      if (!row_alive[r2]) continue;
      if (--row_count[r2] == 1) queue.push_back(static_cast<std::int32_t>(r2));
      if (row_count[r2] == 0) return false;
    }
  }

  bump_row_index_.assign(k, -1);
  bump_col_index_.assign(k, -1);
  for (std::size_t r = 0; r < k; ++r) {
    if (row_alive[r]) bump_row_index_[r] = static_cast<std::int32_t>(bump_rows_.size()), bump_rows_.push_back(static_cast<std::int32_t>(r));
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (col_alive[c]) bump_col_index_[c] = static_cast<std::int32_t>(bump_cols_.size()), bump_cols_.push_back(static_cast<std::int32_t>(c));
  }
  if (bump_rows_.size() != bump_cols_.size()) return false;
  const std::size_t nb = bump_cols_.size();
  if (nb == 0) return true;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t bc = 0; bc < nb; ++bc) {
    const auto c = static_cast<std::size_t>(bump_cols_[bc]);
    for (std::size_t e = kcol_start_[c]; e < kcol_start_[c + 1]; ++e) {
      const auto br = bump_row_index_[static_cast<std::size_t>(kcol_row_[e])];
      if (br >= 0) trip.emplace_back(br, static_cast<int>(bc), kcol_val_[e]);
    }
  }
  Eigen::SparseMatrix<double> bump(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
  bump.setFromTriplets(trip.begin(), trip.end());
  bump.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(bump);
  lu_->factorize(bump);
  if (lu_->info() != Eigen::Success) return false;
  work_.resize(static_cast<Eigen::Index>(nb));
  // SparseLU reports success on some numerically singular bumps; reject them.
  return std::isfinite(lu_->logAbsDeterminant());
}

// K x = b with b by kernel row and x by kernel column; b is consumed.
void BasisFactor::kernel_solve(std::vector<double>& b, std::vector<double>& x) const {
  for (const auto& p : lower_) {
    double v = b[static_cast<std::size_t>(p.row)];
    for (std::size_t e = krow_start_[p.row]; e < krow_start_[p.row + 1]; ++e) {
      if (krow_col_[e] != p.col) v -= krow_val_[e] * x[static_cast<std::size_t>(krow_col_[e])];
    }
    x[static_cast<std::size_t>(p.col)] = v / p.value;
  }
  if (!bump_cols_.empty()) {
    for (std::size_t br = 0; br < bump_rows_.size(); ++br) {
      const auto r = static_cast<std::size_t>(bump_rows_[br]);
      double v = b[r];
      for (std::size_t e = krow_start_[r]; e < krow_start_[r + 1]; ++e) {
        const auto c = static_cast<std::size_t>(krow_col_[e]);
        if (bump_col_index_[c] < 0) v -= krow_val_[e] * x[c];
      }
      work_[static_cast<Eigen::Index>(br)] = v;
    }
    work_ = lu_->solve(work_);
    for (std::size_t bc = 0; bc < bump_cols_.size(); ++bc) x[static_cast<std::size_t>(bump_cols_[bc])] = work_[static_cast<Eigen::Index>(bc)];
  }
  for (auto it = upper_.rbegin(); it != upper_.rend(); ++it) {
    double v = b[static_cast<std::size_t>(it->row)];
    for (std::size_t e = krow_start_[it->row]; e < krow_start_[it->row + 1]; ++e) {
      if (krow_col_[e] != it->col) v -= krow_val_[e] * x[static_cast<std::size_t>(krow_col_[e])];
    }
    x[static_cast<std::size_t>(it->col)] = v / it->value;
  }
}

// K^T y = d with d by kernel column and y by kernel row; d is consumed.
void BasisFactor::kernel_solve_transposed(std::vector<double>& d, std::vector<double>& y) const {
  for (const auto& p : upper_) {
    double v = d[static_cast<std::size_t>(p.col)];
    for (std::size_t e = kcol_start_[p.col]; e < kcol_start_[p.col + 1]; ++e) {
      if (kcol_row_[e] != p.row) v -= kcol_val_[e] * y[static_cast<std::size_t>(kcol_row_[e])];
    }
    y[static_cast<std::size_t>(p.row)] = v / p.value;
  }
  if (!bump_cols_.empty()) {
    for (std::size_t bc = 0; bc < bump_cols_.size(); ++bc) {
      const auto c = static_cast<std::size_t>(bump_cols_[bc]);
      double v = d[c];
      for (std::size_t e = kcol_start_[c]; e < kcol_start_[c + 1]; ++e) {
        const auto r = static_cast<std::size_t>(kcol_row_[e]);
        if (bump_row_index_[r] < 0) v -= kcol_val_[e] * y[r];
      }
      work_[static_cast<Eigen::Index>(bc)] = v;
    }
    work_ = lu_->transpose().solve(work_);
    for (std::size_t br = 0; br < bump_rows_.size(); ++br) y[static_cast<std::size_t>(bump_rows_[br])] = work_[static_cast<Eigen::Index>(br)];
  }
  for (auto it = lower_.rbegin(); it != lower_.rend(); ++it) {
    double v = d[static_cast<std::size_t>(it->col)];
    for (std::size_t e = kcol_start_[it->col]; e < kcol_start_[it->col + 1]; ++e) {
      if (kcol_row_[e] != it->row) v -= kcol_val_[e] * y[static_cast<std::size_t>(kcol_row_[e])];
    }
    y[static_cast<std::size_t>(it->row)] = v / it->value;
  }
}

void BasisFactor::base_ftran(std::vector<double>& rhs) const {
  // rhs is indexed by row on entry; produce values by basis position.
  const std::size_t m = a_.rows;
  std::vector<double> out(m, 0.0);
  const std::size_t k = kernel_cols_.size();
  if (k > 0) {
    for (std::size_t i = 0; i < k; ++i) kb_[i] = rhs[kernel_rows_[i]];
    kernel_solve(kb_, kx_);
    for (std::size_t c = 0; c < k; ++c) out[kernel_cols_[c]] = kx_[c];
  }
  // Logical rows: -x_pos + (A_S x_S)_r = rhs_r.
  for (std::size_t r = 0; r < m; ++r) {
    if (logical_pos_[r] >= 0) out[logical_pos_[r]] = -rhs[r];
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double xs = out[kernel_cols_[c]];
    if (xs == 0.0) continue;
    const auto var = head_[kernel_cols_[c]];
    for (std::size_t e = a_.start[var]; e < a_.start[var + 1]; ++e) {
      const auto lp = logical_pos_[a_.index[e]];
      if (lp >= 0) out[lp] += a_.value[e] * xs;
    }
  }
  rhs.swap(out);
}

void BasisFactor::base_btran(std::vector<double>& rhs) const {
  // rhs indexed by position on entry; produce y indexed by row.
  const std::size_t m = a_.rows;
  std::vector<double> y(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (logical_pos_[r] >= 0) y[r] = -rhs[logical_pos_[r]];
  }
  const std::size_t k = kernel_cols_.size();
  if (k == 0) {
    rhs.swap(y);
    return;
  }
  for (std::size_t c = 0; c < k; ++c) {
    const auto pos = kernel_cols_[c];
    const auto var = head_[pos];
    double v = rhs[pos];
    for (std::size_t e = a_.start[var]; e < a_.start[var + 1]; ++e) {
      if (logical_pos_[a_.index[e]] >= 0) v -= a_.value[e] * y[a_.index[e]];
    }
    kb_[c] = v;
  }
  kernel_solve_transposed(kb_, kx_);
  for (std::size_t i = 0; i < k; ++i) y[kernel_rows_[i]] = kx_[i];
  rhs.swap(y);
}

void BasisFactor::ftran(std::vector<double>& rhs) const {
  base_ftran(rhs);
  for (const Eta& eta : etas_) {
    double& xp = rhs[eta.pos];
    if (xp == 0.0) continue;
    xp /= eta.pivot;
    const double v = xp;
    for (std::size_t e = eta.begin; e < eta.end; ++e) rhs[eta_index_[e]] -= eta_value_[e] * v;
  }
}

void BasisFactor::btran(std::vector<double>& rhs) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double v = rhs[it->pos];
    for (std::size_t e = it->begin; e < it->end; ++e) v -= eta_value_[e] * rhs[eta_index_[e]];
    rhs[it->pos] = v / it->pivot;
  }
  base_btran(rhs);
}

void BasisFactor::update(std::size_t pos, const std::vector<double>& column) {
  Eta eta{pos, column[pos], eta_index_.size(), 0};
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (i != pos && column[i] != 0.0 && std::abs(column[i]) > 1e-14) {
      eta_index_.push_back(static_cast<std::int32_t>(i));
      eta_value_.push_back(column[i]);
    }
  }
  eta.end = eta_index_.size();
  etas_.push_back(eta);
}

}  // namespace layover::lp
