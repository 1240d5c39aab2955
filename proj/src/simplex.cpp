#include "layover/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "basis_factor.hpp"
#include "layover/errors.hpp"

namespace layover::lp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_hash(std::uint64_t seed, std::uint64_t j) {
  return static_cast<double>(splitmix64(seed * 0x100000001b3ULL ^ j) >> 11) * 0x1.0p-53;
}

}  // namespace

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::TimeLimit: return "time_limit";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

LpModel LpModel::from_problem(const LayoverProblem& problem) {
  LpModel lp;
  lp.num_rows = problem.constraint_rows();
  lp.num_cols = problem.variables();
  lp.cost.resize(lp.num_cols);
  for (std::size_t c = 0; c < lp.num_cols; ++c) lp.cost[c] = -problem.objective[c];
  lp.col_lower = problem.lower;
  lp.col_upper = problem.upper;
  lp.row_lower.resize(lp.num_rows);
  lp.row_upper.resize(lp.num_rows);
  for (std::size_t r = 0; r < lp.num_rows; ++r) {
    const double b = problem.rhs[r];
    switch (problem.sense[r]) {
      case RowSense::LessEqual: lp.row_lower[r] = -kInf, lp.row_upper[r] = b; break;
      case RowSense::GreaterEqual: lp.row_lower[r] = b, lp.row_upper[r] = kInf; break;
      case RowSense::Equal: lp.row_lower[r] = b, lp.row_upper[r] = b; break;
    }
  }
  // Transpose CSR rows into CSC columns.
  const auto& rs = problem.rows;
  std::vector<std::size_t> count(lp.num_cols + 1, 0);
  for (auto c : rs.indices()) ++count[static_cast<std::size_t>(c) + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  lp.col_start = count;
  lp.col_index.resize(rs.nonzeros());
  lp.col_value.resize(rs.nonzeros());
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (std::size_t r = 0; r < rs.rows(); ++r) {
    const auto idx = rs.row_index(r);
    const auto val = rs.row_value(r);
    for (std::size_t e = 0; e < idx.size(); ++e) {
      const auto dst = fill[static_cast<std::size_t>(idx[e])]++;
      lp.col_index[dst] = static_cast<std::int32_t>(r);
      lp.col_value[dst] = val[e];
    }
  }
  return lp;
}

class DualSimplex::Impl {
 public:
  Impl(const LpModel& model, SimplexOptions options);

  LpStatus solve();
  bool crash_from_point(const std::vector<double>& point);

  SimplexOptions opt;
  std::size_t nrow, ncol, ntot;
  ColumnMatrix a;
  // Row-wise copy for pivot-row computation.
  std::vector<std::size_t> row_start;
  std::vector<std::int32_t> row_col;
  std::vector<double> row_val;

  std::vector<double> lower, upper, base_cost, cost;
  std::vector<double> x, d;
  std::vector<VarState> state;
  std::vector<std::int32_t> head, pos;
  BasisFactor factor;
  bool factored = false;
  bool primal_dirty = true;
  std::vector<double> dse;  // dual steepest-edge weights by position

  std::size_t iters = 0;
  std::size_t refactors = 0;
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  bool perturbed = false;
  bool primal_start = false;

  // Scratch.
  std::vector<double> row_alpha;
  std::vector<char> touched;
  std::vector<std::int32_t> row_list;

  bool is_boxed(std::size_t j) const { return lower[j] > -kInf && upper[j] < kInf; }
  bool is_fixed(std::size_t j) const { return lower[j] == upper[j]; }
  double nonbasic_value(std::size_t j) const {
    switch (state[j]) {
      case VarState::AtLower: return lower[j];
      case VarState::AtUpper: return upper[j];
      default: return 0.0;
    }
  }
  VarState preferred_state(std::size_t j, double dj) const {
    if (lower[j] == -kInf && upper[j] == kInf) return VarState::AtZero;
    if (dj >= 0.0) return lower[j] > -kInf ? VarState::AtLower : VarState::AtUpper;
    return upper[j] < kInf ? VarState::AtUpper : VarState::AtLower;
  }

  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < ncol) {
      for (std::size_t e = a.start[j]; e < a.start[j + 1]; ++e) f(static_cast<std::size_t>(a.index[e]), a.value[e]);
    } else {
      f(j - ncol, -1.0);
    }
  }

  bool refactor();
  void compute_primal();
  void compute_duals();
  bool repair_dual(bool allow_shift);
  void perturb();
  void compute_pivot_row(const std::vector<double>& rho);
  void clear_pivot_row();
  bool out_of_time() const { return std::chrono::steady_clock::now() > deadline; }
  double primal_infeasibility(std::size_t p) const {
    const double v = x[p];
    if (v < lower[p] - opt.primal_tolerance) return lower[p] - v;
    if (v > upper[p] + opt.primal_tolerance) return v - upper[p];
    return 0.0;
  }
  double max_primal_infeasibility() const {
    double w = 0.0;
    for (std::size_t r = 0; r < nrow; ++r) w = std::max(w, primal_infeasibility(static_cast<std::size_t>(head[r])));
    return w;
  }
  double dual_infeasibility(std::size_t j) const {
    if (state[j] == VarState::Basic || is_fixed(j)) return 0.0;
    switch (state[j]) {
      case VarState::AtLower: return std::max(0.0, -d[j]);
      case VarState::AtUpper: return std::max(0.0, d[j]);
      case VarState::AtZero: return std::abs(d[j]);
      default: return 0.0;
    }
  }
  void pivot(std::size_t r, std::size_t q, const std::vector<double>& col, VarState leaving_state);
  LpStatus dual_phase();
  LpStatus primal_phase();
  double current_objective() const {
    double s = 0.0;
    for (std::size_t j = 0; j < ncol; ++j) s += cost[j] * x[j];
    return s;
  }
};

DualSimplex::Impl::Impl(const LpModel& model, SimplexOptions options)
    : opt(options), nrow(model.num_rows), ncol(model.num_cols), ntot(model.num_rows + model.num_cols), factor(a) {
  a.rows = nrow;
  a.cols = ncol;
  a.start = model.col_start;
  a.index = model.col_index;
  a.value = model.col_value;
  if (a.start.size() != ncol + 1 || model.cost.size() != ncol || model.col_lower.size() != ncol ||
      model.col_upper.size() != ncol || model.row_lower.size() != nrow || model.row_upper.size() != nrow) {
    throw DimensionError("inconsistent LP model dimensions");
  }
  // Row-wise copy.
  row_start.assign(nrow + 1, 0);
  for (auto r : a.index) ++row_start[static_cast<std::size_t>(r) + 1];
  std::partial_sum(row_start.begin(), row_start.end(), row_start.begin());
  row_col.resize(a.index.size());
  row_val.resize(a.index.size());
  std::vector<std::size_t> fill(row_start.begin(), row_start.end() - 1);
  for (std::size_t j = 0; j < ncol; ++j) {
    for (std::size_t e = a.start[j]; e < a.start[j + 1]; ++e) {
      const auto dst = fill[static_cast<std::size_t>(a.index[e])]++;
      row_col[dst] = static_cast<std::int32_t>(j);
      row_val[dst] = a.value[e];
    }
  }
  lower.resize(ntot);
  upper.resize(ntot);
  base_cost.assign(ntot, 0.0);
  for (std::size_t j = 0; j < ncol; ++j) {
    lower[j] = model.col_lower[j];
    upper[j] = model.col_upper[j];
    base_cost[j] = model.cost[j];
  }
  for (std::size_t r = 0; r < nrow; ++r) {
    lower[ncol + r] = model.row_lower[r];
    upper[ncol + r] = model.row_upper[r];
  }
  cost = base_cost;
  x.assign(ntot, 0.0);
  d.assign(ntot, 0.0);
  state.assign(ntot, VarState::AtLower);
  head.resize(nrow);
  pos.assign(ntot, -1);
  for (std::size_t j = 0; j < ncol; ++j) {
    state[j] = preferred_state(j, cost[j]);
    x[j] = nonbasic_value(j);
  }
  for (std::size_t r = 0; r < nrow; ++r) {
    head[r] = static_cast<std::int32_t>(ncol + r);
    pos[ncol + r] = static_cast<std::int32_t>(r);
    state[ncol + r] = VarState::Basic;
  }
  dse.assign(nrow, 1.0);
  row_alpha.assign(ntot, 0.0);
  touched.assign(ntot, 0);
}

bool DualSimplex::Impl::refactor() {
  ++refactors;
  if (!factor.factor(head)) return false;
  factored = true;
  return true;
}

void DualSimplex::Impl::compute_primal() {
  std::vector<double> rhs(nrow, 0.0);
  for (std::size_t j = 0; j < ntot; ++j) {
    if (state[j] == VarState::Basic) continue;
    x[j] = nonbasic_value(j);
    if (x[j] == 0.0) continue;
    const double v = x[j];
    for_column(j, [&](std::size_t r, double val) { rhs[r] -= val * v; });
  }
  factor.ftran(rhs);
  for (std::size_t p = 0; p < nrow; ++p) x[static_cast<std::size_t>(head[p])] = rhs[p];
  primal_dirty = false;
}

void DualSimplex::Impl::compute_duals() {
  std::vector<double> y(nrow);
  for (std::size_t p = 0; p < nrow; ++p) y[p] = cost[static_cast<std::size_t>(head[p])];
  factor.btran(y);
  for (std::size_t j = 0; j < ntot; ++j) {
    if (state[j] == VarState::Basic) {
      d[j] = 0.0;
      continue;
    }
    double s = cost[j];
    for_column(j, [&](std::size_t r, double val) { s -= val * y[r]; });
    d[j] = s;
  }
}

// Restores dual feasibility by bound flips, or cost shifts when a flip is impossible.
bool DualSimplex::Impl::repair_dual(bool allow_shift) {
  bool flipped = false;
  for (std::size_t j = 0; j < ntot; ++j) {
    if (dual_infeasibility(j) <= opt.dual_tolerance) continue;
    const VarState want = preferred_state(j, d[j]);
    if (want != state[j] && want != VarState::AtZero &&
        ((want == VarState::AtLower && lower[j] > -kInf) || (want == VarState::AtUpper && upper[j] < kInf)) &&
        (want == VarState::AtLower ? d[j] >= 0.0 : d[j] <= 0.0)) {
      state[j] = want;
      flipped = true;
      continue;
    }
    if (!allow_shift) continue;
    const double target = state[j] == VarState::AtLower ? opt.dual_tolerance
                          : state[j] == VarState::AtUpper ? -opt.dual_tolerance
                                                          : 0.0;
    cost[j] += target - d[j];
    d[j] = target;
    perturbed = true;
  }
  if (flipped) compute_primal();
  return flipped;
}

void DualSimplex::Impl::perturb() {
  for (std::size_t j = 0; j < ncol; ++j) {
    if (state[j] == VarState::Basic || is_fixed(j) || state[j] == VarState::AtZero) continue;
    const double eps = 1e-7 * (1.0 + std::abs(base_cost[j])) * (1.0 + unit_hash(opt.seed, j));
    const double delta = state[j] == VarState::AtLower ? eps : -eps;
    cost[j] += delta;
    d[j] += delta;
  }
  perturbed = true;
}

void DualSimplex::Impl::compute_pivot_row(const std::vector<double>& rho) {
  for (std::size_t r = 0; r < nrow; ++r) {
    const double rv = rho[r];
    if (rv == 0.0 || std::abs(rv) < 1e-13) continue;
    for (std::size_t e = row_start[r]; e < row_start[r + 1]; ++e) {
      const auto j = static_cast<std::size_t>(row_col[e]);
      if (state[j] == VarState::Basic) continue;
      if (!touched[j]) {
        touched[j] = 1;
        row_list.push_back(static_cast<std::int32_t>(j));
      }
      row_alpha[j] += rv * row_val[e];
    }
    const std::size_t lj = ncol + r;
    if (state[lj] != VarState::Basic) {
      touched[lj] = 1;
      row_list.push_back(static_cast<std::int32_t>(lj));
      row_alpha[lj] = -rv;
    }
  }
}

void DualSimplex::Impl::clear_pivot_row() {
  for (auto j : row_list) {
    touched[static_cast<std::size_t>(j)] = 0;
    row_alpha[static_cast<std::size_t>(j)] = 0.0;
  }
  row_list.clear();
}

void DualSimplex::Impl::pivot(std::size_t r, std::size_t q, const std::vector<double>& col, VarState leaving_state) {
  const auto p = static_cast<std::size_t>(head[r]);
  factor.update(r, col);
  head[r] = static_cast<std::int32_t>(q);
  pos[q] = static_cast<std::int32_t>(r);
  pos[p] = -1;
  state[q] = VarState::Basic;
  state[p] = is_fixed(p) ? VarState::AtLower : leaving_state;
  x[p] = nonbasic_value(p);
  d[q] = 0.0;
}

LpStatus DualSimplex::Impl::dual_phase() {
  std::vector<double> rho(nrow), col(nrow), tau(nrow), flip_col(nrow);
  struct Candidate {
    std::size_t j;
    double ratio;
    double harris;
    double abs_alpha;
  };
  std::vector<Candidate> cand;
  std::vector<std::size_t> flips;
  double best_obj = -kInf;
  std::size_t since_progress = 0;
  bool bland = false;
  bool retried_infeasible = false;

  for (;;) {
    if (iters >= opt.max_iterations) return LpStatus::IterationLimit;
    if ((iters & 15) == 0 && out_of_time()) return LpStatus::TimeLimit;
    if (factor.updates() >= opt.refactor_interval) {
      if (!refactor()) return LpStatus::NumericalFailure;
      compute_primal();
      compute_duals();
      repair_dual(true);
    }

    // Leaving row: largest weighted infeasibility (Bland: smallest variable index).
    std::size_t r = nrow;
    double best = 0.0;
    for (std::size_t p = 0; p < nrow; ++p) {
      const double inf = primal_infeasibility(static_cast<std::size_t>(head[p]));
      if (inf <= 0.0) continue;
      if (bland) {
        if (r == nrow || head[p] < head[r]) r = p;
        continue;
      }
      const double score = inf * inf / dse[p];
      if (score > best) best = score, r = p;
    }
    if (r == nrow) return LpStatus::Optimal;
    if (opt.progress && iters % opt.progress_interval == 0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < nrow; ++i) sum += primal_infeasibility(static_cast<std::size_t>(head[i]));
      opt.progress(iters, current_objective(), sum);
    }

    const auto p = static_cast<std::size_t>(head[r]);
    const bool to_upper = x[p] > upper[p];
    const double s = to_upper ? 1.0 : -1.0;
    const double delta = to_upper ? x[p] - upper[p] : x[p] - lower[p];

    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    factor.btran(rho);
    compute_pivot_row(rho);

    // Bound-flipping ratio test with Harris tolerances.
    cand.clear();
    for (auto jj : row_list) {
      const auto j = static_cast<std::size_t>(jj);
      if (is_fixed(j)) continue;
      const double at = s * row_alpha[j];
      if (std::abs(at) <= opt.pivot_tolerance) continue;
      switch (state[j]) {
        case VarState::AtLower:
          if (at > 0.0) cand.push_back({j, std::max(d[j], 0.0) / at, (d[j] + opt.dual_tolerance) / at, at});
          break;
        case VarState::AtUpper:
          if (at < 0.0) cand.push_back({j, std::min(d[j], 0.0) / at, (d[j] - opt.dual_tolerance) / at, -at});
          break;
        case VarState::AtZero:
          cand.push_back({j, std::abs(d[j]) / std::abs(at), (std::abs(d[j]) + opt.dual_tolerance) / std::abs(at),
                          std::abs(at)});
          break;
        default: break;
      }
    }
    std::size_t q = ntot;
    double step = 0.0;
    flips.clear();
    if (!cand.empty()) {
      if (bland) {
        // Textbook rule: smallest index among the minimum ratios, no flips.
        double tmin = kInf;
        for (const auto& c : cand) tmin = std::min(tmin, c.ratio);
        for (const auto& c : cand) {
          if (c.ratio <= tmin && c.j < q) q = c.j, step = c.ratio;
        }
      } else {
        // Groups of breakpoints below the Harris bound are flipped while the slope stays positive.
        double slope = std::abs(delta);
        auto live = cand.end();
        while (live != cand.begin()) {
          double tmax = kInf;
          double tmin = kInf;
          for (auto it = cand.begin(); it != live; ++it) tmax = std::min(tmax, it->harris), tmin = std::min(tmin, it->ratio);
          tmax = std::max(tmax, tmin);  // dual infeasible candidates push the Harris bound below zero
          const auto group = std::partition(cand.begin(), live, [&](const Candidate& c) { return c.ratio > tmax; });
          double gain = 0.0;
          for (auto it = group; it != live; ++it) {
            gain += is_boxed(it->j) && state[it->j] != VarState::AtZero ? it->abs_alpha * (upper[it->j] - lower[it->j])
                                                                       : kInf;
          }
          if (slope - gain > opt.primal_tolerance) {
            for (auto it = group; it != live; ++it) flips.push_back(it->j);
            slope -= gain;
            live = group;
            continue;
          }
          double big = -1.0;
          for (auto it = group; it != live; ++it) {
            if (it->abs_alpha > big || (it->abs_alpha == big && it->j < q)) {
              big = it->abs_alpha, q = it->j, step = std::max(it->ratio, 0.0);
            }
          }
          break;
        }
      }
    }

    if (q == ntot) {
      clear_pivot_row();
      // No entering column: the row cannot be repaired, so the primal is infeasible.
      if (!retried_infeasible && factor.updates() > 0) {
        retried_infeasible = true;
        if (!refactor()) return LpStatus::NumericalFailure;
        compute_primal();
        compute_duals();
        repair_dual(true);
        continue;
      }
      return LpStatus::Infeasible;
    }
    retried_infeasible = false;

    // Entering column.
    std::fill(col.begin(), col.end(), 0.0);
    for_column(q, [&](std::size_t rr, double v) { col[rr] = v; });
    factor.ftran(col);
    const double alpha_r = col[r];
    const double alpha_row_q = row_alpha[q];
    if (std::abs(alpha_r - alpha_row_q) > 1e-7 * (1.0 + std::abs(alpha_r)) || std::abs(alpha_r) < 1e-11) {
      clear_pivot_row();
      if (factor.updates() == 0) return LpStatus::NumericalFailure;
      if (!refactor()) return LpStatus::NumericalFailure;
      compute_primal();
      compute_duals();
      repair_dual(true);
      continue;
    }

    // Dual update.
    const double theta_d = s * step;
    for (auto jj : row_list) {
      const auto j = static_cast<std::size_t>(jj);
      d[j] -= theta_d * row_alpha[j];
    }
    d[p] = -theta_d;
    d[q] = 0.0;

    // Dual steepest-edge weights (needs tau = B^{-1} rho).
    if (!bland && opt.pricing == Pricing::SteepestEdge) {
      tau = rho;
      factor.ftran(tau);
      const double wr = dse[r];
      for (std::size_t i = 0; i < nrow; ++i) {
        if (i == r || col[i] == 0.0) continue;
        const double ratio = col[i] / alpha_r;
        dse[i] = std::max(dse[i] + ratio * (ratio * wr - 2.0 * tau[i]), 1e-4);
      }
      dse[r] = std::max(wr / (alpha_r * alpha_r), 1e-4);
    }
    clear_pivot_row();

    // Bound flips move the basic values.
    if (!flips.empty()) {
      std::fill(flip_col.begin(), flip_col.end(), 0.0);
      for (auto j : flips) {
        const double old = x[j];
        state[j] = state[j] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        x[j] = nonbasic_value(j);
        const double dx = x[j] - old;
        for_column(j, [&](std::size_t rr, double v) { flip_col[rr] += v * dx; });
      }
      factor.ftran(flip_col);
      for (std::size_t i = 0; i < nrow; ++i) x[static_cast<std::size_t>(head[i])] -= flip_col[i];
    }

    // Primal step: the leaving variable lands on its violated bound.
    const double bound = to_upper ? upper[p] : lower[p];
    const double theta_p = (x[p] - bound) / alpha_r;
    for (std::size_t i = 0; i < nrow; ++i) {
      if (col[i] != 0.0) x[static_cast<std::size_t>(head[i])] -= theta_p * col[i];
    }
    x[q] += theta_p;
    pivot(r, q, col, to_upper ? VarState::AtUpper : VarState::AtLower);
    ++iters;

    if (opt.bland_fallback) {
      const double obj = current_objective();
      if (best_obj == -kInf || obj > best_obj + 1e-12 * (1.0 + std::abs(best_obj))) {
        best_obj = obj;
        since_progress = 0;
      } else if (++since_progress > opt.stall_threshold) {
        bland = true;
      }
    }
  }
}

LpStatus DualSimplex::Impl::primal_phase() {
  std::vector<double> col(nrow), rho(nrow);
  double best_obj = kInf;
  std::size_t since_progress = 0;
  bool bland = false;
  for (;;) {
    if (iters >= opt.max_iterations) return LpStatus::IterationLimit;
    if ((iters & 15) == 0 && out_of_time()) return LpStatus::TimeLimit;
    if (factor.updates() >= opt.refactor_interval) {
      if (!refactor()) return LpStatus::NumericalFailure;
      compute_primal();
      compute_duals();
    }
    std::size_t q = ntot;
    double best = 0.0;
    for (std::size_t j = 0; j < ntot; ++j) {
      const double inf = dual_infeasibility(j);
      if (inf <= opt.dual_tolerance) continue;
      if (bland) {
        q = std::min(q, j);
        continue;
      }
      if (inf > best) best = inf, q = j;
    }
    if (q == ntot) return LpStatus::Optimal;
    if (opt.progress && iters % opt.progress_interval == 0) opt.progress(iters, current_objective(), best);
    const double dir = d[q] < 0.0 ? 1.0 : -1.0;

    std::fill(col.begin(), col.end(), 0.0);
    for_column(q, [&](std::size_t rr, double v) { col[rr] = v; });
    factor.ftran(col);

    // Harris two-pass ratio test over basic variables; x_B moves by -dir * t * col.
    double tmax = is_boxed(q) ? upper[q] - lower[q] : kInf;
    for (std::size_t i = 0; i < nrow; ++i) {
      const double rate = -dir * col[i];
      if (std::abs(col[i]) <= opt.pivot_tolerance) continue;
      const auto b = static_cast<std::size_t>(head[i]);
      if (rate < 0.0 && lower[b] > -kInf) tmax = std::min(tmax, (x[b] - lower[b] + opt.primal_tolerance) / -rate);
      if (rate > 0.0 && upper[b] < kInf) tmax = std::min(tmax, (upper[b] - x[b] + opt.primal_tolerance) / rate);
    }
    if (tmax == kInf) return LpStatus::Unbounded;
    std::size_t r = nrow;
    double big = -1.0, step = 0.0;
    bool leave_upper = false;
    for (std::size_t i = 0; i < nrow; ++i) {
      const double rate = -dir * col[i];
      if (std::abs(col[i]) <= opt.pivot_tolerance) continue;
      const auto b = static_cast<std::size_t>(head[i]);
      double ratio = kInf;
      bool up = false;
      if (rate < 0.0 && lower[b] > -kInf) ratio = (x[b] - lower[b]) / -rate;
      if (rate > 0.0 && upper[b] < kInf) ratio = (upper[b] - x[b]) / rate, up = true;
      if (ratio > tmax) continue;
      const bool better = bland ? (r == nrow || head[i] < head[r]) : std::abs(col[i]) > big;
      if (better) big = std::abs(col[i]), r = i, step = std::max(ratio, 0.0), leave_upper = up;
    }
    const double range = is_boxed(q) ? upper[q] - lower[q] : kInf;
    if (r == nrow || range <= step) {
      // Entering variable reaches its opposite bound first.
      const double t = range;
      for (std::size_t i = 0; i < nrow; ++i) x[static_cast<std::size_t>(head[i])] -= dir * t * col[i];
      state[q] = state[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
      x[q] = nonbasic_value(q);
      ++iters;
      continue;
    }

    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    factor.btran(rho);
    compute_pivot_row(rho);
    const double alpha_r = col[r];
    if (std::abs(alpha_r - row_alpha[q]) > 1e-7 * (1.0 + std::abs(alpha_r))) {
      clear_pivot_row();
      if (factor.updates() == 0) return LpStatus::NumericalFailure;
      if (!refactor()) return LpStatus::NumericalFailure;
      compute_primal();
      compute_duals();
      continue;
    }
    const double theta_d = d[q] / alpha_r;
    for (auto jj : row_list) d[static_cast<std::size_t>(jj)] -= theta_d * row_alpha[static_cast<std::size_t>(jj)];
    clear_pivot_row();
    const auto p = static_cast<std::size_t>(head[r]);
    for (std::size_t i = 0; i < nrow; ++i) x[static_cast<std::size_t>(head[i])] -= dir * step * col[i];
    x[q] += dir * step;
    pivot(r, q, col, leave_upper ? VarState::AtUpper : VarState::AtLower);
    d[p] = -theta_d;
    ++iters;

    if (opt.bland_fallback) {
      const double obj = current_objective();
      if (best_obj == kInf || obj < best_obj - 1e-12 * (1.0 + std::abs(best_obj))) {
        best_obj = obj;
        since_progress = 0;
      } else if (++since_progress > opt.stall_threshold) {
        bland = true;
      }
    }
  }
}

bool DualSimplex::Impl::crash_from_point(const std::vector<double>& point) {
  if (point.size() != ncol) throw DimensionError("start point size does not match the model");
  const auto tol = [](double v) { return 1e-9 * (1.0 + std::abs(v)); };
  std::vector<double> act(nrow, 0.0);
  for (std::size_t j = 0; j < ncol; ++j) {
    for (std::size_t e = a.start[j]; e < a.start[j + 1]; ++e) act[static_cast<std::size_t>(a.index[e])] += a.value[e] * point[j];
  }
  std::vector<char> in_s(ncol, 0);
  std::vector<VarState> st(ntot, VarState::Basic);
  for (std::size_t j = 0; j < ncol; ++j) {
    const double v = point[j];
    if (v < lower[j] - tol(v) || v > upper[j] + tol(v)) return false;
    if (std::abs(v - lower[j]) <= tol(v)) st[j] = VarState::AtLower;
    else if (std::abs(v - upper[j]) <= tol(v)) st[j] = VarState::AtUpper;
    else if (lower[j] == -kInf && upper[j] == kInf && v == 0.0) st[j] = VarState::AtZero;
    else in_s[j] = 1;
  }
  // Tight rows can give up their logical to a basic structural.
  std::vector<char> tight(nrow, 0);
  std::vector<std::size_t> s_count(nrow, 0);
  for (std::size_t r = 0; r < nrow; ++r) {
    const double v = act[r];
    if (v < lower[ncol + r] - tol(v) || v > upper[ncol + r] + tol(v)) return false;
    tight[r] = std::abs(v - lower[ncol + r]) <= tol(v) || std::abs(v - upper[ncol + r]) <= tol(v);
    for (std::size_t e = row_start[r]; e < row_start[r + 1]; ++e) s_count[r] += in_s[static_cast<std::size_t>(row_col[e])];
  }
  std::vector<std::int32_t> assigned(nrow, -1);
  for (std::size_t j = 0; j < ncol; ++j) {
    if (!in_s[j]) continue;
    std::size_t best = nrow;
    for (std::size_t e = a.start[j]; e < a.start[j + 1]; ++e) {
      const auto r = static_cast<std::size_t>(a.index[e]);
      if (!tight[r] || assigned[r] >= 0) continue;
      if (best == nrow || s_count[r] < s_count[best]) best = r;
    }
    if (best == nrow) return false;
    assigned[best] = static_cast<std::int32_t>(j);
  }
  std::vector<std::int32_t> new_head;
  new_head.reserve(nrow);
  for (std::size_t r = 0; r < nrow; ++r) {
    const std::size_t lj = ncol + r;
    if (assigned[r] >= 0) {
      new_head.push_back(assigned[r]);
      st[lj] = std::abs(act[r] - lower[lj]) <= tol(act[r]) ? VarState::AtLower : VarState::AtUpper;
    } else {
      new_head.push_back(static_cast<std::int32_t>(lj));
    }
  }
  const auto saved_head = head;
  const auto saved_state = state;
  head = new_head;
  state = st;
  if (!refactor()) {
    head = saved_head;
    state = saved_state;
    factored = false;
    return false;
  }
  std::fill(pos.begin(), pos.end(), -1);
  for (std::size_t r = 0; r < nrow; ++r) pos[static_cast<std::size_t>(head[r])] = static_cast<std::int32_t>(r);
  std::fill(dse.begin(), dse.end(), 1.0);
  compute_primal();
  primal_start = true;
  return true;
}

LpStatus DualSimplex::Impl::solve() {
  if (std::isfinite(opt.time_limit_seconds) && opt.time_limit_seconds < 1e29) {
    const auto limit = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(opt.time_limit_seconds));
    deadline = std::min(deadline, limit);
  }
  if (!factored && !refactor()) return LpStatus::NumericalFailure;
  cost = base_cost;
  perturbed = false;
  compute_primal();
  compute_duals();
  // A primal feasible start goes straight to the primal phase.
  bool skip_dual = primal_start && max_primal_infeasibility() <= 0.0;
  primal_start = false;
  if (!skip_dual) {
    if (opt.perturb_costs) perturb();
    repair_dual(true);
  }

  for (int round = 0; round < 20; ++round) {
    if (!skip_dual) {
      LpStatus st = dual_phase();
      if (st == LpStatus::Infeasible && perturbed) {
        // Confirm with the true costs before reporting infeasibility.
        cost = base_cost;
        perturbed = false;
        if (!refactor()) return LpStatus::NumericalFailure;
        compute_primal();
        compute_duals();
        repair_dual(true);
        st = dual_phase();
      }
      if (st != LpStatus::Optimal) return st;
      if (perturbed) {
        cost = base_cost;
        perturbed = false;
        compute_duals();
      }
    }
    skip_dual = false;
    LpStatus st = primal_phase();
    if (st != LpStatus::Optimal) return st;
    if (!refactor()) return LpStatus::NumericalFailure;
    compute_primal();
    compute_duals();
    double dual_inf = 0.0;
    for (std::size_t j = 0; j < ntot; ++j) dual_inf = std::max(dual_inf, dual_infeasibility(j));
    if (max_primal_infeasibility() <= 0.0 && dual_inf <= opt.dual_tolerance) return LpStatus::Optimal;
    repair_dual(true);
  }
  return LpStatus::NumericalFailure;
}

DualSimplex::DualSimplex(const LpModel& model, SimplexOptions options)
    : impl_(std::make_unique<Impl>(model, options)) {}
DualSimplex::~DualSimplex() = default;

LpStatus DualSimplex::solve() { return impl_->solve(); }
bool DualSimplex::start_from_point(const std::vector<double>& point) { return impl_->crash_from_point(point); }

void DualSimplex::set_column_bounds(std::size_t col, double lower, double upper) {
  auto& s = *impl_;
  s.lower[col] = lower;
  s.upper[col] = upper;
  if (s.state[col] != VarState::Basic) {
    s.state[col] = s.preferred_state(col, s.d[col]);
    s.x[col] = s.nonbasic_value(col);
  }
  s.primal_dirty = true;
}

double DualSimplex::column_lower(std::size_t col) const { return impl_->lower[col]; }
double DualSimplex::column_upper(std::size_t col) const { return impl_->upper[col]; }

BasisSnapshot DualSimplex::basis() const { return {impl_->head, impl_->state}; }

void DualSimplex::set_basis(const BasisSnapshot& basis) {
  auto& s = *impl_;
  s.head = basis.head;
  s.state = basis.state;
  std::fill(s.pos.begin(), s.pos.end(), -1);
  for (std::size_t r = 0; r < s.nrow; ++r) s.pos[static_cast<std::size_t>(s.head[r])] = static_cast<std::int32_t>(r);
  for (std::size_t j = 0; j < s.ntot; ++j) {
    if (s.state[j] == VarState::Basic) continue;
    // Bounds may have changed since the snapshot was taken.
    if ((s.state[j] == VarState::AtLower && s.lower[j] == -kInf) ||
        (s.state[j] == VarState::AtUpper && s.upper[j] == kInf)) {
      s.state[j] = s.preferred_state(j, 0.0);
    }
    s.x[j] = s.nonbasic_value(j);
  }
  s.factored = false;
  s.primal_dirty = true;
  std::fill(s.dse.begin(), s.dse.end(), 1.0);
}

std::vector<double> DualSimplex::primal() const {
  return {impl_->x.begin(), impl_->x.begin() + static_cast<std::ptrdiff_t>(impl_->ncol)};
}

std::vector<double> DualSimplex::row_duals() const {
  const auto& s = *impl_;
  std::vector<double> y(s.nrow);
  for (std::size_t p = 0; p < s.nrow; ++p) y[p] = s.base_cost[static_cast<std::size_t>(s.head[p])];
  s.factor.btran(y);
  return y;
}

double DualSimplex::objective() const {
  const auto& s = *impl_;
  double v = 0.0;
  for (std::size_t j = 0; j < s.ncol; ++j) v += s.base_cost[j] * s.x[j];
  return v;
}

std::size_t DualSimplex::iterations() const { return impl_->iters; }
std::size_t DualSimplex::refactorizations() const { return impl_->refactors; }
void DualSimplex::set_deadline(std::chrono::steady_clock::time_point deadline) { impl_->deadline = deadline; }

}  // namespace layover::lp
