#pragma once

// Bounded-variable revised simplex (dual phase with bound flipping, primal
// clean-up) over the computational form  A x - r = 0,  lower <= (x, r) <= upper.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "layover/formulation.hpp"

namespace layover::lp {

/// minimize cost^T x  s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper
struct LpModel {
  std::size_t num_rows = 0;
  std::size_t num_cols = 0;
  std::vector<std::size_t> col_start;
  std::vector<std::int32_t> col_index;
  std::vector<double> col_value;
  std::vector<double> cost;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<double> row_lower;
  std::vector<double> row_upper;

  /// Maximization problems are negated so the model always minimizes.
  static LpModel from_problem(const LayoverProblem& problem);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, TimeLimit, NumericalFailure };

std::string to_string(LpStatus status);

/// Leaving-row rule of the dual phase.
enum class Pricing { Dantzig, SteepestEdge };

struct SimplexOptions {
  Pricing pricing = Pricing::SteepestEdge;
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  /// Iterations without objective progress before switching to Bland's rule.
  std::size_t stall_threshold = 5000;
  bool bland_fallback = true;
  bool perturb_costs = true;
  std::size_t refactor_interval = 100;
  std::size_t max_iterations = 10'000'000;
  double time_limit_seconds = 1e30;
  std::uint64_t seed = 1;
  /// Called every `progress_interval` iterations with (iterations, objective, primal infeasibility sum).
  std::function<void(std::size_t, double, double)> progress;
  std::size_t progress_interval = 1000;
};

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

struct BasisSnapshot {
  std::vector<std::int32_t> head;
  std::vector<VarState> state;
};

class DualSimplex {
 public:
  DualSimplex(const LpModel& model, SimplexOptions options);
  ~DualSimplex();
  DualSimplex(const DualSimplex&) = delete;
  DualSimplex& operator=(const DualSimplex&) = delete;

  /// Solves from the current basis (all-logical on first call).
  LpStatus solve();

  /// Builds a basis around a feasible point (interior structurals basic, each
  /// matched to a tight row). Returns false and keeps the old basis otherwise.
  bool start_from_point(const std::vector<double>& point);

  void set_column_bounds(std::size_t col, double lower, double upper);
  double column_lower(std::size_t col) const;
  double column_upper(std::size_t col) const;

  BasisSnapshot basis() const;
  void set_basis(const BasisSnapshot& basis);

  /// Structural values x.
  std::vector<double> primal() const;
  /// Row duals y (for the minimization form).
  std::vector<double> row_duals() const;
  double objective() const;

  std::size_t iterations() const;
  std::size_t refactorizations() const;
  /// Deadline shared with a caller (branch and bound); defaults to the option's time limit.
  void set_deadline(std::chrono::steady_clock::time_point deadline);

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace layover::lp
