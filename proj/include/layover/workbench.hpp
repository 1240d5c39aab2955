#pragma once

// Batch commands behind the command-line front end. Each command writes its
// machine outputs (CSV, JSON-lines, MPS) into the output directory and its
// timestamped log to <output>/<command>.log, and returns a process exit code.

#include <cstdint>
#include <string>
#include <vector>

#include "layover/backtest.hpp"
#include "layover/formulation.hpp"
#include "layover/market_data.hpp"
#include "layover/solver.hpp"
#include "layover/state_probability.hpp"
#include "layover/synthetic.hpp"

namespace layover {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitSolver = 2, kExitOracle = 3 };

struct RunConfig {
  std::string quotes;
  std::string observables;
  std::string exclusions;
  std::string realized;
  std::string output = "layover-out";

  ReturnSpec spec = ReturnSpec::Symmetric;
  SgtParams sgt;
  CalibrationParams calibration;
  MoneynessFilter filter;
  std::vector<int> scales{1, 10, 100, 1000};
  Formulation formulation = Formulation::LP;
  bool zero_payoff = true;
  SolverConfig solver;
  /// External backend command; empty uses the internal solver.
  std::string backend;
  /// Solve with both and compare premiums.
  bool cross_check = false;
  double threshold = 0.001;
  std::uint64_t seed = 1;
  Compounding compounding = Compounding::Continuous;
  std::size_t workers = 1;

  std::size_t model_draws = 10000;
  std::size_t block_months = 12;
  std::size_t replications = 999;
  bool circular_blocks = false;

  std::size_t cases = 200;
  std::size_t equivalence_cases = 50;
  std::size_t max_states = 8;
  std::size_t max_options = 3;
  double lattice_step = 0.25;
  double lattice_cap = 1.0;
  /// "theta-sign" corrupts the solver's payoff matrix.
  std::string inject_fault;
  std::string replay;

  void validate() const;
};

std::vector<int> parse_scales(const std::string& text);

int cmd_build(const RunConfig& config);
int cmd_solve(const RunConfig& config);
int cmd_backtest(const RunConfig& config);
int cmd_diagnose(const RunConfig& config);
int cmd_verify(const RunConfig& config);

/// Outcome of the solver/oracle checks on one instance.
struct VerifyReport {
  bool passed = true;
  std::vector<std::string> failures;
  double lp_premium = 0.0;
  double lp_star_premium = 0.0;
  double milp_premium = 0.0;
  double lattice_ssd = 0.0;
  double lattice_fsd = 0.0;
  std::size_t milp_nodes = 0;
};

struct VerifyOptions {
  SolverConfig solver;
  double lattice_step = 0.25;
  double lattice_cap = 1.0;
  bool check_lp_star = true;
  bool check_milp = true;
  bool check_lattice = true;
  bool flip_theta = false;
};

/// Payoff values of solver portfolios are compared after moving them up by this
/// amount, the solver's feasibility tolerance.
constexpr double kPayoffTolerance = 1e-9;

VerifyReport verify_instance(const Instance& instance, const VerifyOptions& options);

}  // namespace layover
