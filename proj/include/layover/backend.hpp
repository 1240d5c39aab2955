#pragma once

#include <istream>
#include <string>
#include <vector>

#include "layover/formulation.hpp"
#include "layover/solver.hpp"

namespace layover {

/// External optimizer invoked as `command problem.mps solution.txt [time_limit]`.
/// The solution file holds `status <word>` and one `name value` line per column.
struct BackendConfig {
  std::string command;
  double time_limit_seconds = 14400.0;
  /// Scratch directory; empty means the system temporary directory.
  std::string work_dir;
  bool keep_files = false;
};

struct BackendSolution {
  SolveStatus status = SolveStatus::Error;
  std::vector<double> values;
};

/// Throws BackendError unless every column appears exactly once.
BackendSolution parse_solution(std::istream& in, const LayoverProblem& problem);

SolveResult solve_external(const LayoverProblem& problem, const BackendConfig& config, const std::string& name = "layover");

struct CrossCheck {
  double internal_premium = 0.0;
  double external_premium = 0.0;
  bool agree = false;
};

/// Both premiums must be available and within `tolerance` of each other.
CrossCheck cross_check(const SolveResult& internal, const SolveResult& external, double tolerance = 1e-6);

}  // namespace layover
