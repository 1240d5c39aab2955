#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "layover/formulation.hpp"
#include "layover/simplex.hpp"

namespace layover {

enum class SolveStatus { Optimal, FeasibleTimeLimit, Infeasible, Unbounded, Error };

std::string to_string(SolveStatus status);

enum class NodeSelection { BestBound, DepthFirst };
enum class BranchingRule { MostFractional, FirstFractional };

std::string to_string(NodeSelection rule);
std::string to_string(BranchingRule rule);
NodeSelection parse_node_selection(const std::string& text);
BranchingRule parse_branching_rule(const std::string& text);

struct SolverConfig {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double time_limit_seconds = 14400.0;
  /// Bland's rule after a stall.
  bool anti_cycling = true;
  NodeSelection node_selection = NodeSelection::BestBound;
  BranchingRule branching = BranchingRule::MostFractional;
  lp::Pricing pricing = lp::Pricing::SteepestEdge;
  std::uint64_t seed = 1;
  /// Branch-and-bound nodes before stopping with the incumbent.
  std::size_t node_limit = std::numeric_limits<std::size_t>::max();
  /// Psi values within this distance of 0 or 1 count as integral.
  double integrality_tolerance = 1e-6;

  void validate() const;
};

/// One incumbent improvement: wall time since the start (millisecond resolution),
/// the node that produced it and the new premium.
struct TracePoint {
  double seconds = 0.0;
  std::size_t node = 0;
  double premium = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Error;
  std::vector<double> alpha;
  std::vector<double> beta;
  double premium = 0.0;
  /// Best upper bound on the premium (equals the premium for an optimal LP).
  double bound = std::numeric_limits<double>::infinity();
  std::vector<TracePoint> incumbent_trace;
  /// Global bound after each processed node (nonincreasing).
  std::vector<double> bound_trace;
  std::size_t iterations = 0;
  std::size_t nodes = 0;
  /// Full variable vector of the returned point (empty when none).
  std::vector<double> solution;
  std::string message;

  bool has_portfolio() const { return status == SolveStatus::Optimal || status == SolveStatus::FeasibleTimeLimit; }
};

lp::SimplexOptions simplex_options(const SolverConfig& config);

SolveResult solve_lp(const LayoverProblem& problem, const SolverConfig& config = {});

/// Branch and bound over Psi. The default warm start is the zero portfolio
/// (Psi = I, xi = mu); a supplied point must satisfy every row and bound.
SolveResult solve_milp(const LayoverProblem& problem, const StateGrid& grid, const SolverConfig& config = {},
                       const std::optional<std::vector<double>>& warm_start = std::nullopt);

/// Dispatches on the problem tag.
SolveResult solve(const LayoverProblem& problem, const StateGrid& grid, const SolverConfig& config = {});

/// Fills alpha, beta and premium from a full variable vector.
void extract_portfolio(const LayoverProblem& problem, const std::vector<double>& z, SolveResult& result);

}  // namespace layover
