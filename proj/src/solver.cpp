#include "layover/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "layover/errors.hpp"

namespace layover {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  return static_cast<double>(ms) / 1000.0;
}

Clock::time_point deadline_after(Clock::time_point start, double seconds) {
  if (!(seconds < 1e9)) return Clock::time_point::max();
  return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

// Row residuals are compared relative to the row's magnitude.
double violation_limit(const SolverConfig& config) { return std::max(1e-6, 1e3 * config.feasibility_tolerance); }

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleTimeLimit: return "feasible_time_limit";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Error: return "error";
  }
  return "error";
}

std::string to_string(NodeSelection rule) {
  return rule == NodeSelection::BestBound ? "best-bound" : "depth-first";
}

std::string to_string(BranchingRule rule) {
  return rule == BranchingRule::MostFractional ? "most-fractional" : "first-fractional";
}

NodeSelection parse_node_selection(const std::string& text) {
  if (text == "best-bound") return NodeSelection::BestBound;
  if (text == "depth-first") return NodeSelection::DepthFirst;
  throw ValidationError("unknown node selection: " + text);
}

BranchingRule parse_branching_rule(const std::string& text) {
  if (text == "most-fractional") return BranchingRule::MostFractional;
  if (text == "first-fractional") return BranchingRule::FirstFractional;
  throw ValidationError("unknown branching rule: " + text);
}

void SolverConfig::validate() const {
  if (!(feasibility_tolerance > 0.0) || !(optimality_tolerance > 0.0) || !(integrality_tolerance > 0.0)) {
    throw ValidationError("solver tolerances must be positive");
  }
  if (!(time_limit_seconds >= 0.0)) throw ValidationError("time limit must be nonnegative");
}

lp::SimplexOptions simplex_options(const SolverConfig& config) {
  lp::SimplexOptions opt;
  opt.pricing = config.pricing;
  opt.primal_tolerance = config.feasibility_tolerance;
  opt.dual_tolerance = config.optimality_tolerance;
  opt.bland_fallback = config.anti_cycling;
  opt.seed = config.seed;
  return opt;
}

void extract_portfolio(const LayoverProblem& problem, const std::vector<double>& z, SolveResult& result) {
  const auto& L = problem.layout;
  result.alpha.assign(L.m, 0.0);
  result.beta.assign(L.m, 0.0);
  for (std::size_t i = 0; i < L.m; ++i) {
    result.alpha[i] = std::max(0.0, z[L.alpha(i)]);
    result.beta[i] = std::max(0.0, z[L.beta(i)]);
  }
  result.premium = objective_value(problem, z);
  result.solution = z;
}

SolveResult solve_lp(const LayoverProblem& problem, const SolverConfig& config) {
  config.validate();
  SolveResult result;
  const auto model = lp::LpModel::from_problem(problem);
  auto opt = simplex_options(config);
  opt.time_limit_seconds = config.time_limit_seconds;
  lp::DualSimplex simplex(model, opt);
  const auto st = simplex.solve();
  result.iterations = simplex.iterations();
  switch (st) {
    case lp::LpStatus::Optimal: break;
    case lp::LpStatus::Infeasible: result.status = SolveStatus::Infeasible; return result;
    case lp::LpStatus::Unbounded: result.status = SolveStatus::Unbounded; return result;
    default:
      result.status = SolveStatus::Error;
      result.message = "simplex: " + lp::to_string(st);
      return result;
  }
  const auto z = simplex.primal();
  const double viol = max_violation(problem, z);
  if (viol > violation_limit(config)) {
    result.status = SolveStatus::Error;
    result.message = "residual check failed: " + std::to_string(viol);
    return result;
  }
  extract_portfolio(problem, z, result);
  result.status = SolveStatus::Optimal;
  result.bound = result.premium;
  return result;
}

namespace {

struct Fixing {
  std::size_t col;
  double value;
};

struct Node {
  std::size_t id = 0;
  double parent_bound = 0.0;
  std::vector<Fixing> fixings;
  std::shared_ptr<const lp::BasisSnapshot> basis;
};

struct BestFirst {
  bool operator()(const Node& a, const Node& b) const {
    if (a.parent_bound != b.parent_bound) return a.parent_bound < b.parent_bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const LayoverProblem& problem, const SolverConfig& config, Clock::time_point start)
      : problem_(problem),
        config_(config),
        start_(start),
        model_(lp::LpModel::from_problem(problem)),
        simplex_(model_, simplex_options(config)) {
    simplex_.set_deadline(deadline_after(start, config.time_limit_seconds));
    const auto& L = problem.layout;
    for (std::size_t c = L.psi_offset(); c < L.total(); ++c) {
      if (problem.is_integer[c]) integer_cols_.push_back(c);
    }
    slack_basis_ = simplex_.basis();
  }

  SolveResult run(const std::optional<std::vector<double>>& warm) {
    SolveResult& res = result_;
    if (warm) offer_incumbent(*warm, 0);
    res.bound = kInf;
    if (config_.time_limit_seconds <= 0.0) return finish(SolveStatus::FeasibleTimeLimit, "time limit");

    std::priority_queue<Node, std::vector<Node>, BestFirst> heap;
    std::vector<Node> stack;
    const bool best_first = config_.node_selection == NodeSelection::BestBound;
    auto push = [&](Node node) {
      if (best_first) heap.push(std::move(node));
      else stack.push_back(std::move(node));
    };
    auto empty = [&] { return best_first ? heap.empty() : stack.empty(); };
    auto pop = [&] {
      Node node;
      if (best_first) {
        node = heap.top();
        heap.pop();
      } else {
        node = std::move(stack.back());
        stack.pop_back();
      }
      return node;
    };
    auto open_bound = [&] {
      double b = -kInf;
      if (best_first) {
        if (!heap.empty()) b = heap.top().parent_bound;
      } else {
        for (const auto& node : stack) b = std::max(b, node.parent_bound);
      }
      return b;
    };

    push(Node{0, kInf, {}, nullptr});
    next_id_ = 1;
    bool reliable = true;
    while (!empty()) {
      if (res.nodes >= config_.node_limit) return finish(SolveStatus::FeasibleTimeLimit, "node limit");
      if (Clock::now() >= deadline_after(start_, config_.time_limit_seconds)) {
        return finish(SolveStatus::FeasibleTimeLimit, "time limit");
      }
      Node node = pop();
      if (node.parent_bound <= incumbent_ + config_.optimality_tolerance) {
        record_bound(std::max(open_bound(), incumbent_));
        continue;
      }
      ++res.nodes;
      apply(node.fixings);
      simplex_.set_basis(node.basis ? *node.basis : slack_basis_);
      auto st = simplex_.solve();
      if (st == lp::LpStatus::NumericalFailure) {
        simplex_.set_basis(slack_basis_);
        st = simplex_.solve();
      }
      if (st == lp::LpStatus::TimeLimit) {
        return finish(SolveStatus::FeasibleTimeLimit, "time limit");
      }
      if (st != lp::LpStatus::Optimal && st != lp::LpStatus::Infeasible) {
        if (node.id == 0 && st == lp::LpStatus::Unbounded) return finish(SolveStatus::Unbounded, "relaxation unbounded");
        reliable = false;
        record_bound(std::max(open_bound(), incumbent_));
        continue;
      }
      if (st == lp::LpStatus::Infeasible) {
        record_bound(std::max(open_bound(), incumbent_));
        continue;
      }
      const double node_bound = std::min(node.parent_bound, -simplex_.objective());
      if (node_bound <= incumbent_ + config_.optimality_tolerance) {
        record_bound(std::max(open_bound(), incumbent_));
        continue;
      }
      const auto z = simplex_.primal();
      const auto branch_col = select_branch(z);
      if (!branch_col) {
        try_integral(z, node);
        record_bound(std::max(open_bound(), incumbent_));
        continue;
      }
      auto basis = std::make_shared<const lp::BasisSnapshot>(simplex_.basis());
      Node down{next_id_++, node_bound, node.fixings, basis};
      down.fixings.push_back({*branch_col, 0.0});
      Node up{next_id_++, node_bound, node.fixings, basis};
      up.fixings.push_back({*branch_col, 1.0});
      // Depth-first dives on the up branch, which commits one state assignment.
      push(std::move(down));
      push(std::move(up));
      record_bound(std::max(open_bound(), incumbent_));
    }
    if (!reliable) return finish(SolveStatus::FeasibleTimeLimit, "numerical failure in a subproblem");
    record_bound(incumbent_);
    return finish(SolveStatus::Optimal, "");
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void apply(const std::vector<Fixing>& fixings) {
    for (auto c : fixed_) simplex_.set_column_bounds(c, problem_.lower[c], problem_.upper[c]);
    fixed_.clear();
    for (const auto& f : fixings) {
      simplex_.set_column_bounds(f.col, f.value, f.value);
      fixed_.push_back(f.col);
    }
  }

  std::optional<std::size_t> select_branch(const std::vector<double>& z) const {
    std::optional<std::size_t> best;
    double best_score = -1.0;
    for (auto c : integer_cols_) {
      const double frac = std::abs(z[c] - std::round(z[c]));
      if (frac <= config_.integrality_tolerance) continue;
      if (config_.branching == BranchingRule::FirstFractional) return c;
      if (frac > best_score) {
        best_score = frac;
        best = c;
      }
    }
    return best;
  }

  // Fix every binary at its rounded value and re-solve for exact continuous parts.
  void try_integral(const std::vector<double>& z, const Node& node) {
    std::vector<Fixing> all;
    all.reserve(integer_cols_.size());
    for (auto c : integer_cols_) all.push_back({c, std::round(z[c])});
    apply(all);
    const auto st = simplex_.solve();
    if (st == lp::LpStatus::Optimal) offer_incumbent(simplex_.primal(), node.id);
  }

  void offer_incumbent(std::vector<double> z, std::size_t node) {
    for (auto c : integer_cols_) z[c] = std::round(z[c]);
    if (max_violation(problem_, z) > violation_limit(config_)) return;
    const double premium = objective_value(problem_, z);
    if (!result_.incumbent_trace.empty() && premium <= incumbent_ + config_.optimality_tolerance) return;
    incumbent_ = premium;
    extract_portfolio(problem_, z, result_);
    result_.incumbent_trace.push_back({elapsed_ms(start_), node, premium});
  }

  void record_bound(double bound) {
    bound = std::max(bound, incumbent_);
    if (!result_.bound_trace.empty()) bound = std::min(bound, result_.bound_trace.back());
    result_.bound_trace.push_back(bound);
    result_.bound = bound;
  }

  SolveResult finish(SolveStatus status, std::string message) {
    result_.status = status;
    result_.message = std::move(message);
    result_.iterations = simplex_.iterations();
    if (result_.incumbent_trace.empty()) {
      // No feasible point: either proven by a complete search or left open at a limit.
      result_.status = status == SolveStatus::Optimal ? SolveStatus::Infeasible : SolveStatus::Error;
      if (status != SolveStatus::Optimal) result_.message += " before a feasible point was found";
      return std::move(result_);
    }
    if (status == SolveStatus::Optimal) result_.bound = result_.premium;
    if (result_.bound < result_.premium) result_.bound = result_.premium;
    return std::move(result_);
  }

  const LayoverProblem& problem_;
  const SolverConfig& config_;
  Clock::time_point start_;
  lp::LpModel model_;
  lp::DualSimplex simplex_;
  lp::BasisSnapshot slack_basis_;
  std::vector<std::size_t> integer_cols_;
  std::vector<std::size_t> fixed_;
  std::size_t next_id_ = 0;
  double incumbent_ = -kInf;
  SolveResult result_;
};

}  // namespace

SolveResult solve_milp(const LayoverProblem& problem, const StateGrid& grid, const SolverConfig& config,
                       const std::optional<std::vector<double>>& warm_start) {
  config.validate();
  if (!problem.is_mip()) throw ValidationError("solve_milp requires a MILP problem");
  const auto start = Clock::now();
  std::optional<std::vector<double>> warm = warm_start;
  if (warm) {
    if (warm->size() != problem.variables()) throw DimensionError("warm start size does not match the problem");
    if (max_violation(problem, *warm) > violation_limit(config)) throw ValidationError("warm start is infeasible");
  } else {
    // The zero portfolio is feasible unless the caller tightened bounds.
    warm = zero_portfolio_start(problem, grid);
    if (max_violation(problem, *warm) > violation_limit(config)) warm.reset();
  }
  BranchAndBound bb(problem, config, start);
  return bb.run(warm);
}

SolveResult solve(const LayoverProblem& problem, const StateGrid& grid, const SolverConfig& config) {
  return problem.is_mip() ? solve_milp(problem, grid, config) : solve_lp(problem, config);
}

}  // namespace layover
