#include <algorithm>
#include <numeric>

#include "catch_amalgamated.hpp"
#include "layover/formulation.hpp"
#include "layover/solver.hpp"
#include "support.hpp"

using namespace layover;
using Catch::Approx;

namespace {

SolveResult run(Formulation f, const Instance& inst, const SolverConfig& config = {}) {
  return solve(assemble_instance(f, inst), inst.grid, config);
}

}  // namespace

TEST_CASE("premiums match the independent shortfall and big-M formulations") {
  struct Case {
    Instance inst;
    double lp, milp;
  };
  const std::vector<Case> cases{{test::generic_instance(), 1.3999999999999999, 1.3999999999999999},
                                {test::twin_instance(), 0.89999999999999991, 0.89999999999999991},
                                {test::augmented_instance(), 0.49999999999999845, 0.49999999999999961}};
  for (const auto& c : cases) {
    for (auto f : {Formulation::LP, Formulation::LP_STAR, Formulation::LP_COMBINED}) {
      const auto r = run(f, c.inst);
      REQUIRE(r.status == SolveStatus::Optimal);
      CHECK(r.premium == Approx(c.lp).margin(1e-8));
    }
    const auto r = run(Formulation::MILP, c.inst);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.premium == Approx(c.milp).margin(1e-8));
  }
}

TEST_CASE("twin calls yield the bid-ask arbitrage") {
  const auto r = run(Formulation::LP, test::twin_instance());
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.premium >= 3.0 - 2.1 - 1e-9);
  CHECK(r.beta[0] == Approx(1.0).margin(1e-9));
  CHECK(r.alpha[1] == Approx(1.0).margin(1e-9));
}

TEST_CASE("LP premiums are nonnegative and pass an independent residual check") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_small_instance(derive_seed(21, seed), 8, 3);
    const auto p = assemble_instance(Formulation::LP, inst);
    const auto r = solve_lp(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.premium >= -1e-9);
    CHECK(max_violation(p, r.solution) <= 1e-8);
    CHECK(r.bound == r.premium);
  }
}

TEST_CASE("LP, LP* and the combined form agree") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_small_instance(derive_seed(22, seed), 8, 3);
    const double lp = run(Formulation::LP, inst).premium;
    CHECK(std::abs(run(Formulation::LP_STAR, inst).premium - lp) <= 1e-8);
    CHECK(std::abs(run(Formulation::LP_COMBINED, inst).premium - lp) <= 1e-8);
  }
}

TEST_CASE("premium scales with prices and ignores option order") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_small_instance(derive_seed(23, seed), 7, 3);
    const double base = run(Formulation::LP, inst).premium;
    const auto payoff = build_payoff_matrix(inst.snapshot, inst.grid);
    const auto poly = build_polytope(inst.snapshot, inst.limits, inst.zero_payoff_outside);
    std::vector<double> ask, bid;
    for (const auto& q : inst.snapshot.quotes) {
      ask.push_back(2.5 * q.ask);
      bid.push_back(2.5 * q.bid);
    }
    const auto scaled = solve_lp(assemble(Formulation::LP, payoff, inst.grid, poly, ask, bid));
    CHECK(scaled.premium == Approx(2.5 * base).margin(1e-8));

    auto rev = inst;
    std::reverse(rev.snapshot.quotes.begin(), rev.snapshot.quotes.end());
    std::reverse(rev.limits.max_long.begin(), rev.limits.max_long.end());
    std::reverse(rev.limits.max_short.begin(), rev.limits.max_short.end());
    const auto rp = build_payoff_matrix(rev.snapshot, rev.grid);
    const auto rpoly = build_polytope(rev.snapshot, rev.limits, rev.zero_payoff_outside);
    std::vector<double> rask, rbid;
    for (const auto& q : rev.snapshot.quotes) {
      rask.push_back(q.ask);
      rbid.push_back(q.bid);
    }
    CHECK(solve_lp(assemble(Formulation::LP, rp, rev.grid, rpoly, rask, rbid)).premium == Approx(base).margin(1e-8));
  }
}

TEST_CASE("MILP premium never exceeds the LP premium") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto inst = random_small_instance(derive_seed(24, seed), 8, 3);
    const auto milp = run(Formulation::MILP, inst);
    REQUIRE(milp.status == SolveStatus::Optimal);
    CHECK(milp.premium <= run(Formulation::LP, inst).premium + 1e-6);
  }
}

TEST_CASE("incumbent and bound traces are monotone") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = random_small_instance(derive_seed(25, seed), 8, 3);
    for (auto sel : {NodeSelection::BestBound, NodeSelection::DepthFirst}) {
      SolverConfig cfg;
      cfg.node_selection = sel;
      const auto r = run(Formulation::MILP, inst, cfg);
      REQUIRE(!r.incumbent_trace.empty());
      CHECK(r.incumbent_trace.front().premium == 0.0);
      CHECK(r.incumbent_trace.front().node == 0);
      for (std::size_t k = 1; k < r.incumbent_trace.size(); ++k) {
        CHECK(r.incumbent_trace[k].premium >= r.incumbent_trace[k - 1].premium);
        CHECK(r.incumbent_trace[k].seconds >= r.incumbent_trace[k - 1].seconds);
      }
      for (std::size_t k = 1; k < r.bound_trace.size(); ++k) CHECK(r.bound_trace[k] <= r.bound_trace[k - 1]);
      for (double b : r.bound_trace) CHECK(b >= r.incumbent_trace.front().premium);
      CHECK(r.bound >= r.premium);
    }
  }
}

TEST_CASE("node selection and branching rules reach the same optimum") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_small_instance(derive_seed(26, seed), 8, 3);
    const double best = run(Formulation::MILP, inst).premium;
    SolverConfig dfs;
    dfs.node_selection = NodeSelection::DepthFirst;
    SolverConfig first;
    first.branching = BranchingRule::FirstFractional;
    CHECK(run(Formulation::MILP, inst, dfs).premium == Approx(best).margin(1e-7));
    CHECK(run(Formulation::MILP, inst, first).premium == Approx(best).margin(1e-7));
  }
}

TEST_CASE("repeated solves are identical") {
  const auto inst = random_small_instance(derive_seed(27, 3), 8, 3);
  const auto a = run(Formulation::MILP, inst);
  const auto b = run(Formulation::MILP, inst);
  CHECK(a.solution == b.solution);
  CHECK(a.nodes == b.nodes);
  CHECK(a.bound_trace == b.bound_trace);
  REQUIRE(a.incumbent_trace.size() == b.incumbent_trace.size());
  for (std::size_t k = 0; k < a.incumbent_trace.size(); ++k) {
    CHECK(a.incumbent_trace[k].node == b.incumbent_trace[k].node);
    CHECK(a.incumbent_trace[k].premium == b.incumbent_trace[k].premium);
  }
}

TEST_CASE("zero time limit returns the warm start") {
  SolverConfig cfg;
  cfg.time_limit_seconds = 0.0;
  const auto r = run(Formulation::MILP, test::generic_instance(), cfg);
  CHECK(r.status == SolveStatus::FeasibleTimeLimit);
  CHECK(r.premium == 0.0);
  CHECK(r.has_portfolio());
}

TEST_CASE("node limit stops with a valid bound") {
  SolverConfig cfg;
  cfg.node_limit = 1;
  const auto inst = test::augmented_instance();
  const auto r = run(Formulation::MILP, inst, cfg);
  CHECK(r.has_portfolio());
  CHECK(r.nodes <= 1);
  CHECK(r.bound >= 0.49999999999999961 - 1e-9);
  CHECK(r.premium <= 0.49999999999999961 + 1e-9);
}

TEST_CASE("infeasible supplied warm start is rejected") {
  const auto inst = test::generic_instance();
  const auto p = assemble_instance(Formulation::MILP, inst);
  std::vector<double> bad(p.variables(), 5.0);
  CHECK_THROWS(solve_milp(p, inst.grid, {}, bad));
}

TEST_CASE("solver configuration parsing") {
  CHECK(parse_node_selection("depth-first") == NodeSelection::DepthFirst);
  CHECK(parse_branching_rule("first-fractional") == BranchingRule::FirstFractional);
  CHECK_THROWS(parse_node_selection("random"));
  SolverConfig bad;
  bad.feasibility_tolerance = 0.0;
  CHECK_THROWS(bad.validate());
}
