#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "layover/errors.hpp"
#include "layover/workbench.hpp"

namespace {

using layover::RunConfig;

void add_common(CLI::App& cmd, RunConfig& c, std::string& spec, std::string& scales, std::string& formulation,
                std::string& compounding) {
  cmd.add_option("--quotes", c.quotes, "option quotes CSV");
  cmd.add_option("--observables", c.observables, "observables CSV");
  cmd.add_option("--exclusions", c.exclusions, "quote exclusions CSV");
  cmd.add_option("--realized", c.realized, "realized index CSV (trade_date, realized_index)");
  cmd.add_option("--output", c.output, "output directory")->capture_default_str();
  cmd.add_option("--spec", spec, "symmetric or skewed")->capture_default_str();
  cmd.add_option("--mrp", c.calibration.market_risk_premium, "market risk premium")->capture_default_str();
  cmd.add_option("--vrp", c.calibration.vol_risk_premium, "volatility risk premium")->capture_default_str();
  cmd.add_option("--grid-tick", c.calibration.grid_tick, "state grid spacing in index points")->capture_default_str();
  cmd.add_option("--sgt-shape", c.sgt.shape)->capture_default_str();
  cmd.add_option("--sgt-df", c.sgt.degrees_of_freedom)->capture_default_str();
  cmd.add_option("--sgt-asymmetry", c.sgt.asymmetry)->capture_default_str();
  cmd.add_option("--moneyness-low", c.filter.lower)->capture_default_str();
  cmd.add_option("--moneyness-high", c.filter.upper)->capture_default_str();
  cmd.add_option("--scale", scales, "comma-separated depth scales")->capture_default_str();
  cmd.add_option("--formulation", formulation, "lp, lp_star, lp_combined or milp")->capture_default_str();
  cmd.add_flag("--zero-payoff,!--no-zero-payoff", c.zero_payoff, "zero payoff outside the strike range (default on)");
  cmd.add_option("--time-limit", c.solver.time_limit_seconds, "seconds per solve")->capture_default_str();
  cmd.add_option("--node-limit", c.solver.node_limit, "branch-and-bound nodes per solve");
  cmd.add_option("--seed", c.seed)->capture_default_str();
  cmd.add_option("--threshold", c.threshold, "premium materiality as a fraction of the market investment")
      ->capture_default_str();
  cmd.add_option("--compounding", compounding, "continuous or simple")->capture_default_str();
  cmd.add_option("--workers", c.workers, "parallel tasks")->capture_default_str();
  cmd.add_option("--backend", c.backend, "external solver command");
  cmd.add_flag("--cross-check", c.cross_check, "compare the internal solver with the backend");
  cmd.add_option("--model-draws", c.model_draws)->capture_default_str();
  cmd.add_option("--block-months", c.block_months)->capture_default_str();
  cmd.add_option("--replications", c.replications)->capture_default_str();
  cmd.add_flag("--circular-blocks", c.circular_blocks);
  cmd.add_option("--cases", c.cases)->capture_default_str();
  cmd.add_option("--equivalence-cases", c.equivalence_cases)->capture_default_str();
  cmd.add_option("--max-states", c.max_states)->capture_default_str();
  cmd.add_option("--max-options", c.max_options)->capture_default_str();
  cmd.add_option("--lattice-step", c.lattice_step)->capture_default_str();
  cmd.add_option("--lattice-cap", c.lattice_cap)->capture_default_str();
  cmd.add_option("--inject-fault", c.inject_fault, "theta-sign");
  cmd.add_option("--replay", c.replay, "failure dump written by verify");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic arbitrage workbench"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file; flags override it");

  RunConfig config;
  std::string spec = "symmetric", scales = "1,10,100,1000", formulation = "lp", compounding = "continuous";
  std::string node_selection = "best-bound", branching = "most-fractional";
  for (const char* name : {"build", "solve", "backtest", "diagnose", "verify"}) {
    auto* cmd = app.add_subcommand(name);
    add_common(*cmd, config, spec, scales, formulation, compounding);
    cmd->add_option("--node-selection", node_selection)->capture_default_str();
    cmd->add_option("--branching", branching)->capture_default_str();
    cmd->configurable();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : layover::kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    config.spec = layover::parse_return_spec(spec);
    config.scales = layover::parse_scales(scales);
    config.formulation = layover::parse_formulation(formulation);
    config.compounding = layover::parse_compounding(compounding);
    config.solver.node_selection = layover::parse_node_selection(node_selection);
    config.solver.branching = layover::parse_branching_rule(branching);
    config.solver.seed = config.seed;
    if (command == "build") return layover::cmd_build(config);
    if (command == "solve") return layover::cmd_solve(config);
    if (command == "backtest") return layover::cmd_backtest(config);
    if (command == "diagnose") return layover::cmd_diagnose(config);
    return layover::cmd_verify(config);
  } catch (const layover::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return layover::kExitValidation;
  } catch (const layover::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return layover::kExitValidation;
  } catch (const layover::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return layover::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return layover::kExitSolver;
  }
}
