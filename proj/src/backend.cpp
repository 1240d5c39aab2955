#include "layover/backend.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "layover/errors.hpp"
#include "layover/mps.hpp"

namespace layover {

namespace fs = std::filesystem;

namespace {

SolveStatus parse_status(const std::string& word) {
  if (word == "optimal") return SolveStatus::Optimal;
  if (word == "feasible_time_limit") return SolveStatus::FeasibleTimeLimit;
  if (word == "infeasible") return SolveStatus::Infeasible;
  if (word == "unbounded") return SolveStatus::Unbounded;
  if (word == "error") return SolveStatus::Error;
  throw BackendError("unknown backend status: " + word);
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace

BackendSolution parse_solution(std::istream& in, const LayoverProblem& problem) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < problem.variables(); ++c) index.emplace(problem.column_name(c), c);
  BackendSolution sol;
  std::vector<char> seen(problem.variables(), 0);
  sol.values.assign(problem.variables(), 0.0);
  bool have_status = false;
  std::size_t count = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string name, value, extra;
    if (!(ls >> name)) continue;
    if (!(ls >> value) || (ls >> extra)) {
      throw BackendError("solution line " + std::to_string(lineno) + " is not a `name value` pair");
    }
    if (name == "status") {
      sol.status = parse_status(value);
      have_status = true;
      continue;
    }
    const auto it = index.find(name);
    if (it == index.end()) throw BackendError("solution names unknown column " + name);
    if (seen[it->second]) throw BackendError("solution repeats column " + name);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(v)) throw BackendError("bad value for column " + name);
    seen[it->second] = 1;
    sol.values[it->second] = v;
    ++count;
  }
  if (!have_status) throw BackendError("solution has no status line");
  const bool wants_values = sol.status == SolveStatus::Optimal || sol.status == SolveStatus::FeasibleTimeLimit;
  if (wants_values && count != problem.variables()) {
    throw BackendError("solution has " + std::to_string(count) + " columns, problem has " +
                       std::to_string(problem.variables()));
  }
  if (!wants_values) sol.values.clear();
  return sol;
}

SolveResult solve_external(const LayoverProblem& problem, const BackendConfig& config, const std::string& name) {
  if (config.command.empty()) throw BackendError("no external backend configured");
  static std::atomic<unsigned> counter{0};
  const fs::path base = config.work_dir.empty() ? fs::temp_directory_path() : fs::path(config.work_dir);
  const fs::path dir = base / ("layover-backend-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  const auto mps = dir / "problem.mps";
  const auto sol = dir / "solution.txt";
  write_mps(to_mps_model(problem, name), mps.string());
  std::ostringstream cmd;
  cmd << config.command << ' ' << quote(mps.string()) << ' ' << quote(sol.string());
  if (config.time_limit_seconds < 1e9) cmd << ' ' << config.time_limit_seconds;
  cmd << " >/dev/null 2>&1";
  const int rc = std::system(cmd.str().c_str());
  auto cleanup = [&] {
    if (!config.keep_files) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  };
  if (rc != 0) {
    cleanup();
    throw BackendError("backend exited with status " + std::to_string(rc) + ": " + config.command);
  }
  std::ifstream in(sol);
  if (!in) {
    cleanup();
    throw BackendError("backend wrote no solution file");
  }
  BackendSolution parsed;
  try {
    parsed = parse_solution(in, problem);
  } catch (...) {
    cleanup();
    throw;
  }
  cleanup();
  SolveResult res;
  res.status = parsed.status;
  if (!parsed.values.empty()) {
    extract_portfolio(problem, parsed.values, res);
    res.bound = res.premium;
  }
  res.message = "external: " + config.command;
  return res;
}

CrossCheck cross_check(const SolveResult& internal, const SolveResult& external, double tolerance) {
  CrossCheck c;
  c.internal_premium = internal.premium;
  c.external_premium = external.premium;
  c.agree = internal.has_portfolio() && external.has_portfolio() &&
            std::abs(internal.premium - external.premium) < tolerance;
  return c;
}

}  // namespace layover
