#include "layover/workbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "layover/backend.hpp"
#include "layover/csv.hpp"
#include "layover/diagnostics.hpp"
#include "layover/dominance.hpp"
#include "layover/errors.hpp"
#include "layover/mps.hpp"

namespace layover {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class RunLog {
 public:
  RunLog(const std::string& dir, const std::string& command) {
    fs::create_directories(dir);
    out_.open(fs::path(dir) / (command + ".log"));
  }

  void info(const std::string& msg) { write("info", msg, false); }
  void warn(const std::string& msg) { write("warn", msg, true); }
  void error(const std::string& msg) { write("error", msg, true); }

 private:
  void write(const char* level, const std::string& msg, bool echo) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    out_ << stamp << ' ' << level << ' ' << msg << '\n';
    out_.flush();
    if (echo) std::cerr << level << ": " << msg << '\n';
  }

  std::ofstream out_;
  std::mutex mu_;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " path is not set");
  if (!fs::exists(path)) throw ValidationError(what + " file does not exist: " + path);
}

// Writes through a temporary file renamed into place.
void write_atomic(const fs::path& path, const std::string& content) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
  }
  fs::rename(tmp, path);
}

template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= count || failure) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<MarketSnapshot> load_inputs(const RunConfig& config) {
  require_file(config.quotes, "quotes");
  require_file(config.observables, "observables");
  std::vector<QuoteExclusion> exclusions;
  if (!config.exclusions.empty()) {
    require_file(config.exclusions, "exclusions");
    exclusions = load_exclusions(config.exclusions);
  }
  return load_snapshots(config.quotes, config.observables, config.filter, exclusions);
}

StateGrid make_grid(const MarketSnapshot& snapshot, const RunConfig& config) {
  return config.spec == ReturnSpec::Symmetric ? build_grid_symmetric(snapshot, config.calibration)
                                              : build_grid_skewed(snapshot, config.calibration, config.sgt);
}

PredictiveDistribution make_predictive(const MarketSnapshot& snapshot, const RunConfig& config) {
  return PredictiveDistribution(calibrate_location_scale(snapshot, config.calibration), config.spec, config.sgt);
}

Instance make_instance(const MarketSnapshot& snapshot, const StateGrid& grid, int scale, bool zero_payoff) {
  return Instance{snapshot, grid, apply_depth_constraint(snapshot, scale), zero_payoff};
}

std::string task_stem(const MarketSnapshot& s, int scale, Formulation f) {
  std::string tag = to_string(f);
  std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::tolower(c); });
  return s.trade_date.compact() + "_" + std::to_string(scale) + "_" + tag;
}

double market_investment(const MarketSnapshot& s, Compounding c) {
  const double growth = accrual(s.risk_free_rate, s.calendar_years(), c);
  try {
    return impute_forward(s, c) / growth;
  } catch (const ValidationError&) {
    return s.index_level;
  }
}

std::map<Date, double> load_realized(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto cd = t.column("trade_date");
  const auto cx = t.column("realized_index");
  std::map<Date, double> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double v = t.number(r, cx);
    if (!(v > 0.0)) throw ValidationError(path + ": nonpositive realized index on line " + std::to_string(t.line_of(r)));
    out[Date::parse(t.cell(r, cd))] = v;
  }
  return out;
}

// ---- instance serialization (replay files) ----

json instance_to_json(const Instance& inst) {
  json q = json::array();
  for (const auto& o : inst.snapshot.quotes) {
    q.push_back({{"kind", o.is_call() ? "C" : "P"}, {"strike", o.strike}, {"bid", o.bid}, {"ask", o.ask},
                 {"bid_size", o.bid_size}, {"ask_size", o.ask_size}});
  }
  const auto& s = inst.snapshot;
  return {{"trade_date", s.trade_date.iso()},
          {"expiry_date", s.expiry_date.iso()},
          {"index_level", s.index_level},
          {"risk_free_rate", s.risk_free_rate},
          {"vol_index", s.vol_index},
          {"trading_days_to_expiry", s.trading_days_to_expiry},
          {"quotes", q},
          {"atoms", inst.grid.atoms},
          {"probs", inst.grid.probs},
          {"max_long", inst.limits.max_long},
          {"max_short", inst.limits.max_short},
          {"zero_payoff_outside", inst.zero_payoff_outside}};
}

Instance instance_from_json(const json& j) {
  Instance inst;
  auto& s = inst.snapshot;
  s.trade_date = Date::parse(j.at("trade_date").get<std::string>());
  s.expiry_date = Date::parse(j.at("expiry_date").get<std::string>());
  s.index_level = j.at("index_level").get<double>();
  s.risk_free_rate = j.at("risk_free_rate").get<double>();
  s.vol_index = j.at("vol_index").get<double>();
  s.trading_days_to_expiry = j.at("trading_days_to_expiry").get<int>();
  for (const auto& o : j.at("quotes")) {
    OptionQuote q;
    q.kind = o.at("kind").get<std::string>() == "C" ? OptionKind::Call : OptionKind::Put;
    q.strike = o.at("strike").get<double>();
    q.bid = o.at("bid").get<double>();
    q.ask = o.at("ask").get<double>();
    q.bid_size = o.at("bid_size").get<double>();
    q.ask_size = o.at("ask_size").get<double>();
    s.quotes.push_back(q);
  }
  inst.grid.atoms = j.at("atoms").get<std::vector<double>>();
  inst.grid.probs = j.at("probs").get<std::vector<double>>();
  inst.limits.max_long = j.at("max_long").get<std::vector<double>>();
  inst.limits.max_short = j.at("max_short").get<std::vector<double>>();
  inst.zero_payoff_outside = j.at("zero_payoff_outside").get<bool>();
  inst.grid.validate();
  return inst;
}

bool nondecreasing(const std::vector<TracePoint>& t) {
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k].premium < t[k - 1].premium) return false;
  }
  return true;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1]) return false;
  }
  return true;
}

}  // namespace

void RunConfig::validate() const {
  calibration.validate();
  filter.validate();
  if (spec == ReturnSpec::Skewed) sgt.validate();
  solver.validate();
  if (scales.empty()) throw ValidationError("no depth scales given");
  for (int s : scales) {
    if (s <= 0) throw ValidationError("depth scale must be positive");
  }
  if (!(threshold >= 0.0)) throw ValidationError("threshold must be nonnegative");
  if (block_months == 0 || replications == 0) throw ValidationError("bootstrap settings must be positive");
  if (!(lattice_step > 0.0) || !(lattice_cap >= 0.0)) throw ValidationError("lattice step and cap must be positive");
  if (!inject_fault.empty() && inject_fault != "theta-sign") throw ValidationError("unknown fault: " + inject_fault);
}

std::vector<int> parse_scales(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : csv::split(text, ',')) {
    if (part.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      throw ValidationError("bad depth scale: " + part);
    }
    if (used != part.size() || v <= 0) throw ValidationError("bad depth scale: " + part);
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("no depth scales given");
  return out;
}

// ---------------------------------------------------------------- build

int cmd_build(const RunConfig& config) {
  config.validate();
  RunLog log(config.output, "build");
  const auto snapshots = load_inputs(config);
  log.info("loaded " + std::to_string(snapshots.size()) + " snapshots");
  struct Task {
    std::size_t snap;
    int scale;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    for (int s : config.scales) tasks.push_back({i, s});
  }
  parallel_for(tasks.size(), config.workers, [&](std::size_t k) {
    const auto& snap = snapshots[tasks[k].snap];
    const auto grid = make_grid(snap, config);
    const auto inst = make_instance(snap, grid, tasks[k].scale, config.zero_payoff);
    const auto problem = assemble_instance(config.formulation, inst);
    const auto stem = task_stem(snap, tasks[k].scale, config.formulation);
    std::ostringstream mps;
    write_mps(to_mps_model(problem, stem), mps);
    write_atomic(fs::path(config.output) / (stem + ".mps"), mps.str());
    write_atomic(fs::path(config.output) / (stem + ".json"), mps_metadata_json(problem, stem));
    const auto stats = formulation_stats(problem);
    log.info(stem + ": rows=" + std::to_string(stats.rows) + " variables=" + std::to_string(stats.variables) +
             " nonzeros=" + std::to_string(stats.nonzeros));
  });
  log.info("wrote " + std::to_string(tasks.size()) + " problems");
  return kExitOk;
}

// ---------------------------------------------------------------- solve

namespace {

struct SolvedTask {
  std::size_t snap = 0;
  int scale = 0;
  SolveResult result;
  double investment = 0.0;
  GreeksReport greeks;
  double external_premium = std::nan("");
  bool agree = true;
};

json solved_to_json(const MarketSnapshot& s, const SolvedTask& t, const RunConfig& config) {
  json trace = json::array();
  for (const auto& p : t.result.incumbent_trace) trace.push_back({{"node", p.node}, {"premium", p.premium}});
  json j = {{"trade_date", s.trade_date.iso()},
            {"scale", t.scale},
            {"formulation", to_string(config.formulation)},
            {"status", to_string(t.result.status)},
            {"premium", t.result.premium},
            {"premium_fraction", t.result.premium / t.investment},
            {"bound", number_or_null(t.result.bound)},
            {"iterations", t.result.iterations},
            {"nodes", t.result.nodes},
            {"trace", trace},
            {"delta", t.greeks.delta},
            {"vega", t.greeks.vega},
            {"iv_fallbacks", t.greeks.fallbacks},
            {"alpha", t.result.alpha},
            {"beta", t.result.beta}};
  if (config.cross_check) {
    j["external_premium"] = number_or_null(t.external_premium);
    j["agree"] = t.agree;
  }
  if (!t.result.message.empty()) j["message"] = t.result.message;
  return j;
}

}  // namespace

int cmd_solve(const RunConfig& config) {
  config.validate();
  RunLog log(config.output, "solve");
  const auto snapshots = load_inputs(config);
  log.info("loaded " + std::to_string(snapshots.size()) + " snapshots; formulation " + to_string(config.formulation));
  std::vector<SolvedTask> tasks;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    for (int s : config.scales) tasks.push_back({i, s, {}, 0.0, {}, std::nan(""), true});
  }
  BackendConfig backend;
  backend.command = config.backend;
  backend.time_limit_seconds = config.solver.time_limit_seconds;

  parallel_for(tasks.size(), config.workers, [&](std::size_t k) {
    auto& t = tasks[k];
    const auto& snap = snapshots[t.snap];
    const auto grid = make_grid(snap, config);
    const auto problem = assemble_instance(config.formulation, make_instance(snap, grid, t.scale, config.zero_payoff));
    const auto stem = task_stem(snap, t.scale, config.formulation);
    const auto started = std::chrono::steady_clock::now();
    try {
      if (!config.backend.empty() && !config.cross_check) {
        t.result = solve_external(problem, backend, stem);
      } else {
        t.result = solve(problem, grid, config.solver);
        if (config.cross_check) {
          const auto ext = solve_external(problem, backend, stem);
          const auto cc = cross_check(t.result, ext);
          t.external_premium = ext.premium;
          t.agree = cc.agree;
        }
      }
    } catch (const BackendError& e) {
      t.result = SolveResult{};
      t.result.status = SolveStatus::Error;
      t.result.message = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    t.investment = market_investment(snap, config.compounding);
    if (t.result.alpha.size() != snap.size()) {
      t.result.alpha.assign(snap.size(), 0.0);
      t.result.beta.assign(snap.size(), 0.0);
    }
    t.greeks = greeks(snap, t.result.alpha, t.result.beta, VolSource::ImpliedWithFallback, config.compounding);
    std::ostringstream msg;
    msg << stem << ": " << to_string(t.result.status) << " premium=" << fmt(t.result.premium)
        << " iterations=" << t.result.iterations << " nodes=" << t.result.nodes << " seconds=" << fmt(secs);
    for (const auto& p : t.result.incumbent_trace) {
      msg << "\n  incumbent t=" << fmt(p.seconds) << "s node=" << p.node << " premium=" << fmt(p.premium);
    }
    log.info(msg.str());
  });

  std::ostringstream lines;
  bool failed = false, disagreed = false;
  for (const auto& t : tasks) {
    lines << solved_to_json(snapshots[t.snap], t, config).dump() << '\n';
    if (t.result.status == SolveStatus::Error) {
      failed = true;
      log.error(task_stem(snapshots[t.snap], t.scale, config.formulation) + ": " + t.result.message);
    }
    if (!t.agree) {
      disagreed = true;
      log.error(task_stem(snapshots[t.snap], t.scale, config.formulation) + ": backend premium " +
                fmt(t.external_premium) + " vs internal " + fmt(t.result.premium));
    }
  }
  write_atomic(fs::path(config.output) / "solutions.jsonl", lines.str());

  // Summary per scale, as fractions of the market investment in percent.
  std::ostringstream sum;
  sum << "scale,months,pct_premium_above_threshold,avg_puts_bought_pct,avg_calls_bought_pct,"
         "avg_puts_written_pct,avg_calls_written_pct,avg_delta,avg_vega\n";
  for (int scale : config.scales) {
    std::size_t months = 0, above = 0;
    double pb = 0, cb = 0, pw = 0, cw = 0, delta = 0, vega = 0;
    for (const auto& t : tasks) {
      if (t.scale != scale) continue;
      const auto& snap = snapshots[t.snap];
      ++months;
      if (t.result.has_portfolio() && t.result.premium / t.investment > config.threshold) ++above;
      for (std::size_t i = 0; i < snap.size(); ++i) {
        const auto& q = snap.quotes[i];
        const double bought = 100.0 * q.ask * t.result.alpha[i] / t.investment;
        const double written = 100.0 * q.bid * t.result.beta[i] / t.investment;
        (q.is_call() ? cb : pb) += bought;
        (q.is_call() ? cw : pw) += written;
      }
      delta += t.greeks.delta;
      vega += t.greeks.vega;
    }
    const double n = months > 0 ? static_cast<double>(months) : 1.0;
    sum << scale << ',' << months << ',' << fmt(100.0 * static_cast<double>(above) / n) << ',' << fmt(pb / n) << ','
        << fmt(cb / n) << ',' << fmt(pw / n) << ',' << fmt(cw / n) << ',' << fmt(delta / n) << ',' << fmt(vega / n)
        << '\n';
  }
  write_atomic(fs::path(config.output) / "summary.csv", sum.str());
  log.info("wrote solutions.jsonl and summary.csv");
  if (disagreed) return kExitOracle;
  return failed ? kExitSolver : kExitOk;
}

// ---------------------------------------------------------------- backtest

namespace {

struct StoredSolution {
  Date trade_date;
  int scale = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::string status;
};

std::vector<StoredSolution> load_solutions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string() + " (run solve first)");
  std::vector<StoredSolution> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      StoredSolution s;
      s.trade_date = Date::parse(j.at("trade_date").get<std::string>());
      s.scale = j.at("scale").get<int>();
      s.alpha = j.at("alpha").get<std::vector<double>>();
      s.beta = j.at("beta").get<std::vector<double>>();
      s.status = j.at("status").get<std::string>();
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void moment_row(std::ostringstream& out, int scale, const char* portfolio, const char* source, const MomentReport& m) {
  out << scale << ',' << portfolio << ',' << source << ',' << fmt(100.0 * m.mean) << ',' << fmt(100.0 * m.std_dev)
      << ',' << fmt(m.skew) << ',' << fmt(m.sortino) << ',' << fmt(100.0 * m.cer2) << ',' << fmt(100.0 * m.cer3)
      << ',' << fmt(100.0 * m.cer4) << '\n';
}

MomentReport median_report(const std::vector<MomentReport>& v) {
  auto pick = [&](auto member) {
    std::vector<double> xs;
    for (const auto& r : v) xs.push_back(r.*member);
    return quantile(xs, 0.5);
  };
  MomentReport m;
  m.mean = pick(&MomentReport::mean);
  m.std_dev = pick(&MomentReport::std_dev);
  m.skew = pick(&MomentReport::skew);
  m.sortino = pick(&MomentReport::sortino);
  m.cer2 = pick(&MomentReport::cer2);
  m.cer3 = pick(&MomentReport::cer3);
  m.cer4 = pick(&MomentReport::cer4);
  return m;
}

}  // namespace

int cmd_backtest(const RunConfig& config) {
  config.validate();
  RunLog log(config.output, "backtest");
  require_file(config.realized, "realized outcomes");
  const auto snapshots = load_inputs(config);
  const auto realized = load_realized(config.realized);
  auto solutions = load_solutions(fs::path(config.output) / "solutions.jsonl");
  std::sort(solutions.begin(), solutions.end(), [](const StoredSolution& a, const StoredSolution& b) {
    return std::tie(a.trade_date, a.scale) < std::tie(b.trade_date, b.scale);
  });
  std::map<Date, const MarketSnapshot*> by_date;
  for (const auto& s : snapshots) by_date[s.trade_date] = &s;

  std::ostringstream records, skipped;
  skipped << "trade_date,scale,reason\n";
  std::map<int, std::vector<BacktestRecord>> per_scale;
  std::map<int, std::vector<PortfolioCurve>> curves;
  std::map<int, std::vector<SimulatedMoments>> model;
  for (const auto& sol : solutions) {
    const auto it = by_date.find(sol.trade_date);
    std::string reason;
    if (it == by_date.end()) reason = "no snapshot";
    else if (!realized.count(sol.trade_date)) reason = "no realized outcome";
    else if (sol.alpha.size() != it->second->size()) reason = "portfolio size mismatch";
    if (!reason.empty()) {
      skipped << sol.trade_date.iso() << ',' << sol.scale << ',' << reason << '\n';
      log.warn(sol.trade_date.iso() + " scale " + std::to_string(sol.scale) + " skipped: " + reason);
      continue;
    }
    const auto& snap = *it->second;
    const auto rec = make_record(snap, sol.alpha, sol.beta, realized.at(sol.trade_date), config.compounding);
    json j = {{"trade_date", rec.trade_date.iso()},
              {"scale", sol.scale},
              {"forward_price", rec.forward_price},
              {"realized_index", rec.realized_index},
              {"market_excess_return", rec.market_excess_return},
              {"enhanced_excess_return", rec.enhanced_excess_return},
              {"layover_premium", rec.layover_premium},
              {"layover_delta", rec.layover_delta},
              {"layover_vega", rec.layover_vega},
              {"realized_layover_payoff", rec.realized_layover_payoff}};
    records << j.dump() << '\n';
    per_scale[sol.scale].push_back(rec);
    curves[sol.scale].push_back({snap, sol.alpha, sol.beta});
    const auto dist = make_predictive(snap, config);
    const auto seed = derive_seed(config.seed, static_cast<std::uint64_t>(snap.trade_date.days_since_epoch()));
    model[sol.scale].push_back(
        simulate_model_moments(dist, snap, sol.alpha, sol.beta, config.model_draws, seed, config.compounding));
  }
  write_atomic(fs::path(config.output) / "backtest.jsonl", records.str());
  write_atomic(fs::path(config.output) / "skipped_months.csv", skipped.str());

  std::ostringstream mom;
  mom << "scale,portfolio,source,mean_pct,std_pct,skew,sortino,cer2_pct,cer3_pct,cer4_pct\n";
  std::ostringstream pc;
  pc << "scale,level,q1,median,q3\n";
  std::vector<double> grid;
  for (int k = 0; k <= 80; ++k) grid.push_back(0.8 + 0.005 * k);
  for (const auto& [scale, recs] : per_scale) {
    std::vector<MomentReport> mm, me;
    for (const auto& s : model[scale]) {
      mm.push_back(s.market);
      me.push_back(s.enhanced);
    }
    moment_row(mom, scale, "market", "model", median_report(mm));
    moment_row(mom, scale, "enhanced", "model", median_report(me));
    if (recs.size() >= 2) {
      std::vector<double> rm, re;
      for (const auto& r : recs) {
        rm.push_back(r.market_excess_return);
        re.push_back(r.enhanced_excess_return);
      }
      moment_row(mom, scale, "market", "realized", moments(rm));
      moment_row(mom, scale, "enhanced", "realized", moments(re));
    } else {
      log.warn("scale " + std::to_string(scale) + ": fewer than two months, realized moments omitted");
    }
    const auto c = payoff_curves(curves[scale], grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      pc << scale << ',' << fmt(grid[k]) << ',' << fmt(c.q1[k]) << ',' << fmt(c.median[k]) << ',' << fmt(c.q3[k])
         << '\n';
    }
  }
  write_atomic(fs::path(config.output) / "moments.csv", mom.str());
  write_atomic(fs::path(config.output) / "payoff_curves.csv", pc.str());
  log.info("wrote backtest.jsonl, moments.csv and payoff_curves.csv");
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

int cmd_diagnose(const RunConfig& config) {
  config.validate();
  RunLog log(config.output, "diagnose");
  require_file(config.realized, "realized outcomes");
  const auto snapshots = load_inputs(config);
  const auto realized = load_realized(config.realized);

  std::ostringstream values;
  values << "trade_date,pit\n";
  std::vector<double> pits;
  for (const auto& s : snapshots) {
    const auto it = realized.find(s.trade_date);
    if (it == realized.end()) {
      log.warn(s.trade_date.iso() + ": no realized outcome, excluded from PIT");
      continue;
    }
    const double u = std::clamp(make_predictive(s, config).cdf(it->second), 0.0, 1.0);
    pits.push_back(u);
    values << s.trade_date.iso() << ',' << fmt(u) << '\n';
  }
  if (pits.empty()) throw ValidationError("no realized outcomes match the snapshots");
  const auto rep = pit_report(pits);
  std::ostringstream deciles;
  deciles << "bin,proportion,band_low,band_high\n";
  for (std::size_t b = 0; b < 10; ++b) {
    deciles << b + 1 << ',' << fmt(rep.proportions[b]) << ',' << fmt(rep.band_low) << ',' << fmt(rep.band_high) << '\n';
  }
  write_atomic(fs::path(config.output) / "pit_values.csv", values.str());
  write_atomic(fs::path(config.output) / "pit_deciles.csv", deciles.str());
  log.info("PIT over " + std::to_string(pits.size()) + " months");

  const auto bt = fs::path(config.output) / "backtest.jsonl";
  if (!fs::exists(bt)) {
    log.warn("no backtest.jsonl; dominance tests skipped");
    return kExitOk;
  }
  std::map<int, std::vector<std::pair<Date, std::pair<double, double>>>> series;
  {
    std::ifstream in(bt);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      series[j.at("scale").get<int>()].push_back(
          {Date::parse(j.at("trade_date").get<std::string>()),
           {j.at("enhanced_excess_return").get<double>(), j.at("market_excess_return").get<double>()}});
    }
  }
  std::ostringstream tests;
  tests << "scale,order,statistic,p_value,replications,block_months,seed\n";
  for (auto& [scale, rows] : series) {
    std::sort(rows.begin(), rows.end());
    std::vector<double> e, m;
    for (const auto& r : rows) {
      e.push_back(r.second.first);
      m.push_back(r.second.second);
    }
    if (e.size() < config.block_months) {
      log.warn("scale " + std::to_string(scale) + ": fewer months than one block, tests skipped");
      continue;
    }
    for (int order : {1, 2}) {
      BootstrapOptions opt;
      opt.block_months = config.block_months;
      opt.replications = config.replications;
      opt.seed = config.seed;
      opt.circular = config.circular_blocks;
      const auto r = block_bootstrap_pvalue(order, e, m, opt);
      tests << scale << ',' << order << ',' << fmt(r.statistic) << ',' << fmt(r.p_value) << ',' << r.replications
            << ',' << r.block_months << ',' << r.seed << '\n';
    }
  }
  write_atomic(fs::path(config.output) / "sd_tests.csv", tests.str());
  log.info("wrote pit_values.csv, pit_deciles.csv and sd_tests.csv");
  return kExitOk;
}

// ---------------------------------------------------------------- verify

VerifyReport verify_instance(const Instance& inst, const VerifyOptions& opt) {
  VerifyReport rep;
  auto fail = [&](std::string what) {
    rep.passed = false;
    rep.failures.push_back(std::move(what));
  };
  const auto& snap = inst.snapshot;
  const auto truth = build_payoff_matrix(snap, inst.grid);
  auto solver_payoff = truth;
  if (opt.flip_theta) {
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < truth.options(); ++i) {
      for (std::size_t j = 0; j < truth.states(); ++j) {
        if (truth(i, j) > truth(bi, bj)) bi = i, bj = j;
      }
    }
    solver_payoff.theta(bi, bj) = -solver_payoff.theta(bi, bj);
  }
  const auto poly = build_polytope(snap, inst.limits, inst.zero_payoff_outside);
  std::vector<double> ask, bid;
  for (const auto& q : snap.quotes) {
    ask.push_back(q.ask);
    bid.push_back(q.bid);
  }
  const auto market = market_distribution(inst.grid);
  auto zero_outside = [&](const SolveResult& r, const char* label) {
    if (!inst.zero_payoff_outside) return;
    for (double level : {0.5 * snap.lowest_strike(), 2.0 * snap.highest_strike()}) {
      const double v = layover_payoff(snap, r.alpha, r.beta, level);
      if (std::abs(v) > 1e-9) fail(std::string(label) + " payoff " + fmt(v) + " at " + fmt(level));
    }
  };

  const auto lp = solve_lp(assemble(Formulation::LP, solver_payoff, inst.grid, poly, ask, bid), opt.solver);
  if (lp.status != SolveStatus::Optimal) {
    fail("LP status " + to_string(lp.status));
    return rep;
  }
  rep.lp_premium = lp.premium;
  if (lp.premium < -kPayoffTolerance) fail("LP premium negative: " + fmt(lp.premium));
  if (!ssd_check(enhanced_distribution(lp.alpha, lp.beta, truth, inst.grid).shifted(kPayoffTolerance), market)) {
    fail("LP portfolio fails the SSD oracle");
  }
  zero_outside(lp, "LP");

  if (opt.check_lp_star) {
    const auto star = solve_lp(assemble(Formulation::LP_STAR, solver_payoff, inst.grid, poly, ask, bid), opt.solver);
    rep.lp_star_premium = star.premium;
    if (star.status != SolveStatus::Optimal) fail("LP* status " + to_string(star.status));
    else if (std::abs(star.premium - lp.premium) > 1e-8) fail("LP* premium " + fmt(star.premium) + " vs LP " + fmt(lp.premium));
    zero_outside(star, "LP*");
  }

  if (opt.check_milp) {
    const auto problem = assemble(Formulation::MILP, solver_payoff, inst.grid, poly, ask, bid);
    const auto warm = zero_portfolio_start(problem, inst.grid);
    if (max_violation(problem, warm) > opt.solver.feasibility_tolerance || objective_value(problem, warm) != 0.0) {
      fail("warm start infeasible or nonzero premium");
    }
    const auto milp = solve_milp(problem, inst.grid, opt.solver);
    rep.milp_premium = milp.premium;
    rep.milp_nodes = milp.nodes;
    if (!milp.has_portfolio()) {
      fail("MILP status " + to_string(milp.status));
    } else {
      if (!fsd_check(enhanced_distribution(milp.alpha, milp.beta, truth, inst.grid).shifted(kPayoffTolerance), market)) {
        fail("MILP portfolio fails the FSD oracle");
      }
      if (milp.premium > lp.premium + 1e-6) fail("MILP premium " + fmt(milp.premium) + " above LP " + fmt(lp.premium));
      if (milp.incumbent_trace.empty() || milp.incumbent_trace.front().premium != 0.0) fail("trace does not start at the warm start");
      if (!nondecreasing(milp.incumbent_trace)) fail("incumbent trace decreases");
      if (!nonincreasing(milp.bound_trace)) fail("bound trace increases");
      for (double b : milp.bound_trace) {
        if (b < milp.incumbent_trace.front().premium - 1e-9) fail("bound below incumbent");
      }
      if (milp.bound < milp.premium - 1e-9) fail("final bound below incumbent");
      zero_outside(milp, "MILP");
    }
  }

  if (opt.check_lattice) {
    const auto l2 = lattice_oracle(snap, inst.grid, poly, 2, opt.lattice_step, opt.lattice_cap);
    rep.lattice_ssd = l2.premium;
    if (l2.premium > lp.premium + 1e-9) fail("lattice SSD premium " + fmt(l2.premium) + " above LP " + fmt(lp.premium));
    if (opt.check_milp) {
      const auto l1 = lattice_oracle(snap, inst.grid, poly, 1, opt.lattice_step, opt.lattice_cap);
      rep.lattice_fsd = l1.premium;
      if (l1.premium > rep.milp_premium + 1e-9) {
        fail("lattice FSD premium " + fmt(l1.premium) + " above MILP " + fmt(rep.milp_premium));
      }
    }
  }
  return rep;
}

int cmd_verify(const RunConfig& config) {
  config.validate();
  RunLog log(config.output, "verify");
  VerifyOptions base;
  base.solver = config.solver;
  base.lattice_step = config.lattice_step;
  base.lattice_cap = config.lattice_cap;
  base.flip_theta = config.inject_fault == "theta-sign";

  if (!config.replay.empty()) {
    require_file(config.replay, "replay");
    std::ifstream in(config.replay);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(config.replay + ": " + e.what());
    }
    auto opt = base;
    opt.flip_theta = j.value("fault", std::string()) == "theta-sign";
    opt.check_lp_star = j.value("check_lp_star", true);
    opt.check_milp = j.value("check_milp", true);
    opt.check_lattice = j.value("check_lattice", true);
    const auto rep = verify_instance(instance_from_json(j.at("instance")), opt);
    std::ostringstream out;
    out << "check,detail\n";
    for (const auto& f : rep.failures) out << "failure," << f << '\n';
    out << "result," << (rep.passed ? "pass" : "fail") << '\n';
    write_atomic(fs::path(config.output) / "replay.csv", out.str());
    for (const auto& f : rep.failures) log.error("replay: " + f);
    log.info(std::string("replay ") + (rep.passed ? "passed" : "reproduced the failure"));
    return rep.passed ? kExitOk : kExitOracle;
  }

  struct Case {
    std::string suite;
    std::size_t index;
    std::uint64_t seed;
    Instance instance;
    VerifyOptions options;
    VerifyReport report;
  };
  std::vector<Case> cases;
  for (std::size_t k = 0; k < config.cases; ++k) {
    const auto seed = derive_seed(config.seed, k);
    cases.push_back({"keystone", k, seed, random_small_instance(seed, config.max_states, config.max_options), base, {}});
  }
  for (std::size_t k = 0; k < config.equivalence_cases; ++k) {
    const auto seed = derive_seed(config.seed ^ 0x5eedULL, k);
    auto opt = base;
    opt.check_milp = false;
    opt.check_lattice = false;
    cases.push_back({"equivalence", k, seed, random_small_instance(seed, config.max_states, config.max_options), opt, {}});
  }
  parallel_for(cases.size(), config.workers, [&](std::size_t i) {
    cases[i].report = verify_instance(cases[i].instance, cases[i].options);
  });

  std::ostringstream table;
  table << "suite,case,seed,states,options,lp_premium,lp_star_premium,milp_premium,lattice_ssd,lattice_fsd,milp_nodes,"
           "result\n";
  std::size_t failures = 0;
  for (const auto& c : cases) {
    const auto& r = c.report;
    table << c.suite << ',' << c.index << ',' << c.seed << ',' << c.instance.grid.size() << ','
          << c.instance.snapshot.size() << ',' << fmt(r.lp_premium) << ',' << fmt(r.lp_star_premium) << ','
          << fmt(r.milp_premium) << ',' << fmt(r.lattice_ssd) << ',' << fmt(r.lattice_fsd) << ',' << r.milp_nodes
          << ',' << (r.passed ? "pass" : "fail") << '\n';
    if (r.passed) continue;
    ++failures;
    json dump = {{"suite", c.suite},
                 {"case", c.index},
                 {"seed", c.seed},
                 {"fault", config.inject_fault},
                 {"check_lp_star", c.options.check_lp_star},
                 {"check_milp", c.options.check_milp},
                 {"check_lattice", c.options.check_lattice},
                 {"failures", r.failures},
                 {"instance", instance_to_json(c.instance)}};
    const auto name = "verify_failure_" + c.suite + "_" + std::to_string(c.index) + ".json";
    write_atomic(fs::path(config.output) / name, dump.dump(2) + "\n");
    for (const auto& f : r.failures) log.error(c.suite + " case " + std::to_string(c.index) + ": " + f);
    log.error("replay with: verify --replay " + (fs::path(config.output) / name).string());
  }
  write_atomic(fs::path(config.output) / "verify.csv", table.str());
  log.info(std::to_string(cases.size()) + " instances checked, " + std::to_string(failures) + " disagreements");
  return failures == 0 ? kExitOk : kExitOracle;
}

}  // namespace layover
