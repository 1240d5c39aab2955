#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "layover/csv.hpp"
#include "layover/errors.hpp"
#include "layover/workbench.hpp"

namespace fs = std::filesystem;
using namespace layover;

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

int run(const std::string& args, const fs::path& err = {}) {
  std::string cmd = env("LAYOVER_BIN") + " " + args + " >/dev/null";
  cmd += err.empty() ? " 2>/dev/null" : " 2>" + err.string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write_lines(const fs::path& p, const std::vector<std::string>& ls) {
  std::ofstream out(p);
  for (const auto& l : ls) out << l << '\n';
}

// Keeps the header and the rows whose first field is in `dates`.
void keep_dates(const fs::path& p, const std::vector<std::string>& dates) {
  auto ls = lines(p);
  std::vector<std::string> kept{ls.front()};
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (std::find(dates.begin(), dates.end(), ls[i].substr(0, 10)) != dates.end()) kept.push_back(ls[i]);
  }
  write_lines(p, kept);
}

struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& name, std::size_t months = 3) {
    root = fs::temp_directory_path() / ("layover-wb-" + name);
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cmd = env("LAYOVER_SYNTH") + " --output " + (root / "in").string() + " --seed 5 --months " +
                            std::to_string(months) + " >/dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
  }
  ~Workspace() { fs::remove_all(root); }
  fs::path in(const std::string& f) const { return root / "in" / f; }
  std::string inputs() const {
    return "--quotes " + in("quotes.csv").string() + " --observables " + in("observables.csv").string() +
           " --realized " + in("realized.csv").string();
  }
  std::vector<std::string> dates() const {
    auto ls = lines(in("observables.csv"));
    std::vector<std::string> out;
    for (std::size_t i = 1; i < ls.size(); ++i) out.push_back(ls[i].substr(0, 10));
    return out;
  }
  // Turns every quote of a month into a wide market with tiny bids.
  void widen(const std::string& date) const {
    auto ls = lines(in("quotes.csv"));
    for (std::size_t i = 1; i < ls.size(); ++i) {
      if (ls[i].substr(0, 10) != date) continue;
      auto f = csv::split(ls[i]);
      f[4] = "0.05";
      f[5] = std::to_string(std::stod(f[5]) * 5.0 + 1.0);
      std::string joined = f[0];
      for (std::size_t k = 1; k < f.size(); ++k) joined += "," + f[k];
      ls[i] = joined;
    }
    write_lines(in("quotes.csv"), ls);
  }
};

std::vector<std::string> csv_column(const fs::path& p, const std::string& name) {
  auto ls = lines(p);
  const auto head = csv::split(ls.front());
  const auto col = std::find(head.begin(), head.end(), name) - head.begin();
  std::vector<std::string> out;
  for (std::size_t i = 1; i < ls.size(); ++i) out.push_back(csv::split(ls[i])[col]);
  return out;
}

bool have_binaries() { return !env("LAYOVER_BIN").empty() && !env("LAYOVER_SYNTH").empty(); }

}  // namespace

TEST_CASE("argument validation") {
  CHECK(parse_scales("1,10,100") == std::vector<int>{1, 10, 100});
  CHECK_THROWS_AS(parse_scales("1,x"), ValidationError);
  CHECK_THROWS_AS(parse_scales("0"), ValidationError);
  RunConfig c;
  c.inject_fault = "bogus";
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("command line workbench") {
  if (!have_binaries()) SKIP("LAYOVER_BIN and LAYOVER_SYNTH are not set");

  SECTION("one month and four scales build four problems") {
    Workspace w("build");
    keep_dates(w.in("quotes.csv"), {w.dates().front()});
    keep_dates(w.in("observables.csv"), {w.dates().front()});
    const auto out = w.root / "out";
    REQUIRE(run("build " + w.inputs() + " --scale 1,10,100,1000 --output " + out.string()) == 0);
    std::size_t mps = 0;
    for (const auto& e : fs::directory_iterator(out)) mps += e.path().extension() == ".mps";
    CHECK(mps == 4);
    CHECK(fs::exists(out / "build.log"));
  }

  SECTION("a month without observables is a validation error naming the date") {
    Workspace w("missing");
    const auto d = w.dates();
    keep_dates(w.in("observables.csv"), {d[0], d[2]});
    const auto err = w.root / "err.txt";
    CHECK(run("solve " + w.inputs() + " --scale 1 --output " + (w.root / "out").string(), err) == 1);
    CHECK(slurp(err).find(d[1]) != std::string::npos);
  }

  SECTION("reruns and reordered inputs give byte-identical outputs") {
    Workspace w("determinism");
    const auto a = w.root / "a", b = w.root / "b", c = w.root / "c";
    const std::string opts = " --scale 1,10 --model-draws 500 --replications 49 --block-months 1";
    for (const auto& o : {a, b}) {
      const std::string par = o == a ? " --workers 3" : " --workers 1";
      REQUIRE(run("solve " + w.inputs() + opts + par + " --output " + o.string()) == 0);
      REQUIRE(run("backtest " + w.inputs() + opts + par + " --output " + o.string()) == 0);
    }
    auto q = lines(w.in("quotes.csv"));
    std::reverse(q.begin() + 1, q.end());
    write_lines(w.in("quotes.csv"), q);
    auto ob = lines(w.in("observables.csv"));
    std::reverse(ob.begin() + 1, ob.end());
    write_lines(w.in("observables.csv"), ob);
    REQUIRE(run("solve " + w.inputs() + opts + " --workers 1 --output " + c.string()) == 0);
    REQUIRE(run("backtest " + w.inputs() + opts + " --workers 1 --output " + c.string()) == 0);
    for (const char* f : {"solutions.jsonl", "summary.csv", "backtest.jsonl", "moments.csv", "payoff_curves.csv"}) {
      CHECK(slurp(a / f) == slurp(b / f));
      CHECK(slurp(a / f) == slurp(c / f));
    }
  }

  SECTION("months without stochastic arbitrage report zero premiums and market returns") {
    Workspace w("zero", 2);
    for (const auto& d : w.dates()) w.widen(d);
    const auto out = w.root / "out";
    REQUIRE(run("solve " + w.inputs() + " --scale 1 --output " + out.string()) == 0);
    CHECK(csv_column(out / "summary.csv", "pct_premium_above_threshold") == std::vector<std::string>{"0"});
    REQUIRE(run("backtest " + w.inputs() + " --scale 1 --model-draws 200 --output " + out.string()) == 0);
    for (const auto& l : lines(out / "backtest.jsonl")) {
      const auto m = l.find("\"market_excess_return\":");
      const auto e = l.find("\"enhanced_excess_return\":");
      REQUIRE(m != std::string::npos);
      REQUIRE(e != std::string::npos);
      const double mv = std::stod(l.substr(m + 23)), ev = std::stod(l.substr(e + 25));
      CHECK(mv == ev);
    }
  }

  SECTION("a month with a pure arbitrage is counted") {
    Workspace w("arbitrage", 2);
    const auto d = w.dates();
    w.widen(d[0]);
    w.widen(d[1]);
    // Butterfly bought for less than nothing: nonnegative payoff, zero in both tails.
    auto q = lines(w.in("quotes.csv"));
    double level = 0.0;
    for (const auto& l : lines(w.in("observables.csv"))) {
      if (l.substr(0, 10) == d[1]) level = std::stod(csv::split(l)[1]);
    }
    std::vector<std::size_t> calls;
    for (std::size_t i = 1; i < q.size(); ++i) {
      const auto f = csv::split(q[i]);
      if (f[0] == d[1] && f[2] == "C") calls.push_back(i);
    }
    REQUIRE(calls.size() >= 3);
    // Three consecutive strikes centred on the one nearest the index.
    auto gap = [&](std::size_t i) { return std::abs(std::stod(csv::split(q[i])[3]) - level); };
    std::size_t mid = 1;
    for (std::size_t k = 1; k + 1 < calls.size(); ++k) {
      if (gap(calls[k]) < gap(calls[mid])) mid = k;
    }
    calls = {calls[mid - 1], calls[mid], calls[mid + 1]};
    auto join = [](const std::vector<std::string>& f) {
      std::string s = f[0];
      for (std::size_t k = 1; k < f.size(); ++k) s += "," + f[k];
      return s;
    };
    for (std::size_t k = 0; k < 3; ++k) {
      auto f = csv::split(q[calls[k]]);
      f[4] = k == 1 ? "3" : "0.5";
      f[5] = k == 1 ? "4" : "1";
      q[calls[k]] = join(f);
    }
    write_lines(w.in("quotes.csv"), q);
    const auto out = w.root / "out";
    REQUIRE(run("solve " + w.inputs() + " --scale 1 --output " + out.string()) == 0);
    CHECK(csv_column(out / "summary.csv", "pct_premium_above_threshold") == std::vector<std::string>{"50"});
  }

  SECTION("verification passes, a corrupted solver is caught and replayed") {
    Workspace w("verify", 1);
    const auto out = w.root / "out";
    CHECK(run("verify --cases 40 --equivalence-cases 10 --output " + out.string()) == 0);
    CHECK(fs::exists(out / "verify.csv"));
    const auto bad = w.root / "bad";
    CHECK(run("verify --cases 10 --equivalence-cases 0 --inject-fault theta-sign --output " + bad.string()) == 3);
    fs::path dump;
    for (const auto& e : fs::directory_iterator(bad)) {
      if (e.path().filename().string().rfind("verify_failure_", 0) == 0) dump = e.path();
    }
    REQUIRE(!dump.empty());
    // The dump records the fault, so the replay reproduces it without the flag.
    CHECK(run("verify --replay " + dump.string() + " --output " + (w.root / "again").string()) == 3);
    CHECK(lines(w.root / "again" / "replay.csv").back() == "result,fail");
  }

  SECTION("bad flags exit with a validation error") {
    CHECK(run("solve --scale 0") == 1);
    CHECK(run("solve --formulation simplex") == 1);
    CHECK(run("frobnicate") == 1);
  }
}
