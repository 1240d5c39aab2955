#include <filesystem>
#include <fstream>

#include "catch_amalgamated.hpp"
#include "layover/csv.hpp"
#include "layover/date.hpp"
#include "layover/errors.hpp"
#include "layover/market_data.hpp"
#include "support.hpp"

using namespace layover;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string write_file(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::path("market_data_files");
  std::filesystem::create_directories(dir);
  const auto path = (dir / name).string();
  std::ofstream(path) << body;
  return path;
}

const char* kObservables =
    "trade_date,index_level,risk_free_rate,vol_index,trading_days_to_expiry\n"
    "2021-11-17,4000,0.01,18,21\n";

}  // namespace

TEST_CASE("dates parse, print and count days") {
  const auto d = Date::parse("2004-08-20");
  CHECK(d.iso() == "2004-08-20");
  CHECK(d.compact() == "20040820");
  CHECK(Date::parse("2021-12-17") - Date::parse("2021-11-17") == 30);
  CHECK((Date::parse("2020-02-28") + 2).iso() == "2020-03-01");
  CHECK_THROWS_AS(Date::parse("2021-13-01"), ParseError);
  CHECK_THROWS_AS(Date::parse("17/11/2021"), ParseError);
}

TEST_CASE("moneyness filter keeps strikes inside the band") {
  const auto path = write_file("filter.csv",
                               "trade_date,expiry_date,kind,strike,bid,ask,bid_size,ask_size\n"
                               "2021-11-17,2021-12-17,P,3500,1,1.1,5,5\n"
                               "2021-11-17,2021-12-17,P,3700,2,2.1,5,5\n"
                               "2021-11-17,2021-12-17,C,4100,3,3.1,5,5\n"
                               "2021-11-17,2021-12-17,C,4300,1,1.1,5,5\n");
  const auto s = load_snapshot(path, write_file("obs.csv", kObservables), MoneynessFilter{});
  REQUIRE(s.size() == 2);
  CHECK(s.quotes[0].strike == 3700);
  CHECK(s.quotes[1].strike == 4100);
}

TEST_CASE("crossed quote is rejected with its line") {
  const auto path = write_file("crossed.csv",
                               "trade_date,expiry_date,kind,strike,bid,ask,bid_size,ask_size\n"
                               "2021-11-17,2021-12-17,P,3900,5.0,4.0,5,5\n");
  CHECK_THROWS_WITH(load_snapshot(path, write_file("obs.csv", kObservables), MoneynessFilter{}),
                    ContainsSubstring("crossed.csv:2"));
}

TEST_CASE("puts precede calls at equal strikes") {
  const auto path = write_file("tie.csv",
                               "trade_date,expiry_date,kind,strike,bid,ask,bid_size,ask_size\n"
                               "2021-11-17,2021-12-17,C,4000,50,51,5,5\n"
                               "2021-11-17,2021-12-17,P,4000,49,50,5,5\n"
                               "2021-11-17,2021-12-17,P,3950,30,31,5,5\n");
  const auto s = load_snapshot(path, write_file("obs.csv", kObservables), MoneynessFilter{});
  REQUIRE(s.size() == 3);
  CHECK(s.quotes[0].strike == 3950);
  CHECK(s.quotes[1].kind == OptionKind::Put);
  CHECK(s.quotes[2].kind == OptionKind::Call);
}

TEST_CASE("missing observables row names the date") {
  const auto path = write_file("two_dates.csv",
                               "trade_date,expiry_date,kind,strike,bid,ask,bid_size,ask_size\n"
                               "2021-11-17,2021-12-17,P,3900,5,6,5,5\n"
                               "2021-12-15,2022-01-21,P,3900,5,6,5,5\n");
  CHECK_THROWS_WITH(load_snapshots(path, write_file("obs.csv", kObservables), MoneynessFilter{}),
                    ContainsSubstring("2021-12-15"));
}

TEST_CASE("exclusions drop the named quote only") {
  const auto path = write_file("excl_quotes.csv",
                               "trade_date,expiry_date,kind,strike,bid,ask,bid_size,ask_size\n"
                               "2021-11-17,2021-12-17,P,3900,5,6,5,5\n"
                               "2021-11-17,2021-12-17,C,3900,105,106,5,5\n");
  const auto excl = load_exclusions(write_file("excl.csv", "trade_date,kind,strike\n2021-11-17,C,3900\n"));
  const auto s = load_snapshots(path, write_file("obs.csv", kObservables), MoneynessFilter{}, excl);
  REQUIRE(s.size() == 1);
  REQUIRE(s[0].size() == 1);
  CHECK(s[0].quotes[0].kind == OptionKind::Put);
}

TEST_CASE("depth limits divide sizes by the scale") {
  const auto s = test::snapshot(4000, {test::quote(test::P, 3900, 1, 2, 0, 50)});
  CHECK(apply_depth_constraint(s, 1).max_long[0] == 50);
  CHECK(apply_depth_constraint(s, 1000).max_long[0] == 0.05);
  CHECK(apply_depth_constraint(s, 1).max_short[0] == 0);
  CHECK_THROWS_AS(apply_depth_constraint(s, 0), ValidationError);
}

TEST_CASE("depth limits are homogeneous in the scale") {
  const auto hist = synthetic_history(5, 3);
  for (const auto& m : hist) {
    for (int s : {1, 3, 10, 100}) {
      const auto a = apply_depth_constraint(m.snapshot, s);
      const auto b = apply_depth_constraint(m.snapshot, 2 * s);
      for (std::size_t i = 0; i < a.max_long.size(); ++i) {
        CHECK(b.max_long[i] == a.max_long[i] / 2.0);
        CHECK(b.max_short[i] == a.max_short[i] / 2.0);
      }
    }
  }
}

TEST_CASE("serialization round trip is idempotent") {
  const auto hist = synthetic_history(11, 4);
  std::vector<MarketSnapshot> snaps;
  for (const auto& m : hist) snaps.push_back(m.snapshot);
  std::filesystem::create_directories("market_data_files");
  write_quotes_csv(snaps, "market_data_files/rt_quotes.csv");
  write_observables_csv(snaps, "market_data_files/rt_obs.csv");
  const auto once = load_snapshots("market_data_files/rt_quotes.csv", "market_data_files/rt_obs.csv", MoneynessFilter{});
  write_quotes_csv(once, "market_data_files/rt_quotes2.csv");
  write_observables_csv(once, "market_data_files/rt_obs2.csv");
  const auto twice =
      load_snapshots("market_data_files/rt_quotes2.csv", "market_data_files/rt_obs2.csv", MoneynessFilter{});
  CHECK(once == snaps);
  CHECK(twice == once);
  for (const auto& s : twice) {
    for (const auto& q : s.quotes) CHECK(q.ask >= q.bid);
  }
}

TEST_CASE("exact decimal formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 4520.02, 1e-300, -2.5}) {
    CHECK(std::stod(csv::format_exact(v)) == v);
    CHECK(std::stod(csv::format17(v)) == v);
  }
}
