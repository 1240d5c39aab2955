#include <algorithm>
#include <cmath>

#include "catch_amalgamated.hpp"
#include "layover/diagnostics.hpp"
#include "layover/errors.hpp"
#include "layover/state_probability.hpp"
#include "layover/synthetic.hpp"

using namespace layover;
using Catch::Approx;

namespace {

// Direct definition: T/|Z| times the sum over pooled points of the positive part squared.
double naive_cvm(int order, const std::vector<double>& e, const std::vector<double>& m) {
  std::vector<double> z(e);
  z.insert(z.end(), m.begin(), m.end());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  auto f = [order](const std::vector<double>& s, double at) {
    double acc = 0.0;
    for (double x : s) acc += order == 1 ? (x <= at ? 1.0 : 0.0) : std::max(0.0, at - x);
    return acc / static_cast<double>(s.size());
  };
  double sum = 0.0;
  for (double at : z) {
    const double d = std::max(0.0, f(e, at) - f(m, at));
    sum += d * d;
  }
  return static_cast<double>(e.size()) * sum / static_cast<double>(z.size());
}

std::vector<double> normals(std::uint64_t seed, std::size_t n, double shift = 0.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = shift + rng.normal();
  return v;
}

}  // namespace

TEST_CASE("decile band") {
  const auto [lo, hi] = pit_band(215);
  CHECK(lo == Approx(0.059898732839136166).margin(1e-12));
  CHECK(hi == Approx(0.14010126716086385).margin(1e-12));
  CHECK_THROWS(pit_band(0));
}

TEST_CASE("decile proportions") {
  std::vector<double> u;
  for (int k = 0; k < 100; ++k) u.push_back((k + 0.5) / 100.0);
  const auto rep = pit_report(u);
  for (double p : rep.proportions) CHECK(p == Approx(0.1));
  const auto edge = pit_report({0.0, 1.0, 0.1});
  CHECK(edge.proportions[0] == Approx(1.0 / 3));
  CHECK(edge.proportions[9] == Approx(1.0 / 3));
  CHECK(edge.proportions[1] == Approx(1.0 / 3));
  CHECK_THROWS(pit_report({1.5}));
}

TEST_CASE("constant predictive CDF puts every PIT in one decile") {
  std::vector<std::pair<std::function<double(double)>, double>> series;
  for (int k = 0; k < 20; ++k) series.emplace_back([](double) { return 0.55; }, k);
  const auto rep = pit(series);
  CHECK(rep.proportions[5] == 1.0);
}

TEST_CASE("PIT values are invariant under monotone transforms") {
  const PredictiveDistribution dist({std::log(4500.0), 0.05}, ReturnSpec::Skewed);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const double x = dist.quantile(rng.uniform(0.01, 0.99));
    const double direct = dist.cdf(x);
    const double via_log = dist.cdf(std::exp(std::log(x)));
    const double z = (std::log(x) - std::log(4500.0)) / 0.05;
    CHECK(via_log == Approx(direct).margin(1e-12));
    CHECK(sgt_cdf(z, SgtParams{}) == Approx(direct).margin(1e-9));
  }
}

TEST_CASE("self-generated PITs are close to uniform") {
  const PredictiveDistribution dist({std::log(4500.0), 0.05}, ReturnSpec::Skewed);
  Rng rng(8);
  std::vector<std::pair<std::function<double(double)>, double>> series;
  for (int k = 0; k < 1000; ++k) {
    series.emplace_back([&dist](double x) { return dist.cdf(x); }, dist.quantile(rng.uniform(1e-9, 1.0 - 1e-9)));
  }
  CHECK(kolmogorov_distance_uniform(pit(series).pits) < 0.1);
  CHECK(kolmogorov_distance_uniform({0.5}) == Approx(0.5));
}

TEST_CASE("dominance statistic on hand examples") {
  CHECK(cvm_statistic(1, {0.0}, {1.0}) == Approx(0.5));
  CHECK(cvm_statistic(2, {0.0}, {1.0}) == Approx(0.5));
  CHECK(cvm_statistic(1, {1.0}, {0.0}) == 0.0);
  CHECK(cvm_statistic(2, {1.0}, {0.0}) == 0.0);
  const std::vector<double> m{0.1, -0.2, 0.3};
  CHECK(cvm_statistic(1, m, m) == 0.0);
  CHECK_THROWS_AS(cvm_statistic(1, {1.0}, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(cvm_statistic(3, {1.0}, {1.0}), ValidationError);
}

TEST_CASE("dominance statistic agrees with the direct definition") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto e = normals(derive_seed(41, s), 30, -0.2);
    const auto m = normals(derive_seed(42, s), 30);
    for (int order : {1, 2}) CHECK(cvm_statistic(order, e, m) == Approx(naive_cvm(order, e, m)).epsilon(1e-10));
  }
}

TEST_CASE("bootstrap p-values") {
  const auto m = normals(5, 120);
  SECTION("identical samples never reject") {
    for (int order : {1, 2}) CHECK(block_bootstrap_pvalue(order, m, m, {12, 199, 1}).p_value == 1.0);
  }
  SECTION("a dominated enhanced series is rejected") {
    std::vector<double> e(m);
    for (auto& x : e) x -= 0.5;
    for (std::size_t len = 3; len <= 12; ++len) {
      CHECK(block_bootstrap_pvalue(1, e, m, {len, 199, 2}).p_value < 0.05);
      CHECK(block_bootstrap_pvalue(2, e, m, {len, 199, 2}).p_value < 0.05);
    }
  }
  SECTION("block length changes the p-value only modestly") {
    const auto e = normals(6, 120);
    std::vector<double> p;
    for (std::size_t len = 3; len <= 12; ++len) p.push_back(block_bootstrap_pvalue(2, e, m, {len, 499, 3}).p_value);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    CHECK(*hi - *lo < 0.3);
  }
  SECTION("deterministic for a seed") {
    const auto e = normals(6, 120);
    const auto a = block_bootstrap_pvalue(2, e, m, {12, 199, 9, true});
    const auto b = block_bootstrap_pvalue(2, e, m, {12, 199, 9, true});
    CHECK(a.p_value == b.p_value);
    CHECK(a.statistic == b.statistic);
    CHECK(a.block_months == 12);
  }
  SECTION("invalid options") {
    CHECK_THROWS(block_bootstrap_pvalue(1, m, m, {0, 199, 1}));
    CHECK_THROWS(block_bootstrap_pvalue(1, m, m, {121, 199, 1}));
    CHECK_THROWS(block_bootstrap_pvalue(1, m, m, {12, 0, 1}));
  }
}
