#include <cmath>

#include "catch_amalgamated.hpp"
#include "layover/dominance.hpp"
#include "layover/errors.hpp"
#include "layover/solver.hpp"
#include "support.hpp"

using namespace layover;
using Catch::Approx;

namespace {

DiscreteDistribution dist(std::vector<double> v, std::vector<double> p) {
  return DiscreteDistribution::from_values(v, p);
}

DiscreteDistribution random_dist(Rng& rng) {
  const int n = rng.integer(1, 5);
  std::vector<double> v, p;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    v.push_back(static_cast<double>(rng.integer(-4, 4)));
    p.push_back(static_cast<double>(rng.integer(1, 4)));
    total += p.back();
  }
  for (auto& q : p) q /= total;
  return dist(v, p);
}

template <class U>
double expected(const DiscreteDistribution& d, U u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) acc += d.probs[i] * u(d.support[i]);
  return acc;
}

}  // namespace

TEST_CASE("textbook dominance pairs") {
  const auto x = dist({0, 1}, {0.5, 0.5});
  CHECK(fsd_check(dist({1, 2}, {0.5, 0.5}), x));
  CHECK(fsd_check(x, x));
  CHECK(ssd_check(x, x));
  // Mean-preserving contraction: SSD but not FSD.
  const auto c = dist({0.5}, {1.0});
  CHECK(ssd_check(c, x));
  CHECK_FALSE(fsd_check(c, x));
  CHECK_FALSE(ssd_check(x, c));
  // Lower mean never dominates.
  CHECK_FALSE(ssd_check(dist({-0.1, 1}, {0.5, 0.5}), x));
}

TEST_CASE("from_values sorts and merges equal values") {
  const auto d = dist({3, 1, 3, 2}, {0.25, 0.25, 0.25, 0.25});
  CHECK(d.support == std::vector<double>{1, 2, 3});
  CHECK(d.probs[2] == Approx(0.5));
  CHECK(d.mean() == Approx(2.25));
  const auto s = d.shifted(1.5);
  CHECK(s.support.front() == 2.5);
  CHECK(s.mean() == Approx(3.75));
  CHECK_THROWS(dist({1, 2}, {0.5}));
}

TEST_CASE("first order implies second order, which implies higher mean and expected concave utility") {
  Rng rng(77);
  std::size_t fsd = 0, ssd = 0;
  for (int k = 0; k < 500; ++k) {
    const auto y = random_dist(rng);
    const auto x = random_dist(rng);
    const bool f = fsd_check(y, x), s = ssd_check(y, x);
    if (f) {
      ++fsd;
      CHECK(s);
      CHECK(expected(y, [](double v) { return v * v * v; }) >= expected(x, [](double v) { return v * v * v; }) - 1e-12);
    }
    if (s) {
      ++ssd;
      CHECK(y.mean() >= x.mean() - 1e-12);
      for (double a : {0.1, 0.5, 2.0}) {
        auto u = [a](double v) { return -std::exp(-a * v); };
        CHECK(expected(y, u) >= expected(x, u) - 1e-12);
      }
      auto kink = [](double v) { return std::min(v, 0.0); };
      CHECK(expected(y, kink) >= expected(x, kink) - 1e-12);
    }
  }
  CHECK(fsd > 10);
  CHECK(ssd > fsd);
}

TEST_CASE("enhanced distribution of the zero portfolio is the market") {
  const auto inst = test::augmented_instance();
  const auto payoff = build_payoff_matrix(inst.snapshot, inst.grid);
  const std::vector<double> zero(inst.snapshot.quotes.size(), 0.0);
  const auto e = enhanced_distribution(zero, zero, payoff, inst.grid);
  const auto m = market_distribution(inst.grid);
  CHECK(e.support == m.support);
  CHECK(e.probs == m.probs);
}

TEST_CASE("enhanced distribution adds the position payoff in every state") {
  const auto inst = test::twin_instance();
  const auto payoff = build_payoff_matrix(inst.snapshot, inst.grid);
  // Long and short the same strike cancel: the market is unchanged.
  const auto e = enhanced_distribution({0, 1}, {1, 0}, payoff, inst.grid);
  CHECK(e.support == std::vector<double>{95, 100, 105});
  // A long call at 100 adds 5 in the top state.
  const auto l = enhanced_distribution({1, 0}, {0, 0}, payoff, inst.grid);
  CHECK(l.support == std::vector<double>{95, 100, 110});
}

TEST_CASE("solver portfolios dominate the market") {
  for (auto inst : {test::generic_instance(), test::twin_instance(), test::augmented_instance()}) {
    const auto payoff = build_payoff_matrix(inst.snapshot, inst.grid);
    const auto m = market_distribution(inst.grid);
    const auto lp = solve(assemble_instance(Formulation::LP, inst), inst.grid);
    CHECK(ssd_check(enhanced_distribution(lp.alpha, lp.beta, payoff, inst.grid).shifted(1e-9), m));
    const auto milp = solve(assemble_instance(Formulation::MILP, inst), inst.grid);
    CHECK(fsd_check(enhanced_distribution(milp.alpha, milp.beta, payoff, inst.grid).shifted(1e-9), m));
  }
}

TEST_CASE("lattice search") {
  SECTION("twin arbitrage is found exactly") {
    const auto inst = test::twin_instance();
    const auto poly = build_polytope(inst.snapshot, inst.limits, false);
    const auto r = lattice_oracle(inst.snapshot, inst.grid, poly, 1, 0.25, 1.0);
    CHECK(r.premium == Approx(0.9).margin(1e-12));
    CHECK(r.evaluated > 0);
  }
  SECTION("no arbitrage gives zero") {
    auto inst = test::instance(test::snapshot(100, {test::quote(test::C, 100, 0.5, 10.0)}),
                               test::grid({95, 100, 105}, {0.25, 0.5, 0.25}), false);
    const auto poly = build_polytope(inst.snapshot, inst.limits, false);
    for (int order : {1, 2}) {
      const auto r = lattice_oracle(inst.snapshot, inst.grid, poly, order, 0.25, 1.0);
      CHECK(r.premium == 0.0);
      CHECK(r.alpha == std::vector<double>{0.0});
    }
  }
  SECTION("first order premium never exceeds second order premium, both bounded by the solvers") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto inst = random_small_instance(derive_seed(31, s), 6, 2);
      const auto poly = build_polytope(inst.snapshot, inst.limits, inst.zero_payoff_outside);
      const auto o1 = lattice_oracle(inst.snapshot, inst.grid, poly, 1, 0.5, 1.0);
      const auto o2 = lattice_oracle(inst.snapshot, inst.grid, poly, 2, 0.5, 1.0);
      CHECK(o1.premium <= o2.premium + 1e-12);
      CHECK(o2.premium <= solve(assemble_instance(Formulation::LP, inst), inst.grid).premium + 1e-9);
      CHECK(o1.premium <= solve(assemble_instance(Formulation::MILP, inst), inst.grid).premium + 1e-9);
    }
  }
  SECTION("invalid arguments") {
    const auto inst = test::twin_instance();
    const auto poly = build_polytope(inst.snapshot, inst.limits, false);
    CHECK_THROWS(lattice_oracle(inst.snapshot, inst.grid, poly, 3, 0.25, 1.0));
    CHECK_THROWS(lattice_oracle(inst.snapshot, inst.grid, poly, 1, 0.0, 1.0));
  }
}
