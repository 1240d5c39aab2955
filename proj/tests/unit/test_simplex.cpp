#include "catch_amalgamated.hpp"
#include "layover/simplex.hpp"

using namespace layover;
using Catch::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense column-major helper: minimize c^T x, row_lo <= A x <= row_hi, col_lo <= x <= col_hi.
lp::LpModel model(const std::vector<std::vector<double>>& a, std::vector<double> cost, std::vector<double> row_lo,
                  std::vector<double> row_hi, std::vector<double> col_lo, std::vector<double> col_hi) {
  lp::LpModel m;
  m.num_rows = a.size();
  m.num_cols = cost.size();
  m.col_start.push_back(0);
  for (std::size_t c = 0; c < m.num_cols; ++c) {
    for (std::size_t r = 0; r < m.num_rows; ++r) {
      if (a[r][c] != 0.0) {
        m.col_index.push_back(static_cast<std::int32_t>(r));
        m.col_value.push_back(a[r][c]);
      }
    }
    m.col_start.push_back(m.col_index.size());
  }
  m.cost = std::move(cost);
  m.row_lower = std::move(row_lo);
  m.row_upper = std::move(row_hi);
  m.col_lower = std::move(col_lo);
  m.col_upper = std::move(col_hi);
  return m;
}

lp::SimplexOptions with(lp::Pricing p) {
  lp::SimplexOptions o;
  o.pricing = p;
  return o;
}

}  // namespace

TEST_CASE("textbook maximization") {
  // max 3x + 5y; x <= 4, 2y <= 12, 3x + 2y <= 18
  const auto m = model({{1, 0}, {0, 2}, {3, 2}}, {-3, -5}, {-kInf, -kInf, -kInf}, {4, 12, 18}, {0, 0}, {kInf, kInf});
  for (auto pricing : {lp::Pricing::Dantzig, lp::Pricing::SteepestEdge}) {
    lp::DualSimplex s(m, with(pricing));
    REQUIRE(s.solve() == lp::LpStatus::Optimal);
    CHECK(s.objective() == Approx(-36.0).epsilon(1e-12));
    CHECK(s.primal()[0] == Approx(2.0).epsilon(1e-12));
    CHECK(s.primal()[1] == Approx(6.0).epsilon(1e-12));
    const auto y = s.row_duals();
    CHECK(y[0] == Approx(0.0).margin(1e-12));
    CHECK(std::abs(y[1]) == Approx(1.5).epsilon(1e-12));
    CHECK(std::abs(y[2]) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Klee-Minty cube") {
  // max 4x1 + 2x2 + x3; x1 <= 5, 4x1 + x2 <= 25, 8x1 + 4x2 + x3 <= 125
  const auto m = model({{1, 0, 0}, {4, 1, 0}, {8, 4, 1}}, {-4, -2, -1}, {-kInf, -kInf, -kInf}, {5, 25, 125},
                       {0, 0, 0}, {kInf, kInf, kInf});
  for (auto pricing : {lp::Pricing::Dantzig, lp::Pricing::SteepestEdge}) {
    lp::DualSimplex s(m, with(pricing));
    REQUIRE(s.solve() == lp::LpStatus::Optimal);
    CHECK(s.objective() == Approx(-125.0).epsilon(1e-12));
  }
}

TEST_CASE("equality rows and boxed columns") {
  // min x + 2y + 3z; x + y + z = 1, x <= 0.25, y in [0.5, 1]
  const auto m = model({{1, 1, 1}}, {1, 2, 3}, {1}, {1}, {0, 0.5, 0}, {0.25, 1, kInf});
  lp::DualSimplex s(m, {});
  REQUIRE(s.solve() == lp::LpStatus::Optimal);
  CHECK(s.objective() == Approx(0.25 + 2 * 0.75).epsilon(1e-12));
}

TEST_CASE("infeasible and unbounded problems are classified") {
  const auto inf = model({{1, 1}}, {1, 1}, {3}, {kInf}, {0, 0}, {1, 1});
  lp::DualSimplex a(inf, {});
  CHECK(a.solve() == lp::LpStatus::Infeasible);
  const auto unb = model({{1, -1}}, {-1, 0}, {-kInf}, {1}, {0, 0}, {kInf, kInf});
  lp::DualSimplex b(unb, {});
  CHECK(b.solve() == lp::LpStatus::Unbounded);
}

TEST_CASE("degenerate problem terminates under both rules") {
  // Many ties at the origin.
  std::vector<std::vector<double>> a;
  std::vector<double> lo, hi;
  for (int r = 0; r < 12; ++r) {
    a.push_back({1.0 + r % 3, 1.0 + (r * 7) % 5, 1.0 + (r * 3) % 4, 1.0});
    lo.push_back(-kInf);
    hi.push_back(r < 6 ? 0.0 : 10.0);
  }
  const auto m = model(a, {-1, -1, -1, -1}, lo, hi, {0, 0, 0, 0}, {kInf, kInf, kInf, kInf});
  for (auto pricing : {lp::Pricing::Dantzig, lp::Pricing::SteepestEdge}) {
    auto opt = with(pricing);
    opt.stall_threshold = 5;
    lp::DualSimplex s(m, opt);
    REQUIRE(s.solve() == lp::LpStatus::Optimal);
    CHECK(s.objective() == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("bound changes re-solve from the previous basis") {
  const auto m = model({{1, 0}, {0, 2}, {3, 2}}, {-3, -5}, {-kInf, -kInf, -kInf}, {4, 12, 18}, {0, 0}, {kInf, kInf});
  lp::DualSimplex s(m, {});
  REQUIRE(s.solve() == lp::LpStatus::Optimal);
  s.set_column_bounds(1, 0, 3);
  REQUIRE(s.solve() == lp::LpStatus::Optimal);
  CHECK(s.objective() == Approx(-(3 * 4 + 5 * 3)).epsilon(1e-12));
  s.set_column_bounds(1, 0, kInf);
  REQUIRE(s.solve() == lp::LpStatus::Optimal);
  CHECK(s.objective() == Approx(-36.0).epsilon(1e-12));
}
