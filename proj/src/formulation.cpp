#include "layover/formulation.hpp"

#include <algorithm>
#include <cmath>

#include "layover/errors.hpp"

namespace layover {

double option_payoff(const OptionQuote& quote, double index_level) {
  return quote.is_call() ? std::max(0.0, index_level - quote.strike) : std::max(0.0, quote.strike - index_level);
}

PayoffMatrix build_payoff_matrix(const MarketSnapshot& snapshot, const StateGrid& grid) {
  if (snapshot.quotes.empty() || grid.atoms.empty()) throw DimensionError("payoff matrix needs options and states");
  PayoffMatrix out{DenseMatrix(snapshot.size(), grid.size())};
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) out.theta(i, j) = option_payoff(snapshot.quotes[i], grid.atoms[j]);
  }
  return out;
}

DenseMatrix build_T(const StateGrid& grid) {
  const std::size_t n = grid.size();
  DenseMatrix t(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) t(j, k) = grid.atoms[j] - grid.atoms[k];
  }
  return t;
}

DenseMatrix build_S(std::size_t n) {
  if (n == 0) throw DimensionError("S matrix needs n >= 1");
  DenseMatrix s(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) s(j, k) = 1.0;
  }
  return s;
}

bool Polytope::contains(const std::vector<double>& alpha, const std::vector<double>& beta, double tol) const {
  if (alpha.size() != options || beta.size() != options) throw DimensionError("portfolio size does not match polytope");
  for (std::size_t i = 0; i < options; ++i) {
    if (alpha[i] < -tol || beta[i] < -tol) return false;
  }
  for (const auto& row : rows) {
    double lhs = 0.0, scale = std::abs(row.rhs);
    for (std::size_t i = 0; i < options; ++i) {
      lhs += row.a[i] * alpha[i] + row.b[i] * beta[i];
      scale = std::max({scale, std::abs(row.a[i] * alpha[i]), std::abs(row.b[i] * beta[i])});
    }
    const double t = tol * std::max(1.0, scale);
    switch (row.sense) {
      case RowSense::LessEqual:
        if (lhs > row.rhs + t) return false;
        break;
      case RowSense::GreaterEqual:
        if (lhs < row.rhs - t) return false;
        break;
      case RowSense::Equal:
        if (std::abs(lhs - row.rhs) > t) return false;
        break;
    }
  }
  return true;
}

Polytope build_polytope(const MarketSnapshot& snapshot, const DepthLimits& limits, bool zero_payoff_outside) {
  const std::size_t m = snapshot.size();
  if (limits.max_long.size() != m || limits.max_short.size() != m) {
    throw DimensionError("depth limits do not match the number of options");
  }
  Polytope poly;
  poly.options = m;
  poly.zero_payoff_outside = zero_payoff_outside;
  poly.rows.reserve(2 * m + (zero_payoff_outside ? 4 : 0));
  for (std::size_t i = 0; i < m; ++i) {
    PolytopeRow r{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), RowSense::LessEqual, limits.max_long[i]};
    r.a[i] = 1.0;
    poly.rows.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < m; ++i) {
    PolytopeRow r{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), RowSense::LessEqual, limits.max_short[i]};
    r.b[i] = 1.0;
    poly.rows.push_back(std::move(r));
  }
  if (zero_payoff_outside) {
    // Zero value and zero slope of the call leg above s_m, then of the put leg below s_1.
    auto add = [&](auto coef) {
      PolytopeRow r{std::vector<double>(m), std::vector<double>(m), RowSense::Equal, 0.0};
      for (std::size_t i = 0; i < m; ++i) {
        r.a[i] = coef(snapshot.quotes[i]);
        r.b[i] = -r.a[i];
      }
      poly.rows.push_back(std::move(r));
    };
    add([](const OptionQuote& q) { return q.is_call() ? q.strike : 0.0; });
    add([](const OptionQuote& q) { return q.is_call() ? 1.0 : 0.0; });
    add([](const OptionQuote& q) { return q.is_call() ? 0.0 : q.strike; });
    add([](const OptionQuote& q) { return q.is_call() ? 0.0 : 1.0; });
  }
  return poly;
}

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::LP: return "lp";
    case Formulation::LP_STAR: return "lp_star";
    case Formulation::LP_COMBINED: return "lp_combined";
    case Formulation::MILP: return "milp";
  }
  return "?";
}

Formulation parse_formulation(const std::string& text) {
  if (text == "lp") return Formulation::LP;
  if (text == "lp_star") return Formulation::LP_STAR;
  if (text == "lp_combined") return Formulation::LP_COMBINED;
  if (text == "milp") return Formulation::MILP;
  throw ParseError("unknown formulation '" + text + "' (lp|lp_star|lp_combined|milp)");
}

const RowBlock& LayoverProblem::block(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("no row block named " + name);
}

std::string LayoverProblem::column_name(std::size_t col) const {
  const auto& L = layout;
  if (col < L.m) return "A" + std::to_string(col);
  if (col < 2 * L.m) return "B" + std::to_string(col - L.m);
  if (col < L.psi_offset()) return "X" + std::to_string(col - 2 * L.m);
  return "P" + std::to_string(col - L.psi_offset());
}

std::string LayoverProblem::row_name(std::size_t row) const { return "R" + std::to_string(row); }

namespace {

// Incremental builder that records row blocks as they are appended.
class ProblemBuilder {
 public:
  explicit ProblemBuilder(LayoverProblem& p) : p_(p) {}

  void begin_block(std::string name) {
    p_.blocks.push_back({std::move(name), p_.rows.rows(), p_.rows.rows()});
  }
  void push(std::size_t col, double v) { p_.rows.push(static_cast<std::int32_t>(col), v); }
  void end_row(RowSense sense, double rhs) {
    p_.rows.finish_row();
    p_.sense.push_back(sense);
    p_.rhs.push_back(rhs);
    p_.blocks.back().end = p_.rows.rows();
  }

 private:
  LayoverProblem& p_;
};

}  // namespace

LayoverProblem assemble(Formulation tag, const PayoffMatrix& payoff, const StateGrid& grid, const Polytope& polytope,
                        const std::vector<double>& ask, const std::vector<double>& bid) {
  const std::size_t m = payoff.options();
  const std::size_t n = payoff.states();
  if (grid.size() != n) throw DimensionError("payoff matrix states do not match the state grid");
  if (polytope.options != m || ask.size() != m || bid.size() != m) {
    throw DimensionError("polytope or price vectors do not match the number of options");
  }
  const auto& x = grid.atoms;
  const auto& mu = grid.probs;

  LayoverProblem p;
  p.tag = tag;
  p.layout = {m, n, tag == Formulation::LP || tag == Formulation::MILP};
  const auto& L = p.layout;
  const std::size_t cols = L.total();
  p.objective.assign(cols, 0.0);
  p.lower.assign(cols, 0.0);
  p.upper.assign(cols, std::numeric_limits<double>::infinity());
  p.is_integer.assign(cols, 0);
  p.rows = SparseRows(cols);
  for (std::size_t i = 0; i < m; ++i) {
    p.objective[L.alpha(i)] = -ask[i];
    p.objective[L.beta(i)] = bid[i];
  }
  if (tag == Formulation::MILP) {
    for (std::size_t c = L.psi_offset(); c < cols; ++c) {
      p.upper[c] = 1.0;
      p.is_integer[c] = 1;
    }
  }

  // (T mu)_j = sum_{k<j} (x_j - x_k) mu_k
  std::vector<double> t_mu(n, 0.0), s_mu(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      t_mu[j] += (x[j] - x[k]) * mu[k];
      s_mu[j] += mu[k];
    }
  }

  ProblemBuilder b(p);
  std::size_t nnz_hint = tag == Formulation::LP_STAR ? n * n * (m + 1) : 4 * n * n + 2 * n * m;
  p.rows.reserve(n * n + 4 * n + polytope.rows.size(), nnz_hint);

  auto psi_row_sums = [&] {
    b.begin_block("psi_row_sum");
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) b.push(L.psi(j, k), 1.0);
      b.end_row(RowSense::Equal, 1.0);
    }
  };
  // Psi x - Theta^T (alpha - beta) <= x
  auto payoff_rows = [&] {
    b.begin_block("payoff");
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < m; ++i) b.push(L.alpha(i), -payoff(i, j));
      for (std::size_t i = 0; i < m; ++i) b.push(L.beta(i), payoff(i, j));
      for (std::size_t k = 0; k < n; ++k) b.push(L.psi(j, k), x[k]);
      b.end_row(RowSense::LessEqual, x[j]);
    }
  };

  switch (tag) {
    case Formulation::LP:
    case Formulation::MILP: {
      psi_row_sums();
      b.begin_block("xi_definition");
      for (std::size_t k = 0; k < n; ++k) {
        b.push(L.xi(k), 1.0);
        for (std::size_t j = 0; j < n; ++j) b.push(L.psi(j, k), -mu[j]);
        b.end_row(RowSense::Equal, 0.0);
      }
      const bool second_order = tag == Formulation::LP;
      b.begin_block(second_order ? "tail_ssd" : "tail_fsd");
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) b.push(L.xi(k), second_order ? x[j] - x[k] : 1.0);
        b.end_row(RowSense::LessEqual, second_order ? t_mu[j] : s_mu[j]);
      }
      payoff_rows();
      break;
    }
    case Formulation::LP_COMBINED: {
      psi_row_sums();
      b.begin_block("combined_tail");
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
          for (std::size_t k = 0; k < j; ++k) b.push(L.psi(l, k), (x[j] - x[k]) * mu[l]);
        }
        b.end_row(RowSense::LessEqual, t_mu[j]);
      }
      payoff_rows();
      break;
    }
    case Formulation::LP_STAR: {
      // Psi mu <= T mu
      b.begin_block("star_tail");
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) b.push(L.psi(j, k), mu[k]);
        b.end_row(RowSense::LessEqual, t_mu[j]);
      }
      // -Psi^T - Theta^T (alpha - beta) 1^T <= x 1^T - 1 x^T, entry (j, k)
      b.begin_block("star_cover");
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t i = 0; i < m; ++i) b.push(L.alpha(i), -payoff(i, j));
          for (std::size_t i = 0; i < m; ++i) b.push(L.beta(i), payoff(i, j));
          b.push(L.psi(k, j), -1.0);
          b.end_row(RowSense::LessEqual, x[j] - x[k]);
        }
      }
      break;
    }
  }

  // Polytope: single-coefficient limit rows become variable bounds.
  b.begin_block("polytope");
  for (const auto& row : polytope.rows) {
    std::size_t count = 0, col = 0;
    double coef = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (row.a[i] != 0.0) ++count, col = L.alpha(i), coef = row.a[i];
      if (row.b[i] != 0.0) ++count, col = L.beta(i), coef = row.b[i];
    }
    if (count == 1 && coef > 0.0 && row.sense == RowSense::LessEqual && row.rhs >= 0.0) {
      p.upper[col] = std::min(p.upper[col], row.rhs / coef);
      ++p.bound_rows;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) b.push(L.alpha(i), row.a[i]);
    for (std::size_t i = 0; i < m; ++i) b.push(L.beta(i), row.b[i]);
    b.end_row(row.sense, row.rhs);
  }
  return p;
}

FormulationStats formulation_stats(const LayoverProblem& problem) {
  FormulationStats s;
  s.rows = problem.constraint_rows() + problem.bound_rows;
  s.nonzeros = problem.rows.nonzeros() + problem.bound_rows;
  s.variables = problem.variables();
  for (const auto& blk : problem.blocks) {
    std::size_t nnz = 0;
    for (std::size_t r = blk.begin; r < blk.end; ++r) nnz += problem.rows.row_nonzeros(r);
    s.block_nonzeros[blk.name] = nnz;
  }
  return s;
}

double max_violation(const LayoverProblem& problem, const std::vector<double>& z) {
  if (z.size() != problem.variables()) throw DimensionError("point size does not match problem");
  double worst = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    worst = std::max({worst, problem.lower[c] - z[c], z[c] - problem.upper[c]});
  }
  for (std::size_t r = 0; r < problem.constraint_rows(); ++r) {
    const double lhs = problem.rows.row_dot(r, z);
    const double d = lhs - problem.rhs[r];
    switch (problem.sense[r]) {
      case RowSense::LessEqual: worst = std::max(worst, d); break;
      case RowSense::GreaterEqual: worst = std::max(worst, -d); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(d)); break;
    }
  }
  return worst;
}

double objective_value(const LayoverProblem& problem, const std::vector<double>& z) {
  double v = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) v += problem.objective[c] * z[c];
  return v;
}

std::vector<double> zero_portfolio_start(const LayoverProblem& problem, const StateGrid& grid) {
  const auto& L = problem.layout;
  if (grid.size() != L.n) throw DimensionError("grid does not match problem");
  std::vector<double> z(L.total(), 0.0);
  if (problem.tag == Formulation::LP_STAR) {
    for (std::size_t k = 0; k < L.n; ++k) {
      for (std::size_t j = 0; j < k; ++j) z[L.psi(k, j)] = grid.atoms[k] - grid.atoms[j];
    }
    return z;
  }
  if (L.has_xi) {
    for (std::size_t k = 0; k < L.n; ++k) z[L.xi(k)] = grid.probs[k];
  }
  for (std::size_t j = 0; j < L.n; ++j) z[L.psi(j, j)] = 1.0;
  return z;
}

}  // namespace layover
