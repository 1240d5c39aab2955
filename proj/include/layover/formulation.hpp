#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "layover/market_data.hpp"
#include "layover/sparse.hpp"
#include "layover/state_probability.hpp"

namespace layover {

/// theta(i, j): payoff of one unit of option i when the index ends at atom j.
struct PayoffMatrix {
  DenseMatrix theta;  // options x states
  std::size_t options() const { return theta.rows; }
  std::size_t states() const { return theta.cols; }
  double operator()(std::size_t i, std::size_t j) const { return theta(i, j); }
};

double option_payoff(const OptionQuote& quote, double index_level);

PayoffMatrix build_payoff_matrix(const MarketSnapshot& snapshot, const StateGrid& grid);

/// T(j, k) = x_j - x_k for j > k, zero otherwise.
DenseMatrix build_T(const StateGrid& grid);
/// S(j, k) = 1 for j > k, zero otherwise.
DenseMatrix build_S(std::size_t n);

enum class RowSense { LessEqual, Equal, GreaterEqual };

/// One row of A alpha + B beta (sense) c.
struct PolytopeRow {
  std::vector<double> a;
  std::vector<double> b;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// Position polytope. The plain block holds the 2m position limits; the
/// zero-payoff block holds 4 equality rows (the 8 paired inequalities folded).
struct Polytope {
  std::size_t options = 0;
  std::vector<PolytopeRow> rows;
  bool zero_payoff_outside = false;

  /// l: polytope rows counted toward the formulation size (2m, or 2m + 4 with zero tails).
  std::size_t row_count() const { return rows.size(); }
  /// True when (alpha, beta) satisfies every row within `tol`.
  bool contains(const std::vector<double>& alpha, const std::vector<double>& beta, double tol = 1e-9) const;
};

Polytope build_polytope(const MarketSnapshot& snapshot, const DepthLimits& limits, bool zero_payoff_outside);

enum class Formulation { LP, LP_STAR, LP_COMBINED, MILP };

std::string to_string(Formulation f);
Formulation parse_formulation(const std::string& text);

/// Column map. Psi is stored row-major: psi(j, k) = psi_offset + j * n + k.
struct VariableLayout {
  std::size_t m = 0;
  std::size_t n = 0;
  bool has_xi = true;

  std::size_t alpha(std::size_t i) const { return i; }
  std::size_t beta(std::size_t i) const { return m + i; }
  std::size_t xi(std::size_t k) const { return 2 * m + k; }
  std::size_t psi_offset() const { return 2 * m + (has_xi ? n : 0); }
  std::size_t psi(std::size_t j, std::size_t k) const { return psi_offset() + j * n + k; }
  std::size_t total() const { return psi_offset() + n * n; }
};

/// Contiguous range of rows sharing one constraint family.
struct RowBlock {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// An assembled problem: maximize objective^T z subject to rows, lower <= z <= upper.
struct LayoverProblem {
  Formulation tag = Formulation::LP;
  VariableLayout layout;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<char> is_integer;
  SparseRows rows;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<RowBlock> blocks;
  /// Polytope rows carried as variable bounds instead of rows.
  std::size_t bound_rows = 0;

  std::size_t variables() const { return objective.size(); }
  std::size_t constraint_rows() const { return rows.rows(); }
  bool is_mip() const { return tag == Formulation::MILP; }
  const RowBlock& block(const std::string& name) const;

  /// Deterministic names (at most 8 characters) used by the MPS writer and metadata.
  std::string column_name(std::size_t col) const;
  std::string row_name(std::size_t row) const;
};

LayoverProblem assemble(Formulation tag, const PayoffMatrix& payoff, const StateGrid& grid,
                        const Polytope& polytope, const std::vector<double>& ask,
                        const std::vector<double>& bid);

struct FormulationStats {
  std::size_t rows = 0;       // constraint rows plus bound-encoded polytope rows
  std::size_t nonzeros = 0;   // matrix nonzeros plus one per bound-encoded row
  std::size_t variables = 0;
  std::map<std::string, std::size_t> block_nonzeros;
};

FormulationStats formulation_stats(const LayoverProblem& problem);

/// Largest violation of any row or bound at the point z (independent residual check).
double max_violation(const LayoverProblem& problem, const std::vector<double>& z);

/// Objective value at z.
double objective_value(const LayoverProblem& problem, const std::vector<double>& z);

/// Feasible point with the zero portfolio: xi = mu and Psi = I for LP, LP_COMBINED
/// and MILP; Psi(k, j) = max(0, x_k - x_j) for LP_STAR.
std::vector<double> zero_portfolio_start(const LayoverProblem& problem, const StateGrid& grid);

}  // namespace layover
