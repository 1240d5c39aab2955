#pragma once

#include <cstddef>
#include <vector>

#include "layover/formulation.hpp"
#include "layover/market_data.hpp"
#include "layover/state_probability.hpp"

namespace layover {

/// Finite distribution with strictly increasing support.
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> probs;

  /// Sorts the values and merges exactly equal ones.
  static DiscreteDistribution from_values(const std::vector<double>& values, const std::vector<double>& probs);
  void validate() const;
  double mean() const;
  /// Same distribution moved by `delta`.
  DiscreteDistribution shifted(double delta) const;
};

constexpr double kDominanceTolerance = 1e-12;

/// F_Y(z) <= F_X(z) at every point of the merged support.
bool fsd_check(const DiscreteDistribution& y, const DiscreteDistribution& x, double tol = kDominanceTolerance);
/// Integrated CDFs ordered at every point of the merged support (exact for step CDFs).
bool ssd_check(const DiscreteDistribution& y, const DiscreteDistribution& x, double tol = kDominanceTolerance);

/// Distribution of x_j + sum_i (alpha_i - beta_i) theta_ij under mu.
DiscreteDistribution enhanced_distribution(const std::vector<double>& alpha, const std::vector<double>& beta,
                                           const PayoffMatrix& payoff, const StateGrid& grid);
DiscreteDistribution market_distribution(const StateGrid& grid);

struct LatticeResult {
  std::vector<double> alpha;
  std::vector<double> beta;
  double premium = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive search over alpha_i, beta_i in {0, step, ..., cap} inside the polytope.
/// Ties keep the lexicographically smallest position vector (alpha then beta).
LatticeResult lattice_oracle(const MarketSnapshot& snapshot, const StateGrid& grid, const Polytope& polytope,
                             int order, double step, double cap);

}  // namespace layover
