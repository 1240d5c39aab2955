#include "layover/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "layover/errors.hpp"

namespace layover {

DiscreteDistribution DiscreteDistribution::from_values(const std::vector<double>& values,
                                                       const std::vector<double>& probs) {
  if (values.size() != probs.size()) throw DimensionError("values and probabilities differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  DiscreteDistribution d;
  for (auto k : order) {
    if (!d.support.empty() && d.support.back() == values[k]) {
      d.probs.back() += probs[k];
    } else {
      d.support.push_back(values[k]);
      d.probs.push_back(probs[k]);
    }
  }
  return d;
}

void DiscreteDistribution::validate() const {
  if (support.empty() || support.size() != probs.size()) throw ValidationError("distribution is empty or ragged");
  double total = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (probs[k] < 0.0) throw ValidationError("negative probability");
    if (k > 0 && !(support[k] > support[k - 1])) throw ValidationError("support not strictly increasing");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("probabilities do not sum to one");
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) m += probs[k] * support[k];
  return m;
}

DiscreteDistribution DiscreteDistribution::shifted(double delta) const {
  DiscreteDistribution d = *this;
  for (auto& s : d.support) s += delta;
  return d;
}

namespace {

std::vector<double> merged_support(const DiscreteDistribution& y, const DiscreteDistribution& x) {
  std::vector<double> z;
  z.reserve(y.support.size() + x.support.size());
  std::merge(y.support.begin(), y.support.end(), x.support.begin(), x.support.end(), std::back_inserter(z));
  z.erase(std::unique(z.begin(), z.end()), z.end());
  return z;
}

// CDF of d at each point of z (z sorted).
std::vector<double> cdf_on(const DiscreteDistribution& d, const std::vector<double>& z) {
  std::vector<double> f(z.size());
  std::size_t k = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    while (k < d.support.size() && d.support[k] <= z[i]) acc += d.probs[k++];
    f[i] = acc;
  }
  return f;
}

}  // namespace

bool fsd_check(const DiscreteDistribution& y, const DiscreteDistribution& x, double tol) {
  const auto z = merged_support(y, x);
  const auto fy = cdf_on(y, z);
  const auto fx = cdf_on(x, z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (fy[i] > fx[i] + tol) return false;
  }
  return true;
}

bool ssd_check(const DiscreteDistribution& y, const DiscreteDistribution& x, double tol) {
  const auto z = merged_support(y, x);
  const auto fy = cdf_on(y, z);
  const auto fx = cdf_on(x, z);
  // Both integrals vanish at z[0]; between breakpoints the CDFs are constant.
  double gy = 0.0, gx = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    const double h = z[i] - z[i - 1];
    gy += fy[i - 1] * h;
    gx += fx[i - 1] * h;
    if (gy > gx + tol) return false;
  }
  return true;
}

DiscreteDistribution enhanced_distribution(const std::vector<double>& alpha, const std::vector<double>& beta,
                                           const PayoffMatrix& payoff, const StateGrid& grid) {
  const std::size_t m = payoff.options(), n = payoff.states();
  if (alpha.size() != m || beta.size() != m || grid.size() != n) {
    throw DimensionError("portfolio, payoff matrix and grid disagree");
  }
  std::vector<double> values(grid.atoms);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) values[j] += (alpha[i] - beta[i]) * payoff(i, j);
  }
  return DiscreteDistribution::from_values(values, grid.probs);
}

DiscreteDistribution market_distribution(const StateGrid& grid) {
  return DiscreteDistribution::from_values(grid.atoms, grid.probs);
}

LatticeResult lattice_oracle(const MarketSnapshot& snapshot, const StateGrid& grid, const Polytope& polytope,
                             int order, double step, double cap) {
  const std::size_t m = snapshot.size();
  if (order != 1 && order != 2) throw ValidationError("dominance order must be 1 or 2");
  if (!(step > 0.0) || !(cap >= 0.0)) throw ValidationError("lattice step and cap must be positive");
  const auto levels = static_cast<std::size_t>(std::floor(cap / step + 1e-9)) + 1;
  if (m > 4 || grid.size() > 10 || std::pow(static_cast<double>(levels), 2.0 * static_cast<double>(m)) > 1e8) {
    throw ValidationError("lattice search space too large");
  }
  const auto payoff = build_payoff_matrix(snapshot, grid);
  const auto market = market_distribution(grid);

  LatticeResult best;
  best.alpha.assign(m, 0.0);
  best.beta.assign(m, 0.0);
  best.premium = 0.0;
  bool found = false;

  // Odometer over (alpha_1..alpha_m, beta_1..beta_m), first coordinate most significant.
  std::vector<std::size_t> digit(2 * m, 0);
  std::vector<double> alpha(m), beta(m);
  while (true) {
    for (std::size_t i = 0; i < m; ++i) {
      alpha[i] = static_cast<double>(digit[i]) * step;
      beta[i] = static_cast<double>(digit[m + i]) * step;
    }
    ++best.evaluated;
    if (polytope.contains(alpha, beta)) {
      double premium = 0.0;
      for (std::size_t i = 0; i < m; ++i) premium += -snapshot.quotes[i].ask * alpha[i] + snapshot.quotes[i].bid * beta[i];
      if (!found || premium > best.premium) {
        const auto y = enhanced_distribution(alpha, beta, payoff, grid);
        const bool ok = order == 1 ? fsd_check(y, market) : ssd_check(y, market);
        if (ok) {
          found = true;
          best.premium = premium;
          best.alpha = alpha;
          best.beta = beta;
        }
      }
    }
    std::size_t k = 2 * m;
    while (k > 0) {
      --k;
      if (++digit[k] < levels) break;
      digit[k] = 0;
      if (k == 0) return best;
    }
    if (m == 0) return best;
  }
}

}  // namespace layover
