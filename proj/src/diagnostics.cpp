#include "layover/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "layover/errors.hpp"
#include "layover/synthetic.hpp"

namespace layover {

namespace {

constexpr double kTol = 1e-12;

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Empirical CDF (order 1) or integrated CDF (order 2) of a sorted sample on a sorted grid.
std::vector<double> empirical_on(int order, const std::vector<double>& s, const std::vector<double>& z) {
  const double n = static_cast<double>(s.size());
  std::vector<double> out(z.size());
  std::size_t k = 0;
  double below_sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    while (k < s.size() && s[k] <= z[i]) below_sum += s[k++];
    const double count = static_cast<double>(k);
    // Integrated CDF at z is the mean of max(0, z - x).
    out[i] = order == 1 ? count / n : (count * z[i] - below_sum) / n;
  }
  return out;
}

double violation_sum(const std::vector<double>& d, const std::vector<double>* centre) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double v = centre ? d[i] - (*centre)[i] : d[i];
    if (v > kTol) acc += v * v;
  }
  return acc;
}

std::vector<double> pooled_grid(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> z(a);
  z.insert(z.end(), b.begin(), b.end());
  std::sort(z.begin(), z.end());
  z.erase(std::unique(z.begin(), z.end()), z.end());
  return z;
}

std::vector<double> difference(int order, const std::vector<double>& enhanced, const std::vector<double>& market,
                               const std::vector<double>& z) {
  auto fe = empirical_on(order, sorted(enhanced), z);
  const auto fm = empirical_on(order, sorted(market), z);
  for (std::size_t i = 0; i < z.size(); ++i) fe[i] -= fm[i];
  return fe;
}

void check_samples(int order, const std::vector<double>& enhanced, const std::vector<double>& market) {
  if (order != 1 && order != 2) throw ValidationError("dominance order must be 1 or 2");
  if (enhanced.size() != market.size()) throw DimensionError("paired samples differ in length");
  if (enhanced.empty()) throw ValidationError("empty samples");
}

}  // namespace

std::pair<double, double> pit_band(std::size_t observations) {
  if (observations == 0) throw ValidationError("empty PIT series");
  const double half = 1.96 * std::sqrt(0.1 * 0.9 / static_cast<double>(observations));
  return {0.1 - half, 0.1 + half};
}

PitReport pit_report(std::vector<double> pits) {
  if (pits.empty()) throw ValidationError("empty PIT series");
  PitReport rep;
  const double n = static_cast<double>(pits.size());
  for (double u : pits) {
    if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("PIT value outside [0, 1]");
    const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(u * 10.0)));
    rep.proportions[bin] += 1.0;
  }
  for (auto& p : rep.proportions) p /= n;
  std::tie(rep.band_low, rep.band_high) = pit_band(pits.size());
  rep.pits = std::move(pits);
  return rep;
}

PitReport pit(const std::vector<std::pair<std::function<double(double)>, double>>& series) {
  std::vector<double> u;
  u.reserve(series.size());
  for (const auto& [cdf, x] : series) u.push_back(std::clamp(cdf(x), 0.0, 1.0));
  return pit_report(std::move(u));
}

double kolmogorov_distance_uniform(std::vector<double> u) {
  if (u.empty()) throw ValidationError("empty sample");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n});
  }
  return d;
}

double cvm_statistic(int order, const std::vector<double>& enhanced, const std::vector<double>& market) {
  check_samples(order, enhanced, market);
  const auto z = pooled_grid(enhanced, market);
  const auto d = difference(order, enhanced, market, z);
  return static_cast<double>(enhanced.size()) * violation_sum(d, nullptr) / static_cast<double>(z.size());
}

SdTestResult block_bootstrap_pvalue(int order, const std::vector<double>& enhanced, const std::vector<double>& market,
                                    const BootstrapOptions& options) {
  check_samples(order, enhanced, market);
  const std::size_t t = enhanced.size();
  const std::size_t len = options.block_months;
  if (len == 0 || len > t) throw ValidationError("block length must be between 1 and the sample length");
  if (options.replications == 0) throw ValidationError("at least one bootstrap replication is required");

  SdTestResult res;
  res.order = order;
  res.replications = options.replications;
  res.block_months = len;
  res.seed = options.seed;

  const auto z = pooled_grid(enhanced, market);
  const auto d_hat = difference(order, enhanced, market, z);
  const double scale = static_cast<double>(t) / static_cast<double>(z.size());
  res.statistic = scale * violation_sum(d_hat, nullptr);

  const std::size_t blocks = (t + len - 1) / len;
  std::vector<double> be(t), bm(t);
  std::size_t exceed = 0;
  for (std::size_t rep = 0; rep < options.replications; ++rep) {
    Rng rng(derive_seed(options.seed, rep));
    std::size_t filled = 0;
    while (filled < t) {
      std::size_t start;
      std::size_t size;
      if (options.circular) {
        start = static_cast<std::size_t>(rng.integer(0, static_cast<int>(t) - 1));
        size = len;
      } else {
        const auto b = static_cast<std::size_t>(rng.integer(0, static_cast<int>(blocks) - 1));
        start = b * len;
        size = std::min(len, t - start);
      }
      for (std::size_t k = 0; k < size && filled < t; ++k, ++filled) {
        const std::size_t src = (start + k) % t;
        be[filled] = enhanced[src];
        bm[filled] = market[src];
      }
    }
    const auto d_star = difference(order, be, bm, z);
    const double stat = scale * violation_sum(d_star, &d_hat);
    if (stat >= res.statistic) ++exceed;
  }
  res.p_value = static_cast<double>(exceed) / static_cast<double>(options.replications);
  return res;
}

}  // namespace layover
