#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace layover {

struct PitReport {
  std::vector<double> pits;
  std::array<double, 10> proportions{};
  double band_low = 0.0;
  double band_high = 0.0;
};

/// 95% band for a decile proportion under uniformity: 0.1 -+ 1.96 sqrt(0.09 / T).
std::pair<double, double> pit_band(std::size_t observations);

/// Decile proportions of given PIT values in [0, 1].
PitReport pit_report(std::vector<double> pits);

/// PIT of each realization under its own predictive CDF.
PitReport pit(const std::vector<std::pair<std::function<double(double)>, double>>& series);

/// Largest gap between the empirical CDF of `u` and the uniform CDF.
double kolmogorov_distance_uniform(std::vector<double> u);

/// T times the mean over the pooled sample points of max(0, D(z))^2, where D is
/// F_enhanced - F_market (order 1) or the difference of integrated CDFs (order 2).
double cvm_statistic(int order, const std::vector<double>& enhanced, const std::vector<double>& market);

struct SdTestResult {
  int order = 1;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t replications = 0;
  std::size_t block_months = 0;
  std::uint64_t seed = 0;
};

struct BootstrapOptions {
  std::size_t block_months = 12;
  std::size_t replications = 999;
  std::uint64_t seed = 1;
  /// Moving blocks with wrap-around starts instead of fixed blocks anchored at the sample start.
  bool circular = false;
};

/// H0: enhanced dominates market. Pairs are resampled in whole blocks and the bootstrap
/// differences are recentred by the observed difference (equality is the least favourable case).
SdTestResult block_bootstrap_pvalue(int order, const std::vector<double>& enhanced, const std::vector<double>& market,
                                    const BootstrapOptions& options = {});

}  // namespace layover
