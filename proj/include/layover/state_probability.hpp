#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layover/market_data.hpp"

namespace layover {

/// Discrete distribution of the index level at expiry, conditioned on the strike range.
struct StateGrid {
  std::vector<double> atoms;  // strictly increasing
  std::vector<double> probs;  // positive, summing to one

  std::size_t size() const { return atoms.size(); }
  void validate() const;

  /// Normalizes positive weights into a grid; throws ValidationError on bad input.
  static StateGrid from_weights(std::vector<double> atoms, const std::vector<double>& weights);

  void write_csv(const std::string& path) const;
  static StateGrid read_csv(const std::string& path);

  friend bool operator==(const StateGrid&, const StateGrid&) = default;
};

struct CalibrationParams {
  double market_risk_premium = 0.06;
  double vol_risk_premium = 0.02;
  double trading_days_per_year = 252.0;
  double grid_tick = 5.0;
  void validate() const;
};

/// Skewed generalized t parameters in Theodossiou's (shape, degrees of freedom, asymmetry) form.
struct SgtParams {
  double shape = 1.25;
  double degrees_of_freedom = 5.0;
  double asymmetry = -0.2;
  void validate() const;
};

struct LocationScale {
  double location = 0.0;  // mean of the log index at expiry
  double scale = 0.0;     // standard deviation of the log index at expiry
};

LocationScale calibrate_location_scale(const MarketSnapshot& snapshot, const CalibrationParams& params);

/// Standardized (zero mean, unit variance) skewed generalized t density.
double sgt_density(double z, const SgtParams& sgt);
double sgt_cdf(double z, const SgtParams& sgt);
double sgt_quantile(double u, const SgtParams& sgt);

enum class ReturnSpec { Symmetric, Skewed };

std::string to_string(ReturnSpec spec);
ReturnSpec parse_return_spec(const std::string& text);

/// Unconditional predictive distribution of the index level at expiry:
/// (ln X - location) / scale follows N(0,1) or the standardized SGT.
class PredictiveDistribution {
 public:
  PredictiveDistribution(LocationScale ls, ReturnSpec spec, SgtParams sgt = {});

  /// Density of the index level (includes the 1/x Jacobian).
  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  /// Density of the standardized log variable.
  double standard_pdf(double z) const;

  const LocationScale& location_scale() const { return ls_; }
  ReturnSpec spec() const { return spec_; }
  const SgtParams& sgt() const { return sgt_; }

 private:
  LocationScale ls_;
  ReturnSpec spec_;
  SgtParams sgt_;
};

/// All multiples of `tick` inside [lo, hi]. Throws ValidationError if fewer than two.
std::vector<double> tick_atoms(double lo, double hi, double tick);

StateGrid build_grid(const MarketSnapshot& snapshot, const PredictiveDistribution& dist,
                     const CalibrationParams& params);
StateGrid build_grid_symmetric(const MarketSnapshot& snapshot, const CalibrationParams& params);
StateGrid build_grid_skewed(const MarketSnapshot& snapshot, const CalibrationParams& params,
                            const SgtParams& sgt);

}  // namespace layover
