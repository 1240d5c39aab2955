#include "layover/state_probability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "layover/csv.hpp"
#include "layover/errors.hpp"

namespace layover {
namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Theodossiou's (k, n, lambda) expressed as p = k, q = n / k with the mean
// shift and variance adjustment that make the law standardized.
struct SgtConstants {
  double p, q, lambda;
  double v;          // scale adjustment giving unit variance
  double m;          // mean shift: density is evaluated at z + m
  double log_norm;   // log of p / (2 v q^{1/p} B(1/p, q))
};

SgtConstants sgt_constants(const SgtParams& s) {
  s.validate();
  SgtConstants c{};
  c.p = s.shape;
  c.q = s.degrees_of_freedom / s.shape;
  c.lambda = s.asymmetry;
  const double lb1 = log_beta(1.0 / c.p, c.q);
  const double r2 = std::exp(log_beta(2.0 / c.p, c.q - 1.0 / c.p) - lb1);
  const double r3 = std::exp(log_beta(3.0 / c.p, c.q - 2.0 / c.p) - lb1);
  const double q1p = std::pow(c.q, 1.0 / c.p);
  // Var of the unstandardized law is q^{2/p} [(1+3l^2) r3 - 4 l^2 r2^2].
  const double var_core = (1.0 + 3.0 * c.lambda * c.lambda) * r3 - 4.0 * c.lambda * c.lambda * r2 * r2;
  c.v = 1.0 / (q1p * std::sqrt(var_core));
  c.m = 2.0 * c.v * c.lambda * q1p * r2;
  c.log_norm = std::log(c.p) - std::log(2.0 * c.v) - std::log(q1p) - lb1;
  return c;
}

double sgt_density_with(double z, const SgtConstants& c) {
  const double y = z + c.m;
  const double side = y >= 0.0 ? 1.0 + c.lambda : 1.0 - c.lambda;
  const double t = std::pow(std::abs(y) / (c.v * side), c.p) / c.q;
  return std::exp(c.log_norm - (1.0 / c.p + c.q) * std::log1p(t));
}

const boost::math::normal_distribution<double> kStdNormal{0.0, 1.0};

}  // namespace

void StateGrid::validate() const {
  if (atoms.size() != probs.size()) throw DimensionError("state grid atoms/probs size mismatch");
  if (atoms.empty()) throw ValidationError("empty state grid");
  long double total = 0.0L;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (j > 0 && !(atoms[j] > atoms[j - 1])) throw ValidationError("state grid atoms not strictly increasing");
    if (!(probs[j] > 0.0)) throw ValidationError("state probability not positive at atom " + csv::format_exact(atoms[j]));
    total += probs[j];
  }
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-12) throw ValidationError("state probabilities do not sum to one");
}

StateGrid StateGrid::from_weights(std::vector<double> atoms, const std::vector<double>& weights) {
  if (atoms.size() != weights.size()) throw DimensionError("atoms/weights size mismatch");
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("state weights must be positive and finite");
    total += w;
  }
  StateGrid g;
  g.atoms = std::move(atoms);
  g.probs.resize(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    g.probs[j] = static_cast<double>(static_cast<long double>(weights[j]) / total);
  }
  g.validate();
  return g;
}

void StateGrid::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "atom,prob\n";
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    out << csv::format17(atoms[j]) << ',' << csv::format17(probs[j]) << '\n';
  }
}

StateGrid StateGrid::read_csv(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto ca = t.column("atom"), cp = t.column("prob");
  StateGrid g;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    g.atoms.push_back(t.number(r, ca));
    g.probs.push_back(t.number(r, cp));
  }
  g.validate();
  return g;
}

void CalibrationParams::validate() const {
  if (!(trading_days_per_year > 0.0)) throw ValidationError("trading_days_per_year must be positive");
  if (!(grid_tick > 0.0)) throw ValidationError("grid_tick must be positive");
}

void SgtParams::validate() const {
  if (!(shape > 0.0) || !(degrees_of_freedom > 0.0)) {
    throw ValidationError("SGT shape and degrees of freedom must be positive");
  }
  if (!(asymmetry > -1.0 && asymmetry < 1.0)) throw ValidationError("SGT asymmetry must lie in (-1, 1)");
  // Unit variance needs q = n / k > 2 / k, i.e. n > 2.
  if (!(degrees_of_freedom > 2.0)) throw ValidationError("SGT degrees of freedom must exceed 2 for a finite variance");
}

LocationScale calibrate_location_scale(const MarketSnapshot& snapshot, const CalibrationParams& params) {
  params.validate();
  if (!(snapshot.index_level > 0.0)) throw ValidationError("nonpositive index level");
  const double tau = snapshot.trading_days_to_expiry / params.trading_days_per_year;
  const double annual_vol = snapshot.vol_index / 100.0 - params.vol_risk_premium;
  if (!(annual_vol > 0.0)) {
    throw ValidationError("nonpositive scale: vol index " + csv::format_exact(snapshot.vol_index) +
                          " does not exceed the volatility risk premium");
  }
  LocationScale ls;
  ls.location = std::log(snapshot.index_level) + (snapshot.risk_free_rate + params.market_risk_premium) * tau;
  ls.scale = annual_vol * std::sqrt(tau);
  return ls;
}

double sgt_density(double z, const SgtParams& sgt) { return sgt_density_with(z, sgt_constants(sgt)); }

double sgt_cdf(double z, const SgtParams& sgt) {
  const SgtConstants c = sgt_constants(sgt);
  const double y = z + c.m;
  const double a = 1.0 / c.p;
  const double lower_mass = 0.5 * (1.0 - c.lambda);
  const double side = y >= 0.0 ? 1.0 + c.lambda : 1.0 - c.lambda;
  const double t = std::pow(std::abs(y) / (c.v * side), c.p) / c.q;
  if (t == 0.0) return lower_mass;
  // w = t / (1 + t) is Beta(1/p, q) distributed on each half-line.
  const double w = t / (1.0 + t);
  if (y < 0.0) return lower_mass * boost::math::ibetac(a, c.q, w);
  return lower_mass + 0.5 * (1.0 + c.lambda) * boost::math::ibeta(a, c.q, w);
}

double sgt_quantile(double u, const SgtParams& sgt) {
  if (!(u > 0.0 && u < 1.0)) throw ValidationError("quantile level must lie in (0, 1)");
  const SgtConstants c = sgt_constants(sgt);
  const double a = 1.0 / c.p;
  const double lower_mass = 0.5 * (1.0 - c.lambda);
  double y;
  if (u < lower_mass) {
    const double w = boost::math::ibetac_inv(a, c.q, u / lower_mass);
    const double t = w / (1.0 - w);
    y = -std::pow(c.q * t, 1.0 / c.p) * c.v * (1.0 - c.lambda);
  } else {
    const double frac = (u - lower_mass) / (0.5 * (1.0 + c.lambda));
    if (frac <= 0.0) return -c.m;
    const double w = boost::math::ibeta_inv(a, c.q, std::min(frac, 1.0));
    const double t = w / (1.0 - w);
    y = std::pow(c.q * t, 1.0 / c.p) * c.v * (1.0 + c.lambda);
  }
  return y - c.m;
}

std::string to_string(ReturnSpec spec) { return spec == ReturnSpec::Symmetric ? "symmetric" : "skewed"; }

ReturnSpec parse_return_spec(const std::string& text) {
  if (text == "symmetric") return ReturnSpec::Symmetric;
  if (text == "skewed") return ReturnSpec::Skewed;
  throw ParseError("unknown state-probability specification '" + text + "' (symmetric|skewed)");
}

PredictiveDistribution::PredictiveDistribution(LocationScale ls, ReturnSpec spec, SgtParams sgt)
    : ls_(ls), spec_(spec), sgt_(sgt) {
  if (!(ls_.scale > 0.0)) throw ValidationError("predictive distribution needs a positive scale");
  if (spec_ == ReturnSpec::Skewed) sgt_.validate();
}

double PredictiveDistribution::standard_pdf(double z) const {
  return spec_ == ReturnSpec::Symmetric ? boost::math::pdf(kStdNormal, z) : sgt_density(z, sgt_);
}

double PredictiveDistribution::pdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double z = (std::log(x) - ls_.location) / ls_.scale;
  return standard_pdf(z) / (x * ls_.scale);
}

double PredictiveDistribution::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double z = (std::log(x) - ls_.location) / ls_.scale;
  if (spec_ == ReturnSpec::Symmetric) return boost::math::cdf(kStdNormal, z);
  return sgt_cdf(z, sgt_);
}

double PredictiveDistribution::quantile(double u) const {
  const double z = spec_ == ReturnSpec::Symmetric ? boost::math::quantile(kStdNormal, u) : sgt_quantile(u, sgt_);
  return std::exp(ls_.location + ls_.scale * z);
}

std::vector<double> tick_atoms(double lo, double hi, double tick) {
  if (!(tick > 0.0)) throw ValidationError("grid tick must be positive");
  const double eps = 1e-9;
  const long first = static_cast<long>(std::ceil(lo / tick - eps));
  const long last = static_cast<long>(std::floor(hi / tick + eps));
  std::vector<double> atoms;
  for (long k = first; k <= last; ++k) atoms.push_back(static_cast<double>(k) * tick);
  if (atoms.size() < 2) {
    throw ValidationError("fewer than two grid atoms in the strike range [" + csv::format_exact(lo) + ", " +
                          csv::format_exact(hi) + "]");
  }
  return atoms;
}

StateGrid build_grid(const MarketSnapshot& snapshot, const PredictiveDistribution& dist,
                     const CalibrationParams& params) {
  params.validate();
  if (snapshot.quotes.empty()) throw ValidationError("snapshot has no quotes");
  auto atoms = tick_atoms(snapshot.lowest_strike(), snapshot.highest_strike(), params.grid_tick);
  // Log-density weights, shifted by their maximum so the normalization cannot underflow at the mode.
  std::vector<double> logw(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) logw[j] = std::log(dist.pdf(atoms[j]));
  const double top = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(top)) throw ValidationError("state density vanishes on the whole strike range");
  std::vector<double> weights(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) weights[j] = std::exp(logw[j] - top);
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0.0); })) {
    throw ValidationError("state probability underflow inside the strike range on " + snapshot.trade_date.iso());
  }
  return StateGrid::from_weights(std::move(atoms), weights);
}

StateGrid build_grid_symmetric(const MarketSnapshot& snapshot, const CalibrationParams& params) {
  return build_grid(snapshot, PredictiveDistribution(calibrate_location_scale(snapshot, params), ReturnSpec::Symmetric),
                    params);
}

StateGrid build_grid_skewed(const MarketSnapshot& snapshot, const CalibrationParams& params, const SgtParams& sgt) {
  return build_grid(snapshot,
                    PredictiveDistribution(calibrate_location_scale(snapshot, params), ReturnSpec::Skewed, sgt),
                    params);
}

}  // namespace layover
