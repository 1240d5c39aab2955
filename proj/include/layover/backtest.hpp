#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layover/date.hpp"
#include "layover/market_data.hpp"
#include "layover/state_probability.hpp"

namespace layover {

enum class Compounding { Continuous, Simple };

std::string to_string(Compounding c);
Compounding parse_compounding(const std::string& text);

/// Gross risk-free growth over tau years.
double accrual(double rate, double tau, Compounding c);

/// Put-call parity at the strike nearest the index with both kinds quoted:
/// F = K + growth * (C_mid - P_mid).
double impute_forward(const MarketSnapshot& snapshot, Compounding c = Compounding::Continuous);

struct ExcessReturns {
  double market = 0.0;
  double enhanced = 0.0;
};

/// The market leg buys the index at the discounted forward I = F / growth and sells
/// it at `realized`; the premium (index points) is invested at the risk-free rate.
///   market   = realized / I - growth
///   enhanced = market + (layover_payoff + premium * growth) / I
ExcessReturns excess_returns(double forward, double realized, double premium, double layover_payoff, double rate,
                             double tau, Compounding c = Compounding::Continuous);

/// Value at `level` of the option positions alpha - beta.
double layover_payoff(const MarketSnapshot& snapshot, const std::vector<double>& alpha,
                      const std::vector<double>& beta, double level);

struct MomentReport {
  double mean = 0.0;     // annualized (x12)
  double std_dev = 0.0;  // annualized (x sqrt 12)
  double skew = 0.0;     // of monthly values
  double sortino = 0.0;  // +inf when no month is negative
  double cer2 = 0.0;
  double cer3 = 0.0;
  double cer4 = 0.0;
};

/// Certainty equivalent rate of power utility over gross monthly returns, annualized.
double certainty_equivalent(const std::vector<double>& monthly, double gamma);
MomentReport moments(const std::vector<double>& monthly);

enum class VolSource { ImpliedWithFallback, VolIndex };

struct GreeksReport {
  /// Sum of (alpha - beta) * delta: index units per unit of market investment.
  double delta = 0.0;
  /// Sum of (alpha - beta) * vega divided by the index level.
  double vega = 0.0;
  /// Options priced with the volatility-index fallback.
  std::size_t fallbacks = 0;
};

/// Black-Scholes Greeks with the dividend-adjusted spot F / growth.
GreeksReport greeks(const MarketSnapshot& snapshot, const std::vector<double>& alpha, const std::vector<double>& beta,
                    VolSource source = VolSource::ImpliedWithFallback, Compounding c = Compounding::Continuous);

struct BacktestRecord {
  Date trade_date;
  double forward_price = 0.0;
  double market_excess_return = 0.0;
  double enhanced_excess_return = 0.0;
  double layover_premium = 0.0;  // fraction of the market investment
  double layover_delta = 0.0;
  double layover_vega = 0.0;
  double realized_layover_payoff = 0.0;  // index points
  double realized_index = 0.0;
};

BacktestRecord make_record(const MarketSnapshot& snapshot, const std::vector<double>& alpha,
                           const std::vector<double>& beta, double realized_index,
                           Compounding c = Compounding::Continuous);

struct PortfolioCurve {
  MarketSnapshot snapshot;
  std::vector<double> alpha;
  std::vector<double> beta;
};

struct PayoffCurves {
  std::vector<double> grid;  // index-relative levels
  std::vector<double> q1;
  std::vector<double> median;
  std::vector<double> q3;
};

/// Pointwise quartiles of payoff / index over the portfolios (linear interpolation between order statistics).
PayoffCurves payoff_curves(const std::vector<PortfolioCurve>& portfolios, const std::vector<double>& grid);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> sample, double p);

struct SimulatedMoments {
  MomentReport market;
  MomentReport enhanced;
};

/// Monthly excess returns of the market and enhanced portfolios with the index at expiry
/// drawn from `dist`.
SimulatedMoments simulate_model_moments(const PredictiveDistribution& dist, const MarketSnapshot& snapshot,
                                        const std::vector<double>& alpha, const std::vector<double>& beta,
                                        std::size_t draws, std::uint64_t seed,
                                        Compounding c = Compounding::Continuous);

}  // namespace layover
