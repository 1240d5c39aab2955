#pragma once

#include "layover/market_data.hpp"

namespace layover::bs {

/// Inputs in annualized units; tau in years.
struct Inputs {
  double spot = 0.0;
  double strike = 0.0;
  double rate = 0.0;
  double tau = 0.0;
  double vol = 0.0;
};

double price(OptionKind kind, const Inputs& in);
double delta(OptionKind kind, const Inputs& in);
/// dPrice/dVol per unit of volatility.
double vega(const Inputs& in);

/// Volatility in [1e-6, 5] whose price matches `target` to 1e-8, or a negative value
/// when the target lies outside the no-arbitrage price range.
double implied_vol(OptionKind kind, double target, Inputs in, double tolerance = 1e-8);

}  // namespace layover::bs
