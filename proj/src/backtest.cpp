#include "layover/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "layover/black_scholes.hpp"
#include "layover/errors.hpp"
#include "layover/formulation.hpp"
#include "layover/synthetic.hpp"

namespace layover {

std::string to_string(Compounding c) { return c == Compounding::Continuous ? "continuous" : "simple"; }

Compounding parse_compounding(const std::string& text) {
  if (text == "continuous") return Compounding::Continuous;
  if (text == "simple") return Compounding::Simple;
  throw ValidationError("unknown compounding: " + text);
}

double accrual(double rate, double tau, Compounding c) {
  return c == Compounding::Continuous ? std::exp(rate * tau) : 1.0 + rate * tau;
}

double impute_forward(const MarketSnapshot& snapshot, Compounding c) {
  const double growth = accrual(snapshot.risk_free_rate, snapshot.calendar_years(), c);
  double best_gap = std::numeric_limits<double>::infinity();
  double forward = 0.0;
  const auto& q = snapshot.quotes;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i].kind != OptionKind::Put) continue;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q[k].kind != OptionKind::Call || q[k].strike != q[i].strike) continue;
      const double gap = std::abs(q[i].strike - snapshot.index_level);
      if (gap < best_gap) {
        best_gap = gap;
        forward = q[i].strike + growth * (q[k].mid() - q[i].mid());
      }
    }
  }
  if (!std::isfinite(best_gap)) throw ValidationError("no strike quotes both a put and a call");
  return forward;
}

ExcessReturns excess_returns(double forward, double realized, double premium, double layover_payoff, double rate,
                             double tau, Compounding c) {
  if (!(forward > 0.0)) throw ValidationError("forward price must be positive");
  const double growth = accrual(rate, tau, c);
  const double investment = forward / growth;
  ExcessReturns r;
  r.market = realized / investment - growth;
  r.enhanced = r.market + (layover_payoff + premium * growth) / investment;
  return r;
}

double layover_payoff(const MarketSnapshot& snapshot, const std::vector<double>& alpha,
                      const std::vector<double>& beta, double level) {
  if (alpha.size() != snapshot.size() || beta.size() != snapshot.size()) {
    throw DimensionError("portfolio does not match the snapshot");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    if (alpha[i] == beta[i]) continue;
    v += (alpha[i] - beta[i]) * option_payoff(snapshot.quotes[i], level);
  }
  return v;
}

double certainty_equivalent(const std::vector<double>& monthly, double gamma) {
  if (gamma == 1.0) throw ValidationError("log utility is not supported");
  if (monthly.empty()) throw ValidationError("empty sample");
  double acc = 0.0;
  for (double r : monthly) {
    if (!(1.0 + r > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::pow(1.0 + r, 1.0 - gamma);
  }
  acc /= static_cast<double>(monthly.size());
  return 12.0 * (std::pow(acc, 1.0 / (1.0 - gamma)) - 1.0);
}

MomentReport moments(const std::vector<double>& monthly) {
  const std::size_t t = monthly.size();
  if (t < 2) throw ValidationError("moments need at least two observations");
  const double n = static_cast<double>(t);
  double mean = 0.0;
  for (double r : monthly) mean += r;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, down = 0.0;
  for (double r : monthly) {
    const double e = r - mean;
    m2 += e * e;
    m3 += e * e * e;
    if (r < 0.0) down += r * r;
  }
  m2 /= n;
  m3 /= n;
  down /= n;
  MomentReport rep;
  rep.mean = 12.0 * mean;
  rep.std_dev = std::sqrt(12.0 * m2);
  rep.skew = (t >= 3 && m2 > 0.0) ? m3 / std::pow(m2, 1.5) : 0.0;
  // Sortino: annualized mean over annualized downside semideviation about zero.
  rep.sortino = down > 0.0 ? rep.mean / std::sqrt(12.0 * down) : std::numeric_limits<double>::infinity();
  rep.cer2 = certainty_equivalent(monthly, 2.0);
  rep.cer3 = certainty_equivalent(monthly, 3.0);
  rep.cer4 = certainty_equivalent(monthly, 4.0);
  return rep;
}

GreeksReport greeks(const MarketSnapshot& snapshot, const std::vector<double>& alpha, const std::vector<double>& beta,
                    VolSource source, Compounding c) {
  if (alpha.size() != snapshot.size() || beta.size() != snapshot.size()) {
    throw DimensionError("portfolio does not match the snapshot");
  }
  const double tau = snapshot.calendar_years();
  const double growth = accrual(snapshot.risk_free_rate, tau, c);
  double spot = snapshot.index_level;
  try {
    spot = impute_forward(snapshot, c) / growth;
  } catch (const ValidationError&) {
  }
  GreeksReport rep;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    const double pos = alpha[i] - beta[i];
    if (pos == 0.0) continue;
    const auto& q = snapshot.quotes[i];
    bs::Inputs in{spot, q.strike, snapshot.risk_free_rate, tau, snapshot.vol_index / 100.0};
    if (source == VolSource::ImpliedWithFallback) {
      const double iv = bs::implied_vol(q.kind, q.mid(), in);
      if (iv > 0.0) in.vol = iv;
      else ++rep.fallbacks;
    }
    rep.delta += pos * bs::delta(q.kind, in);
    rep.vega += pos * bs::vega(in);
  }
  rep.vega /= snapshot.index_level;
  return rep;
}

BacktestRecord make_record(const MarketSnapshot& snapshot, const std::vector<double>& alpha,
                           const std::vector<double>& beta, double realized_index, Compounding c) {
  BacktestRecord rec;
  rec.trade_date = snapshot.trade_date;
  rec.realized_index = realized_index;
  const double tau = snapshot.calendar_years();
  const double growth = accrual(snapshot.risk_free_rate, tau, c);
  rec.forward_price = impute_forward(snapshot, c);
  double premium = 0.0;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    premium += -snapshot.quotes[i].ask * alpha[i] + snapshot.quotes[i].bid * beta[i];
  }
  rec.realized_layover_payoff = layover_payoff(snapshot, alpha, beta, realized_index);
  const auto r = excess_returns(rec.forward_price, realized_index, premium, rec.realized_layover_payoff,
                                snapshot.risk_free_rate, tau, c);
  rec.market_excess_return = r.market;
  rec.enhanced_excess_return = r.enhanced;
  rec.layover_premium = premium / (rec.forward_price / growth);
  const auto g = greeks(snapshot, alpha, beta, VolSource::ImpliedWithFallback, c);
  rec.layover_delta = g.delta;
  rec.layover_vega = g.vega;
  return rec;
}

double quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double h = p * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

PayoffCurves payoff_curves(const std::vector<PortfolioCurve>& portfolios, const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("empty evaluation grid");
  if (portfolios.empty()) throw ValidationError("no portfolios");
  PayoffCurves out;
  out.grid = grid;
  std::vector<double> values(portfolios.size());
  for (double u : grid) {
    for (std::size_t k = 0; k < portfolios.size(); ++k) {
      const auto& p = portfolios[k];
      const double level = u * p.snapshot.index_level;
      values[k] = layover_payoff(p.snapshot, p.alpha, p.beta, level) / p.snapshot.index_level;
    }
    out.q1.push_back(quantile(values, 0.25));
    out.median.push_back(quantile(values, 0.5));
    out.q3.push_back(quantile(values, 0.75));
  }
  return out;
}

SimulatedMoments simulate_model_moments(const PredictiveDistribution& dist, const MarketSnapshot& snapshot,
                                        const std::vector<double>& alpha, const std::vector<double>& beta,
                                        std::size_t draws, std::uint64_t seed, Compounding c) {
  if (draws < 2) throw ValidationError("at least two draws are required");
  const double tau = snapshot.calendar_years();
  const double growth = accrual(snapshot.risk_free_rate, tau, c);
  double forward = snapshot.index_level * growth;
  try {
    forward = impute_forward(snapshot, c);
  } catch (const ValidationError&) {
  }
  double premium = 0.0;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    premium += -snapshot.quotes[i].ask * alpha[i] + snapshot.quotes[i].bid * beta[i];
  }
  Rng rng(seed);
  std::vector<double> market(draws), enhanced(draws);
  for (std::size_t k = 0; k < draws; ++k) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    const double level = dist.quantile(u);
    const auto r = excess_returns(forward, level, premium, layover_payoff(snapshot, alpha, beta, level),
                                  snapshot.risk_free_rate, tau, c);
    market[k] = r.market;
    enhanced[k] = r.enhanced;
  }
  return {moments(market), moments(enhanced)};
}

}  // namespace layover
