#pragma once

#include <string>
#include <vector>

#include "layover/market_data.hpp"
#include "layover/state_probability.hpp"
#include "layover/synthetic.hpp"

namespace layover::test {

inline OptionQuote quote(OptionKind kind, double strike, double bid, double ask, double bid_size = 1.0,
                         double ask_size = 1.0) {
  OptionQuote q;
  q.kind = kind;
  q.strike = strike;
  q.bid = bid;
  q.ask = ask;
  q.bid_size = bid_size;
  q.ask_size = ask_size;
  return q;
}

inline MarketSnapshot snapshot(double index, std::vector<OptionQuote> quotes) {
  MarketSnapshot s;
  s.trade_date = Date::from_ymd(2021, 11, 17);
  s.expiry_date = Date::from_ymd(2021, 12, 17);
  s.index_level = index;
  s.risk_free_rate = 0.01;
  s.vol_index = 18.0;
  s.trading_days_to_expiry = 21;
  s.quotes = std::move(quotes);
  return s;
}

inline StateGrid grid(std::vector<double> atoms, std::vector<double> probs) {
  StateGrid g{std::move(atoms), std::move(probs)};
  g.validate();
  return g;
}

inline Instance instance(MarketSnapshot s, StateGrid g, bool zero_payoff) {
  Instance inst{std::move(s), std::move(g), {}, zero_payoff};
  for (const auto& q : inst.snapshot.quotes) {
    inst.limits.max_long.push_back(q.ask_size);
    inst.limits.max_short.push_back(q.bid_size);
  }
  return inst;
}

constexpr auto P = OptionKind::Put;
constexpr auto C = OptionKind::Call;

// Reference instances shared with tests/oracles/reference_values.py.
inline Instance generic_instance() {
  return instance(snapshot(100, {quote(P, 95, 0.4, 0.55, 4, 4), quote(C, 100, 2.2, 2.4), quote(C, 105, 0.9, 1.0, 4, 1)}),
                  grid({90, 95, 100, 105, 110}, {0.1, 0.2, 0.4, 0.2, 0.1}), false);
}

inline Instance twin_instance() {
  return instance(snapshot(100, {quote(C, 100, 3.0, 3.2), quote(C, 100, 2.0, 2.1)}),
                  grid({95, 100, 105}, {0.25, 0.5, 0.25}), false);
}

inline Instance augmented_instance() {
  return instance(snapshot(100, {quote(P, 80, 0.1, 0.15, 3, 3), quote(P, 85, 0.6, 0.65, 3, 3),
                                 quote(P, 90, 1.0, 1.05, 3, 3), quote(P, 95, 2.0, 2.1, 3, 3),
                                 quote(C, 105, 1.85, 1.95, 2, 3), quote(C, 110, 1.0, 1.1, 3, 2)}),
                  grid({80, 85, 90, 95, 100, 105, 110, 115, 120}, {0.04, 0.1, 0.1, 0.16, 0.2, 0.16, 0.12, 0.08, 0.04}),
                  true);
}

}  // namespace layover::test
