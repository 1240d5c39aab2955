#pragma once

#include <string>
#include <vector>

#include "layover/date.hpp"

namespace layover {

enum class OptionKind { Put, Call };

/// One listed option: strike in index points, best bid/ask with their sizes.
struct OptionQuote {
  double strike = 0.0;
  OptionKind kind = OptionKind::Call;
  double bid = 0.0;
  double ask = 0.0;
  double bid_size = 0.0;
  double ask_size = 0.0;

  bool is_call() const { return kind == OptionKind::Call; }
  double mid() const { return 0.5 * (bid + ask); }
  /// Throws ValidationError unless strike > 0, ask > 0 and ask >= bid >= 0.
  void validate() const;

  friend bool operator==(const OptionQuote&, const OptionQuote&) = default;
};

/// Canonical order: strike ascending, puts before calls at equal strike.
bool canonical_less(const OptionQuote& a, const OptionQuote& b);

struct MarketSnapshot {
  Date trade_date;
  Date expiry_date;
  double index_level = 0.0;
  double risk_free_rate = 0.0;  // annualized decimal
  double vol_index = 0.0;       // annualized percentage points
  int trading_days_to_expiry = 0;
  std::vector<OptionQuote> quotes;

  std::size_t size() const { return quotes.size(); }
  double lowest_strike() const { return quotes.front().strike; }
  double highest_strike() const { return quotes.back().strike; }
  /// Calendar-day horizon in years (actual/365).
  double calendar_years() const { return static_cast<double>(expiry_date - trade_date) / 365.0; }
  void validate() const;

  friend bool operator==(const MarketSnapshot&, const MarketSnapshot&) = default;
};

struct MoneynessFilter {
  double lower = 0.90;
  double upper = 1.05;
  void validate() const;
  bool admits(double strike, double index_level) const {
    return strike >= lower * index_level && strike <= upper * index_level;
  }
};

/// Row of the observables file: market state on one trade date.
struct MarketObservables {
  Date trade_date;
  double index_level = 0.0;
  double risk_free_rate = 0.0;
  double vol_index = 0.0;
  int trading_days_to_expiry = 0;
};

/// (trade_date, kind, strike) triple naming a quote to drop before filtering.
struct QuoteExclusion {
  Date trade_date;
  OptionKind kind = OptionKind::Call;
  double strike = 0.0;
};

std::vector<MarketObservables> load_observables(const std::string& path);
std::vector<QuoteExclusion> load_exclusions(const std::string& path);

/// Reads every trade date in the quote file, joins the observables, drops
/// excluded quotes, applies the moneyness filter and sorts canonically.
/// Snapshots are returned in trade-date order.
std::vector<MarketSnapshot> load_snapshots(const std::string& quotes_path,
                                           const std::string& observables_path,
                                           const MoneynessFilter& filter,
                                           const std::vector<QuoteExclusion>& exclusions = {});

/// Single-date variant; throws ValidationError unless the quote file holds exactly one trade date.
MarketSnapshot load_snapshot(const std::string& quotes_path, const std::string& observables_path,
                             const MoneynessFilter& filter);

/// Filter and canonically sort an in-memory snapshot (same rules as the loaders).
MarketSnapshot canonicalize(MarketSnapshot snapshot, const MoneynessFilter& filter);

/// Writes quotes in the loader's CSV schema.
void write_quotes_csv(const std::vector<MarketSnapshot>& snapshots, const std::string& path);
void write_observables_csv(const std::vector<MarketSnapshot>& snapshots, const std::string& path);

struct DepthLimits {
  std::vector<double> max_long;   // v
  std::vector<double> max_short;  // w
};

/// v_i = ask_size_i / S, w_i = bid_size_i / S.
DepthLimits apply_depth_constraint(const MarketSnapshot& snapshot, int scale);

}  // namespace layover
