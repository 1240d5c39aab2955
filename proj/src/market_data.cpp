#include "layover/market_data.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "layover/csv.hpp"
#include "layover/errors.hpp"

namespace layover {
namespace {

OptionKind parse_kind(const std::string& text, const csv::Table& t, std::size_t row) {
  if (text == "P" || text == "p") return OptionKind::Put;
  if (text == "C" || text == "c") return OptionKind::Call;
  throw ParseError(t.source() + ":" + std::to_string(t.line_of(row)) + ": kind must be P or C, got '" +
                   text + "'");
}

Date parse_date(const csv::Table& t, std::size_t row, std::size_t col) {
  try {
    return Date::parse(t.cell(row, col));
  } catch (const ParseError& e) {
    throw ParseError(t.source() + ":" + std::to_string(t.line_of(row)) + ": " + e.what());
  }
}

int parse_count(const csv::Table& t, std::size_t row, std::size_t col) {
  const double v = t.number(row, col);
  if (v != static_cast<int>(v)) {
    throw ParseError(t.source() + ":" + std::to_string(t.line_of(row)) + ": expected an integer count");
  }
  return static_cast<int>(v);
}

}  // namespace

void OptionQuote::validate() const {
  if (!(strike > 0.0)) throw ValidationError("nonpositive strike " + csv::format_exact(strike));
  if (!(ask > 0.0)) throw ValidationError("nonpositive ask at strike " + csv::format_exact(strike));
  if (!(bid >= 0.0)) throw ValidationError("negative bid at strike " + csv::format_exact(strike));
  if (ask < bid) {
    throw ValidationError("ask " + csv::format_exact(ask) + " below bid " + csv::format_exact(bid) +
                          " at strike " + csv::format_exact(strike));
  }
  if (bid_size < 0.0 || ask_size < 0.0) {
    throw ValidationError("negative quote size at strike " + csv::format_exact(strike));
  }
}

bool canonical_less(const OptionQuote& a, const OptionQuote& b) {
  if (a.strike != b.strike) return a.strike < b.strike;
  return a.kind == OptionKind::Put && b.kind == OptionKind::Call;
}

void MarketSnapshot::validate() const {
  if (!(expiry_date > trade_date)) {
    throw ValidationError("expiry " + expiry_date.iso() + " not after trade date " + trade_date.iso());
  }
  if (trading_days_to_expiry < 1) throw ValidationError("trading_days_to_expiry must be >= 1");
  if (!(index_level > 0.0)) throw ValidationError("nonpositive index level on " + trade_date.iso());
  if (quotes.empty()) throw ValidationError("no quotes retained for " + trade_date.iso());
  for (const auto& q : quotes) q.validate();
  if (!std::is_sorted(quotes.begin(), quotes.end(), canonical_less)) {
    throw ValidationError("quotes not in canonical order on " + trade_date.iso());
  }
}

void MoneynessFilter::validate() const {
  if (!(lower > 0.0 && lower < 1.0 && upper > 1.0)) {
    throw ValidationError("moneyness filter requires 0 < lower < 1 < upper");
  }
}

std::vector<MarketObservables> load_observables(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto c_date = t.column("trade_date"), c_index = t.column("index_level"),
             c_rate = t.column("risk_free_rate"), c_vix = t.column("vol_index"),
             c_days = t.column("trading_days_to_expiry");
  std::vector<MarketObservables> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out.push_back({parse_date(t, r, c_date), t.number(r, c_index), t.number(r, c_rate),
                   t.number(r, c_vix), parse_count(t, r, c_days)});
  }
  return out;
}

std::vector<QuoteExclusion> load_exclusions(const std::string& path) {
  const auto t = csv::Table::read(path);
  const auto c_date = t.column("trade_date"), c_kind = t.column("kind"), c_strike = t.column("strike");
  std::vector<QuoteExclusion> out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out.push_back({parse_date(t, r, c_date), parse_kind(t.cell(r, c_kind), t, r), t.number(r, c_strike)});
  }
  return out;
}

MarketSnapshot canonicalize(MarketSnapshot snapshot, const MoneynessFilter& filter) {
  filter.validate();
  std::erase_if(snapshot.quotes,
                [&](const OptionQuote& q) { return !filter.admits(q.strike, snapshot.index_level); });
  if (snapshot.quotes.empty()) {
    throw ValidationError("no quotes inside the moneyness filter on " + snapshot.trade_date.iso());
  }
  std::stable_sort(snapshot.quotes.begin(), snapshot.quotes.end(), canonical_less);
  snapshot.validate();
  return snapshot;
}

std::vector<MarketSnapshot> load_snapshots(const std::string& quotes_path,
                                           const std::string& observables_path,
                                           const MoneynessFilter& filter,
                                           const std::vector<QuoteExclusion>& exclusions) {
  const auto t = csv::Table::read(quotes_path);
  const auto c_trade = t.column("trade_date"), c_expiry = t.column("expiry_date"),
             c_kind = t.column("kind"), c_strike = t.column("strike"), c_bid = t.column("bid"),
             c_ask = t.column("ask"), c_bsize = t.column("bid_size"), c_asize = t.column("ask_size");

  std::map<Date, MarketSnapshot> by_date;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    OptionQuote q;
    q.kind = parse_kind(t.cell(r, c_kind), t, r);
    q.strike = t.number(r, c_strike);
    q.bid = t.number(r, c_bid);
    q.ask = t.number(r, c_ask);
    q.bid_size = t.number(r, c_bsize);
    q.ask_size = t.number(r, c_asize);
    try {
      q.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(t.source() + ":" + std::to_string(t.line_of(r)) + ": " + e.what());
    }
    const Date trade = parse_date(t, r, c_trade);
    const Date expiry = parse_date(t, r, c_expiry);
    auto [it, inserted] = by_date.try_emplace(trade);
    if (inserted) {
      it->second.trade_date = trade;
      it->second.expiry_date = expiry;
    } else if (it->second.expiry_date != expiry) {
      throw ValidationError(t.source() + ":" + std::to_string(t.line_of(r)) +
                            ": mixed expiry dates for trade date " + trade.iso());
    }
    const bool excluded = std::any_of(exclusions.begin(), exclusions.end(), [&](const QuoteExclusion& x) {
      return x.trade_date == trade && x.kind == q.kind && x.strike == q.strike;
    });
    if (!excluded) it->second.quotes.push_back(q);
  }

  std::map<Date, MarketObservables> obs;
  for (const auto& o : load_observables(observables_path)) obs[o.trade_date] = o;

  std::vector<MarketSnapshot> out;
  for (auto& [date, snap] : by_date) {
    auto it = obs.find(date);
    if (it == obs.end()) {
      throw ValidationError(observables_path + ": missing observables row for trade date " + date.iso());
    }
    snap.index_level = it->second.index_level;
    snap.risk_free_rate = it->second.risk_free_rate;
    snap.vol_index = it->second.vol_index;
    snap.trading_days_to_expiry = it->second.trading_days_to_expiry;
    out.push_back(canonicalize(std::move(snap), filter));
  }
  return out;
}

MarketSnapshot load_snapshot(const std::string& quotes_path, const std::string& observables_path,
                             const MoneynessFilter& filter) {
  auto all = load_snapshots(quotes_path, observables_path, filter);
  if (all.size() != 1) {
    throw ValidationError(quotes_path + ": expected a single trade date, found " + std::to_string(all.size()));
  }
  return std::move(all.front());
}

void write_quotes_csv(const std::vector<MarketSnapshot>& snapshots, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "trade_date,expiry_date,kind,strike,bid,ask,bid_size,ask_size\n";
  for (const auto& s : snapshots) {
    for (const auto& q : s.quotes) {
      out << s.trade_date.iso() << ',' << s.expiry_date.iso() << ',' << (q.is_call() ? 'C' : 'P') << ','
          << csv::format_exact(q.strike) << ',' << csv::format_exact(q.bid) << ','
          << csv::format_exact(q.ask) << ',' << csv::format_exact(q.bid_size) << ','
          << csv::format_exact(q.ask_size) << '\n';
    }
  }
}

void write_observables_csv(const std::vector<MarketSnapshot>& snapshots, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "trade_date,index_level,risk_free_rate,vol_index,trading_days_to_expiry\n";
  for (const auto& s : snapshots) {
    out << s.trade_date.iso() << ',' << csv::format_exact(s.index_level) << ','
        << csv::format_exact(s.risk_free_rate) << ',' << csv::format_exact(s.vol_index) << ','
        << s.trading_days_to_expiry << '\n';
  }
}

DepthLimits apply_depth_constraint(const MarketSnapshot& snapshot, int scale) {
  if (scale <= 0) throw ValidationError("market depth scale must be positive, got " + std::to_string(scale));
  DepthLimits d;
  d.max_long.reserve(snapshot.size());
  d.max_short.reserve(snapshot.size());
  const double s = static_cast<double>(scale);
  for (const auto& q : snapshot.quotes) {
    d.max_long.push_back(q.ask_size / s);
    d.max_short.push_back(q.bid_size / s);
  }
  return d;
}

}  // namespace layover
