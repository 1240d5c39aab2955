#include "layover/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "layover/black_scholes.hpp"

namespace layover {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = uniform();
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  spare_ = r * std::sin(2.0 * std::numbers::pi * v);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * v);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + index + 0x632be59bd9b4e019ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Instance random_small_instance(std::uint64_t seed, std::size_t max_states, std::size_t max_options) {
  Rng rng(seed);
  Instance inst;
  const auto n = static_cast<std::size_t>(rng.integer(2, static_cast<int>(max_states)));
  const auto m = static_cast<std::size_t>(rng.integer(1, static_cast<int>(max_options)));

  std::vector<double> atoms(n), weights(n);
  double level = 90.0 + rng.integer(0, 10);
  for (std::size_t j = 0; j < n; ++j) {
    atoms[j] = level;
    level += rng.integer(1, 6);
    weights[j] = rng.uniform(0.2, 1.0);
  }
  inst.grid = StateGrid::from_weights(atoms, weights);

  auto& snap = inst.snapshot;
  snap.trade_date = Date::from_ymd(2021, 11, 17);
  snap.expiry_date = Date::from_ymd(2021, 12, 17);
  snap.index_level = atoms[n / 2];
  snap.risk_free_rate = 0.0;
  snap.vol_index = 20.0;
  snap.trading_days_to_expiry = 21;
  for (std::size_t i = 0; i < m; ++i) {
    OptionQuote q;
    q.kind = rng.uniform() < 0.5 ? OptionKind::Put : OptionKind::Call;
    q.strike = std::round(rng.uniform(atoms.front(), atoms.back()));
    double fair = 0.0;
    for (std::size_t j = 0; j < n; ++j) fair += inst.grid.probs[j] * option_payoff(q, atoms[j]);
    const double mid = std::max(0.05, fair * rng.uniform(0.7, 1.3));
    const double half = mid * rng.uniform(0.0, 0.15) + 0.01;
    q.ask = mid + half;
    q.bid = std::max(0.0, mid - half);
    q.ask_size = rng.integer(1, 4);
    q.bid_size = rng.integer(0, 4);
    snap.quotes.push_back(q);
  }
  std::stable_sort(snap.quotes.begin(), snap.quotes.end(), canonical_less);
  inst.limits = apply_depth_constraint(snap, 1);
  inst.zero_payoff_outside = rng.uniform() < 0.5;
  return inst;
}

namespace {

// Quote on a skewed smile around the forward, rounded to nickel ticks.
OptionQuote smile_quote(Rng& rng, const MarketSnapshot& snap, double base_vol, OptionKind kind, double strike) {
  const double tau = snap.calendar_years();
  const double fwd = snap.index_level * std::exp(snap.risk_free_rate * tau);
  const double k = std::log(strike / fwd);
  const double vol = std::max(0.06, base_vol - 0.9 * k + 2.0 * k * k) * rng.uniform(0.97, 1.03);
  const double mid = bs::price(kind, {snap.index_level, strike, snap.risk_free_rate, tau, vol});
  const double half = std::max(0.05, 0.02 * mid) * rng.uniform(0.5, 1.5);
  OptionQuote q;
  q.kind = kind;
  q.strike = strike;
  q.ask = (std::round((mid + half) * 20.0) + 1.0) / 20.0;
  q.bid = std::max(0.0, std::round((mid - half) * 20.0) / 20.0);
  q.ask_size = rng.integer(1, 200);
  q.bid_size = rng.integer(1, 200);
  return q;
}

}  // namespace

Instance desk_instance(std::uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  auto& snap = inst.snapshot;
  snap.trade_date = Date::from_ymd(2021, 11, 17);
  snap.expiry_date = Date::from_ymd(2021, 12, 17);
  snap.index_level = 4700.0;
  snap.risk_free_rate = 0.001;
  snap.vol_index = 17.0;
  snap.trading_days_to_expiry = 21;
  for (int s = 4230; s <= 4925; s += 5) snap.quotes.push_back(smile_quote(rng, snap, 0.15, OptionKind::Put, s));
  for (int s = 4355; s <= 4925; s += 5) snap.quotes.push_back(smile_quote(rng, snap, 0.15, OptionKind::Call, s));
  snap = canonicalize(std::move(snap), MoneynessFilter{});
  inst.grid = build_grid_symmetric(snap, CalibrationParams{});
  inst.limits = apply_depth_constraint(snap, 100);
  inst.zero_payoff_outside = true;
  return inst;
}

std::vector<SyntheticMonth> synthetic_history(std::uint64_t seed, std::size_t months, double strike_step) {
  Rng rng(seed);
  std::vector<SyntheticMonth> out;
  double level = 1100.0;
  double rate = 0.01;
  double vix = 16.0;
  const Date start = Date::from_ymd(2004, 1, 16);
  for (std::size_t k = 0; k < months; ++k) {
    MarketSnapshot snap;
    snap.trade_date = start + static_cast<int>(28 * k);
    snap.expiry_date = snap.trade_date + 28;
    snap.index_level = std::round(level * 100.0) / 100.0;
    snap.risk_free_rate = std::round(rate * 1e5) / 1e5;
    snap.vol_index = std::round(vix * 100.0) / 100.0;
    snap.trading_days_to_expiry = 20;
    const double base_vol = vix / 100.0 - 0.02;
    const double lo = std::ceil(0.9 * snap.index_level / strike_step) * strike_step;
    const double hi = std::floor(1.05 * snap.index_level / strike_step) * strike_step;
    const double call_lo = std::ceil(0.93 * snap.index_level / strike_step) * strike_step;
    for (double s = lo; s <= hi + 1e-9; s += strike_step) {
      snap.quotes.push_back(smile_quote(rng, snap, base_vol, OptionKind::Put, s));
    }
    for (double s = call_lo; s <= hi + 1e-9; s += strike_step) {
      snap.quotes.push_back(smile_quote(rng, snap, base_vol, OptionKind::Call, s));
    }
    snap = canonicalize(std::move(snap), MoneynessFilter{});

    // Realized move: lognormal with occasional downward jumps.
    const double tau = snap.calendar_years();
    const double sigma = 0.85 * vix / 100.0;
    double z = rng.normal();
    if (rng.uniform() < 0.1) z -= 1.5;
    const double realized = snap.index_level * std::exp((rate + 0.06 - 0.5 * sigma * sigma) * tau + sigma * std::sqrt(tau) * z);
    out.push_back({snap, std::round(realized * 100.0) / 100.0});

    level = out.back().realized_index;
    rate = std::clamp(rate + 0.002 * rng.normal(), 0.0005, 0.05);
    vix = std::clamp(vix * std::exp(0.15 * rng.normal() - 0.05 * z), 10.0, 60.0);
  }
  return out;
}

LayoverProblem assemble_instance(Formulation tag, const Instance& instance) {
  const auto payoff = build_payoff_matrix(instance.snapshot, instance.grid);
  const auto poly = build_polytope(instance.snapshot, instance.limits, instance.zero_payoff_outside);
  std::vector<double> ask, bid;
  for (const auto& q : instance.snapshot.quotes) {
    ask.push_back(q.ask);
    bid.push_back(q.bid);
  }
  return assemble(tag, payoff, instance.grid, poly, ask, bid);
}

}  // namespace layover
