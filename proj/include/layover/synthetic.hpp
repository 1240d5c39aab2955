#pragma once

// Seeded instance generators for the verification suites and benchmarks.

#include <cstdint>
#include <random>
#include <vector>

#include "layover/formulation.hpp"
#include "layover/market_data.hpp"
#include "layover/state_probability.hpp"

namespace layover {

/// Portable uniform draws from a standardized engine (identical on every platform).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed of sub-stream `index` derived from a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct Instance {
  MarketSnapshot snapshot;
  StateGrid grid;
  DepthLimits limits;
  bool zero_payoff_outside = false;
};

/// Tiny instance: 2 <= n <= max_states atoms, 1 <= m <= max_options options, prices
/// scattered around the grid expectation so that arbitrage is sometimes present.
Instance random_small_instance(std::uint64_t seed, std::size_t max_states = 8, std::size_t max_options = 3);

/// Desk-scale instance: index 4700, strikes 4230..4925 on a 5-point grid (n = 140),
/// 140 puts and 115 calls (m = 255), Black-Scholes prices on a skewed smile.
Instance desk_instance(std::uint64_t seed);

struct SyntheticMonth {
  MarketSnapshot snapshot;
  double realized_index = 0.0;
};

/// Consecutive 28-day months from 2004-01-16: index random walk with jumps,
/// quotes on a skewed smile at multiples of `strike_step`.
std::vector<SyntheticMonth> synthetic_history(std::uint64_t seed, std::size_t months, double strike_step = 25.0);

/// Assembles a formulation of an instance.
LayoverProblem assemble_instance(Formulation tag, const Instance& instance);

}  // namespace layover
