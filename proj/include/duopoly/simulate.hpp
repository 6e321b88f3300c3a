#pragma once

#include "duopoly/types.hpp"

namespace duopoly {

/// Deterministic 64-bit stream; block seeds are derived from (seed, block) so
/// results do not depend on how blocks are distributed over threads.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct ProbeStat {
  int seller = 0;
  int level = 0;
  double price = 0.0;
  std::uint64_t samples = 0;
  double empirical_mean = 0.0;
  double std_error = 0.0;
  double analytic = 0.0;
  double z = 0.0;
};

struct SimulationReport {
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<ProbeStat> probes;
  std::vector<std::string> no_data;  // unreachable levels (q = 0)
};

/// Draws a price from one level's mixed strategy by inverse transform.
double sample_price(const LevelStrategy& level, double c, double v, SplitMix64& rng);

/// Tie allocation: d units drawn uniformly without replacement from the joint
/// pool of a + b units; returns how many of the first seller's units sold.
int tie_allocate(int a, int b, int d, SplitMix64& rng);

/// Market simulation: per round draws demand, availabilities and prices, then
/// scores every probe price of the realized level against the opponent's
/// realized draw. Mean units per probe are compared with the analytic value.
SimulationReport simulate(const MarketConfig& cfg, const StrategyProfile& profile,
                          std::uint64_t rounds, std::uint64_t seed, int jobs = 0);

/// Serial reference path (identical output for any jobs value).
SimulationReport simulate_serial(const MarketConfig& cfg, const StrategyProfile& profile,
                                 std::uint64_t rounds, std::uint64_t seed);

}  // namespace duopoly
