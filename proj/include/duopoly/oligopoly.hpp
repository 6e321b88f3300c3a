#pragma once

#include "duopoly/types.hpp"

namespace duopoly {

/// Symmetric market with n >= 2 sellers sharing one availability distribution.
struct OligopolyConfig {
  int n = 2;
  AvailabilityDistribution availability;
  int d = 1;
  double v = 0.0;
  double c = 0.0;
  std::size_t enumeration_cap = 10'000'000;  // limit on (m+1)^(n-1)

  void validate() const {
    if (n < 2) throw ConfigError("oligopoly needs n >= 2");
    if (d < 1) throw ConfigError("demand must be >= 1");
    if (!(v > c) || c < 0.0) throw ConfigError("prices need v > c >= 0");
    availability.validate();
    double p = 1.0;
    for (int i = 0; i < n - 1; ++i) {
      p *= availability.max_units() + 1;
      if (p > static_cast<double>(enumeration_cap))
        throw ConfigError("opponent enumeration exceeds the configured cap");
    }
  }
};

struct OligopolyProfile {
  int l_star = 0;
  bool monopoly = false;
  bool aggregated = false;
  AvailabilityDistribution effective;
  int effective_d = 0;
  std::vector<LevelStrategy> levels;   // index 1..m
  std::vector<double> lower_bounds;    // per level; v for levels <= l*
  std::vector<double> utilities;       // equal-utility constant per level

  int m() const { return static_cast<int>(levels.size()) - 1; }
};

/// Expected units sold by one deviating seller offering `level` units at
/// price x while every other seller plays `profile`. Exact expectation over
/// the opponents' availability and price draws, tie pool included at the cap.
double expected_units_oligopoly(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                int level, double x);

double expected_utility_oligopoly(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                  int level, double x);

/// Threshold floor(d / n) strategy: levels above the threshold get ordered
/// disjoint segments built by solving the scalar equal-utility equation for
/// the level CDF at each grid point (monotone bisection).
OligopolyProfile build_heuristic(const OligopolyConfig& cfg, int grid_per_segment = 2048);

struct OligopolyLevelGap {
  int level = 0;
  double proposed_utility = 0.0;
  double best_response_utility = 0.0;
  double best_response_price = 0.0;
  double rel_diff = 0.0;  // (best response - proposed) / proposed
};

struct OligopolyGapReport {
  std::vector<OligopolyLevelGap> levels;
  double max_rel_diff = 0.0;
};

/// Best-response gap of one deviator against n-1 heuristic opponents,
/// scanned over the certification grid plus breakpoints.
OligopolyGapReport heuristic_gap(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                 int grid_size = 10000, int jobs = 0);

}  // namespace duopoly
