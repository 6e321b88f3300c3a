#pragma once

#include "duopoly/types.hpp"

namespace duopoly {

/// Availability with the tail mass pooled at the demand level. Levels at or
/// above the pool level earn identical utilities, so only their average price
/// distribution is determined; individual level distributions are not.
struct AggregatedAvailability {
  AvailabilityDistribution original;
  AvailabilityDistribution effective;
  bool aggregated = false;
};

/// Pools availability mass at level d. No-op (aggregated = false) when d >= m.
AggregatedAvailability aggregate_for_small_demand(const AvailabilityDistribution& avail, int d);

/// Symmetric equilibrium: common threshold, one closed-form segment per level
/// above it, equal-utility constants per level.
struct SymmetricNE {
  int l_star = 0;
  bool monopoly = false;
  bool aggregated = false;
  MarketConfig effective;           // config actually solved (post aggregation)
  std::vector<double> lower_bounds; // per level 1..m_eff; v for levels <= l*
  std::vector<double> utilities;    // per level 1..m_eff
  StrategyProfile profile;          // both sellers identical

  double p_tilde() const { return profile.p_tilde; }
};

/// Unique symmetric equilibrium of a symmetric market (deterministic demand,
/// or random demand with its floor governing the structure).
SymmetricNE solve_symmetric(const MarketConfig& cfg);

/// Entry point reserved for random demand; rejects deterministic input.
SymmetricNE solve_symmetric_random_demand(const MarketConfig& cfg);

}  // namespace duopoly
