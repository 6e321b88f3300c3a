#pragma once

#include "duopoly/types.hpp"

namespace duopoly {

/// Opponent price mass split at a probe price: strictly below, exactly at.
struct CdfPoint {
  double below = 0.0;
  double at = 0.0;
};

CdfPoint level_cdf_at(const LevelStrategy& level, double x, double c, double v);

/// Units a seller with l units sells when tied at the same price with an
/// opponent holding j units and demand is d: everyone sells out when supply
/// fits, otherwise the d units are drawn uniformly from the joint pool.
inline double tie_units(int l, int j, int d) {
  if (l + j <= d) return static_cast<double>(l);
  return static_cast<double>(l) * d / (l + j);
}

/// Expected units sold by seller k offering l units at price x against the
/// opponent's strategy. Demand-weighted for random demand.
double expected_units_sold(const MarketConfig& cfg, int k, int l, double x,
                           const SellerStrategy& opponent);

/// (x - c) * expected_units_sold.
double expected_utility(const MarketConfig& cfg, int k, int l, double x,
                        const SellerStrategy& opponent);

/// Per-availability utility difference A: (x - c) * (B_l / l - B_j / j),
/// defined for 1 <= j < l <= m_k.
double per_unit_utility_gap(const MarketConfig& cfg, int k, int l, int j, double x,
                     const SellerStrategy& opponent);

/// Expected utility of seller k at level l under its own mixed strategy
/// (atom at the cap included, ties accounted for).
double strategy_expected_utility(const MarketConfig& cfg, int k, int l,
                                 const StrategyProfile& profile,
                                 int quantiles_per_segment = 64);

}  // namespace duopoly
