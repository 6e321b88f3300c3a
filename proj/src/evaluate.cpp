#include "duopoly/evaluate.hpp"

namespace duopoly {

CdfPoint level_cdf_at(const LevelStrategy& level, double x, double c, double v) {
  CdfPoint p;
  if (x >= v) {
    p.below = level.all_at_v() ? 0.0 : level.cdf_below(v, c, v);
    p.at = level.all_at_v() ? 1.0 : level.atom_at_v;
    return p;
  }
  p.below = level.all_at_v() ? 0.0 : level.cdf_below(x, c, v);
  p.at = 0.0;
  return p;
}

namespace {

void check_args(const MarketConfig& cfg, int k, int l, double x) {
  if (k != 0 && k != 1) throw ConfigError("seller index must be 0 or 1");
  if (l < 1 || l > cfg.m(k)) throw ConfigError("availability level out of range");
  if (x < 0.0 || x > cfg.v) throw ConfigError("price outside [0, v]");
}

}  // namespace

double expected_units_sold(const MarketConfig& cfg, int k, int l, double x,
                           const SellerStrategy& opponent) {
  check_args(cfg, k, l, x);
  const AvailabilityDistribution& q = cfg.sellers[static_cast<std::size_t>(MarketConfig::other(k))];
  const int mo = q.max_units();

  double total = 0.0;
  for (const auto& [d, r] : cfg.demand.atoms) {
    if (r == 0.0) continue;
    double units = 0.0;
    for (int j = 0; j <= mo; ++j) {
      const double qj = q[j];
      if (qj == 0.0) continue;
      CdfPoint cp = (j == 0) ? CdfPoint{0.0, 0.0}
                             : level_cdf_at(opponent.level(j), x, cfg.c, cfg.v);
      const double above = 1.0 - cp.below - cp.at;
      const double win = std::min(l, d);                // opponent priced higher
      const double lose = std::min(l, std::max(d - j, 0));  // opponent undercut
      double u = above * win + cp.below * lose;
      if (cp.at > 0.0) u += cp.at * tie_units(l, j, d);
      units += qj * u;
    }
    total += r * units;
  }
  return total;
}

double expected_utility(const MarketConfig& cfg, int k, int l, double x,
                        const SellerStrategy& opponent) {
  return (x - cfg.c) * expected_units_sold(cfg, k, l, x, opponent);
}

double per_unit_utility_gap(const MarketConfig& cfg, int k, int l, int j, double x,
                     const SellerStrategy& opponent) {
  if (!(1 <= j && j < l)) throw ConfigError("per_unit_utility_gap needs 1 <= j < l");
  const double bl = expected_units_sold(cfg, k, l, x, opponent);
  const double bj = expected_units_sold(cfg, k, j, x, opponent);
  return (x - cfg.c) * (bl / l - bj / j);
}

double strategy_expected_utility(const MarketConfig& cfg, int k, int l,
                                 const StrategyProfile& profile,
                                 int quantiles_per_segment) {
  const LevelStrategy& own = profile.seller(k).level(l);
  const SellerStrategy& opp = profile.seller(MarketConfig::other(k));
  double total = 0.0;
  if (own.all_at_v() || own.atom_at_v > 0.0) {
    double mass = own.all_at_v() ? 1.0 : own.atom_at_v;
    total += mass * expected_utility(cfg, k, l, cfg.v, opp);
  }
  for (const auto& seg : own.segments) {
    const double p0 = seg.value_at_lo(cfg.c);
    const double p1 = seg.value_at_hi(cfg.c);
    if (p1 <= p0) continue;
    const int n = quantiles_per_segment;
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
      double p = p0 + (p1 - p0) * (t + 0.5) / n;
      double x = seg.inverse(p, cfg.c);
      acc += expected_utility(cfg, k, l, x, opp);
    }
    total += (p1 - p0) * acc / n;
  }
  return total;
}

}  // namespace duopoly
