#include "duopoly/symmetric.hpp"

#include "duopoly/evaluate.hpp"

namespace duopoly {

AggregatedAvailability aggregate_for_small_demand(const AvailabilityDistribution& avail, int d) {
  AggregatedAvailability out;
  out.original = avail;
  if (d >= avail.max_units() || d < 1) {
    out.effective = avail;
    out.aggregated = false;
    return out;
  }
  out.effective.probs.assign(avail.probs.begin(), avail.probs.begin() + d + 1);
  double tail = 0.0;
  for (int j = d; j <= avail.max_units(); ++j) tail += avail[j];
  out.effective.probs[static_cast<std::size_t>(d)] = tail;
  out.aggregated = true;
  return out;
}

namespace {

bool symmetric_sellers(const MarketConfig& cfg) {
  if (cfg.m(0) != cfg.m(1)) return false;
  for (int j = 0; j <= cfg.m(0); ++j)
    if (std::abs(cfg.sellers[0][j] - cfg.sellers[1][j]) > kNormTol) return false;
  return true;
}

// Units sold at demand d when the opponent offers g and prices strictly on
// the given side. "Below" means the opponent undercut.
inline double units_if_above(int i, int d) { return std::min(i, d); }
inline double units_if_below(int i, int g, int d) { return std::min(i, std::max(d - g, 0)); }

}  // namespace

SymmetricNE solve_symmetric(const MarketConfig& cfg) {
  cfg.validate();
  if (!symmetric_sellers(cfg)) throw ConfigError("solve_symmetric needs identical sellers");

  SymmetricNE ne;
  const int d_floor = cfg.demand.floor_demand();
  const int d_max = cfg.demand.max_demand();

  // Pool the utility-equivalent tail so every remaining level is below the
  // largest possible demand.
  AggregatedAvailability agg = aggregate_for_small_demand(cfg.sellers[0], d_max);
  ne.aggregated = agg.aggregated;
  ne.effective = cfg;
  ne.effective.sellers[0] = agg.effective;
  ne.effective.sellers[1] = agg.effective;

  const AvailabilityDistribution& q = agg.effective;
  const int m = q.max_units();
  if (d_floor < m)
    throw ConfigError("random demand floor below max availability is not supported");

  ne.lower_bounds.assign(static_cast<std::size_t>(m) + 1, cfg.v);
  ne.utilities.assign(static_cast<std::size_t>(m) + 1, 0.0);

  StrategyProfile profile;
  for (int k = 0; k < 2; ++k)
    profile.seller(k).levels.resize(static_cast<std::size_t>(m) + 1);

  if (2 * m <= d_floor) {
    // No competition at any demand level sellers can jointly cover.
    ne.monopoly = true;
    ne.l_star = m;
    profile = monopoly_profile(ne.effective);
    ne.profile = profile;
    for (int l = 1; l <= m; ++l)
      ne.utilities[static_cast<std::size_t>(l)] =
          strategy_expected_utility(ne.effective, 0, l, profile);
    return ne;
  }

  const int l_star = d_floor / 2;
  ne.l_star = l_star;
  for (int l = 1; l <= l_star; ++l)
    profile.seller(0).level(l) = LevelStrategy::at_cap();

  const auto& atoms = cfg.demand.atoms;
  double v_top = cfg.v;
  for (int i = l_star + 1; i <= m; ++i) {
    // Units at the segment's top: levels below i price above, the rest below.
    double b_top = 0.0;
    double a_coef = 0.0;  // units with own level counted as priced above
    double g_coef = 0.0;  // sensitivity to the own-level CDF
    for (const auto& [d, r] : atoms) {
      if (r == 0.0) continue;
      double bt = 0.0, ac = 0.0;
      for (int g = 0; g <= m; ++g) {
        if (q[g] == 0.0) continue;
        bt += q[g] * (g < i ? units_if_above(i, d) : units_if_below(i, g, d));
        ac += q[g] * (g <= i ? units_if_above(i, d) : units_if_below(i, g, d));
      }
      b_top += r * bt;
      a_coef += r * ac;
      g_coef += r * q[i] * (units_if_above(i, d) - units_if_below(i, i, d));
    }
    const double u_i = (v_top - cfg.c) * b_top;

    LevelStrategy lev;
    if (q[i] == 0.0) {
      // Unreachable level: its support collapses to a point at the previous
      // bound. Represent the point mass with a zero-length sampled segment.
      CdfSegment seg;
      seg.lo = seg.hi = v_top;
      seg.grid_x = {v_top, v_top};
      seg.grid_cdf = {0.0, 1.0};
      lev.segments.push_back(seg);
      profile.seller(0).level(i) = lev;
      ne.lower_bounds[static_cast<std::size_t>(i)] = v_top;
      ne.utilities[static_cast<std::size_t>(i)] = u_i;
      continue;
    }
    if (g_coef <= 0.0)
      throw NumericError("degenerate level: utility insensitive to own price distribution");
    if (a_coef <= 0.0) throw NumericError("lower-bound denominator must be positive");
    const double p_lo = cfg.c + u_i / a_coef;
    if (!(p_lo > cfg.c) || !(p_lo < v_top))
      throw NumericError("segment bounds left (c, v) while solving");

    CdfSegment seg;
    seg.lo = p_lo;
    seg.hi = v_top;
    seg.alpha = a_coef;
    seg.beta = u_i;
    seg.gamma = g_coef;

    lev.segments.push_back(seg);
    lev.atom_at_v = 0.0;
    profile.seller(0).level(i) = lev;

    ne.lower_bounds[static_cast<std::size_t>(i)] = p_lo;
    ne.utilities[static_cast<std::size_t>(i)] = u_i;
    v_top = p_lo;
  }

  profile.sellers[1] = profile.sellers[0];
  profile.thresholds = {l_star, l_star};
  profile.p_tilde = v_top;
  ne.profile = profile;

  for (int l = 1; l <= l_star; ++l)
    ne.utilities[static_cast<std::size_t>(l)] =
        strategy_expected_utility(ne.effective, 0, l, ne.profile);

  validate_profile(ne.effective, ne.profile);
  return ne;
}

SymmetricNE solve_symmetric_random_demand(const MarketConfig& cfg) {
  if (cfg.demand.is_deterministic())
    throw ConfigError("solve_symmetric_random_demand needs a random demand model");
  return solve_symmetric(cfg);
}

}  // namespace duopoly
