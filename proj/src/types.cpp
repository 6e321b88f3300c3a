#include "duopoly/types.hpp"

namespace duopoly {

void validate_profile(const MarketConfig& cfg, const StrategyProfile& profile) {
  for (int k = 0; k < 2; ++k) {
    const SellerStrategy& s = profile.seller(k);
    if (s.m() != cfg.m(k)) throw ConfigError("strategy level count does not match availability");
    for (int l = 1; l <= s.m(); ++l) {
      const LevelStrategy& lev = s.level(l);
      if (lev.atom_at_v < 0.0 || lev.atom_at_v > 1.0)
        throw ConfigError("atom mass outside [0,1]");
      if (lev.all_at_v()) {
        if (std::abs(lev.atom_at_v - 1.0) > kMassTol)
          throw ConfigError("level without segments must put all mass at v");
        continue;
      }
      double cum = 0.0;
      double prev_hi = -1.0;
      double resolution = 0.0;  // accumulated endpoint conditioning
      for (const auto& seg : lev.segments) {
        if (!(seg.lo <= seg.hi)) throw ConfigError("segment with lo > hi");
        if (seg.hi > cfg.v + kPriceTol) throw ConfigError("segment exceeds price cap");
        if (seg.lo < cfg.c - kPriceTol) throw ConfigError("segment below cost");
        if (prev_hi >= 0.0 && std::abs(seg.lo - prev_hi) > kPriceTol)
          throw ConfigError("segments of one level must chain contiguously");
        double at_lo = seg.value_at_lo(cfg.c);
        double at_hi = seg.value_at_hi(cfg.c);
        double tol = kMassTol + resolution + seg.endpoint_resolution(cfg.c);
        if (std::abs(at_lo - cum) > tol)
          throw ConfigError("cumulative value jumps between segments");
        if (at_hi < at_lo - tol) throw ConfigError("segment is decreasing");
        if (seg.sampled()) {
          for (std::size_t i = 1; i < seg.grid_cdf.size(); ++i)
            if (seg.grid_cdf[i] < seg.grid_cdf[i - 1] - kMassTol)
              throw ConfigError("sampled segment is decreasing");
        }
        cum = at_hi;
        resolution = seg.endpoint_resolution(cfg.c);
        prev_hi = seg.hi;
      }
      if (std::abs(cum + lev.atom_at_v - 1.0) > kMassTol + resolution)
        throw ConfigError("level mass (segments + atom) must equal 1");
      if (lev.atom_at_v > kMassTol && prev_hi < cfg.v - kPriceTol)
        throw ConfigError("an atom is only permitted at the price cap");
    }
  }
}

StrategyProfile monopoly_profile(const MarketConfig& cfg) {
  StrategyProfile p;
  for (int k = 0; k < 2; ++k) {
    p.seller(k).levels.resize(static_cast<std::size_t>(cfg.m(k)) + 1);
    for (int l = 1; l <= cfg.m(k); ++l) p.seller(k).level(l) = LevelStrategy::at_cap();
    p.thresholds[static_cast<std::size_t>(k)] = cfg.m(k);
  }
  p.p_tilde = cfg.v;
  return p;
}

}  // namespace duopoly
