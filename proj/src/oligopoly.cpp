#include "duopoly/oligopoly.hpp"

#include <exception>

#include "duopoly/evaluate.hpp"
#include "duopoly/symmetric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duopoly {

namespace {

// Joint distribution of (units priced strictly below x, units tied at x)
// across the n-1 opponents, built by convolving one opponent at a time.
// Equivalent to enumerating the full availability product.
struct PoolDist {
  int smax = 0, tmax = 0;
  std::vector<double> p;  // (smax+1) x (tmax+1)
  double& at(int s, int t) { return p[static_cast<std::size_t>(s) * (tmax + 1) + t]; }
  double get(int s, int t) const { return p[static_cast<std::size_t>(s) * (tmax + 1) + t]; }
};

// per-availability behavior of a single opponent at probe price x
struct OpponentMix {
  std::vector<double> below;  // P(price < x | avail = g)
  std::vector<double> tie;    // P(price == x | avail = g)
};

OpponentMix opponent_mix(const OligopolyProfile& profile, double x, double c, double v) {
  OpponentMix mix;
  const int m = profile.m();
  mix.below.assign(static_cast<std::size_t>(m) + 1, 0.0);
  mix.tie.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (int g = 1; g <= m; ++g) {
    const LevelStrategy& lev = profile.levels[static_cast<std::size_t>(g)];
    if (x >= v) {
      mix.below[static_cast<std::size_t>(g)] = lev.all_at_v() ? 0.0 : lev.cdf_below(v, c, v);
      mix.tie[static_cast<std::size_t>(g)] = lev.all_at_v() ? 1.0 : lev.atom_at_v;
    } else {
      mix.below[static_cast<std::size_t>(g)] = lev.all_at_v() ? 0.0 : lev.cdf_below(x, c, v);
    }
  }
  return mix;
}

PoolDist convolve_opponents(const AvailabilityDistribution& q, const OpponentMix& mix,
                            int opponents) {
  const int m = q.max_units();
  PoolDist dist;
  dist.smax = opponents * m;
  dist.tmax = opponents * m;
  dist.p.assign(static_cast<std::size_t>(dist.smax + 1) * (dist.tmax + 1), 0.0);
  dist.at(0, 0) = 1.0;
  int cur_s = 0, cur_t = 0;
  for (int o = 0; o < opponents; ++o) {
    PoolDist next = dist;
    std::fill(next.p.begin(), next.p.end(), 0.0);
    for (int s = 0; s <= cur_s; ++s) {
      for (int t = 0; t <= cur_t; ++t) {
        const double pr = dist.get(s, t);
        if (pr == 0.0) continue;
        for (int g = 0; g <= m; ++g) {
          const double qg = q[g];
          if (qg == 0.0) continue;
          if (g == 0) {
            next.at(s, t) += pr * qg;
            continue;
          }
          const double pb = mix.below[static_cast<std::size_t>(g)];
          const double pt = mix.tie[static_cast<std::size_t>(g)];
          const double pa = 1.0 - pb - pt;
          if (pb > 0.0) next.at(s + g, t) += pr * qg * pb;
          if (pt > 0.0) next.at(s, t + g) += pr * qg * pt;
          if (pa > 0.0) next.at(s, t) += pr * qg * pa;
        }
      }
    }
    dist = std::move(next);
    cur_s += m;
    cur_t += m;
  }
  return dist;
}

// Expected units for the deviator given the pool: cheaper opponents absorb
// demand first; the residual is drawn uniformly from the tied unit pool.
double alloc_units(int level, int s_below, int t_tied, int d) {
  const int residual = std::max(d - s_below, 0);
  const int pool = level + t_tied;
  if (pool <= residual) return level;
  return static_cast<double>(level) * residual / pool;
}

double expected_units_from_mix(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                               const OpponentMix& mix, int level) {
  PoolDist dist = convolve_opponents(profile.effective, mix, cfg.n - 1);
  double units = 0.0;
  for (int s = 0; s <= dist.smax; ++s)
    for (int t = 0; t <= dist.tmax; ++t) {
      const double pr = dist.get(s, t);
      if (pr > 0.0) units += pr * alloc_units(level, s, t, profile.effective_d);
    }
  return units;
}

}  // namespace

double expected_units_oligopoly(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                int level, double x) {
  if (level < 1 || level > profile.m()) throw ConfigError("availability level out of range");
  if (x < 0.0 || x > cfg.v) throw ConfigError("price outside [0, v]");
  OpponentMix mix = opponent_mix(profile, x, cfg.c, cfg.v);
  return expected_units_from_mix(cfg, profile, mix, level);
}

double expected_utility_oligopoly(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                  int level, double x) {
  return (x - cfg.c) * expected_units_oligopoly(cfg, profile, level, x);
}

OligopolyProfile build_heuristic(const OligopolyConfig& cfg, int grid_per_segment) {
  cfg.validate();
  if (grid_per_segment < 2) throw ConfigError("grid_per_segment must be >= 2");

  OligopolyProfile profile;
  AggregatedAvailability agg = aggregate_for_small_demand(cfg.availability, cfg.d);
  profile.effective = agg.effective;
  profile.aggregated = agg.aggregated;
  profile.effective_d = cfg.d;
  const int m = profile.effective.max_units();
  profile.levels.resize(static_cast<std::size_t>(m) + 1);
  profile.lower_bounds.assign(static_cast<std::size_t>(m) + 1, cfg.v);
  profile.utilities.assign(static_cast<std::size_t>(m) + 1, 0.0);

  if (static_cast<long long>(cfg.n) * m <= cfg.d) {
    profile.monopoly = true;
    profile.l_star = m;
    for (int l = 1; l <= m; ++l) profile.levels[static_cast<std::size_t>(l)] = LevelStrategy::at_cap();
    for (int l = 1; l <= m; ++l)
      profile.utilities[static_cast<std::size_t>(l)] =
          expected_utility_oligopoly(cfg, profile, l, cfg.v);
    return profile;
  }

  const int l_star = cfg.d / cfg.n;
  profile.l_star = l_star;
  for (int l = 1; l <= l_star; ++l) profile.levels[static_cast<std::size_t>(l)] = LevelStrategy::at_cap();

  const AvailabilityDistribution& q = profile.effective;
  const int opponents = cfg.n - 1;
  const int d = cfg.d;

  // Conditioning on how many opponents hold exactly the probe level turns the
  // expected units into a polynomial in that level's own CDF value: draws at
  // other levels are structurally fixed (deeper sells first, shallower waits).
  struct LevelPoly {
    std::vector<double> pk0;                 // P(#opponents at the level = k0)
    std::vector<std::vector<double>> a;      // a[k0][b]: alloc averaged over fixed pool
    double eval(double t) const {
      double total = 0.0;
      for (std::size_t k0 = 0; k0 < pk0.size(); ++k0) {
        double choose = 1.0;
        double inner = 0.0;
        for (std::size_t b = 0; b <= k0; ++b) {
          inner += choose * std::pow(t, static_cast<double>(b)) *
                   std::pow(1.0 - t, static_cast<double>(k0 - b)) * a[k0][b];
          choose = choose * (static_cast<double>(k0) - static_cast<double>(b)) /
                   (static_cast<double>(b) + 1.0);
        }
        total += pk0[k0] * inner;
      }
      return total;
    }
  };

  auto make_poly = [&](int i) {
    LevelPoly poly;
    const double qi = q[i];
    poly.pk0.resize(static_cast<std::size_t>(opponents) + 1, 0.0);
    double choose = 1.0;
    for (int k0 = 0; k0 <= opponents; ++k0) {
      poly.pk0[static_cast<std::size_t>(k0)] =
          choose * std::pow(qi, k0) * std::pow(1.0 - qi, opponents - k0);
      choose = choose * (opponents - k0) / (k0 + 1.0);
    }
    poly.a.resize(static_cast<std::size_t>(opponents) + 1);
    for (int k0 = 0; k0 <= opponents; ++k0) {
      // fixed-part distribution of units priced below, over opponents whose
      // availability is not i (conditional probabilities q_g / (1 - q_i))
      std::vector<double> fix{1.0};
      const int others = opponents - k0;
      for (int o = 0; o < others; ++o) {
        std::vector<double> next(fix.size() + static_cast<std::size_t>(m), 0.0);
        for (std::size_t s = 0; s < fix.size(); ++s) {
          if (fix[s] == 0.0) continue;
          for (int g = 0; g <= m; ++g) {
            if (g == i) continue;
            const double pg = q[g] / (1.0 - qi);
            if (pg == 0.0) continue;
            next[s + static_cast<std::size_t>(g > i ? g : 0)] += fix[s] * pg;
          }
        }
        fix = std::move(next);
      }
      auto& row = poly.a[static_cast<std::size_t>(k0)];
      row.assign(static_cast<std::size_t>(k0) + 1, 0.0);
      for (int b = 0; b <= k0; ++b) {
        double acc = 0.0;
        for (std::size_t s = 0; s < fix.size(); ++s)
          if (fix[s] > 0.0)
            acc += fix[s] * alloc_units(i, static_cast<int>(s) + i * b, 0, d);
        row[static_cast<std::size_t>(b)] = acc;
      }
    }
    return poly;
  };

  double v_top = cfg.v;
  for (int i = l_star + 1; i <= m; ++i) {
    LevelStrategy lev;
    if (q[i] == 0.0) {
      // Unreachable level: support collapses to a point at the current top.
      CdfSegment seg;
      seg.lo = seg.hi = v_top;
      seg.grid_x = {v_top, v_top};
      seg.grid_cdf = {0.0, 1.0};
      lev.segments.push_back(seg);
      profile.levels[static_cast<std::size_t>(i)] = lev;
      profile.lower_bounds[static_cast<std::size_t>(i)] = v_top;
      continue;
    }

    const LevelPoly poly = make_poly(i);
    const double b_top = poly.eval(1.0);
    const double u_i = (v_top - cfg.c) * b_top;
    profile.utilities[static_cast<std::size_t>(i)] = u_i;

    const double b_zero = poly.eval(0.0);
    if (b_zero <= b_top)
      throw NumericError("level utility insensitive to own price distribution");
    const double p_lo = cfg.c + u_i / b_zero;
    if (!(p_lo > cfg.c) || !(p_lo < v_top))
      throw NumericError("segment bounds left (c, v) while solving");

    CdfSegment seg;
    seg.lo = p_lo;
    seg.hi = v_top;
    seg.grid_x.resize(static_cast<std::size_t>(grid_per_segment));
    seg.grid_cdf.resize(static_cast<std::size_t>(grid_per_segment));
    for (int t = 0; t < grid_per_segment; ++t) {
      const double x = p_lo + (v_top - p_lo) * t / (grid_per_segment - 1);
      seg.grid_x[static_cast<std::size_t>(t)] = x;
      if (t == 0) {
        seg.grid_cdf[0] = 0.0;
        continue;
      }
      if (t == grid_per_segment - 1) {
        seg.grid_cdf[static_cast<std::size_t>(t)] = 1.0;
        continue;
      }
      const double target = u_i / (x - cfg.c);
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        // units decrease as the own-level CDF grows
        if (poly.eval(mid) > target)
          lo = mid;
        else
          hi = mid;
        if (hi - lo < 1e-12) break;
      }
      seg.grid_cdf[static_cast<std::size_t>(t)] = 0.5 * (lo + hi);
    }
    for (std::size_t t = 1; t < seg.grid_cdf.size(); ++t)
      if (seg.grid_cdf[t] < seg.grid_cdf[t - 1])
        throw NumericError("constructed level CDF is not monotone");
    lev.segments.push_back(seg);
    profile.levels[static_cast<std::size_t>(i)] = lev;
    profile.lower_bounds[static_cast<std::size_t>(i)] = p_lo;
    v_top = p_lo;
  }
  return profile;
}

OligopolyGapReport heuristic_gap(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                 int grid_size, int jobs) {
  cfg.validate();
  const int m = profile.m();

  auto clamp = [&cfg](double x) { return std::min(std::max(x, cfg.c), cfg.v); };
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(grid_size) + 8);
  for (int t = 0; t <= grid_size; ++t)
    xs.push_back(clamp(cfg.c + (cfg.v - cfg.c) * t / grid_size));
  for (int l = 1; l <= m; ++l)
    for (const auto& seg : profile.levels[static_cast<std::size_t>(l)].segments) {
      xs.push_back(clamp(seg.lo));
      xs.push_back(clamp(seg.hi));
    }
  xs.push_back(clamp(cfg.v - (cfg.v - cfg.c) * 1e-7));
  xs.push_back(cfg.v);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  const int npts = static_cast<int>(xs.size());

  OligopolyGapReport rep;
  for (int l = 1; l <= m; ++l) {
    std::vector<double> vals(static_cast<std::size_t>(npts), 0.0);
    std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
#endif
    for (int t = 0; t < npts; ++t) {
      try {
        vals[static_cast<std::size_t>(t)] =
            expected_utility_oligopoly(cfg, profile, l, xs[static_cast<std::size_t>(t)]);
      } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    (void)jobs;

    OligopolyLevelGap g;
    g.level = l;
    g.best_response_utility = -1.0;
    for (int t = 0; t < npts; ++t) {
      if (vals[static_cast<std::size_t>(t)] > g.best_response_utility) {
        g.best_response_utility = vals[static_cast<std::size_t>(t)];
        g.best_response_price = xs[static_cast<std::size_t>(t)];
      }
    }

    const LevelStrategy& lev = profile.levels[static_cast<std::size_t>(l)];
    if (lev.all_at_v() || lev.atom_at_v > 0.0) {
      double mass = lev.all_at_v() ? 1.0 : lev.atom_at_v;
      g.proposed_utility += mass * expected_utility_oligopoly(cfg, profile, l, cfg.v);
    }
    for (const auto& seg : lev.segments) {
      const double p0 = seg.value_at_lo(cfg.c), p1 = seg.value_at_hi(cfg.c);
      if (p1 <= p0) continue;
      const int nq = 64;
      double acc = 0.0;
      for (int t = 0; t < nq; ++t) {
        double p = p0 + (p1 - p0) * (t + 0.5) / nq;
        acc += expected_utility_oligopoly(cfg, profile, l, seg.inverse(p, cfg.c));
      }
      g.proposed_utility += (p1 - p0) * acc / nq;
    }

    g.rel_diff = (g.best_response_utility - g.proposed_utility) /
                 std::max(g.proposed_utility, 1e-300);
    rep.max_rel_diff = std::max(rep.max_rel_diff, g.rel_diff);
    rep.levels.push_back(g);
  }
  return rep;
}

}  // namespace duopoly
