#include "duopoly/verify.hpp"

#include <exception>
#include <sstream>

#include "duopoly/evaluate.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duopoly {

namespace kernels {

ScanResult best_response_scan_serial(const MarketConfig& cfg, int k, int l,
                                     const SellerStrategy& opponent,
                                     const std::vector<double>& prices) {
  ScanResult best{-1.0, cfg.c};
  for (double x : prices) {
    double u = expected_utility(cfg, k, l, x, opponent);
    if (u > best.best_utility) best = {u, x};
  }
  return best;
}

ScanResult best_response_scan_omp(const MarketConfig& cfg, int k, int l,
                                  const SellerStrategy& opponent,
                                  const std::vector<double>& prices, int jobs) {
#ifdef _OPENMP
  const int n = static_cast<int>(prices.size());
  const int chunks = std::max(1, std::min(n, jobs > 0 ? 4 * jobs : 4 * omp_get_max_threads()));
  std::vector<ScanResult> partial(static_cast<std::size_t>(chunks), ScanResult{-1.0, cfg.c});
  std::exception_ptr error;  // exceptions cannot cross the parallel region
#pragma omp parallel for schedule(static) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
  for (int ci = 0; ci < chunks; ++ci) {
    try {
      const int lo = static_cast<int>(static_cast<long long>(n) * ci / chunks);
      const int hi = static_cast<int>(static_cast<long long>(n) * (ci + 1) / chunks);
      ScanResult local{-1.0, cfg.c};
      for (int t = lo; t < hi; ++t) {
        double u = expected_utility(cfg, k, l, prices[static_cast<std::size_t>(t)], opponent);
        if (u > local.best_utility) local = {u, prices[static_cast<std::size_t>(t)]};
      }
      partial[static_cast<std::size_t>(ci)] = local;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  // merge in chunk order so the earliest (lowest price) maximum wins ties
  ScanResult best{-1.0, cfg.c};
  for (const auto& p : partial)
    if (p.best_utility > best.best_utility) best = p;
  return best;
#else
  (void)jobs;
  return best_response_scan_serial(cfg, k, l, opponent, prices);
#endif
}

}  // namespace kernels

namespace {

std::vector<double> certification_prices(const MarketConfig& cfg, const StrategyProfile& profile,
                                         int grid_size) {
  // grid arithmetic can overshoot the cap by an ulp for general c, so clamp
  auto clamp = [&cfg](double x) { return std::min(std::max(x, cfg.c), cfg.v); };
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(grid_size) + 16);
  for (int t = 0; t <= grid_size; ++t)
    xs.push_back(clamp(cfg.c + (cfg.v - cfg.c) * t / grid_size));
  for (int k = 0; k < 2; ++k) {
    const SellerStrategy& s = profile.seller(k);
    for (int l = 1; l <= s.m(); ++l) {
      for (const auto& seg : s.level(l).segments) {
        xs.push_back(clamp(seg.lo));
        xs.push_back(clamp(seg.hi));
      }
    }
  }
  xs.push_back(cfg.v);
  xs.push_back(clamp(cfg.v - (cfg.v - cfg.c) * 1e-7));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::string describe(int seller, int level) {
  std::ostringstream os;
  os << "seller " << seller + 1 << " level " << level;
  return os.str();
}

}  // namespace

EquilibriumCertificate certify(const MarketConfig& cfg, const StrategyProfile& profile,
                               int grid_size, double tol_rel, int jobs) {
  if (grid_size < 1000) throw ConfigError("certification grid must have at least 1000 points");
  validate_profile(cfg, profile);

  EquilibriumCertificate cert;
  cert.tol = tol_rel * (cfg.v - cfg.c);
  std::vector<double> prices = certification_prices(cfg, profile, grid_size);

  cert.pass = true;
  for (int k = 0; k < 2; ++k) {
    const SellerStrategy& opp = profile.seller(MarketConfig::other(k));
    for (int l = 1; l <= cfg.m(k); ++l) {
      kernels::ScanResult sr =
#ifdef _OPENMP
          kernels::best_response_scan_omp(cfg, k, l, opp, prices, jobs);
#else
          kernels::best_response_scan_serial(cfg, k, l, opp, prices);
#endif
      LevelCertificate lc;
      lc.seller = k;
      lc.level = l;
      lc.equilibrium_utility = strategy_expected_utility(cfg, k, l, profile);
      lc.best_response_utility = sr.best_utility;
      lc.best_response_price = sr.best_price;
      lc.gap = sr.best_utility - lc.equilibrium_utility;
      lc.rel_gap = lc.gap / (cfg.v - cfg.c);
      lc.pass = lc.gap <= cert.tol;
      cert.max_gap = std::max(cert.max_gap, lc.gap);
      cert.pass = cert.pass && lc.pass;
      cert.levels.push_back(lc);
    }
  }
  cert.invariants = check_structure_properties(cfg, profile);
  return cert;
}

InvariantReport check_structure_properties(const MarketConfig& cfg, const StrategyProfile& profile) {
  InvariantReport rep;
  auto add = [&rep](std::string name, bool pass, std::string witness = "") {
    rep.checks.push_back({std::move(name), pass, std::move(witness)});
  };

  if (cfg.monopoly_regime()) {
    bool all_cap = true;
    for (int k = 0; k < 2 && all_cap; ++k)
      for (int l = 1; l <= cfg.m(k); ++l)
        if (!profile.seller(k).level(l).all_at_v()) all_cap = false;
    add("monopoly-profile", all_cap, all_cap ? "" : "a level prices below the cap");
    return rep;
  }

  const int d_floor = cfg.demand.floor_demand();
  const double v = cfg.v, c = cfg.c;

  // 1a: threshold range
  {
    bool ok = true;
    std::string w;
    for (int k = 0; k < 2; ++k) {
      int lk = profile.thresholds[static_cast<std::size_t>(k)];
      int ek = cfg.guaranteed_sale_level(k);
      if (lk < ek || lk > cfg.m(k) - 1) {
        ok = false;
        w = describe(k, lk) + " threshold outside [e_k, m_k-1]";
      }
      for (int l = 1; l <= lk && ok; ++l)
        if (!profile.seller(k).level(l).all_at_v()) {
          ok = false;
          w = describe(k, l) + " below threshold but not at cap";
        }
    }
    add("threshold-range", ok, w);
  }

  // 1b: threshold sum
  {
    int sum = profile.thresholds[0] + profile.thresholds[1];
    bool ok = (sum == d_floor - 1) || (sum == d_floor);
    add("threshold-sum", ok, ok ? "" : "l1+l2 = " + std::to_string(sum));
  }

  // 2a/3a: support contiguity and chaining down from the cap
  {
    bool ok = true;
    std::string w;
    for (int k = 0; k < 2; ++k) {
      int lk = profile.thresholds[static_cast<std::size_t>(k)];
      double expected_hi = v;
      for (int i = lk + 1; i <= cfg.m(k); ++i) {
        const LevelStrategy& lev = profile.seller(k).level(i);
        if (cfg.sellers[static_cast<std::size_t>(k)][i] == 0.0) continue;  // unreachable level
        if (lev.all_at_v()) {
          ok = false;
          w = describe(k, i) + " should randomize but sits at cap";
          break;
        }
        double hi = lev.segments.back().hi;
        if (std::abs(hi - expected_hi) > kPriceTol) {
          std::ostringstream os;
          os << describe(k, i) << " top " << hi << " != " << expected_hi;
          ok = false;
          w = os.str();
          break;
        }
        expected_hi = lev.segments.front().lo;
      }
      if (!ok) break;
    }
    add("support-chaining", ok, w);
  }

  // 2b/3b: continuity below the cap (no interior point mass, pieces chain)
  {
    bool ok = true;
    std::string w;
    for (int k = 0; k < 2 && ok; ++k) {
      for (int i = 1; i <= cfg.m(k) && ok; ++i) {
        if (cfg.sellers[static_cast<std::size_t>(k)][i] == 0.0) continue;
        const LevelStrategy& lev = profile.seller(k).level(i);
        double cum = 0.0;
        double resolution = 0.0;
        for (const auto& seg : lev.segments) {
          double tol = kMassTol + resolution + seg.endpoint_resolution(c);
          if (std::abs(seg.value_at_lo(c) - cum) > tol) {
            ok = false;
            w = describe(k, i) + " cumulative value jumps below the cap";
            break;
          }
          if (seg.hi - seg.lo <= 0.0 && seg.value_at_hi(c) - seg.value_at_lo(c) > tol) {
            ok = false;
            w = describe(k, i) + " carries a point mass below the cap";
            break;
          }
          cum = seg.value_at_hi(c);
          resolution = seg.endpoint_resolution(c);
        }
      }
    }
    add("continuity-below-cap", ok, w);
  }

  // 2c: at most one seller jumps at the cap on its threshold+1 level
  {
    double f1 = 0.0, f2 = 0.0;
    int l1 = profile.thresholds[0], l2 = profile.thresholds[1];
    if (l1 + 1 <= cfg.m(0)) f1 = profile.seller(0).level(l1 + 1).atom_at_v;
    if (l2 + 1 <= cfg.m(1)) f2 = profile.seller(1).level(l2 + 1).atom_at_v;
    bool ok = (f1 < 1.0 - kMassTol) && (f2 < 1.0 - kMassTol) &&
              (f1 <= kMassTol || f2 <= kMassTol);
    std::ostringstream os;
    os << "f1 = " << f1 << ", f2 = " << f2;
    add("single-jump-at-cap", ok, ok ? "" : os.str());
    bool ok_high = true;
    std::string w;
    for (int k = 0; k < 2; ++k)
      for (int i = profile.thresholds[static_cast<std::size_t>(k)] + 2; i <= cfg.m(k); ++i)
        if (profile.seller(k).level(i).atom_at_v > kMassTol) {
          ok_high = false;
          w = describe(k, i) + " jumps at the cap above threshold+1";
        }
    add("no-jump-above-threshold+1", ok_high, w);
  }

  // 3c: common lowest bound
  {
    double lo0 = profile.seller(0).level(cfg.m(0)).support_lo(v);
    double lo1 = profile.seller(1).level(cfg.m(1)).support_lo(v);
    bool ok = std::abs(lo0 - lo1) <= kPriceTol;
    std::ostringstream os;
    os << "p~_1 = " << lo0 << ", p~_2 = " << lo1;
    add("common-lowest-bound", ok, ok ? "" : os.str());
  }

  // 4: equal utility across each support (except at the cap itself)
  {
    bool ok = true;
    std::string w;
    const double tol = 1e-8 * (v - c);
    for (int k = 0; k < 2 && ok; ++k) {
      const SellerStrategy& opp = profile.seller(MarketConfig::other(k));
      int lk = profile.thresholds[static_cast<std::size_t>(k)];
      for (int i = lk + 1; i <= cfg.m(k) && ok; ++i) {
        if (cfg.sellers[static_cast<std::size_t>(k)][i] == 0.0) continue;
        const LevelStrategy& lev = profile.seller(k).level(i);
        if (lev.all_at_v()) continue;
        double lo = lev.segments.front().lo;
        double hi = lev.segments.back().hi;
        if (hi >= v) hi = v - (v - c) * 1e-9;
        if (hi <= lo) continue;
        double u_ref = expected_utility(cfg, k, i, lo, opp);
        for (int t = 0; t < 256; ++t) {
          double x = lo + (hi - lo) * t / 255.0;
          double u = expected_utility(cfg, k, i, x, opp);
          if (std::abs(u - u_ref) > tol) {
            std::ostringstream os;
            os << describe(k, i) << " utility varies: " << u_ref << " vs " << u << " at x = " << x;
            ok = false;
            w = os.str();
            break;
          }
        }
      }
    }
    add("equal-utility-on-support", ok, w);
  }

  return rep;
}

MonotonicityReport check_gap_monotonicity(const MarketConfig& cfg, const StrategyProfile& profile,
                                    int grid_points, double slack) {
  MonotonicityReport rep;
  const int d_floor = cfg.demand.floor_demand();
  const int mmax = std::max(cfg.m(0), cfg.m(1));

  bool symmetric = cfg.m(0) == cfg.m(1);
  for (int j = 0; symmetric && j <= cfg.m(0); ++j)
    if (std::abs(cfg.sellers[0][j] - cfg.sellers[1][j]) > kNormTol) symmetric = false;

  double lo = profile.p_tilde;
  if (d_floor > mmax) {
    rep.regime = "full-interval";
  } else if (d_floor == mmax && symmetric && cfg.m(0) >= 2) {
    // restricted claim: above the second-lowest bound
    double lo0 = profile.seller(0).level(cfg.m(0) - 1).support_lo(cfg.v);
    double lo1 = profile.seller(1).level(cfg.m(1) - 1).support_lo(cfg.v);
    lo = std::max(lo0, lo1);
    rep.regime = "top-interval";
  } else {
    rep.regime = "not-applicable";
    rep.applicable = false;
    return rep;
  }
  rep.applicable = true;
  rep.interval_lo = lo;
  rep.interval_hi = cfg.v;

  for (int k = 0; k < 2; ++k) {
    const SellerStrategy& opp = profile.seller(MarketConfig::other(k));
    for (int l = 2; l <= cfg.m(k); ++l) {
      for (int j = 1; j < l; ++j) {
        double prev = 0.0;
        bool have_prev = false;
        double prev_x = lo;
        for (int t = 0; t < grid_points; ++t) {
          double x = lo + (cfg.v - lo) * t / grid_points;
          double a = per_unit_utility_gap(cfg, k, l, j, x, opp);
          if (have_prev && a - prev > slack)
            rep.violations.push_back({k, l, j, prev_x, x, prev, a});
          prev = a;
          prev_x = x;
          have_prev = true;
        }
      }
    }
  }
  return rep;
}

}  // namespace duopoly
