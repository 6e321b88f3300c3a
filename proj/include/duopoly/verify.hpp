#pragma once

#include "duopoly/types.hpp"

namespace duopoly {

struct LevelCertificate {
  int seller = 0;
  int level = 0;
  double equilibrium_utility = 0.0;
  double best_response_utility = 0.0;
  double best_response_price = 0.0;
  double gap = 0.0;      // best response minus equilibrium utility
  double rel_gap = 0.0;  // gap / (v - c)
  bool pass = false;
};

struct PropertyCheck {
  std::string name;
  bool pass = true;
  std::string witness;  // filled on failure
};

struct InvariantReport {
  std::vector<PropertyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const PropertyCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct EquilibriumCertificate {
  std::vector<LevelCertificate> levels;
  double max_gap = 0.0;
  double tol = 0.0;       // absolute: tol_rel * (v - c)
  bool pass = false;
  InvariantReport invariants;
};

/// Best-response oracle: scans a price grid augmented with every support
/// endpoint plus {v, v - (v-c)*1e-7} and compares the per-level maximum
/// against the utility the profile actually earns at that level.
EquilibriumCertificate certify(const MarketConfig& cfg, const StrategyProfile& profile,
                               int grid_size = 10000, double tol_rel = 1e-6, int jobs = 0);

/// Structure invariants of a competitive equilibrium profile: threshold range
/// and sum, support contiguity and chaining, continuity below the cap, the
/// single-jump rule, the common lowest bound, and equal utility per support.
InvariantReport check_structure_properties(const MarketConfig& cfg, const StrategyProfile& profile);

struct MonotonicityViolation {
  int seller = 0, l = 0, j = 0;
  double x0 = 0.0, x1 = 0.0, a0 = 0.0, a1 = 0.0;
};

struct MonotonicityReport {
  bool applicable = false;
  std::string regime;  // "full-interval", "top-interval", or "not-applicable"
  double interval_lo = 0.0, interval_hi = 0.0;
  std::vector<MonotonicityViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// Checks that the per-availability utility difference A is strictly
/// decreasing on its claimed interval, sampled at grid_points prices.
MonotonicityReport check_gap_monotonicity(const MarketConfig& cfg, const StrategyProfile& profile,
                                    int grid_points = 100, double slack = 1e-12);

namespace kernels {

struct ScanResult {
  double best_utility = 0.0;
  double best_price = 0.0;
};

/// Serial reference for the best-response scan.
ScanResult best_response_scan_serial(const MarketConfig& cfg, int k, int l,
                                     const SellerStrategy& opponent,
                                     const std::vector<double>& prices);

/// OpenMP scan; bit-identical to the serial reference for any thread count.
ScanResult best_response_scan_omp(const MarketConfig& cfg, int k, int l,
                                  const SellerStrategy& opponent,
                                  const std::vector<double>& prices, int jobs);

}  // namespace kernels

}  // namespace duopoly
