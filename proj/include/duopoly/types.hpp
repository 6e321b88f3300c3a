#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace duopoly {

/// Tolerance for probability-mass accounting (sums to one, etc).
inline constexpr double kMassTol = 1e-9;
/// Tolerance for probability-vector normalization at construction.
inline constexpr double kNormTol = 1e-12;
/// Absolute tolerance used when comparing support endpoints.
inline constexpr double kPriceTol = 1e-9;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probability vector over availability levels 0..m for one seller.
struct AvailabilityDistribution {
  std::vector<double> probs;  // probs[j] = P(j units available), size m+1

  int max_units() const { return static_cast<int>(probs.size()) - 1; }

  double operator[](int j) const { return probs[static_cast<std::size_t>(j)]; }

  /// True when some single level carries all the mass.
  bool degenerate() const {
    for (double q : probs)
      if (q >= 1.0 - kNormTol) return true;
    return false;
  }

  void validate() const {
    if (probs.size() < 2) throw ConfigError("availability needs m >= 1");
    double sum = 0.0;
    for (double q : probs) {
      if (q < 0.0 || q > 1.0) throw ConfigError("availability probability outside [0,1]");
      sum += q;
    }
    if (std::abs(sum - 1.0) > kNormTol)
      throw ConfigError("availability probabilities must sum to 1");
    if (probs[0] <= 0.0)
      throw ConfigError("zero availability must have positive probability");
  }

  static AvailabilityDistribution binomial(int m, double r) {
    if (m < 1 || r <= 0.0 || r >= 1.0) throw ConfigError("binomial(m, r) needs m >= 1, r in (0,1)");
    AvailabilityDistribution a;
    a.probs.resize(static_cast<std::size_t>(m) + 1);
    double coeff = 1.0;
    for (int j = 0; j <= m; ++j) {
      a.probs[static_cast<std::size_t>(j)] =
          coeff * std::pow(r, j) * std::pow(1.0 - r, m - j);
      coeff = coeff * (m - j) / (j + 1.0);
    }
    return a;
  }
};

/// Market demand: a deterministic unit count or a finite distribution over counts.
struct DemandModel {
  // (demand, probability) atoms sorted by demand; a single atom is deterministic
  std::vector<std::pair<int, double>> atoms;

  bool is_deterministic() const { return atoms.size() == 1; }

  /// Smallest positive demand with positive probability (the effective floor).
  int floor_demand() const {
    for (const auto& [d, r] : atoms)
      if (d > 0 && r > 0.0) return d;
    throw ConfigError("demand has no positive-demand atom");
  }

  int max_demand() const { return atoms.empty() ? 0 : atoms.back().first; }

  double mean() const {
    double s = 0.0;
    for (const auto& [d, r] : atoms) s += d * r;
    return s;
  }

  void validate() const {
    if (atoms.empty()) throw ConfigError("demand model is empty");
    double sum = 0.0;
    int prev = -1;
    bool positive = false;
    for (const auto& [d, r] : atoms) {
      if (d < 0) throw ConfigError("demand values must be >= 0");
      if (d <= prev) throw ConfigError("demand atoms must be strictly increasing");
      if (r < 0.0) throw ConfigError("demand weights must be >= 0");
      if (d > 0 && r > 0.0) positive = true;
      prev = d;
      sum += r;
    }
    if (std::abs(sum - 1.0) > kNormTol) throw ConfigError("demand weights must sum to 1");
    if (!positive) throw ConfigError("demand needs at least one positive-demand atom");
  }

  static DemandModel deterministic(int d) {
    if (d < 1) throw ConfigError("deterministic demand must be >= 1");
    return DemandModel{{{d, 1.0}}};
  }

  static DemandModel random(std::vector<std::pair<int, double>> weights) {
    DemandModel m{std::move(weights)};
    std::sort(m.atoms.begin(), m.atoms.end());
    m.validate();
    return m;
  }
};

/// Full two-seller market description.
struct MarketConfig {
  DemandModel demand;
  double v = 0.0;  // price cap
  double c = 0.0;  // per-unit transaction cost
  std::array<AvailabilityDistribution, 2> sellers;

  int m(int k) const { return sellers[static_cast<std::size_t>(k)].max_units(); }
  static int other(int k) { return 1 - k; }

  /// e_k: levels at or below this always sell out, whatever the price.
  int guaranteed_sale_level(int k) const {
    return std::max(demand.floor_demand() - m(other(k)), 0);
  }

  /// No competition: joint capacity never exceeds the lowest demand.
  bool monopoly_regime() const { return m(0) + m(1) <= demand.floor_demand(); }

  void validate() const {
    demand.validate();
    if (!(v > c) || c < 0.0) throw ConfigError("prices need v > c >= 0");
    sellers[0].validate();
    sellers[1].validate();
    if (sellers[0].degenerate() && sellers[1].degenerate())
      throw ConfigError("at least one seller's availability must be uncertain");
  }
};

/// One monotone piece of a price CDF on [lo, hi].
///
/// Closed-form pieces store Phi(x) = (alpha - beta / (x - c)) / gamma; sampled
/// pieces carry an explicit grid (used where no closed form exists).
struct CdfSegment {
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;
  std::vector<double> grid_x;    // nonempty for sampled segments
  std::vector<double> grid_cdf;  // cumulative values aligned with grid_x

  bool sampled() const { return !grid_x.empty(); }

  double value(double x, double c) const {
    if (x <= lo) return value_at_lo(c);
    if (x >= hi) return value_at_hi(c);
    if (!sampled()) return clamp01((alpha - beta / (x - c)) / gamma);
    // sampled: linear interpolation
    auto it = std::lower_bound(grid_x.begin(), grid_x.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid_x.begin());
    if (i == 0) return grid_cdf.front();
    if (i >= grid_x.size()) return grid_cdf.back();
    double x0 = grid_x[i - 1], x1 = grid_x[i];
    double t = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
    return grid_cdf[i - 1] + t * (grid_cdf[i] - grid_cdf[i - 1]);
  }

  double value_at_lo(double c) const {
    return sampled() ? grid_cdf.front() : clamp01((alpha - beta / (lo - c)) / gamma);
  }

  double value_at_hi(double c) const {
    return sampled() ? grid_cdf.back() : clamp01((alpha - beta / (hi - c)) / gamma);
  }

  /// Floating-point resolution of the hyperbola at its endpoints. The two
  /// numerator terms cancel there, so the value error scales with their size
  /// against gamma. Structural checks cannot resolve differences below this.
  double endpoint_resolution(double c) const {
    if (sampled()) return 0.0;
    double denom = std::max(std::abs(lo - c), 1e-300);
    double scale = (std::abs(alpha) + std::abs(beta) / denom) / std::max(std::abs(gamma), 1e-300);
    return 64.0 * 2.220446049250313e-16 * scale;
  }

  static double clamp01(double p) { return std::min(std::max(p, 0.0), 1.0); }

  /// Price at cumulative value p; requires p within this segment's range.
  double inverse(double p, double c) const {
    if (!sampled()) {
      double denom = alpha - gamma * p;
      if (denom <= 0.0) return hi;
      double x = c + beta / denom;
      return std::min(std::max(x, lo), hi);
    }
    auto it = std::lower_bound(grid_cdf.begin(), grid_cdf.end(), p);
    std::size_t i = static_cast<std::size_t>(it - grid_cdf.begin());
    if (i == 0) return grid_x.front();
    if (i >= grid_cdf.size()) return grid_x.back();
    double p0 = grid_cdf[i - 1], p1 = grid_cdf[i];
    double t = (p1 > p0) ? (p - p0) / (p1 - p0) : 0.0;
    return grid_x[i - 1] + t * (grid_x[i] - grid_x[i - 1]);
  }
};

/// Price distribution for one availability level: continuous pieces carrying
/// cumulative values, plus an optional atom at the price cap.
struct LevelStrategy {
  std::vector<CdfSegment> segments;  // ascending in price, cumulative chaining
  double atom_at_v = 0.0;

  bool all_at_v() const { return segments.empty(); }

  static LevelStrategy at_cap() { return LevelStrategy{{}, 1.0}; }

  double support_lo(double v) const { return segments.empty() ? v : segments.front().lo; }
  double support_hi(double v) const {
    return (atom_at_v > 0.0 || segments.empty()) ? v : segments.back().hi;
  }

  /// P(price < x). Continuous below v, so the left limit equals the value there.
  double cdf_below(double x, double c, double v) const {
    if (x <= support_lo(v)) return 0.0;
    double cont = 0.0;
    for (const auto& seg : segments) {
      if (x < seg.lo) break;
      cont = seg.value(x, c);
      if (x <= seg.hi) break;
    }
    if (!segments.empty() && x > segments.back().hi) cont = segments.back().value_at_hi(c);
    (void)v;
    return std::min(cont, 1.0);
  }

};

/// All levels of one seller; levels index 1..m (index 0 unused).
struct SellerStrategy {
  std::vector<LevelStrategy> levels;

  int m() const { return static_cast<int>(levels.size()) - 1; }
  const LevelStrategy& level(int j) const { return levels[static_cast<std::size_t>(j)]; }
  LevelStrategy& level(int j) { return levels[static_cast<std::size_t>(j)]; }
};

/// A full strategy profile: both sellers, thresholds, common lowest bound.
///
/// thresholds[k] is the largest availability priced at the cap with
/// probability one; in the monopoly regime it equals m_k.
struct StrategyProfile {
  std::array<SellerStrategy, 2> sellers;
  std::array<int, 2> thresholds{0, 0};
  double p_tilde = 0.0;

  const SellerStrategy& seller(int k) const { return sellers[static_cast<std::size_t>(k)]; }
  SellerStrategy& seller(int k) { return sellers[static_cast<std::size_t>(k)]; }
};

/// Validates PriceStrategy invariants: mass accounting, atoms only at the cap,
/// monotone nondecreasing cumulative values. Throws ConfigError on violation.
void validate_profile(const MarketConfig& cfg, const StrategyProfile& profile);

/// Profile in which every level of both sellers prices at the cap.
StrategyProfile monopoly_profile(const MarketConfig& cfg);

}  // namespace duopoly
