#include <doctest.h>

#include "duopoly/asymmetric.hpp"
#include "duopoly/evaluate.hpp"
#include "duopoly/symmetric.hpp"
#include "duopoly/verify.hpp"
#include "test_helpers.hpp"

using namespace duopoly;
using duopoly::testing::fig_config;
using duopoly::testing::make_config;

namespace {

// shift one level's mass from the cap to a near-degenerate interval at x0
LevelStrategy concentrated_near(double x0, double width) {
  LevelStrategy lev;
  CdfSegment seg;
  seg.lo = x0 - width;
  seg.hi = x0 + width;
  seg.grid_x = {seg.lo, seg.hi};
  seg.grid_cdf = {0.0, 1.0};
  lev.segments.push_back(seg);
  lev.atom_at_v = 0.0;
  return lev;
}

}  // namespace

TEST_CASE("certificate gap is exactly zero in the monopoly regime") {
  MarketConfig cfg = make_config({0.5, 0.3, 0.2}, {0.7, 0.3}, 4, 10.0, 2.0);
  StrategyProfile p = monopoly_profile(cfg);
  EquilibriumCertificate cert = certify(cfg, p, 10000, 1e-6, 0);
  CHECK(cert.pass);
  CHECK(cert.max_gap == 0.0);
  for (const auto& lc : cert.levels) CHECK(lc.gap >= -1e-12);
}

TEST_CASE("mass moved off the cap at a pinned level is caught with a positive gap") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  StrategyProfile p = rep.equilibria[0].profile;
  const double x0 = cfg.v - 0.1 * (cfg.v - cfg.c);
  p.seller(0).level(1) = concentrated_near(x0, 1e-9);

  EquilibriumCertificate cert = certify(cfg, p, 10000, 1e-6, 0);
  CHECK_FALSE(cert.pass);
  bool flagged = false;
  for (const auto& lc : cert.levels)
    if (lc.seller == 0 && lc.level == 1) {
      CHECK(lc.gap > 1e-3);
      flagged = true;
    }
  CHECK(flagged);

  InvariantReport inv = check_structure_properties(cfg, p);
  const PropertyCheck* thr = inv.find("threshold-range");
  REQUIRE(thr != nullptr);
  CHECK_FALSE(thr->pass);
}

TEST_CASE("overlapping supports fail the chaining check with a witness") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  StrategyProfile p = rep.equilibria[0].profile;
  // stretch the deepest segment of seller 1 over the one above it
  CdfSegment& seg = p.seller(0).level(3).segments.back();
  double overlap_hi = seg.hi + 0.3;
  seg.grid_x = {seg.lo, overlap_hi};
  seg.grid_cdf = {0.0, 1.0};
  seg.hi = overlap_hi;
  seg.alpha = seg.beta = 0.0;

  InvariantReport inv = check_structure_properties(cfg, p);
  const PropertyCheck* chain = inv.find("support-chaining");
  REQUIRE(chain != nullptr);
  CHECK_FALSE(chain->pass);
  CHECK(!chain->witness.empty());
}

TEST_CASE("a double jump at the cap fails the single-jump rule") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  StrategyProfile p = rep.equilibria[0].profile;
  // seller 1 level 2 already jumps; force one on seller 2 level 2 as well
  LevelStrategy& lev = p.seller(1).level(2);
  const double f = 0.25;
  for (auto& s : lev.segments) {
    if (s.sampled()) {
      for (auto& c2 : s.grid_cdf) c2 *= 1.0 - f;
    } else {
      s.alpha *= 1.0 - f;
      s.beta *= 1.0 - f;
    }
  }
  lev.atom_at_v = f;

  InvariantReport inv = check_structure_properties(cfg, p);
  const PropertyCheck* jump = inv.find("single-jump-at-cap");
  REQUIRE(jump != nullptr);
  CHECK_FALSE(jump->pass);
}

TEST_CASE("all structure checks pass on the running example") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  InvariantReport inv = check_structure_properties(cfg, rep.equilibria[0].profile);
  CHECK(inv.all_pass());
  CHECK(rep.equilibria[0].solution.hyp.l1 + rep.equilibria[0].solution.hyp.l2 == 2);  // d - 1
}

TEST_CASE("enlarging the certification grid never shrinks the reported gap") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  StrategyProfile p = rep.equilibria[0].profile;
  p.seller(0).level(1) = concentrated_near(cfg.v - 0.07 * (cfg.v - cfg.c), 1e-9);
  double prev = -1.0;
  for (int grid : {1250, 2500, 5000, 10000}) {
    EquilibriumCertificate cert = certify(cfg, p, grid, 1e-6, 0);
    CHECK(cert.max_gap >= prev - 1e-15);
    prev = cert.max_gap;
  }
}

TEST_CASE("per-availability difference decreases on the claimed interval") {
  SUBCASE("demand strictly above availability") {
    MarketConfig cfg = make_config({0.3, 0.3, 0.2, 0.2}, {0.25, 0.25, 0.3, 0.2}, 4, 10.0, 1.0);
    AsymmetricReport rep = solve_asymmetric(cfg);
    REQUIRE(!rep.equilibria.empty());
    MonotonicityReport mono = check_gap_monotonicity(cfg, rep.equilibria[0].profile);
    CHECK(mono.applicable);
    CHECK(mono.regime == "full-interval");
    CHECK(mono.pass());
  }
  SUBCASE("symmetric market with demand equal to availability") {
    MarketConfig cfg;
    cfg.v = 10.0;
    cfg.c = 1.0;
    cfg.demand = DemandModel::deterministic(3);
    cfg.sellers[0] = AvailabilityDistribution::binomial(3, 0.4);
    cfg.sellers[1] = cfg.sellers[0];
    SymmetricNE ne = solve_symmetric(cfg);
    MonotonicityReport mono = check_gap_monotonicity(ne.effective, ne.profile);
    CHECK(mono.applicable);
    CHECK(mono.regime == "top-interval");
    CHECK(mono.pass());
  }
  SUBCASE("running example, deepest pair") {
    MarketConfig cfg = fig_config();
    AsymmetricReport rep = solve_asymmetric(cfg);
    const StrategyProfile& p = rep.equilibria[0].profile;
    // d = max availability and asymmetric: full claim not applicable
    MonotonicityReport mono = check_gap_monotonicity(cfg, p);
    CHECK_FALSE(mono.applicable);
    // the difference itself still starts at zero at the common bound
    double a0 = per_unit_utility_gap(cfg, 0, 3, 2, p.p_tilde, p.seller(1));
    CHECK(a0 == doctest::Approx(0.0).epsilon(1e-12));
    // and decreases on a sampled interior stretch
    double prev = 1e300;
    for (int t = 0; t < 100; ++t) {
      double x = p.p_tilde + (cfg.v - p.p_tilde) * t / 100.0;
      double a = per_unit_utility_gap(cfg, 0, 3, 2, x, p.seller(1));
      CHECK(a <= prev + 1e-12);
      prev = a;
    }
  }
}

TEST_CASE("grid floor is enforced") {
  MarketConfig cfg = fig_config();
  StrategyProfile p = monopoly_profile(cfg);
  CHECK_THROWS_AS(certify(cfg, p, 100, 1e-6, 0), ConfigError);
}
