#include <doctest.h>

#include <algorithm>
#include <set>

#include "duopoly/asymmetric.hpp"
#include "duopoly/evaluate.hpp"
#include "duopoly/symmetric.hpp"
#include "duopoly/verify.hpp"
#include "test_helpers.hpp"

using namespace duopoly;
using duopoly::testing::fig_config;
using duopoly::testing::make_config;

namespace {

std::set<std::pair<int, int>> threshold_pairs(const std::vector<StructureHypothesis>& hyps) {
  std::set<std::pair<int, int>> out;
  for (const auto& h : hyps) out.insert({h.l1, h.l2});
  return out;
}

}  // namespace

TEST_CASE("hypothesis enumeration: 3x3 market with demand 3") {
  MarketConfig cfg = make_config({0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}, 3, 10.0, 1.0);
  auto hyps = enumerate_hypotheses(cfg);
  std::set<std::pair<int, int>> expected{{1, 1}, {2, 0}, {0, 2}, {2, 1}, {1, 2}};
  CHECK(threshold_pairs(hyps) == expected);
  // (1,1) admits two interleavings of the two interior bounds, the rest one
  CHECK(hyps.size() == 6);
}

TEST_CASE("hypothesis enumeration: single-unit market") {
  MarketConfig cfg = make_config({0.5, 0.5}, {0.5, 0.5}, 1, 10.0, 1.0);
  auto hyps = enumerate_hypotheses(cfg);
  REQUIRE(hyps.size() == 1);
  CHECK(hyps[0].l1 == 0);
  CHECK(hyps[0].l2 == 0);
  CHECK(hyps[0].owners.empty());
}

TEST_CASE("hypothesis enumeration matches a brute-force constraint filter") {
  MarketConfig cfg = make_config({0.25, 0.25, 0.25, 0.25}, {0.4, 0.3, 0.3}, 3, 10.0, 1.0);
  auto hyps = enumerate_hypotheses(cfg);
  std::set<std::pair<int, int>> got = threshold_pairs(hyps);

  std::set<std::pair<int, int>> expected;
  const int d = 3;
  for (int l1 = 0; l1 <= 2; ++l1)
    for (int l2 = 0; l2 <= 1; ++l2) {
      if (l1 < cfg.guaranteed_sale_level(0) || l2 < cfg.guaranteed_sale_level(1)) continue;
      if (l1 + l2 != d - 1 && l1 + l2 != d) continue;
      expected.insert({l1, l2});
    }
  CHECK(got == expected);
}

TEST_CASE("enumeration is empty in the monopoly regime") {
  MarketConfig cfg = make_config({0.5, 0.5}, {0.5, 0.5}, 2, 10.0, 1.0);
  CHECK(enumerate_hypotheses(cfg).empty());
}

TEST_CASE("running example: unique equilibrium with thresholds (1,1)") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  REQUIRE(rep.equilibria.size() == 1);
  const auto& eq = rep.equilibria[0];
  CHECK(eq.solution.hyp.l1 == 1);
  CHECK(eq.solution.hyp.l2 == 1);
  // frozen from the equal-utility system, verified by the response oracle
  CHECK(eq.solution.p_tilde == doctest::Approx(8.703448275862069).epsilon(1e-12));
  REQUIRE(eq.solution.bounds.size() == 2);
  CHECK(eq.solution.bounds[0] == doctest::Approx(9.862068965517241).epsilon(1e-12));
  CHECK(eq.solution.bounds[1] == doctest::Approx(9.379310344827586).epsilon(1e-12));
  CHECK(eq.solution.f1 == doctest::Approx(0.7586206896551724).epsilon(1e-10));
  CHECK(eq.solution.f2 == 0.0);
  CHECK(eq.solution.residual <= 1e-10);

  // level-1 strategies are unit atoms at the cap
  CHECK(eq.profile.seller(0).level(1).all_at_v());
  CHECK(eq.profile.seller(1).level(1).all_at_v());

  EquilibriumCertificate cert = certify(rep.effective, eq.profile, 10000, 1e-6, 0);
  CHECK(cert.pass);
  CHECK(cert.invariants.all_pass());
}

TEST_CASE("reference market A: unique equilibrium; the jump-at-cap candidate is rejected") {
  MarketConfig cfg = make_config({0.45, 0.1, 0.4, 0.05}, {0.2, 0.2, 0.45, 0.15}, 3, 10.0, 1.0);
  AsymmetricReport rep = solve_asymmetric(cfg);
  REQUIRE(rep.equilibria.size() == 1);
  const auto& eq = rep.equilibria[0];
  CHECK(eq.solution.hyp.l1 == 1);
  CHECK(eq.solution.hyp.l2 == 1);
  CHECK(eq.solution.p_tilde == doctest::Approx(7.557142857142857).epsilon(1e-12));
  CHECK(eq.solution.f2 == doctest::Approx(0.46031746031746035).epsilon(1e-10));
  // seller 2's deepest level holds CDF value 1/3 at seller 1's interior bound
  bool found_third = false;
  for (double phi : eq.solution.cross_cdf)
    if (std::abs(phi - 1.0 / 3.0) < 1e-10) found_third = true;
  CHECK(found_third);
  EquilibriumCertificate cert = certify(rep.effective, eq.profile, 10000, 1e-6, 0);
  CHECK(cert.pass);

  // the (1,2) structure solves to a candidate with a cap atom of 0.625 that
  // ties against opponent mass it cannot beat; it must be rejected
  StructureHypothesis hyp;
  hyp.l1 = 1;
  hyp.l2 = 2;
  hyp.owners = {0};
  HypothesisResult hr = solve_hypothesis(cfg, hyp);
  REQUIRE(!hr.candidates.empty());
  bool saw_rejected_jump = false;
  for (const auto& cand : hr.candidates) {
    if (cand.valid) continue;
    if (std::abs(cand.f1 - 0.625) < 1e-9) {
      saw_rejected_jump = true;
      CHECK(cand.bounds[0] == doctest::Approx(9.052631578947368).epsilon(1e-12));
      CHECK(cand.p_tilde == doctest::Approx(8.65).epsilon(1e-12));
      CHECK(cand.cross_cdf[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      CHECK(cand.reject_reason == "cap atom would lose rationing ties");
    }
  }
  CHECK(saw_rejected_jump);
}

TEST_CASE("reference market B: unique equilibrium; rejected branch hits known values") {
  MarketConfig cfg = make_config({0.05, 0.1, 0.4, 0.45}, {0.2, 0.2, 0.4, 0.2}, 3, 10.0, 1.0);
  AsymmetricReport rep = solve_asymmetric(cfg);
  REQUIRE(rep.equilibria.size() == 1);
  const auto& eq = rep.equilibria[0];
  CHECK(eq.solution.hyp.l1 == 1);
  CHECK(eq.solution.hyp.l2 == 1);
  CHECK(eq.solution.p_tilde == doctest::Approx(5.848979591836734).epsilon(1e-12));
  CHECK(eq.solution.f1 == doctest::Approx(0.9438775510204082).epsilon(1e-10));
  bool found = false;
  for (double phi : eq.solution.cross_cdf)
    if (std::abs(phi - 4.0 / 9.0) < 1e-10) found = true;
  CHECK(found);
  EquilibriumCertificate cert = certify(rep.effective, eq.profile, 10000, 1e-6, 0);
  CHECK(cert.pass);

  // thresholds (2,1): the equal-utility system pins the cap atom at exactly
  // 1/16 = 0.0625 with bounds 7.1875 and 5.95, but the atom loses ties
  StructureHypothesis hyp;
  hyp.l1 = 2;
  hyp.l2 = 1;
  hyp.owners = {1};
  HypothesisResult hr = solve_hypothesis(cfg, hyp);
  bool saw = false;
  for (const auto& cand : hr.candidates) {
    if (cand.valid || std::abs(cand.f2 - 0.0625) > 1e-9) continue;
    saw = true;
    CHECK(cand.bounds[0] == doctest::Approx(7.1875).epsilon(1e-12));
    CHECK(cand.p_tilde == doctest::Approx(5.95).epsilon(1e-12));
    CHECK(cand.cross_cdf[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(cand.reject_reason == "cap atom would lose rationing ties");
  }
  CHECK(saw);
}

TEST_CASE("solution set is invariant under seller relabeling") {
  MarketConfig cfg = make_config({0.45, 0.1, 0.4, 0.05}, {0.2, 0.2, 0.45, 0.15}, 3, 10.0, 1.0);
  MarketConfig swapped = cfg;
  std::swap(swapped.sellers[0], swapped.sellers[1]);
  AsymmetricReport a = solve_asymmetric(cfg);
  AsymmetricReport b = solve_asymmetric(swapped);
  REQUIRE(a.equilibria.size() == b.equilibria.size());
  for (std::size_t i = 0; i < a.equilibria.size(); ++i) {
    const auto& ea = a.equilibria[i].solution;
    const auto& eb = b.equilibria[i].solution;
    CHECK(ea.hyp.l1 == eb.hyp.l2);
    CHECK(ea.hyp.l2 == eb.hyp.l1);
    CHECK(ea.p_tilde == doctest::Approx(eb.p_tilde).epsilon(1e-12));
    CHECK(ea.f1 == doctest::Approx(eb.f2).epsilon(1e-12));
    CHECK(ea.f2 == doctest::Approx(eb.f1).epsilon(1e-12));
  }
}

TEST_CASE("symmetric input recovers the symmetric solution") {
  MarketConfig cfg;
  cfg.v = 10.0;
  cfg.c = 1.0;
  cfg.demand = DemandModel::deterministic(3);
  cfg.sellers[0] = AvailabilityDistribution::binomial(3, 0.4);
  cfg.sellers[1] = cfg.sellers[0];
  SymmetricNE sym = solve_symmetric(cfg);
  AsymmetricReport rep = solve_asymmetric(cfg);
  REQUIRE(!rep.equilibria.empty());
  bool matched = false;
  for (const auto& eq : rep.equilibria) {
    if (std::abs(eq.solution.p_tilde - sym.p_tilde()) > 1e-6) continue;
    bool same = eq.solution.hyp.l1 == sym.l_star && eq.solution.hyp.l2 == sym.l_star;
    for (int k = 0; k < 2 && same; ++k)
      for (int l = sym.l_star + 1; l <= 3 && same; ++l) {
        double lo = eq.profile.seller(k).level(l).support_lo(cfg.v);
        if (std::abs(lo - sym.lower_bounds[static_cast<std::size_t>(l)]) > 1e-6) same = false;
      }
    matched = matched || same;
  }
  CHECK(matched);
}

TEST_CASE("reconstructed distributions are continuous below the cap") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  const StrategyProfile& p = rep.equilibria[0].profile;
  for (int k = 0; k < 2; ++k) {
    for (int l = 1; l <= 3; ++l) {
      const LevelStrategy& lev = p.seller(k).level(l);
      if (lev.all_at_v()) continue;
      double prev = 0.0;
      bool havep = false;
      for (int t = 0; t <= 10000; ++t) {
        double x = cfg.c + (cfg.v - cfg.c - 1e-9) * t / 10000.0;
        double val = lev.cdf_below(x, cfg.c, cfg.v);
        if (havep) CHECK(std::abs(val - prev) < 2e-3);  // no jumps on a fine grid
        prev = val;
        havep = true;
      }
    }
  }
}

TEST_CASE("equilibria of the aggregated game when demand is below availability") {
  MarketConfig cfg = make_config({0.3, 0.3, 0.2, 0.2}, {0.4, 0.3, 0.2, 0.1}, 2, 10.0, 1.0);
  AsymmetricReport rep = solve_asymmetric(cfg);
  CHECK(rep.aggregated);
  CHECK(rep.effective.m(0) == 2);
  CHECK(rep.effective.m(1) == 2);
  REQUIRE(!rep.equilibria.empty());
  for (const auto& eq : rep.equilibria) {
    EquilibriumCertificate cert = certify(rep.effective, eq.profile, 10000, 1e-6, 0);
    CHECK(cert.pass);
  }
}

TEST_CASE("monopoly regime returns the cap profile") {
  MarketConfig cfg = make_config({0.5, 0.3, 0.2}, {0.6, 0.4}, 5, 10.0, 1.0);
  AsymmetricReport rep = solve_asymmetric(cfg);
  CHECK(rep.monopoly);
  REQUIRE(rep.equilibria.size() == 1);
  EquilibriumCertificate cert = certify(rep.effective, rep.equilibria[0].profile, 10000, 1e-6, 0);
  CHECK(cert.max_gap == 0.0);
}

TEST_CASE("residual of the boundary system stays small on returned solutions") {
  for (const MarketConfig& cfg :
       {fig_config(), make_config({0.3, 0.3, 0.2, 0.2}, {0.25, 0.25, 0.3, 0.2}, 4, 10.0, 1.0)}) {
    AsymmetricReport rep = solve_asymmetric(cfg);
    for (const auto& eq : rep.equilibria) CHECK(eq.solution.residual <= 1e-10);
  }
}
