#include <doctest.h>

#include <cmath>

#include "duopoly/asymmetric.hpp"
#include "duopoly/simulate.hpp"
#include "duopoly/symmetric.hpp"
#include "test_helpers.hpp"

using namespace duopoly;
using duopoly::testing::fig_config;
using duopoly::testing::make_config;

TEST_CASE("same seed reproduces the report bit for bit") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  SimulationReport a = simulate(cfg, rep.equilibria[0].profile, 50000, 99, 0);
  SimulationReport b = simulate(cfg, rep.equilibria[0].profile, 50000, 99, 0);
  REQUIRE(a.probes.size() == b.probes.size());
  for (std::size_t i = 0; i < a.probes.size(); ++i) {
    CHECK(a.probes[i].empirical_mean == b.probes[i].empirical_mean);
    CHECK(a.probes[i].std_error == b.probes[i].std_error);
    CHECK(a.probes[i].samples == b.probes[i].samples);
  }
}

TEST_CASE("tie allocation expectation matches the proportional split") {
  SplitMix64 rng(7);
  struct Case {
    int a, b, d;
  };
  for (Case cse : {Case{2, 2, 3}, Case{1, 2, 2}, Case{3, 1, 3}, Case{2, 3, 4}}) {
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      int got = tie_allocate(cse.a, cse.b, cse.d, rng);
      sum += got;
      sumsq += static_cast<double>(got) * got;
    }
    double mean = sum / n;
    double expect = static_cast<double>(cse.a) * cse.d / (cse.a + cse.b);
    double se = std::sqrt(std::max(sumsq / n - mean * mean, 0.0) / n);
    CHECK(std::abs(mean - expect) <= 3.0 * se + 1e-12);
  }
  // supply fits demand: everyone sells out, no randomness
  CHECK(tie_allocate(2, 1, 3, rng) == 2);
}

TEST_CASE("both sellers pinned at the cap sell their full draw") {
  MarketConfig cfg = make_config({0.4, 0.3, 0.3}, {0.5, 0.5}, 3, 10.0, 1.0);
  StrategyProfile p = monopoly_profile(cfg);
  SimulationReport rep = simulate(cfg, p, 20000, 5, 0);
  for (const auto& pr : rep.probes) {
    CHECK(pr.empirical_mean == doctest::Approx(pr.level).epsilon(1e-15));
    CHECK(pr.z == 0.0);
  }
}

TEST_CASE("drawn prices converge to the strategy CDF") {
  MarketConfig cfg;
  cfg.v = 10.0;
  cfg.c = 1.0;
  cfg.demand = DemandModel::deterministic(3);
  cfg.sellers[0] = AvailabilityDistribution::binomial(3, 0.4);
  cfg.sellers[1] = cfg.sellers[0];
  SymmetricNE ne = solve_symmetric(cfg);

  for (int level : {2, 3}) {
    const LevelStrategy& lev = ne.profile.seller(0).level(level);
    SplitMix64 rng(31 + static_cast<std::uint64_t>(level));
    const int n = 100000;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = sample_price(lev, cfg.c, cfg.v, rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      double f = lev.cdf_below(xs[static_cast<std::size_t>(i)], cfg.c, cfg.v);
      ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
      ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    }
    CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("unreachable levels are reported as missing data") {
  MarketConfig cfg = make_config({0.5, 0.0, 0.5}, {0.4, 0.3, 0.3}, 2, 10.0, 1.0);
  StrategyProfile p = monopoly_profile(cfg);
  SimulationReport rep = simulate(cfg, p, 5000, 3, 0);
  bool found = false;
  for (const auto& s : rep.no_data)
    if (s.find("seller 1 level 1") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("zero rounds are rejected") {
  MarketConfig cfg = fig_config();
  StrategyProfile p = monopoly_profile(cfg);
  CHECK_THROWS_AS(simulate(cfg, p, 0, 1, 0), ConfigError);
}

TEST_CASE("random demand rounds draw the demand per round") {
  MarketConfig cfg = make_config({0.4, 0.3, 0.3}, {0.4, 0.3, 0.3}, 2, 10.0, 1.0);
  cfg.demand = DemandModel::random({{2, 0.5}, {3, 0.5}});
  SymmetricNE ne = solve_symmetric(cfg);
  SimulationReport rep = simulate(cfg, ne.profile, 300000, 11, 0);
  for (const auto& p : rep.probes) CHECK(std::abs(p.z) <= 4.5);
}

TEST_CASE("at a million rounds most probes sit within three standard errors") {
  MarketConfig cfg = fig_config();
  AsymmetricReport rep = solve_asymmetric(cfg);
  SimulationReport sim = simulate(cfg, rep.equilibria[0].profile, 1000000, 77, 0);
  std::size_t within = 0;
  for (const auto& p : sim.probes)
    if (std::abs(p.z) <= 3.0) ++within;
  CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(sim.probes.size()));
}
