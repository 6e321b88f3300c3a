// Compares the serial reference kernels with their OpenMP counterparts.

#include <chrono>
#include <functional>
#include <cstdio>
#include <string>

#include "duopoly/asymmetric.hpp"
#include "duopoly/oligopoly.hpp"
#include "duopoly/simulate.hpp"
#include "duopoly/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace duopoly;
using clk = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  // warm up once, then report the best of `reps`
  fn();
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    auto t0 = clk::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(clk::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel) {
  std::printf("%-34s %10.4fs %10.4fs %8.2fx\n", name.c_str(), serial, parallel,
              parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads available: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run the serial path\n");
#endif
  std::printf("%-34s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  MarketConfig cfg;
  cfg.v = 10.0;
  cfg.c = 6.0;
  cfg.demand = DemandModel::deterministic(3);
  cfg.sellers[0].probs = {0.3, 0.2, 0.2, 0.3};
  cfg.sellers[1].probs = {0.4, 0.2, 0.2, 0.2};
  AsymmetricReport rep = solve_asymmetric(cfg);
  const StrategyProfile& profile = rep.equilibria[0].profile;

  {
    std::vector<double> prices;
    for (int t = 0; t <= 2000000; ++t)
      prices.push_back(cfg.c + (cfg.v - cfg.c) * t / 2000000.0);
    double s = time_of(
        [&] { kernels::best_response_scan_serial(cfg, 0, 2, profile.seller(1), prices); }, 3);
    double p = time_of(
        [&] { kernels::best_response_scan_omp(cfg, 0, 2, profile.seller(1), prices, 0); }, 3);
    row("best-response scan (2e6 prices)", s, p);
  }
  {
    double s = time_of([&] { simulate_serial(cfg, profile, 2000000, 7); }, 3);
    double p = time_of([&] { simulate(cfg, profile, 2000000, 7, 0); }, 3);
    row("market simulation (2e6 rounds)", s, p);
  }
  {
    OligopolyConfig ocfg;
    ocfg.n = 5;
    ocfg.availability = AvailabilityDistribution::binomial(3, 0.4);
    ocfg.d = 5;
    ocfg.v = 10.0;
    ocfg.c = 1.0;
    OligopolyProfile prof = build_heuristic(ocfg);
    double s = time_of([&] { heuristic_gap(ocfg, prof, 20000, 1); }, 3);
    double p = time_of([&] { heuristic_gap(ocfg, prof, 20000, 0); }, 3);
    row("oligopoly gap scan (2e4 grid)", s, p);
  }
  return 0;
}
