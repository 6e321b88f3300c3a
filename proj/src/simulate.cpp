#include "duopoly/simulate.hpp"

#include "duopoly/evaluate.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duopoly {

double sample_price(const LevelStrategy& level, double c, double v, SplitMix64& rng) {
  if (level.all_at_v()) return v;
  const double u = rng.uniform();
  double cont_total = level.segments.back().value_at_hi(c);
  if (u >= cont_total) return v;  // the atom
  for (const auto& seg : level.segments) {
    if (u <= seg.value_at_hi(c)) return seg.inverse(u, c);
  }
  return level.segments.back().hi;
}

int tie_allocate(int a, int b, int d, SplitMix64& rng) {
  if (a + b <= d) return a;
  int rem_a = a, rem_b = b;
  int sold_a = 0;
  for (int t = 0; t < d; ++t) {
    if (rng.uniform() * (rem_a + rem_b) < rem_a) {
      ++sold_a;
      --rem_a;
    } else {
      --rem_b;
    }
  }
  return sold_a;
}

namespace {

constexpr std::uint64_t kBlockRounds = 8192;

struct ProbeLayout {
  // probe prices per (seller, level); flat offsets into the accumulators
  std::array<std::vector<std::vector<double>>, 2> prices;
  std::array<std::vector<std::size_t>, 2> offset;
  std::size_t total = 0;
};

ProbeLayout build_probes(const MarketConfig& cfg, const StrategyProfile& profile) {
  ProbeLayout lay;
  for (int k = 0; k < 2; ++k) {
    lay.prices[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(cfg.m(k)) + 1);
    lay.offset[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(cfg.m(k)) + 1, 0);
    for (int l = 1; l <= cfg.m(k); ++l) {
      std::vector<double>& xs = lay.prices[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      const LevelStrategy& lev = profile.seller(k).level(l);
      for (const auto& seg : lev.segments) {
        xs.push_back(seg.lo);
        for (int t = 1; t <= 16; ++t)
          xs.push_back(seg.lo + (seg.hi - seg.lo) * t / 17.0);
        xs.push_back(seg.hi);
      }
      if (lev.all_at_v() || lev.atom_at_v > 0.0) xs.push_back(cfg.v);
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
      lay.offset[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = lay.total;
      lay.total += xs.size();
    }
  }
  return lay;
}

struct Accum {
  std::vector<double> sum, sumsq;
  std::array<std::vector<std::uint64_t>, 2> level_rounds;
  explicit Accum(const MarketConfig& cfg, std::size_t total) {
    sum.assign(total, 0.0);
    sumsq.assign(total, 0.0);
    level_rounds[0].assign(static_cast<std::size_t>(cfg.m(0)) + 1, 0);
    level_rounds[1].assign(static_cast<std::size_t>(cfg.m(1)) + 1, 0);
  }
  void merge(const Accum& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sumsq[i] += o.sumsq[i];
    }
    for (int k = 0; k < 2; ++k)
      for (std::size_t l = 0; l < level_rounds[static_cast<std::size_t>(k)].size(); ++l)
        level_rounds[static_cast<std::size_t>(k)][l] += o.level_rounds[static_cast<std::size_t>(k)][l];
  }
};

int sample_index(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                                cumulative.size() - 1));
}

void run_block(const MarketConfig& cfg, const StrategyProfile& profile, const ProbeLayout& lay,
               std::uint64_t seed, std::uint64_t block, std::uint64_t block_rounds, Accum& acc) {
  // avalanche the (seed, block) pair; seeding with seed + k*increment alone
  // would make adjacent blocks replay one shifted stream
  SplitMix64 seeder(seed + 0x632be59bd9b4e019ULL * (block + 1));
  SplitMix64 rng(seeder.next() ^ seeder.next());

  std::array<std::vector<double>, 2> avail_cum;
  for (int k = 0; k < 2; ++k) {
    double s = 0.0;
    for (double q : cfg.sellers[static_cast<std::size_t>(k)].probs) {
      s += q;
      avail_cum[static_cast<std::size_t>(k)].push_back(s);
    }
  }
  std::vector<double> demand_cum;
  {
    double s = 0.0;
    for (const auto& [d, r] : cfg.demand.atoms) {
      s += r;
      demand_cum.push_back(s);
    }
  }

  for (std::uint64_t t = 0; t < block_rounds; ++t) {
    const int d = cfg.demand.atoms[static_cast<std::size_t>(sample_index(demand_cum, rng.uniform()))].first;
    std::array<int, 2> avail{};
    std::array<double, 2> price{};
    for (int k = 0; k < 2; ++k) {
      avail[static_cast<std::size_t>(k)] =
          sample_index(avail_cum[static_cast<std::size_t>(k)], rng.uniform());
      price[static_cast<std::size_t>(k)] =
          avail[static_cast<std::size_t>(k)] > 0
              ? sample_price(profile.seller(k).level(avail[static_cast<std::size_t>(k)]), cfg.c,
                             cfg.v, rng)
              : 0.0;
    }

    for (int k = 0; k < 2; ++k) {
      const int l = avail[static_cast<std::size_t>(k)];
      if (l < 1) continue;
      const int j = avail[static_cast<std::size_t>(MarketConfig::other(k))];
      const double y = price[static_cast<std::size_t>(MarketConfig::other(k))];
      acc.level_rounds[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] += 1;
      const auto& xs = lay.prices[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      const std::size_t base = lay.offset[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      for (std::size_t p = 0; p < xs.size(); ++p) {
        const double x = xs[p];
        double units;
        if (j == 0) {
          units = std::min(l, d);
        } else if (y > x) {
          units = std::min(l, d);
        } else if (y < x) {
          units = std::min(l, std::max(d - j, 0));
        } else {
          units = tie_allocate(l, j, d, rng);
        }
        acc.sum[base + p] += units;
        acc.sumsq[base + p] += units * units;
      }
    }
  }
}

SimulationReport finalize(const MarketConfig& cfg, const StrategyProfile& profile,
                          const ProbeLayout& lay, const Accum& acc, std::uint64_t rounds,
                          std::uint64_t seed) {
  SimulationReport rep;
  rep.rounds = rounds;
  rep.seed = seed;
  for (int k = 0; k < 2; ++k) {
    const SellerStrategy& opp = profile.seller(MarketConfig::other(k));
    for (int l = 1; l <= cfg.m(k); ++l) {
      const std::uint64_t n =
          acc.level_rounds[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      const auto& xs = lay.prices[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      if (n == 0) {
        rep.no_data.push_back("seller " + std::to_string(k + 1) + " level " + std::to_string(l));
        continue;
      }
      const std::size_t base = lay.offset[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      for (std::size_t p = 0; p < xs.size(); ++p) {
        ProbeStat st;
        st.seller = k;
        st.level = l;
        st.price = xs[p];
        st.samples = n;
        st.empirical_mean = acc.sum[base + p] / static_cast<double>(n);
        double var = acc.sumsq[base + p] / static_cast<double>(n) -
                     st.empirical_mean * st.empirical_mean;
        var = std::max(var, 0.0);
        st.std_error = n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
        st.analytic = expected_units_sold(cfg, k, l, xs[p], opp);
        if (st.std_error > 0.0)
          st.z = (st.empirical_mean - st.analytic) / st.std_error;
        else
          st.z = std::abs(st.empirical_mean - st.analytic) <= 1e-12 ? 0.0 : 1e300;
        rep.probes.push_back(st);
      }
    }
  }
  return rep;
}

SimulationReport simulate_impl(const MarketConfig& cfg, const StrategyProfile& profile,
                               std::uint64_t rounds, std::uint64_t seed, int jobs, bool parallel) {
  if (rounds < 1) throw ConfigError("simulate needs at least one round");
  validate_profile(cfg, profile);
  const ProbeLayout lay = build_probes(cfg, profile);
  const std::uint64_t blocks = (rounds + kBlockRounds - 1) / kBlockRounds;

  std::vector<Accum> partial(blocks, Accum(cfg, lay.total));
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
    for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
      const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlockRounds;
      const std::uint64_t n = std::min(kBlockRounds, rounds - lo);
      run_block(cfg, profile, lay, seed, static_cast<std::uint64_t>(b), n, partial[static_cast<std::size_t>(b)]);
    }
  } else
#endif
  {
    (void)jobs;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      const std::uint64_t lo = b * kBlockRounds;
      const std::uint64_t n = std::min(kBlockRounds, rounds - lo);
      run_block(cfg, profile, lay, seed, b, n, partial[static_cast<std::size_t>(b)]);
    }
  }

  Accum total(cfg, lay.total);
  for (const auto& p : partial) total.merge(p);
  return finalize(cfg, profile, lay, total, rounds, seed);
}

}  // namespace

SimulationReport simulate(const MarketConfig& cfg, const StrategyProfile& profile,
                          std::uint64_t rounds, std::uint64_t seed, int jobs) {
  return simulate_impl(cfg, profile, rounds, seed, jobs, true);
}

SimulationReport simulate_serial(const MarketConfig& cfg, const StrategyProfile& profile,
                                 std::uint64_t rounds, std::uint64_t seed) {
  return simulate_impl(cfg, profile, rounds, seed, 1, false);
}

}  // namespace duopoly
