#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <algorithm>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "duopoly/evaluate.hpp"
#include "duopoly/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCertification = 3;
constexpr int kExitNumeric = 4;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw duopoly::ConfigError("cannot write output file: " + path);
  out << content;
}

std::string profile_summary_csv(const duopoly::MarketConfig& cfg,
                                const duopoly::StrategyProfile& profile) {
  std::ostringstream os;
  os << "seller,level,support_lo,support_hi,atom_at_v\n";
  for (int k = 0; k < 2; ++k) {
    for (int l = 1; l <= profile.seller(k).m(); ++l) {
      const duopoly::LevelStrategy& lev = profile.seller(k).level(l);
      os << k + 1 << ',' << l << ',' << duopoly::format_real(lev.support_lo(cfg.v)) << ','
         << duopoly::format_real(lev.support_hi(cfg.v)) << ','
         << duopoly::format_real(lev.all_at_v() ? 1.0 : lev.atom_at_v) << '\n';
    }
  }
  return os.str();
}

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int grid = 10000;
  std::uint64_t rounds = 1000000;
  int jobs = 0;
  bool stamp = false;
};

std::string maybe_stamp(const CommonOpts& opt) {
  if (!opt.stamp) return "";
  auto now = std::chrono::system_clock::now().time_since_epoch();
  auto s = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  return "# generated at unix time " + std::to_string(s) + "\n";
}

int run_solve_sym(const CommonOpts& opt) {
  duopoly::ParsedConfig pc = duopoly::load_config(opt.config_path);
  duopoly::SymmetricNE ne = duopoly::solve_symmetric(pc.market);
  duopoly::EquilibriumCertificate cert =
      duopoly::certify(ne.effective, ne.profile, opt.grid, opt.tol, opt.jobs);
  std::string body = opt.format == "csv" ? profile_summary_csv(ne.effective, ne.profile)
                                         : duopoly::symmetric_result_to_json(ne, cert);
  write_output(opt.out_path, maybe_stamp(opt) + body);
  if (!cert.pass) {
    std::cerr << "certification failed: max gap " << cert.max_gap << " exceeds tolerance "
              << cert.tol << "\n";
    return kExitCertification;
  }
  return kExitOk;
}

int run_solve_asym(const CommonOpts& opt) {
  duopoly::ParsedConfig pc = duopoly::load_config(opt.config_path);
  duopoly::AsymmetricOptions aopt;
  aopt.jobs = opt.jobs;
  duopoly::AsymmetricReport rep = duopoly::solve_asymmetric(pc.market, aopt);
  std::vector<duopoly::EquilibriumCertificate> certs;
  bool all_pass = true;
  for (const auto& eq : rep.equilibria) {
    certs.push_back(duopoly::certify(rep.effective, eq.profile, opt.grid, opt.tol, opt.jobs));
    all_pass = all_pass && certs.back().pass;
  }
  std::string body;
  if (opt.format == "csv") {
    std::ostringstream os;
    os << "equilibrium,seller,level,support_lo,support_hi,atom_at_v\n";
    for (std::size_t i = 0; i < rep.equilibria.size(); ++i) {
      std::istringstream rows(profile_summary_csv(rep.effective, rep.equilibria[i].profile));
      std::string line;
      std::getline(rows, line);
      while (std::getline(rows, line)) os << i + 1 << ',' << line << '\n';
    }
    body = os.str();
  } else {
    body = duopoly::asymmetric_report_to_json(rep, certs);
  }
  write_output(opt.out_path, maybe_stamp(opt) + body);
  std::cerr << "found " << rep.equilibria.size() << " equilibria\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  if (!all_pass) return kExitCertification;
  if (rep.equilibria.empty() && !rep.warnings.empty()) return kExitNumeric;
  return kExitOk;
}

int run_certify(const CommonOpts& opt, const std::string& profile_path) {
  std::ifstream in(profile_path);
  if (!in) throw duopoly::ConfigError("cannot open profile file: " + profile_path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto [cfg, profile] = duopoly::profile_from_json(buf.str());
  duopoly::EquilibriumCertificate cert =
      duopoly::certify(cfg, profile, opt.grid, opt.tol, opt.jobs);
  duopoly::MonotonicityReport mono = duopoly::check_gap_monotonicity(cfg, profile);
  std::ostringstream os;
  os << duopoly::certificate_to_json(cert);
  write_output(opt.out_path, maybe_stamp(opt) + os.str());
  if (!cert.pass || !cert.invariants.all_pass()) return kExitCertification;
  if (mono.applicable && !mono.pass()) return kExitCertification;
  return kExitOk;
}

int run_simulate(const CommonOpts& opt, const std::string& profile_path) {
  std::ifstream in(profile_path);
  if (!in) throw duopoly::ConfigError("cannot open profile file: " + profile_path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto [cfg, profile] = duopoly::profile_from_json(buf.str());
  duopoly::SimulationReport rep =
      duopoly::simulate(cfg, profile, opt.rounds, opt.seed, opt.jobs);
  std::string body = opt.format == "csv" ? duopoly::simulation_to_csv(rep)
                                         : duopoly::simulation_to_json(rep);
  write_output(opt.out_path, maybe_stamp(opt) + body);
  return kExitOk;
}

int run_oligopoly(const CommonOpts& opt) {
  duopoly::ParsedConfig pc = duopoly::load_config(opt.config_path);
  if (!pc.n) throw duopoly::ConfigError("oligopoly needs key 'n' in the config");
  if (!pc.market.demand.is_deterministic())
    throw duopoly::ConfigError("oligopoly supports deterministic demand only");
  duopoly::OligopolyConfig ocfg;
  ocfg.n = *pc.n;
  ocfg.availability = pc.market.sellers[0];
  ocfg.d = pc.market.demand.atoms[0].first;
  ocfg.v = pc.market.v;
  ocfg.c = pc.market.c;
  duopoly::OligopolyProfile profile = duopoly::build_heuristic(ocfg);
  duopoly::OligopolyGapReport gaps = duopoly::heuristic_gap(ocfg, profile, opt.grid, opt.jobs);
  std::string body;
  if (opt.format == "csv") {
    std::ostringstream os;
    os << "level,proposed_utility,best_response_utility,rel_diff\n";
    for (const auto& g : gaps.levels)
      os << g.level << ',' << duopoly::format_real(g.proposed_utility) << ','
         << duopoly::format_real(g.best_response_utility) << ','
         << duopoly::format_real(g.rel_diff) << '\n';
    body = os.str();
  } else {
    body = duopoly::oligopoly_result_to_json(ocfg, profile, gaps);
  }
  write_output(opt.out_path, maybe_stamp(opt) + body);
  return kExitOk;
}

int run_sweep(const CommonOpts& opt, const std::vector<double>& r_list, int m_min, int m_max,
              double v, double c) {
  struct Row {
    double r;
    int m;
    double p_tilde;
  };
  struct Point {
    double r;
    int m;
  };
  std::vector<Point> points;
  for (double r : r_list)
    for (int m = m_min; m <= m_max; ++m) points.push_back({r, m});

  // worker pool over sweep points; rows are sorted afterwards so the
  // parallelism is unobservable in the output
  std::vector<Row> results(points.size());
  std::vector<char> ok(points.size(), 0);
  std::vector<std::string> errors(points.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opt.jobs > 0 ? opt.jobs : omp_get_max_threads())
#endif
  for (long long i = 0; i < static_cast<long long>(points.size()); ++i) {
    const auto [r, m] = points[static_cast<std::size_t>(i)];
    try {
      duopoly::MarketConfig cfg;
      cfg.v = v;
      cfg.c = c;
      cfg.demand = duopoly::DemandModel::deterministic(m);
      cfg.sellers[0] = duopoly::AvailabilityDistribution::binomial(m, r);
      cfg.sellers[1] = cfg.sellers[0];
      duopoly::SymmetricNE ne = duopoly::solve_symmetric(cfg);
      results[static_cast<std::size_t>(i)] = {r, m, ne.p_tilde()};
      ok[static_cast<std::size_t>(i)] = 1;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = "sweep point r=" + std::to_string(r) +
                                            " m=" + std::to_string(m) + " failed: " + e.what();
    }
  }

  std::vector<Row> rows;
  bool failed = false;
  std::string failure;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (ok[i]) {
      rows.push_back(results[i]);
    } else if (!failed) {
      failed = true;
      failure = errors[i];
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.r != b.r) return a.r < b.r;
    return a.m < b.m;
  });
  std::ostringstream os;
  os << "r,m,p_tilde\n";
  for (const auto& row : rows)
    os << duopoly::format_real(row.r) << ',' << row.m << ',' << duopoly::format_real(row.p_tilde)
       << '\n';
  write_output(opt.out_path, maybe_stamp(opt) + os.str());
  if (failed) {
    std::cerr << failure << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"price competition under random availability: solvers and verifiers"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::string profile_path;
  std::vector<double> r_list{0.3, 0.5, 0.7};
  int m_min = 2, m_max = 40;
  double sweep_v = 10.0, sweep_c = 1.0;

  auto add_common = [&opt](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", opt.config_path, "market config file (key-value or JSON)")
          ->required();
    cmd->add_option("--out", opt.out_path, "output path ('-' for stdout)");
    cmd->add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--tol", opt.tol, "certification tolerance, relative to v - c");
    cmd->add_option("--grid", opt.grid, "certification grid size");
    cmd->add_option("--rounds", opt.rounds, "simulation rounds");
    cmd->add_option("--jobs", opt.jobs, "worker threads (0 = all)");
    cmd->add_flag("--stamp", opt.stamp, "prepend a timestamp comment");
  };

  CLI::App* sym = app.add_subcommand("solve-sym", "symmetric equilibrium");
  add_common(sym, true);
  CLI::App* asym = app.add_subcommand("solve-asym", "all structured equilibria");
  add_common(asym, true);
  CLI::App* cert = app.add_subcommand("certify", "best-response certification of a profile file");
  add_common(cert, false);
  cert->add_option("--profile", profile_path, "profile JSON written by a solve command")
      ->required();
  CLI::App* sim = app.add_subcommand("simulate", "market simulation against a profile file");
  add_common(sim, false);
  sim->add_option("--profile", profile_path, "profile JSON written by a solve command")
      ->required();
  CLI::App* oli = app.add_subcommand("oligopoly", "n-seller heuristic and its gap");
  add_common(oli, true);
  CLI::App* sweep = app.add_subcommand("sweep-asymptotic", "lowest bound vs availability size");
  add_common(sweep, false);
  sweep->add_option("--r-list", r_list, "binomial probabilities");
  sweep->add_option("--m-min", m_min, "smallest m");
  sweep->add_option("--m-max", m_max, "largest m");
  sweep->add_option("--v", sweep_v, "price cap");
  sweep->add_option("--c", sweep_c, "transaction cost");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sym->parsed()) return run_solve_sym(opt);
    if (asym->parsed()) return run_solve_asym(opt);
    if (cert->parsed()) return run_certify(opt, profile_path);
    if (sim->parsed()) return run_simulate(opt, profile_path);
    if (oli->parsed()) return run_oligopoly(opt);
    if (sweep->parsed()) return run_sweep(opt, r_list, m_min, m_max, sweep_v, sweep_c);
  } catch (const duopoly::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const duopoly::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
