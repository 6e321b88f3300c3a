#include "duopoly/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace duopoly {

using nlohmann::json;

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& s, int line_no, const std::string& key) {
  try {
    std::size_t pos = 0;
    double x = std::stod(s, &pos);
    if (strip(s.substr(pos)) != "")
      throw ConfigError("");
    return x;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                      "': expected a number, got '" + s + "'");
  }
}

std::vector<double> parse_vector(const std::string& s, int line_no, const std::string& key) {
  std::string t = strip(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                      "': expected a vector like [a, b, c]");
  std::vector<double> out;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(strip(item), line_no, key));
  if (out.empty())
    throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "': empty vector");
  return out;
}

std::vector<std::pair<int, double>> parse_weights(const std::string& s, int line_no) {
  std::string t = strip(s);
  if (t.size() < 2 || t.front() != '{' || t.back() != '}')
    throw ConfigError("line " + std::to_string(line_no) +
                      ": key 'demand_weights': expected {d1: p1, d2: p2}");
  std::vector<std::pair<int, double>> out;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": key 'demand_weights': missing ':' in entry '" + item + "'");
    int d = static_cast<int>(parse_number(strip(item.substr(0, colon)), line_no, "demand_weights"));
    double r = parse_number(strip(item.substr(colon + 1)), line_no, "demand_weights");
    out.emplace_back(d, r);
  }
  return out;
}

ParsedConfig from_fields(std::optional<double> v, std::optional<double> c,
                         std::optional<int> d, std::vector<std::pair<int, double>> weights,
                         std::vector<double> q1, std::vector<double> q2, std::optional<int> n) {
  if (!v) throw ConfigError("missing key 'v'");
  if (!c) throw ConfigError("missing key 'c'");
  if (q1.empty()) throw ConfigError("missing key 'q1'");
  if (d && !weights.empty()) throw ConfigError("give either 'd' or 'demand_weights', not both");
  if (!d && weights.empty()) throw ConfigError("missing demand: key 'd' or 'demand_weights'");

  ParsedConfig pc;
  pc.market.v = *v;
  pc.market.c = *c;
  pc.market.demand = d ? DemandModel::deterministic(*d) : DemandModel::random(std::move(weights));
  pc.market.sellers[0].probs = q1;
  pc.market.sellers[1].probs = q2.empty() ? q1 : q2;
  pc.n = n;
  pc.market.validate();
  return pc;
}

ParsedConfig parse_config_json(const std::string& text) {
  json j = json::parse(text);
  std::optional<double> v, c;
  std::optional<int> d, n;
  std::vector<std::pair<int, double>> weights;
  std::vector<double> q1, q2;
  if (j.contains("v")) v = j["v"].get<double>();
  if (j.contains("c")) c = j["c"].get<double>();
  if (j.contains("d")) d = j["d"].get<int>();
  if (j.contains("n")) n = j["n"].get<int>();
  if (j.contains("demand_weights"))
    for (const auto& it : j["demand_weights"].items())
      weights.emplace_back(std::stoi(it.key()), it.value().get<double>());
  if (j.contains("q1")) q1 = j["q1"].get<std::vector<double>>();
  if (j.contains("q2")) q2 = j["q2"].get<std::vector<double>>();
  return from_fields(v, c, d, std::move(weights), std::move(q1), std::move(q2), n);
}

json segment_to_json(const CdfSegment& seg) {
  json s;
  s["lo"] = seg.lo;
  s["hi"] = seg.hi;
  if (seg.sampled()) {
    s["form"] = "grid";
    s["x"] = seg.grid_x;
    s["cdf"] = seg.grid_cdf;
  } else {
    s["form"] = "hyperbola";
    s["alpha"] = seg.alpha;
    s["beta"] = seg.beta;
    s["gamma"] = seg.gamma;
  }
  return s;
}

CdfSegment segment_from_json(const json& s) {
  CdfSegment seg;
  seg.lo = s.at("lo").get<double>();
  seg.hi = s.at("hi").get<double>();
  if (s.at("form") == "grid") {
    seg.grid_x = s.at("x").get<std::vector<double>>();
    seg.grid_cdf = s.at("cdf").get<std::vector<double>>();
  } else {
    seg.alpha = s.at("alpha").get<double>();
    seg.beta = s.at("beta").get<double>();
    seg.gamma = s.at("gamma").get<double>();
  }
  return seg;
}

json market_to_json(const MarketConfig& cfg) {
  json m;
  m["v"] = cfg.v;
  m["c"] = cfg.c;
  if (cfg.demand.is_deterministic()) {
    m["d"] = cfg.demand.atoms[0].first;
  } else {
    json w = json::object();
    for (const auto& [d, r] : cfg.demand.atoms) w[std::to_string(d)] = r;
    m["demand_weights"] = w;
  }
  m["q1"] = cfg.sellers[0].probs;
  m["q2"] = cfg.sellers[1].probs;
  return m;
}

MarketConfig market_from_json(const json& m) {
  MarketConfig cfg;
  cfg.v = m.at("v").get<double>();
  cfg.c = m.at("c").get<double>();
  if (m.contains("d")) {
    cfg.demand = DemandModel::deterministic(m.at("d").get<int>());
  } else {
    std::vector<std::pair<int, double>> w;
    for (const auto& it : m.at("demand_weights").items())
      w.emplace_back(std::stoi(it.key()), it.value().get<double>());
    cfg.demand = DemandModel::random(std::move(w));
  }
  cfg.sellers[0].probs = m.at("q1").get<std::vector<double>>();
  cfg.sellers[1].probs = m.at("q2").get<std::vector<double>>();
  return cfg;
}

json profile_to_json_obj(const StrategyProfile& profile) {
  json p;
  p["p_tilde"] = profile.p_tilde;
  p["thresholds"] = {profile.thresholds[0], profile.thresholds[1]};
  json sellers = json::array();
  for (int k = 0; k < 2; ++k) {
    json levels = json::array();
    for (int l = 1; l <= profile.seller(k).m(); ++l) {
      const LevelStrategy& lev = profile.seller(k).level(l);
      json jl;
      jl["level"] = l;
      jl["atom_at_v"] = lev.all_at_v() ? 1.0 : lev.atom_at_v;
      json segs = json::array();
      for (const auto& seg : lev.segments) segs.push_back(segment_to_json(seg));
      jl["segments"] = segs;
      levels.push_back(jl);
    }
    sellers.push_back(json{{"levels", levels}});
  }
  p["sellers"] = sellers;
  return p;
}

StrategyProfile profile_from_json_obj(const json& p) {
  StrategyProfile profile;
  profile.p_tilde = p.at("p_tilde").get<double>();
  profile.thresholds[0] = p.at("thresholds")[0].get<int>();
  profile.thresholds[1] = p.at("thresholds")[1].get<int>();
  for (int k = 0; k < 2; ++k) {
    const json& levels = p.at("sellers")[static_cast<std::size_t>(k)].at("levels");
    profile.seller(k).levels.resize(levels.size() + 1);
    for (const auto& jl : levels) {
      int l = jl.at("level").get<int>();
      LevelStrategy lev;
      for (const auto& js : jl.at("segments")) lev.segments.push_back(segment_from_json(js));
      double atom = jl.at("atom_at_v").get<double>();
      lev.atom_at_v = lev.segments.empty() ? 1.0 : atom;
      profile.seller(k).level(l) = std::move(lev);
    }
  }
  return profile;
}

json certificate_to_json_obj(const EquilibriumCertificate& cert) {
  json c;
  c["pass"] = cert.pass;
  c["max_gap"] = cert.max_gap;
  c["tol"] = cert.tol;
  json levels = json::array();
  for (const auto& lc : cert.levels) {
    levels.push_back(json{{"seller", lc.seller + 1},
                          {"level", lc.level},
                          {"equilibrium_utility", lc.equilibrium_utility},
                          {"best_response_utility", lc.best_response_utility},
                          {"best_response_price", lc.best_response_price},
                          {"gap", lc.gap},
                          {"rel_gap", lc.rel_gap},
                          {"pass", lc.pass}});
  }
  c["levels"] = levels;
  json inv = json::array();
  for (const auto& pc : cert.invariants.checks)
    inv.push_back(json{{"name", pc.name}, {"pass", pc.pass}, {"witness", pc.witness}});
  c["invariants"] = inv;
  return c;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
  std::optional<double> v, c;
  std::optional<int> d, n;
  std::vector<std::pair<int, double>> weights;
  std::vector<double> q1, q2;

  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = strip(t.substr(0, eq));
    std::string val = strip(t.substr(eq + 1));
    if (key == "v")
      v = parse_number(val, line_no, key);
    else if (key == "c")
      c = parse_number(val, line_no, key);
    else if (key == "d")
      d = static_cast<int>(parse_number(val, line_no, key));
    else if (key == "n")
      n = static_cast<int>(parse_number(val, line_no, key));
    else if (key == "q1")
      q1 = parse_vector(val, line_no, key);
    else if (key == "q2")
      q2 = parse_vector(val, line_no, key);
    else if (key == "demand_weights")
      weights = parse_weights(val, line_no);
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return from_fields(v, c, d, std::move(weights), std::move(q1), std::move(q2), n);
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  std::string t = strip(text);
  if (!t.empty() && t[0] == '{') {
    try {
      return parse_config_json(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("JSON config error: ") + e.what());
    }
  }
  return parse_config_text(text);
}

std::string profile_to_json(const MarketConfig& cfg, const StrategyProfile& profile) {
  json root;
  root["market"] = market_to_json(cfg);
  root["profile"] = profile_to_json_obj(profile);
  return root.dump(2) + "\n";
}

std::pair<MarketConfig, StrategyProfile> profile_from_json(const std::string& text) {
  json root = json::parse(text);
  MarketConfig cfg = market_from_json(root.at("market"));
  if (root.contains("profile")) return {cfg, profile_from_json_obj(root.at("profile"))};
  if (root.contains("equilibria") && !root.at("equilibria").empty())
    return {cfg, profile_from_json_obj(root.at("equilibria").at(0).at("profile"))};
  throw ConfigError("no profile found in file");
}

std::string certificate_to_json(const EquilibriumCertificate& cert) {
  return certificate_to_json_obj(cert).dump(2) + "\n";
}

std::string simulation_to_json(const SimulationReport& rep) {
  json r;
  r["rounds"] = rep.rounds;
  r["seed"] = rep.seed;
  json probes = json::array();
  for (const auto& p : rep.probes) {
    probes.push_back(json{{"seller", p.seller + 1},
                          {"level", p.level},
                          {"price", p.price},
                          {"samples", p.samples},
                          {"empirical_mean", p.empirical_mean},
                          {"std_error", p.std_error},
                          {"analytic", p.analytic},
                          {"z", p.z}});
  }
  r["probes"] = probes;
  r["no_data"] = rep.no_data;
  return r.dump(2) + "\n";
}

std::string simulation_to_csv(const SimulationReport& rep) {
  std::ostringstream os;
  os << "seller,level,price,samples,empirical_mean,std_error,analytic,z\n";
  for (const auto& p : rep.probes) {
    os << p.seller + 1 << ',' << p.level << ',' << format_real(p.price) << ',' << p.samples << ','
       << format_real(p.empirical_mean) << ',' << format_real(p.std_error) << ','
       << format_real(p.analytic) << ',' << format_real(p.z) << '\n';
  }
  return os.str();
}

std::string symmetric_result_to_json(const SymmetricNE& ne, const EquilibriumCertificate& cert) {
  json root;
  root["market"] = market_to_json(ne.effective);
  root["l_star"] = ne.l_star;
  root["monopoly"] = ne.monopoly;
  root["aggregated"] = ne.aggregated;
  root["p_tilde"] = ne.p_tilde();
  root["lower_bounds"] = ne.lower_bounds;
  root["utilities"] = ne.utilities;
  root["profile"] = profile_to_json_obj(ne.profile);
  root["certificate"] = certificate_to_json_obj(cert);
  return root.dump(2) + "\n";
}

std::string asymmetric_report_to_json(const AsymmetricReport& rep,
                                      const std::vector<EquilibriumCertificate>& certs) {
  json root;
  root["market"] = market_to_json(rep.effective);
  root["aggregated"] = rep.aggregated;
  root["monopoly"] = rep.monopoly;
  root["equilibrium_count"] = rep.equilibria.size();
  root["note"] = "all equilibria within the ordered-support structure class";
  json eqs = json::array();
  for (std::size_t i = 0; i < rep.equilibria.size(); ++i) {
    const auto& eq = rep.equilibria[i];
    json e;
    e["hypothesis"] = {{"l1", eq.solution.hyp.l1},
                       {"l2", eq.solution.hyp.l2},
                       {"interleaving", eq.solution.hyp.owners}};
    e["p_tilde"] = eq.solution.p_tilde;
    e["bounds"] = eq.solution.bounds;
    e["f1"] = eq.solution.f1;
    e["f2"] = eq.solution.f2;
    e["cross_cdf"] = eq.solution.cross_cdf;
    e["residual"] = eq.solution.residual;
    e["profile"] = profile_to_json_obj(eq.profile);
    if (i < certs.size()) e["certificate"] = certificate_to_json_obj(certs[i]);
    eqs.push_back(e);
  }
  root["equilibria"] = eqs;
  root["warnings"] = rep.warnings;
  return root.dump(2) + "\n";
}

std::string oligopoly_result_to_json(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                     const OligopolyGapReport& gaps) {
  json root;
  root["n"] = cfg.n;
  root["d"] = cfg.d;
  root["v"] = cfg.v;
  root["c"] = cfg.c;
  root["q"] = cfg.availability.probs;
  root["l_star"] = profile.l_star;
  root["monopoly"] = profile.monopoly;
  root["lower_bounds"] = profile.lower_bounds;
  root["utilities"] = profile.utilities;
  json levels = json::array();
  for (int l = 1; l <= profile.m(); ++l) {
    const LevelStrategy& lev = profile.levels[static_cast<std::size_t>(l)];
    json jl;
    jl["level"] = l;
    jl["atom_at_v"] = lev.all_at_v() ? 1.0 : lev.atom_at_v;
    json segs = json::array();
    for (const auto& seg : lev.segments) segs.push_back(segment_to_json(seg));
    jl["segments"] = segs;
    levels.push_back(jl);
  }
  root["levels"] = levels;
  json gl = json::array();
  for (const auto& g : gaps.levels) {
    gl.push_back(json{{"level", g.level},
                      {"proposed_utility", g.proposed_utility},
                      {"best_response_utility", g.best_response_utility},
                      {"best_response_price", g.best_response_price},
                      {"rel_diff", g.rel_diff}});
  }
  root["gaps"] = gl;
  root["max_rel_diff"] = gaps.max_rel_diff;
  return root.dump(2) + "\n";
}

}  // namespace duopoly
