#pragma once

#include <optional>

#include "duopoly/asymmetric.hpp"
#include "duopoly/oligopoly.hpp"
#include "duopoly/simulate.hpp"
#include "duopoly/symmetric.hpp"
#include "duopoly/types.hpp"
#include "duopoly/verify.hpp"

namespace duopoly {

/// Parsed run configuration: q2 omitted means a symmetric market; n is only
/// meaningful for the oligopoly command.
struct ParsedConfig {
  MarketConfig market;
  std::optional<int> n;
};

/// Key-value grammar, one `key = value` per line, `#` comments.
/// Keys: v, c, d | demand_weights, q1, q2, n.
/// Vectors: [a, b, c]; demand weights: {d1: p1, d2: p2}.
ParsedConfig parse_config_text(const std::string& text);

/// Dispatches on content: JSON object (same keys) or the key-value grammar.
ParsedConfig load_config(const std::string& path);

std::string profile_to_json(const MarketConfig& cfg, const StrategyProfile& profile);
std::pair<MarketConfig, StrategyProfile> profile_from_json(const std::string& text);

std::string certificate_to_json(const EquilibriumCertificate& cert);
std::string simulation_to_json(const SimulationReport& rep);
std::string simulation_to_csv(const SimulationReport& rep);

std::string symmetric_result_to_json(const SymmetricNE& ne, const EquilibriumCertificate& cert);
std::string asymmetric_report_to_json(const AsymmetricReport& rep,
                                      const std::vector<EquilibriumCertificate>& certs);
std::string oligopoly_result_to_json(const OligopolyConfig& cfg, const OligopolyProfile& profile,
                                     const OligopolyGapReport& gaps);

/// Exact decimal text for a double (17 significant digits).
std::string format_real(double x);

}  // namespace duopoly
