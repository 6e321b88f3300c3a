#pragma once

#include "duopoly/types.hpp"

namespace duopoly {

/// One candidate equilibrium structure: thresholds for both sellers plus the
/// interleaving of their interior support bounds. owners[t] names the seller
/// whose bound sits at position t, counting downward from the cap; the shared
/// lowest bound is implicit.
struct StructureHypothesis {
  int l1 = 0;
  int l2 = 0;
  std::vector<int> owners;

  int interior_bounds() const { return static_cast<int>(owners.size()); }
};

/// Solved candidate for one hypothesis and jump branch.
struct CandidateSolution {
  StructureHypothesis hyp;
  double p_tilde = 0.0;
  std::vector<double> bounds;      // descending, aligned with hyp.owners
  double f1 = 0.0;                 // atom at the cap, seller 1, level l1+1
  double f2 = 0.0;
  std::vector<double> cross_cdf;   // opponent CDF value at each interior bound
  double residual = 0.0;           // infinity norm, scaled by (v - c)
  bool valid = false;
  std::string reject_reason;
};

struct AsymmetricEquilibrium {
  CandidateSolution solution;
  StrategyProfile profile;
};

struct HypothesisResult {
  StructureHypothesis hyp;
  std::vector<CandidateSolution> candidates;   // converged solutions, deduplicated
  bool structurally_infeasible = false;
  std::string infeasible_reason;
  bool converged_any = false;
  double best_residual = 0.0;                  // best residual over restarts
};

struct AsymmetricOptions {
  int restarts = 8;
  std::uint64_t seed = 0x5eedULL;
  int jobs = 0;
  int max_iterations = 120;
};

struct AsymmetricReport {
  MarketConfig effective;              // post aggregation and tail trimming
  bool aggregated = false;
  bool monopoly = false;
  std::vector<AsymmetricEquilibrium> equilibria;
  std::vector<HypothesisResult> hypotheses;
  std::vector<std::string> warnings;   // non-convergence is surfaced here
};

/// All (l1, l2, interleaving) structures compatible with the threshold rules:
/// l_k in [e_k, m_k - 1] and l1 + l2 in {d - 1, d}. Deterministic
/// lexicographic order. Empty in the monopoly regime.
std::vector<StructureHypothesis> enumerate_hypotheses(const MarketConfig& cfg);

/// Solves the equal-utility boundary system for one hypothesis: one equation
/// per seller per structural interval, jump branches f2 = 0 and f1 = 0 solved
/// separately, damped Newton with analytic Jacobian and jittered restarts.
HypothesisResult solve_hypothesis(const MarketConfig& cfg, const StructureHypothesis& hyp,
                                  const AsymmetricOptions& opt = {});

/// Builds the full per-level price distributions from a solved candidate by
/// inverting each seller's equal-utility relation on every structural
/// interval. Throws NumericError if the inversion is inconsistent.
StrategyProfile reconstruct_distributions(const MarketConfig& cfg, const CandidateSolution& sol);

/// End-to-end: aggregate if needed, enumerate, solve every hypothesis,
/// reconstruct and deduplicate all valid equilibria.
AsymmetricReport solve_asymmetric(const MarketConfig& cfg, const AsymmetricOptions& opt = {});

}  // namespace duopoly
