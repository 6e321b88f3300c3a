#include "duopoly/asymmetric.hpp"

#include <exception>
#include <functional>
#include <sstream>

#include "duopoly/evaluate.hpp"
#include "duopoly/simulate.hpp"
#include "duopoly/symmetric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace duopoly {

namespace {

// ---------------------------------------------------------------------------
// Structural layout of one hypothesis.
//
// Positions count downward in price: position 0 is the cap, positions 1..T
// are the interior bounds (aligned with owners), position T+1 is the shared
// lowest bound. Interval t lies between position t (upper) and t+1 (lower).
// ---------------------------------------------------------------------------

struct Layout {
  int l[2] = {0, 0};
  int m[2] = {0, 0};
  int T = 0;                        // interior bound count
  std::vector<int> owners;          // size T
  std::vector<std::array<int, 2>> active;  // per interval t = 0..T
  int free_seller = 0;              // which seller's cap atom is a variable

  int n_vars() const { return 2 * T + 2; }
  int var_bound(int t) const { return t; }          // t in [0, T)
  int var_ptilde() const { return T; }
  int var_f() const { return T + 1; }
  int var_phi(int t) const { return T + 2 + t; }    // t in [0, T)

  // position of level j's segment ends for seller s
  int pos_top(int s, int j) const {
    int r = j - l[s] - 1;  // crossings above this segment
    if (r == 0) return 0;
    int seen = 0;
    for (int t = 0; t < T; ++t)
      if (owners[static_cast<std::size_t>(t)] == s && ++seen == r) return t + 1;
    return 0;
  }
  int pos_bot(int s, int j) const {
    int r = j - l[s];
    int seen = 0;
    for (int t = 0; t < T; ++t)
      if (owners[static_cast<std::size_t>(t)] == s && ++seen == r) return t + 1;
    return T + 1;
  }
};

Layout make_layout(const MarketConfig& cfg, const StructureHypothesis& hyp, int free_seller) {
  Layout lay;
  lay.l[0] = hyp.l1;
  lay.l[1] = hyp.l2;
  lay.m[0] = cfg.m(0);
  lay.m[1] = cfg.m(1);
  lay.owners = hyp.owners;
  lay.T = hyp.interior_bounds();
  lay.free_seller = free_seller;
  lay.active.resize(static_cast<std::size_t>(lay.T) + 1);
  int cnt[2] = {0, 0};
  for (int t = 0; t <= lay.T; ++t) {
    lay.active[static_cast<std::size_t>(t)] = {lay.l[0] + 1 + cnt[0], lay.l[1] + 1 + cnt[1]};
    if (t < lay.T) ++cnt[lay.owners[static_cast<std::size_t>(t)]];
  }
  return lay;
}

// Linear form a0 + sum coef_i * z_i in the Newton variables.
struct LinForm {
  double a0 = 0.0;
  int var = -1;
  double coef = 0.0;
};

// CDF of seller s, level j, evaluated at the anchor price of `pos` (left
// limit at the cap). Returns a linear form in the unknowns.
LinForm structural_cdf(const Layout& lay, int s, int j, int pos) {
  if (j <= lay.l[s]) return {0.0, -1, 0.0};
  if (pos == 0) {
    if (j == lay.l[s] + 1) {
      if (s == lay.free_seller) return {1.0, lay.var_f(), -1.0};
      return {1.0, -1, 0.0};
    }
    return {1.0, -1, 0.0};
  }
  if (pos >= lay.pos_bot(s, j)) return {0.0, -1, 0.0};
  if (pos <= lay.pos_top(s, j)) return {1.0, -1, 0.0};
  return {0.0, lay.var_phi(pos - 1), 1.0};
}

// CDF of seller s, level j, at an interior point of interval t. Only levels
// other than s's active one are asked for; those sit fully below (1) or
// fully above (0) the interval.
double interior_cdf_const(const Layout& lay, int s, int j, int t) {
  if (j <= lay.l[s]) return 0.0;
  if (j > lay.active[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)]) return 1.0;
  return 0.0;
}

// Expected units as a linear function of the unknown CDF symbols.
struct UnitsForm {
  double a0 = 0.0;
  std::vector<double> coef;  // dense over variables
  explicit UnitsForm(int n) : coef(static_cast<std::size_t>(n), 0.0) {}
  double eval(const std::vector<double>& z) const {
    double s = a0;
    for (std::size_t i = 0; i < coef.size(); ++i) s += coef[i] * z[i];
    return s;
  }
};

UnitsForm units_at_anchor(const MarketConfig& cfg, const Layout& lay, int k, int level, int pos) {
  UnitsForm form(lay.n_vars());
  const int ko = MarketConfig::other(k);
  const AvailabilityDistribution& q = cfg.sellers[static_cast<std::size_t>(ko)];
  for (const auto& [d, r] : cfg.demand.atoms) {
    if (r == 0.0) continue;
    for (int j = 0; j <= q.max_units(); ++j) {
      const double qj = q[j];
      if (qj == 0.0) continue;
      const double win = std::min(level, d);
      if (j == 0) {
        form.a0 += r * qj * win;
        continue;
      }
      const double lose = std::min(level, std::max(d - j, 0));
      LinForm pb = structural_cdf(lay, ko, j, pos);
      // win - pb * (win - lose)
      form.a0 += r * qj * (win - pb.a0 * (win - lose));
      if (pb.var >= 0)
        form.coef[static_cast<std::size_t>(pb.var)] -= r * qj * pb.coef * (win - lose);
    }
  }
  return form;
}

// Sensitivity of seller k's units (level i) to the opponent's level-j CDF.
double cdf_weight(const MarketConfig& cfg, int k, int i, int j) {
  const AvailabilityDistribution& q = cfg.sellers[static_cast<std::size_t>(MarketConfig::other(k))];
  double w = 0.0;
  for (const auto& [d, r] : cfg.demand.atoms)
    w += r * q[j] * (std::min(i, d) - std::min(i, std::max(d - j, 0)));
  return w;
}

struct EquationSystem {
  const MarketConfig* cfg = nullptr;
  Layout lay;
  // per equation: anchors and level
  struct Eq {
    int seller = 0, level = 0;
    int pos_lo = 0, pos_hi = 0;
    UnitsForm units_lo, units_hi;
    Eq(int n) : units_lo(n), units_hi(n) {}
  };
  std::vector<Eq> eqs;

  double price_at(int pos, const std::vector<double>& z) const {
    if (pos == 0) return cfg->v;
    if (pos == lay.T + 1) return z[static_cast<std::size_t>(lay.var_ptilde())];
    return z[static_cast<std::size_t>(pos - 1)];
  }
  int price_var(int pos) const {
    if (pos == 0) return -1;
    if (pos == lay.T + 1) return lay.var_ptilde();
    return lay.var_bound(pos - 1);
  }

  void residual(const std::vector<double>& z, std::vector<double>& r) const {
    const double c = cfg->c;
    r.assign(eqs.size(), 0.0);
    for (std::size_t e = 0; e < eqs.size(); ++e) {
      const Eq& q = eqs[e];
      const double xlo = price_at(q.pos_lo, z), xhi = price_at(q.pos_hi, z);
      r[e] = (xlo - c) * q.units_lo.eval(z) - (xhi - c) * q.units_hi.eval(z);
    }
  }

  void jacobian(const std::vector<double>& z, std::vector<double>& jac) const {
    const int n = lay.n_vars();
    const double c = cfg->c;
    jac.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t e = 0; e < eqs.size(); ++e) {
      const Eq& q = eqs[e];
      const double xlo = price_at(q.pos_lo, z), xhi = price_at(q.pos_hi, z);
      double* row = &jac[e * static_cast<std::size_t>(n)];
      const int vlo = price_var(q.pos_lo), vhi = price_var(q.pos_hi);
      if (vlo >= 0) row[vlo] += q.units_lo.eval(z);
      if (vhi >= 0) row[vhi] -= q.units_hi.eval(z);
      for (int i = 0; i < n; ++i) {
        row[i] += (xlo - c) * q.units_lo.coef[static_cast<std::size_t>(i)];
        row[i] -= (xhi - c) * q.units_hi.coef[static_cast<std::size_t>(i)];
      }
    }
  }
};

EquationSystem build_system(const MarketConfig& cfg, const Layout& lay) {
  EquationSystem sys;
  sys.cfg = &cfg;
  sys.lay = lay;
  for (int t = 0; t <= lay.T; ++t) {
    for (int k = 0; k < 2; ++k) {
      EquationSystem::Eq eq(lay.n_vars());
      eq.seller = k;
      eq.level = lay.active[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
      eq.pos_hi = t;
      eq.pos_lo = t + 1;
      eq.units_lo = units_at_anchor(cfg, lay, k, eq.level, eq.pos_lo);
      eq.units_hi = units_at_anchor(cfg, lay, k, eq.level, eq.pos_hi);
      sys.eqs.push_back(std::move(eq));
    }
  }
  return sys;
}

// Dense solve with partial pivoting; returns false when singular.
bool solve_linear(std::vector<double> a, std::vector<double> b, int n, std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
    for (int r2 = col + 1; r2 < n; ++r2) {
      double m = std::abs(a[static_cast<std::size_t>(r2) * n + col]);
      if (m > best) {
        best = m;
        piv = r2;
      }
    }
    if (best < 1e-14) return false;
    if (piv != col) {
      for (int j = 0; j < n; ++j)
        std::swap(a[static_cast<std::size_t>(piv) * n + j], a[static_cast<std::size_t>(col) * n + j]);
      std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
    }
    const double d = a[static_cast<std::size_t>(col) * n + col];
    for (int r2 = col + 1; r2 < n; ++r2) {
      const double f = a[static_cast<std::size_t>(r2) * n + col] / d;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j)
        a[static_cast<std::size_t>(r2) * n + j] -= f * a[static_cast<std::size_t>(col) * n + j];
      b[static_cast<std::size_t>(r2)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r2 = n - 1; r2 >= 0; --r2) {
    double s = b[static_cast<std::size_t>(r2)];
    for (int j = r2 + 1; j < n; ++j) s -= a[static_cast<std::size_t>(r2) * n + j] * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(r2)] = s / a[static_cast<std::size_t>(r2) * n + r2];
  }
  return true;
}

double inf_norm(const std::vector<double>& r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

double sq_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

struct NewtonOutcome {
  bool converged = false;
  std::vector<double> z;
  double residual = 0.0;
};

NewtonOutcome newton_solve(const EquationSystem& sys, std::vector<double> z, int max_iter,
                           double tol_abs) {
  const int n = sys.lay.n_vars();
  std::vector<double> r, jac, dz, r2;
  sys.residual(z, r);
  int polish = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double rn = inf_norm(r);
    // polish a few extra steps past the tolerance so downstream CDF
    // reconstruction sees near machine-precision anchors
    if (rn <= tol_abs && ++polish > 3) return {true, z, rn};
    if (rn == 0.0) return {true, z, rn};
    sys.jacobian(z, jac);
    if (!solve_linear(jac, r, n, dz)) {
      // ridge fallback for (near) singular Jacobians
      std::vector<double> jr = jac;
      double scale = 0.0;
      for (double x : jac) scale = std::max(scale, std::abs(x));
      for (int i = 0; i < n; ++i) jr[static_cast<std::size_t>(i) * n + i] += 1e-10 * (1.0 + scale);
      if (!solve_linear(jr, r, n, dz)) return {rn <= tol_abs, z, rn};
    }
    double alpha = 1.0;
    const double base = sq_norm(r);
    bool stepped = false;
    std::vector<double> znew(z);
    for (int ls = 0; ls < 40; ++ls) {
      for (int i = 0; i < n; ++i)
        znew[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] - alpha * dz[static_cast<std::size_t>(i)];
      sys.residual(znew, r2);
      if (sq_norm(r2) < base * (1.0 - 1e-4 * alpha)) {
        z = znew;
        r = r2;
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) {
      const double rn2 = inf_norm(r);
      return {rn2 <= tol_abs, z, rn2};
    }
  }
  sys.residual(z, r);
  const double rn = inf_norm(r);
  return {rn <= tol_abs, z, rn};
}

// ---------------------------------------------------------------------------
// Effective configuration: aggregate the utility-equivalent tail, trim
// trailing zero-probability levels.
// ---------------------------------------------------------------------------

struct Effective {
  MarketConfig cfg;
  bool aggregated = false;
};

Effective make_effective(const MarketConfig& cfg) {
  cfg.validate();
  Effective eff{cfg, false};
  const int dmax = cfg.demand.max_demand();
  for (int k = 0; k < 2; ++k) {
    AggregatedAvailability agg =
        aggregate_for_small_demand(cfg.sellers[static_cast<std::size_t>(k)], dmax);
    if (agg.aggregated) {
      eff.cfg.sellers[static_cast<std::size_t>(k)] = agg.effective;
      eff.aggregated = true;
    }
    auto& probs = eff.cfg.sellers[static_cast<std::size_t>(k)].probs;
    while (probs.size() > 2 && probs.back() == 0.0) {
      probs.pop_back();
      eff.aggregated = true;
    }
  }
  const int mmax = std::max(eff.cfg.m(0), eff.cfg.m(1));
  if (eff.cfg.demand.floor_demand() < mmax)
    throw ConfigError("random demand floor below max availability is not supported");
  return eff;
}

std::string hyp_name(const StructureHypothesis& hyp) {
  std::ostringstream os;
  os << "(l1=" << hyp.l1 << ", l2=" << hyp.l2 << ", order=";
  for (int o : hyp.owners) os << (o == 0 ? '1' : '2');
  os << ")";
  return os.str();
}

}  // namespace

std::vector<StructureHypothesis> enumerate_hypotheses(const MarketConfig& cfg) {
  cfg.validate();
  const int d = cfg.demand.floor_demand();
  const int m1 = cfg.m(0), m2 = cfg.m(1);
  if (d < std::max(m1, m2))
    throw ConfigError("enumerate_hypotheses needs demand at or above max availability; aggregate first");

  std::vector<StructureHypothesis> out;
  if (cfg.monopoly_regime()) return out;

  const int e1 = cfg.guaranteed_sale_level(0);
  const int e2 = cfg.guaranteed_sale_level(1);
  for (int l1 = e1; l1 <= m1 - 1; ++l1) {
    for (int l2 = e2; l2 <= m2 - 1; ++l2) {
      const int sum = l1 + l2;
      if (sum != d - 1 && sum != d) continue;
      const int a1 = m1 - l1 - 1, a2 = m2 - l2 - 1;
      // all interleavings of a1 bounds of seller 1 with a2 of seller 2
      std::vector<int> owners;
      std::vector<StructureHypothesis> local;
      std::function<void(int, int)> rec = [&](int r1, int r2) {
        if (r1 == 0 && r2 == 0) {
          local.push_back({l1, l2, owners});
          return;
        }
        if (r1 > 0) {
          owners.push_back(0);
          rec(r1 - 1, r2);
          owners.pop_back();
        }
        if (r2 > 0) {
          owners.push_back(1);
          rec(r1, r2 - 1);
          owners.pop_back();
        }
      };
      rec(a1, a2);
      out.insert(out.end(), local.begin(), local.end());
    }
  }
  return out;
}

HypothesisResult solve_hypothesis(const MarketConfig& cfg, const StructureHypothesis& hyp,
                                  const AsymmetricOptions& opt) {
  HypothesisResult res;
  res.hyp = hyp;
  res.best_residual = 1e300;
  const int d_floor = cfg.demand.floor_demand();
  const double span = cfg.v - cfg.c;

  // structural feasibility: overlapping segments must jointly exceed demand
  // and the opponent's active level must matter with positive probability
  {
    Layout probe = make_layout(cfg, hyp, 0);
    for (int t = 0; t <= probe.T; ++t) {
      const int i1 = probe.active[static_cast<std::size_t>(t)][0];
      const int i2 = probe.active[static_cast<std::size_t>(t)][1];
      if (i1 + i2 <= d_floor) {
        res.structurally_infeasible = true;
        res.infeasible_reason = "overlapping levels " + std::to_string(i1) + "+" +
                                std::to_string(i2) + " do not exceed demand";
        return res;
      }
      if (cdf_weight(cfg, 0, i1, i2) <= 0.0 || cdf_weight(cfg, 1, i2, i1) <= 0.0) {
        res.structurally_infeasible = true;
        res.infeasible_reason = "zero-probability level cannot carry a support segment";
        return res;
      }
    }
  }

  const double tol_abs = 1e-12 * span * std::max(1, cfg.m(0) + cfg.m(1));

  for (int branch = 0; branch < 2; ++branch) {  // branch 0: f1 free, f2 = 0
    Layout lay = make_layout(cfg, hyp, branch);
    EquationSystem sys = build_system(cfg, lay);
    const int T = lay.T;
    const int n = lay.n_vars();

    SplitMix64 rng(opt.seed ^ (0x517cc1b727220a95ULL * (static_cast<std::uint64_t>(branch) + 1)));
    for (int restart = 0; restart < opt.restarts; ++restart) {
      std::vector<double> z(static_cast<std::size_t>(n), 0.0);
      const double lo_lim = cfg.c + 0.1 * span;
      if (restart == 0) {
        for (int t = 0; t < T; ++t)
          z[static_cast<std::size_t>(t)] = cfg.v - (cfg.v - lo_lim) * (t + 1) / (T + 2.0);
        z[static_cast<std::size_t>(lay.var_ptilde())] = cfg.v - (cfg.v - lo_lim) * (T + 1) / (T + 2.0);
        z[static_cast<std::size_t>(lay.var_f())] = 0.05;
        for (int t = 0; t < T; ++t) z[static_cast<std::size_t>(lay.var_phi(t))] = 0.5;
      } else {
        std::vector<double> pts;
        for (int t = 0; t <= T; ++t)
          pts.push_back(lo_lim + (cfg.v - 1e-3 * span - lo_lim) * rng.uniform());
        std::sort(pts.begin(), pts.end(), std::greater<double>());
        for (int t = 0; t < T; ++t) z[static_cast<std::size_t>(t)] = pts[static_cast<std::size_t>(t)];
        z[static_cast<std::size_t>(lay.var_ptilde())] = pts[static_cast<std::size_t>(T)];
        z[static_cast<std::size_t>(lay.var_f())] = 0.3 * rng.uniform();
        for (int t = 0; t < T; ++t)
          z[static_cast<std::size_t>(lay.var_phi(t))] = rng.uniform();
      }

      NewtonOutcome nr = newton_solve(sys, std::move(z), opt.max_iterations, tol_abs);
      res.best_residual = std::min(res.best_residual, nr.residual / span);
      if (!nr.converged) continue;
      res.converged_any = true;

      CandidateSolution cand;
      cand.hyp = hyp;
      cand.p_tilde = nr.z[static_cast<std::size_t>(lay.var_ptilde())];
      cand.bounds.assign(nr.z.begin(), nr.z.begin() + T);
      double f = nr.z[static_cast<std::size_t>(lay.var_f())];
      if (std::abs(f) <= kMassTol) f = 0.0;
      cand.f1 = branch == 0 ? f : 0.0;
      cand.f2 = branch == 1 ? f : 0.0;
      cand.cross_cdf.assign(nr.z.begin() + T + 2, nr.z.end());
      cand.residual = nr.residual / span;
      cand.valid = true;

      // validity flags
      auto reject = [&cand](const std::string& why) {
        cand.valid = false;
        if (cand.reject_reason.empty()) cand.reject_reason = why;
      };
      const double ptol = kPriceTol * std::max(1.0, span);
      double prev = cfg.v;
      for (int t = 0; t < T; ++t) {
        if (cand.bounds[static_cast<std::size_t>(t)] > prev + ptol) reject("bounds out of order");
        prev = cand.bounds[static_cast<std::size_t>(t)];
      }
      if (cand.p_tilde > prev + ptol) reject("lowest bound above an interior bound");
      if (!(cand.p_tilde > cfg.c + ptol)) reject("lowest bound not above cost");
      for (int s = 0; s < 2; ++s) {
        // same-seller segments must have positive length
        double top = cfg.v;
        for (int t = 0; t < T; ++t) {
          if (lay.owners[static_cast<std::size_t>(t)] != s) continue;
          if (cand.bounds[static_cast<std::size_t>(t)] >= top - ptol)
            reject("degenerate segment for one seller");
          top = cand.bounds[static_cast<std::size_t>(t)];
        }
        if (cand.p_tilde >= top - ptol) reject("degenerate lowest segment");
      }
      for (double phi : cand.cross_cdf)
        if (phi < -kMassTol || phi > 1.0 + kMassTol) reject("cross CDF value outside [0,1]");
      if (f < -kMassTol || f >= 1.0 - kMassTol) reject("cap atom outside [0,1)");

      // an atom at the cap must not tie against opponent mass it cannot beat
      if (f > kMassTol) {
        const int s = lay.free_seller;
        const int ko = MarketConfig::other(s);
        const int i = lay.l[s] + 1;
        double harm = 0.0;
        for (int j = std::max(1, d_floor - i + 1); j <= lay.l[ko]; ++j)
          harm += cfg.sellers[static_cast<std::size_t>(ko)][j];
        if (harm > 0.0) reject("cap atom would lose rationing ties");
      }

      if (cand.valid) {
        // cross values must decrease with depth within one opponent segment
        for (int s = 0; s < 2 && cand.valid; ++s) {
          for (int j = lay.l[s] + 1; j <= lay.m[s] && cand.valid; ++j) {
            double prev_phi = 1.0;
            for (int p2 = lay.pos_top(s, j) + 1; p2 < lay.pos_bot(s, j); ++p2) {
              if (lay.owners[static_cast<std::size_t>(p2 - 1)] == s) continue;
              double phi = cand.cross_cdf[static_cast<std::size_t>(p2 - 1)];
              if (phi > prev_phi + kMassTol) reject("cross CDF not monotone within a segment");
              prev_phi = phi;
            }
          }
        }
      }

      res.candidates.push_back(std::move(cand));
    }
  }

  // deduplicate across branches and restarts
  std::vector<CandidateSolution> unique_c;
  for (auto& c : res.candidates) {
    bool dup = false;
    for (const auto& u : unique_c) {
      if (std::abs(c.p_tilde - u.p_tilde) > 1e-6 * span || std::abs(c.f1 - u.f1) > 1e-6 ||
          std::abs(c.f2 - u.f2) > 1e-6)
        continue;
      bool same = true;
      for (std::size_t i = 0; i < c.bounds.size(); ++i)
        if (std::abs(c.bounds[i] - u.bounds[i]) > 1e-6 * span) same = false;
      if (same) {
        dup = true;
        break;
      }
    }
    if (!dup) unique_c.push_back(std::move(c));
  }
  res.candidates = std::move(unique_c);
  return res;
}

StrategyProfile reconstruct_distributions(const MarketConfig& cfg, const CandidateSolution& sol) {
  const Layout lay = make_layout(cfg, sol.hyp, sol.f2 > 0.0 ? 1 : 0);
  const int T = lay.T;
  const double span = cfg.v - cfg.c;

  std::vector<double> z(static_cast<std::size_t>(lay.n_vars()), 0.0);
  for (int t = 0; t < T; ++t) z[static_cast<std::size_t>(t)] = sol.bounds[static_cast<std::size_t>(t)];
  z[static_cast<std::size_t>(lay.var_ptilde())] = sol.p_tilde;
  z[static_cast<std::size_t>(lay.var_f())] = sol.f1 > 0.0 ? sol.f1 : sol.f2;
  for (int t = 0; t < T; ++t)
    z[static_cast<std::size_t>(lay.var_phi(t))] = sol.cross_cdf[static_cast<std::size_t>(t)];

  auto price_at = [&](int pos) {
    if (pos == 0) return cfg.v;
    if (pos == T + 1) return sol.p_tilde;
    return sol.bounds[static_cast<std::size_t>(pos - 1)];
  };

  // per-level utility constants, anchored at each segment's lower end
  std::array<std::vector<double>, 2> util;
  for (int k = 0; k < 2; ++k) {
    util[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(lay.m[k]) + 1, 0.0);
    for (int j = lay.l[k] + 1; j <= lay.m[k]; ++j) {
      const int pos = lay.pos_bot(k, j);
      UnitsForm u = units_at_anchor(cfg, lay, k, j, pos);
      util[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
          (price_at(pos) - cfg.c) * u.eval(z);
    }
  }

  StrategyProfile profile;
  for (int k = 0; k < 2; ++k) {
    profile.seller(k).levels.resize(static_cast<std::size_t>(lay.m[k]) + 1);
    for (int l = 1; l <= lay.l[k]; ++l) profile.seller(k).level(l) = LevelStrategy::at_cap();
  }

  // walk intervals from the bottom so segment pieces assemble in ascending
  // price order
  for (int t = T; t >= 0; --t) {
    const double lo = price_at(t + 1);
    const double hi = price_at(t);
    for (int k = 0; k < 2; ++k) {
      const int i = lay.active[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
      const int ko = MarketConfig::other(k);
      const int j = lay.active[static_cast<std::size_t>(t)][static_cast<std::size_t>(ko)];
      // invert seller k's equal-utility relation for the opponent's CDF
      double a_const = 0.0;
      for (const auto& [d, r] : cfg.demand.atoms) {
        for (int g = 0; g <= lay.m[ko]; ++g) {
          const double qg = cfg.sellers[static_cast<std::size_t>(ko)][g];
          if (qg == 0.0) continue;
          const double win = std::min(i, d);
          if (g == 0) {
            a_const += r * qg * win;
            continue;
          }
          const double lose = std::min(i, std::max(d - g, 0));
          double pb = (g == j) ? 0.0 : interior_cdf_const(lay, ko, g, t);
          a_const += r * qg * (win - pb * (win - lose));
        }
      }
      const double w = cdf_weight(cfg, k, i, j);
      if (w <= 0.0) throw NumericError("cannot invert utility for a zero-weight level");

      CdfSegment seg;
      seg.lo = lo;
      seg.hi = hi;
      seg.alpha = a_const;
      seg.beta = util[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      seg.gamma = w;
      profile.seller(ko).level(j).segments.push_back(seg);
    }
  }

  profile.seller(0).level(lay.l[0] + 1).atom_at_v = sol.f1;
  profile.seller(1).level(lay.l[1] + 1).atom_at_v = sol.f2;
  profile.thresholds = {lay.l[0], lay.l[1]};
  profile.p_tilde = sol.p_tilde;

  // consistency: pieces must chain continuously, start at 0, end at 1 - atom
  for (int k = 0; k < 2; ++k) {
    for (int j = lay.l[k] + 1; j <= lay.m[k]; ++j) {
      LevelStrategy& lev = profile.seller(k).level(j);
      if (lev.segments.empty()) throw NumericError("level reconstructed without segments");
      double cum = 0.0;
      for (const auto& seg : lev.segments) {
        if (std::abs(seg.value_at_lo(cfg.c) - cum) > 1e-6)
          throw NumericError("reconstructed CDF is discontinuous");
        if (seg.value_at_hi(cfg.c) < cum - 1e-9) throw NumericError("reconstructed CDF decreases");
        cum = seg.value_at_hi(cfg.c);
      }
      if (std::abs(cum + lev.atom_at_v - 1.0) > 1e-7)
        throw NumericError("reconstructed CDF does not reach full mass");
      (void)span;
    }
  }
  return profile;
}

AsymmetricReport solve_asymmetric(const MarketConfig& cfg, const AsymmetricOptions& opt) {
  Effective eff = make_effective(cfg);
  AsymmetricReport rep;
  rep.effective = eff.cfg;
  rep.aggregated = eff.aggregated;

  if (eff.cfg.monopoly_regime() || eff.cfg.sellers[0][0] >= 1.0 - kNormTol ||
      eff.cfg.sellers[1][0] >= 1.0 - kNormTol) {
    rep.monopoly = true;
    AsymmetricEquilibrium eq;
    eq.profile = monopoly_profile(eff.cfg);
    eq.solution.p_tilde = eff.cfg.v;
    eq.solution.valid = true;
    rep.equilibria.push_back(std::move(eq));
    return rep;
  }

  std::vector<StructureHypothesis> hyps = enumerate_hypotheses(eff.cfg);
  rep.hypotheses.resize(hyps.size());

  std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    num_threads(opt.jobs > 0 ? opt.jobs : omp_get_max_threads())
#endif
  for (long long h = 0; h < static_cast<long long>(hyps.size()); ++h) {
    try {
      rep.hypotheses[static_cast<std::size_t>(h)] =
          solve_hypothesis(eff.cfg, hyps[static_cast<std::size_t>(h)], opt);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  for (const auto& hr : rep.hypotheses) {
    if (!hr.structurally_infeasible && !hr.converged_any && hr.candidates.empty() &&
        hr.best_residual > 1e-8)
      rep.warnings.push_back("no convergence for hypothesis " + hyp_name(hr.hyp) +
                             ", best residual " + std::to_string(hr.best_residual));
    for (const auto& cand : hr.candidates) {
      if (!cand.valid) continue;
      AsymmetricEquilibrium eq;
      eq.solution = cand;
      try {
        eq.profile = reconstruct_distributions(eff.cfg, cand);
        validate_profile(eff.cfg, eq.profile);
      } catch (const std::exception& e) {
        rep.warnings.push_back("candidate for " + hyp_name(hr.hyp) + " rejected: " + e.what());
        continue;
      }
      bool dup = false;
      for (const auto& prev : rep.equilibria) {
        if (prev.profile.thresholds != eq.profile.thresholds) continue;
        if (std::abs(prev.profile.p_tilde - eq.profile.p_tilde) > 1e-6 * (cfg.v - cfg.c)) continue;
        bool same = true;
        for (int k = 0; k < 2 && same; ++k)
          for (int l = 1; l <= eff.cfg.m(k) && same; ++l) {
            const LevelStrategy& a = prev.profile.seller(k).level(l);
            const LevelStrategy& b = eq.profile.seller(k).level(l);
            if (std::abs(a.support_lo(eff.cfg.v) - b.support_lo(eff.cfg.v)) >
                    1e-6 * (cfg.v - cfg.c) ||
                std::abs(a.atom_at_v - b.atom_at_v) > 1e-6)
              same = false;
          }
        if (same) {
          dup = true;
          break;
        }
      }
      if (!dup) rep.equilibria.push_back(std::move(eq));
    }
  }
  return rep;
}

}  // namespace duopoly
