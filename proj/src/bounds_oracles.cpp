#include "predrisk/bounds_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "predrisk/errors.hpp"
#include "predrisk/estimators.hpp"
#include "predrisk/kl_engine.hpp"
#include "predrisk/mc.hpp"
#include "predrisk/rng.hpp"

namespace predrisk {

namespace {

void require_positive_r(double r, const char* who) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw ValidationError(std::string(who) + ": r must be positive and finite");
}

double checked_lambda(const LambdaFamily& family, int n, const char* who) {
  if (!family) throw ValidationError(std::string(who) + ": lambda family is empty");
  const double lam = family(n);
  if (!std::isfinite(lam) || lam < 0.0)
    throw ValidationError(std::string(who) + ": lambda(" + std::to_string(n) +
                          ") must be finite and >= 0");
  return lam;
}

std::uint64_t cell_tag(std::uint64_t group, std::uint64_t index) {
  return (group << 32) | (index & 0xffffffffull);
}

}  // namespace

double bound_k1(int n) {
  if (n < 5) throw ValidationError("bound_k1: constant k1 requires n >= 5");
  const double d = n;
  return 3.0 / ((1.0 - 2.0 / d) * (1.0 - 2.0 / d) * (1.0 - 4.0 / d));
}

double bound_k2(int n) {
  if (n < 10) throw ValidationError("bound_k2: constant k2 requires n >= 10");
  const double d = n;
  double prod = 1.0;
  for (int i = 1; i <= 4; ++i) prod *= 1.0 - (2.0 * i + 1.0) / d;
  const double e_n = std::sqrt(3.0) / std::sqrt(prod);
  const double root = std::sqrt(std::log(d) / d);
  const double f_n = 1.0 / ((1.0 - root) * (1.0 - root));
  return std::max(e_n, f_n);
}

double bound_k3(int n) {
  if (n < 3) throw ValidationError("bound_k3: constant k3 requires n >= 3");
  const double d = n;
  return (std::sqrt(2.0) + 5.0 / std::sqrt(d)) / (1.0 - 2.0 / d);
}

BoundConstants constants(int n) {
  if (n < 3) throw ValidationError("constants: constant k3 requires n >= 3");
  if (n < 5) throw ValidationError("constants: constant k1 requires n >= 5");
  if (n < 10) throw ValidationError("constants: constant k2 requires n >= 10");
  BoundConstants c;
  c.n = n;
  const double d = n;
  c.a_n = 3.0 / ((1.0 - 1.0 / (d - 2.0)) * (1.0 - 1.0 / (d - 2.0)));
  c.l_n = 3.0 / ((1.0 - 2.0 / d) * (1.0 - 2.0 / d));
  double prod = 1.0;
  for (int i = 1; i <= 4; ++i) prod *= 1.0 - (2.0 * i + 1.0) / d;
  c.e_n = std::sqrt(3.0) / std::sqrt(prod);
  const double root = std::sqrt(std::log(d) / d);
  c.f_n = 1.0 / ((1.0 - root) * (1.0 - root));
  c.k1 = bound_k1(n);
  c.k2 = std::max(c.e_n, c.f_n);
  c.k3 = bound_k3(n);
  c.b_n = 4.0 * (2.0 + c.a_n + c.k2);
  return c;
}

double theorem2_deviation_bound(int n, double r) {
  require_positive_r(r, "theorem2_deviation_bound");
  const BoundConstants c = constants(n);
  return 0.5 * (std::sqrt(c.a_n * c.b_n) * std::pow(r, -1.5) +
                (c.a_n + c.b_n + c.l_n) / (r * r) + c.a_n / (r * r * r));
}

double theorem2_if_bound(int n, double r) {
  require_positive_r(r, "theorem2_if_bound");
  const BoundConstants c = constants(n);
  return 0.5 * (std::sqrt(c.a_n * c.b_n) * std::pow(r, -1.5) + (c.a_n + c.b_n) / (r * r) +
                c.a_n / (r * r * r));
}

double envelope_bound(double r) {
  require_positive_r(r, "envelope_bound");
  return 5.3 * std::pow(r, -1.5) + 19.6 / (r * r) + 1.7 / (r * r * r);
}

double oracle_bound_paper(double r) {
  require_positive_r(r, "oracle_bound_paper");
  return 0.1 / r + 5.3 * std::pow(r, -1.5) + 18.1 / (r * r) + 1.7 / (r * r * r);
}

double oracle_bound_xu(double r) {
  require_positive_r(r, "oracle_bound_xu");
  return 2.0 / r + 5.0 / (r * r) + 4.0 / (r * r * r);
}

double suboptimality_factor(double r) {
  require_positive_r(r, "suboptimality_factor");
  return 1.0 + 1.0 / r;
}

double inv_chi2_variance_exact(int n) {
  if (n < 5) throw ValidationError("inv_chi2_variance_exact: needs n >= 5");
  const double d = n;
  return 2.0 / ((d - 2.0) * (d - 2.0) * (d - 4.0));
}

InverseMomentReport check_lemma_a1(const std::vector<int>& n_grid, const LambdaFamily& lambda,
                                   const McConfig& mc) {
  if (n_grid.empty()) throw ValidationError("check_lemma_a1: empty n grid");
  mc.validate();
  InverseMomentReport report;
  report.all_ok = true;
  for (const int n : n_grid) {
    if (n < 5) throw ValidationError("check_lemma_a1: needs n >= 5");
    const double lam = checked_lambda(lambda, n, "check_lemma_a1");
    const std::uint64_t seed = derive_seed(mc.master_seed, cell_tag(0xa1, n));
    const std::vector<double> inv = run_replicates<double>(
        seed, mc.replicates,
        [n, lam](RngStream& rng) { return 1.0 / rng.next_noncentral_chi2(n, lam); });
    const MeanVar mv = mean_var(inv);
    InverseMomentRow row;
    row.n = n;
    row.lambda = lam;
    row.value = mv.var;
    row.se = variance_se(inv);
    row.bound = bound_k1(n) / (static_cast<double>(n) * n * n);
    row.ok = row.value <= row.bound + 3.0 * row.se;
    report.all_ok = report.all_ok && row.ok;
    report.rows.push_back(row);
  }
  return report;
}

TiltedTailEstimate tilted_left_tail(int df, double lambda, double cut, const McConfig& mc) {
  if (df < 1) throw ValidationError("tilted_left_tail: df must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("tilted_left_tail: lambda must be finite and >= 0");
  if (!(cut > 0.0) || !std::isfinite(cut))
    throw ValidationError("tilted_left_tail: cut must be positive and finite");
  mc.validate();
  // Tilt the chi-square so its mean sits at the cut: the tilted law is a
  // Poisson(lambda/(2u)) mixture of chi-square(df + 2N)/u, and u solves
  // cut u^2 - df u - lambda = 0.
  const double d = df;
  const double u = (d + std::sqrt(d * d + 4.0 * cut * lambda)) / (2.0 * cut);
  const double t = 0.5 * (u - 1.0);
  const double log_m = -0.5 * d * std::log(u) - lambda * t / u;
  const double rate = lambda / (2.0 * u);
  const std::uint64_t seed = derive_seed(mc.master_seed, cell_tag(0xa7, df));
  const std::vector<double> weights = run_replicates<double>(
      seed, mc.replicates, [d, u, t, log_m, rate, cut](RngStream& rng) {
        const double n_mix = rate > 0.0 ? static_cast<double>(rng.next_poisson(rate)) : 0.0;
        const double y = rng.next_chi2(d + 2.0 * n_mix) / u;
        return y <= cut ? std::exp(t * y + log_m) : 0.0;
      });
  const MeanVar mv = mean_var(weights);
  return {mv.mean, mv.se_mean()};
}

TailDecayReport check_lemma_a2(const std::vector<int>& n_grid, const LambdaFamily& lambda,
                               const McConfig& mc) {
  if (n_grid.size() < 3) throw ValidationError("check_lemma_a2: need at least 3 dimensions");
  mc.validate();
  TailDecayReport report;
  std::vector<ConditionPoint> points;
  double prev_n = 0.0;
  double prev_lam = -1.0;
  for (const int n : n_grid) {
    if (n < 3) throw ValidationError("check_lemma_a2: needs n >= 3");
    if (n <= prev_n) throw ValidationError("check_lemma_a2: n grid must be increasing");
    prev_n = n;
    const double lam = checked_lambda(lambda, n, "check_lemma_a2");
    if (lam < prev_lam)
      throw ValidationError("check_lemma_a2: lambda sequence must be nondecreasing");
    prev_lam = lam;
    const double cut = n - 2.0;
    const std::uint64_t seed = derive_seed(mc.master_seed, cell_tag(0xa2, n));
    const std::vector<double> draws = run_replicates<double>(
        seed, mc.replicates,
        [n, lam](RngStream& rng) { return rng.next_noncentral_chi2(n, lam); });
    long long hits = 0;
    for (const double y : draws)
      if (y <= cut) ++hits;
    TailDecayRow row;
    row.n = n;
    row.lambda = lam;
    row.plain_hits = hits;
    if (hits >= 10) {
      const double p = static_cast<double>(hits) / static_cast<double>(draws.size());
      row.statistic = lam * lam * p;
      row.se = lam * lam * std::sqrt(p * (1.0 - p) / static_cast<double>(draws.size()));
    } else {
      const TiltedTailEstimate tail = tilted_left_tail(n, lam, cut, mc);
      row.tilted = true;
      row.statistic = lam * lam * tail.probability;
      row.se = lam * lam * tail.se;
    }
    points.push_back({n, row.statistic, row.se});
    report.rows.push_back(row);
  }
  const ConditionRecord rec = score_growth("tail_decay", std::move(points), 1.1);
  report.slope = rec.slope;
  report.verdict = rec.verdict;
  return report;
}

namespace {

MomentInequalityCheck finish_check(double lhs, double rhs, double slack) {
  MomentInequalityCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.satisfied = lhs <= rhs + slack;
  return out;
}

void validate_distribution(std::span<const double> atoms, std::span<const double> probs,
                           const char* who) {
  if (atoms.size() != probs.size())
    throw ValidationError(std::string(who) + ": atoms and probabilities differ in length");
  if (atoms.empty()) throw ValidationError(std::string(who) + ": empty distribution");
  double total = 0.0;
  for (const double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError(std::string(who) + ": probabilities must be finite and >= 0");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw ValidationError(std::string(who) + ": probabilities must sum to 1");
  for (const double a : atoms)
    if (!std::isfinite(a)) throw ValidationError(std::string(who) + ": atoms must be finite");
}

// Relative tolerance for exact checks: rounding only, never MC slack.
bool leq_with_rounding(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-12) + 1e-15; }

}  // namespace

MomentInequalityCheck check_lemma_a3(std::span<const double> y, double slack) {
  if (y.size() < 2) throw ValidationError("check_lemma_a3: need at least 2 samples");
  std::vector<double> recip(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0) || !std::isfinite(y[i]))
      throw ValidationError("check_lemma_a3: samples must be finite and >= 0");
    recip[i] = 1.0 / (1.0 + y[i]);
  }
  const MeanVar my = mean_var(y);
  const double denom = (1.0 + my.mean) * (1.0 + my.mean);
  return finish_check(mean_var(recip).var, my.var / denom, slack);
}

MomentInequalityCheck check_lemma_a3_exact(std::span<const double> atoms,
                                           std::span<const double> probs) {
  validate_distribution(atoms, probs, "check_lemma_a3_exact");
  double m1 = 0.0, m2 = 0.0, r1 = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i] < 0.0)
      throw ValidationError("check_lemma_a3_exact: atoms must be >= 0");
    const double f = 1.0 / (1.0 + atoms[i]);
    m1 += probs[i] * atoms[i];
    m2 += probs[i] * atoms[i] * atoms[i];
    r1 += probs[i] * f;
    r2 += probs[i] * f * f;
  }
  const double var_y = std::max(0.0, m2 - m1 * m1);
  const double lhs = std::max(0.0, r2 - r1 * r1);
  const double rhs = var_y / ((1.0 + m1) * (1.0 + m1));
  MomentInequalityCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.satisfied = leq_with_rounding(lhs, rhs);
  return out;
}

MomentInequalityCheck check_lemma_a4(std::span<const double> x, double slack) {
  if (x.size() < 2) throw ValidationError("check_lemma_a4: need at least 2 samples");
  std::vector<double> pos(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]))
      throw ValidationError("check_lemma_a4: samples must be finite");
    pos[i] = std::max(x[i], 0.0);
  }
  return finish_check(mean_var(pos).var, mean_var(x).var, slack);
}

MomentInequalityCheck check_lemma_a4_exact(std::span<const double> atoms,
                                           std::span<const double> probs) {
  validate_distribution(atoms, probs, "check_lemma_a4_exact");
  double m1 = 0.0, m2 = 0.0, p1 = 0.0, p2 = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double xp = std::max(atoms[i], 0.0);
    m1 += probs[i] * atoms[i];
    m2 += probs[i] * atoms[i] * atoms[i];
    p1 += probs[i] * xp;
    p2 += probs[i] * xp * xp;
  }
  const double lhs = std::max(0.0, p2 - p1 * p1);
  const double rhs = std::max(0.0, m2 - m1 * m1);
  MomentInequalityCheck out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.satisfied = leq_with_rounding(lhs, rhs);
  return out;
}

namespace {

struct CellRisk {
  double rho = 0.0;
  double rho_se = 0.0;
  double quad = 0.0;
  double quad_se = 0.0;
};

// Shared MC pass for the empirical bound grids: flattened shrinkage rule
// (data-driven scale from the positive-part risk statistic) plus the
// quadratic risk of its location part.
CellRisk flattened_js_cell(int n, double r, double a, const McConfig& mc, std::uint64_t tag) {
  const PredictiveProblem problem = make_problem(n, 1.0, r);
  const ParamPoint theta = param_radial(problem, a);
  McConfig cell = mc;
  cell.master_seed = derive_seed(mc.master_seed, tag);
  const LocationEstimator js = make_james_stein();
  const GaussianStrategy strategy = make_flattened_strategy(js, FlattenSource::sure_plus);
  const RiskReport rho = predictive_risk_mc(problem, theta, strategy, cell);
  const RiskReport quad = quadratic_risk_mc(problem, theta, js, cell);
  return {rho.estimate, rho.std_error, quad.estimate, quad.std_error};
}

void validate_grids(const std::vector<int>& n_grid, const std::vector<double>& r_grid,
                    const std::vector<double>& a_grid, const McConfig& mc, const char* who) {
  if (n_grid.empty() || r_grid.empty() || a_grid.empty())
    throw ValidationError(std::string(who) + ": empty grid");
  for (const double r : r_grid) require_positive_r(r, who);
  for (const double a : a_grid)
    if (!(a >= 0.0) || !std::isfinite(a))
      throw ValidationError(std::string(who) + ": signal energy must be finite and >= 0");
  mc.validate();
}

}  // namespace

std::vector<BoundCheckRow> theorem2_empirical_check(const std::vector<int>& n_grid,
                                                    const std::vector<double>& r_grid,
                                                    const std::vector<double>& a_grid,
                                                    const McConfig& mc) {
  validate_grids(n_grid, r_grid, a_grid, mc, "theorem2_empirical_check");
  std::vector<BoundCheckRow> rows;
  std::uint64_t index = 0;
  for (const int n : n_grid)
    for (const double r : r_grid)
      for (const double a : a_grid) {
        const CellRisk cell = flattened_js_cell(n, r, a, mc, cell_tag(0x7e, index++));
        BoundCheckRow row;
        row.n = n;
        row.r = r;
        row.a = a;
        row.bound = theorem2_if_bound(n, r);
        const double nr = n * r;
        row.mc_value = cell.rho - 0.5 * n * std::log1p(cell.quad / nr);
        row.se = cell.rho_se + cell.quad_se / (2.0 * r * (1.0 + cell.quad / nr));
        row.ok = row.mc_value >= -3.0 * row.se && row.mc_value <= row.bound + 3.0 * row.se;
        rows.push_back(row);
      }
  return rows;
}

std::vector<BoundCheckRow> oracle_empirical_check(const std::vector<int>& n_grid,
                                                  const std::vector<double>& r_grid,
                                                  const std::vector<double>& a_grid,
                                                  const McConfig& mc) {
  validate_grids(n_grid, r_grid, a_grid, mc, "oracle_empirical_check");
  std::vector<BoundCheckRow> rows;
  std::uint64_t index = 0;
  for (const int n : n_grid)
    for (const double r : r_grid)
      for (const double a : a_grid) {
        const CellRisk cell = flattened_js_cell(n, r, a, mc, cell_tag(0x0e, index++));
        const PredictiveProblem problem = make_problem(n, 1.0, r);
        BoundCheckRow row;
        row.n = n;
        row.r = r;
        row.a = a;
        row.bound = oracle_bound_paper(r);
        row.mc_value = cell.rho - risk_ideal_linear(problem, a);
        row.se = cell.rho_se;
        row.ok = row.mc_value <= row.bound + 3.0 * row.se;
        rows.push_back(row);
      }
  return rows;
}

std::string bounds_csv(std::span<const BoundCheckRow> rows) {
  std::string out = "n,r,a,bound,mc_value,se,verdict\n";
  char buf[160];
  for (const BoundCheckRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%s\n", row.n, row.r, row.a,
                  row.bound, row.mc_value, row.se, row.ok ? "ok" : "violated");
    out += buf;
  }
  return out;
}

}  // namespace predrisk
