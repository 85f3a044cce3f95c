#include "predrisk/sparse_minimax.hpp"

#include <cmath>
#include <cstdio>

#include "predrisk/errors.hpp"
#include "predrisk/mc.hpp"
#include "predrisk/rng.hpp"
#include "predrisk/stats.hpp"

namespace predrisk {

SparseSpace make_sparse_space(int n, int s) {
  if (n < 1) throw ValidationError("make_sparse_space: n must be >= 1");
  if (s < 0 || s > n) throw ValidationError("make_sparse_space: need 0 <= s <= n");
  return {n, s};
}

bool sparse_member(const SparseSpace& space, std::span<const double> theta) {
  if (theta.size() != static_cast<std::size_t>(space.n))
    throw ValidationError("sparse_member: vector length differs from the space dimension");
  int nonzero = 0;
  for (const double t : theta)
    if (t != 0.0) ++nonzero;
  return nonzero <= space.s;
}

double threshold_lambda(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ValidationError("threshold_lambda: eta must lie in (0, 1)");
  return std::sqrt(2.0 * std::log(1.0 / eta));
}

ThresholdRule make_threshold_rule(double eta, std::string inner_location,
                                  std::string inner_scale) {
  ThresholdRule rule;
  rule.eta = eta;
  rule.lambda = threshold_lambda(eta);
  rule.inner_location = std::move(inner_location);
  rule.inner_scale = std::move(inner_scale);
  return rule;
}

double sparse_univariate_rate(double eta, double r) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ValidationError("sparse_univariate_rate: eta must lie in (0, 1)");
  if (!(r > 0.0)) throw ValidationError("sparse_univariate_rate: r must be positive");
  return eta * std::log(1.0 / eta) / r;
}

namespace {

void validate_rule(const ThresholdRule& rule) {
  const double canonical = threshold_lambda(rule.eta);
  if (std::fabs(rule.lambda - canonical) > 1e-12 * std::max(1.0, canonical))
    throw ValidationError("threshold rule: lambda must equal sqrt(2 log(1/eta))");
  if (rule.inner_location != "plug_in")
    throw ValidationError("threshold rule: unknown inner location '" + rule.inner_location + "'");
  if (rule.inner_scale != "plug_in")
    throw ValidationError("threshold rule: unknown inner scale '" + rule.inner_scale + "'");
}

// Univariate predictive mean of the rule; the plug_in inner scale keeps the
// future variance at sigma_f^2, so the KL loss is (mu - theta)^2/(2 sigma_f^2).
inline double rule_mean(const ThresholdRule& rule, double x, double sigma_p) {
  return std::fabs(x) <= rule.lambda * sigma_p ? 0.0 : x;
}

RiskProfilePoint profile_point(const ThresholdRule& rule, const PredictiveProblem& problem,
                               double theta, std::uint64_t seed, const McConfig& mc) {
  const double sp = problem.sigma_p();
  const double half_inv_vf = 0.5 / problem.sigma_f2;
  const MeanVar mv =
      run_replicates_mean(seed, mc.replicates, [&rule, &problem, theta, sp,
                                                half_inv_vf](RngStream& rng) {
        const double x = theta + sp * rng.next_gaussian();
        const double mu = rule_mean(rule, x, sp);
        return (mu - theta) * (mu - theta) * half_inv_vf;
      });
  return {theta, mv.mean, mv.se_mean()};
}

}  // namespace

GaussianPredictiveDensity threshold_density(const ThresholdRule& rule,
                                            const PredictiveProblem& problem, double x) {
  validate_rule(rule);
  if (problem.n != 1) throw ValidationError("threshold_density: problem must be univariate");
  if (!std::isfinite(x)) throw ValidationError("threshold_density: x must be finite");
  return make_g1({rule_mean(rule, x, problem.sigma_p())}, 1.0);
}

std::vector<RiskProfilePoint> threshold_risk_profile(const ThresholdRule& rule,
                                                     const PredictiveProblem& problem,
                                                     std::span<const double> theta_grid,
                                                     const McConfig& mc) {
  validate_rule(rule);
  if (problem.n != 1)
    throw ValidationError("threshold_risk_profile: problem must be univariate");
  if (theta_grid.empty()) throw ValidationError("threshold_risk_profile: empty grid");
  mc.validate();
  std::vector<RiskProfilePoint> out;
  std::uint64_t index = 0;
  for (const double theta : theta_grid) {
    if (!std::isfinite(theta))
      throw ValidationError("threshold_risk_profile: grid values must be finite");
    const std::uint64_t seed = derive_seed(mc.master_seed, (0x3aull << 32) | index++);
    out.push_back(profile_point(rule, problem, theta, seed, mc));
  }
  return out;
}

std::vector<PriorRiskPoint> moment_prior_profile(const ThresholdRule& rule,
                                                 const PredictiveProblem& problem,
                                                 std::span<const double> mu_grid,
                                                 const McConfig& mc) {
  validate_rule(rule);
  if (problem.n != 1) throw ValidationError("moment_prior_profile: problem must be univariate");
  if (mu_grid.empty()) throw ValidationError("moment_prior_profile: empty grid");
  mc.validate();
  const RiskProfilePoint origin =
      profile_point(rule, problem, 0.0, derive_seed(mc.master_seed, 0x39ull << 32), mc);
  std::vector<PriorRiskPoint> out;
  std::uint64_t index = 1;
  for (const double mu : mu_grid) {
    if (!std::isfinite(mu))
      throw ValidationError("moment_prior_profile: grid values must be finite");
    const std::uint64_t seed = derive_seed(mc.master_seed, (0x39ull << 32) | index++);
    const RiskProfilePoint at_mu = profile_point(rule, problem, mu, seed, mc);
    PriorRiskPoint point;
    point.mu = mu;
    point.risk = (1.0 - rule.eta) * origin.risk + rule.eta * at_mu.risk;
    point.se = (1.0 - rule.eta) * origin.se + rule.eta * at_mu.se;
    out.push_back(point);
  }
  return out;
}

RiskReport product_lower_bound(const PredictiveProblem& problem, const ParamPoint& theta,
                               const LocationEstimator& estimator, const McConfig& mc) {
  require_dim(problem, theta.theta.size(), "product_lower_bound");
  mc.validate();
  const double inv_rvp = 1.0 / (problem.r * problem.sigma_p2);
  const int n = problem.n;
  const double sp = problem.sigma_p();
  const MeanVar mv = run_replicates_mean(
      mc.master_seed, mc.replicates, [&](RngStream& rng) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = theta.theta[i] + sp * rng.next_gaussian();
        const std::vector<double> est = estimator.estimate(problem, x);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
          const double d = est[i] - theta.theta[i];
          sum += std::log1p(d * d * inv_rvp);
        }
        return 0.5 * sum;
      });
  RiskReport report;
  report.estimate = mv.mean;
  report.std_error = mv.se_mean();
  report.replicates = mv.count;
  report.seed = mc.master_seed;
  report.method = RiskMethod::monte_carlo;
  return report;
}

SparseRateEstimate sparse_minimax_estimate(const PredictiveProblem& problem,
                                           const SparseSpace& space, const McConfig& mc) {
  if (space.n != problem.n)
    throw ValidationError("sparse_minimax_estimate: space and problem dimensions differ");
  if (space.s < 1) throw ValidationError("sparse_minimax_estimate: needs s >= 1");
  const double eta = static_cast<double>(space.s) / space.n;
  if (eta > 0.05)
    throw ValidationError("sparse_minimax_estimate: rate regime requires s/n <= 0.05");
  mc.validate();

  const double log_ns = std::log(static_cast<double>(space.n) / space.s);
  const ThresholdRule rule = make_threshold_rule(eta);
  const double sp = problem.sigma_p();
  const double height = sp * std::sqrt(2.0 * log_ns);
  const ParamPoint theta = param_spike(problem, height, space.s);
  const double half_inv_vf = 0.5 / problem.sigma_f2;
  const int n = problem.n;

  const MeanVar mv = run_replicates_mean(
      derive_seed(mc.master_seed, 0x59ull << 32), mc.replicates, [&](RngStream& rng) {
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
          const double t = theta.theta[i];
          const double x = t + sp * rng.next_gaussian();
          const double mu = rule_mean(rule, x, sp);
          loss += (mu - t) * (mu - t);
        }
        return loss * half_inv_vf;
      });

  SparseRateEstimate out;
  out.n = space.n;
  out.s = space.s;
  out.r = problem.r;
  out.eta = eta;
  out.gaussian_rate = space.s * log_ns / problem.r;
  out.unrestricted_rate = space.s * log_ns / (1.0 + problem.r);
  out.empirical = mv.mean;
  out.empirical_se = mv.se_mean();
  out.ratio = 1.0 + 1.0 / problem.r;
  return out;
}

std::string sparse_csv(std::span<const SparseRateEstimate> rows) {
  std::string out =
      "n,s,r,eta,univariate_rate,gaussian_rate,unrestricted_rate,empirical,ratio\n";
  char buf[240];
  for (const SparseRateEstimate& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", row.n,
                  row.s, row.r, row.eta, sparse_univariate_rate(row.eta, row.r),
                  row.gaussian_rate, row.unrestricted_rate, row.empirical, row.ratio);
    out += buf;
  }
  return out;
}

}  // namespace predrisk
