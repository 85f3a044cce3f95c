#pragma once

#include <span>
#include <string>
#include <vector>

#include "predrisk/core_model.hpp"
#include "predrisk/estimators.hpp"

namespace predrisk {

// l0 ball: parameter vectors of length n with at most s nonzero coordinates.
struct SparseSpace {
  int n = 0;
  int s = 0;
};

SparseSpace make_sparse_space(int n, int s);
bool sparse_member(const SparseSpace& space, std::span<const double> theta);

// Univariate selector rule: predict N(0, sigma_f^2) when |x|/sigma_p falls
// at or below the threshold, otherwise hand off to the inner rules. The
// canonical threshold for occupancy eta is sqrt(2 log(1/eta)).
struct ThresholdRule {
  double eta = 0.0;
  double lambda = 0.0;
  std::string inner_location = "plug_in";
  std::string inner_scale = "plug_in";
};

double threshold_lambda(double eta);
ThresholdRule make_threshold_rule(double eta, std::string inner_location = "plug_in",
                                  std::string inner_scale = "plug_in");

// Rate eta log(1/eta) / r: the supremum risk scale of the canonical rule
// over priors placing mass at most eta off the origin.
double sparse_univariate_rate(double eta, double r);

// Predictive density of the rule at past observation x (univariate problem).
GaussianPredictiveDensity threshold_density(const ThresholdRule& rule,
                                            const PredictiveProblem& problem, double x);

struct RiskProfilePoint {
  double theta = 0.0;
  double risk = 0.0;
  double se = 0.0;
};

// Pointwise MC risk of the rule over a grid of scalar parameters.
std::vector<RiskProfilePoint> threshold_risk_profile(const ThresholdRule& rule,
                                                     const PredictiveProblem& problem,
                                                     std::span<const double> theta_grid,
                                                     const McConfig& mc);

struct PriorRiskPoint {
  double mu = 0.0;
  double risk = 0.0;
  double se = 0.0;
};

// Bayes risk under the two-point prior (1-eta at 0, eta at mu) for each mu;
// the grid supremum estimates the worst case over sparse priors.
std::vector<PriorRiskPoint> moment_prior_profile(const ThresholdRule& rule,
                                                 const PredictiveProblem& problem,
                                                 std::span<const double> mu_grid,
                                                 const McConfig& mc);

// Coordinatewise log-moment lower bound on the risk of any product density
// built around the estimator: (1/2) sum_i E log(1 + (est_i - theta_i)^2 /
// (r sigma_p^2)).
RiskReport product_lower_bound(const PredictiveProblem& problem, const ParamPoint& theta,
                               const LocationEstimator& estimator, const McConfig& mc);

struct SparseRateEstimate {
  int n = 0;
  int s = 0;
  double r = 0.0;
  double eta = 0.0;               // s / n
  double gaussian_rate = 0.0;     // s log(n/s) / r
  double unrestricted_rate = 0.0; // s log(n/s) / (1+r)
  double empirical = 0.0;         // MC risk of the product rule at s spikes
  double empirical_se = 0.0;
  double ratio = 0.0;             // 1 + 1/r, exact
};

// Rates plus the empirical column: the product threshold rule with
// eta = s/n evaluated at s spikes of height sigma_p sqrt(2 log(n/s)).
SparseRateEstimate sparse_minimax_estimate(const PredictiveProblem& problem,
                                           const SparseSpace& space, const McConfig& mc);

std::string sparse_csv(std::span<const SparseRateEstimate> rows);

}  // namespace predrisk
