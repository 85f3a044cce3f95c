#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "predrisk/core_model.hpp"
#include "predrisk/estimators.hpp"
#include "predrisk/risk_estimates.hpp"

namespace predrisk {

// A strategy maps past data to a predictive density for the future
// observation. Gaussian strategies return a closed-form object; generic
// strategies return a log density usable by inner Monte Carlo.
using GaussianStrategy =
    std::function<GaussianPredictiveDensity(const PredictiveProblem&, std::span<const double>)>;
using LogDensity = std::function<double(std::span<const double>)>;
using DensityStrategy =
    std::function<LogDensity(const PredictiveProblem&, std::span<const double>)>;

// KL divergence from the true future density N(theta, sigma_f^2 I) to g.
// Scalar scale c: (n/2)(log c + 1/c - 1) + ||mu - theta||^2 / (2 c sigma_f^2);
// diagonal scales sum the same expression per coordinate.
double kl_loss_gaussian(const PredictiveProblem& problem, const ParamPoint& theta,
                        const GaussianPredictiveDensity& g);

// MC estimate of E_Y[log p_theta(Y) - logdensity(Y)], Y ~ N(theta, sigma_f^2 I).
RiskReport kl_loss_generic(const PredictiveProblem& problem, const ParamPoint& theta,
                           const LogDensity& logdensity, const McConfig& mc);

// Predictive risk: outer MC over X ~ N(theta, sigma_p^2 I) of the KL loss of
// strategy(X). Gaussian strategies use the closed-form loss; generic ones an
// inner MC of mc.inner_samples future draws per replicate.
RiskReport predictive_risk_mc(const PredictiveProblem& problem, const ParamPoint& theta,
                              const GaussianStrategy& strategy, const McConfig& mc);
RiskReport predictive_risk_mc_generic(const PredictiveProblem& problem, const ParamPoint& theta,
                                      const DensityStrategy& strategy, const McConfig& mc);

// MC estimate of the normalized quadratic risk E||est(X) - theta||^2/sigma_p^2.
RiskReport quadratic_risk_mc(const PredictiveProblem& problem, const ParamPoint& theta,
                             const LocationEstimator& estimator, const McConfig& mc);

// Exact risk of the best invariant strategy, (n/2) log(1 + 1/r); constant in theta.
double risk_best_invariant(const PredictiveProblem& problem);

// Exact risk of the ideally flattened oracle linear rule at signal energy a:
// (n/2) log(1 + a / ((1+a) r)).
double risk_ideal_linear(const PredictiveProblem& problem, double a);

// Large-n risk approximations for the shrinkage rule at signal energy a > 0:
// plug-in scale, best-invariant scale, and flattened scale.
struct JsAsymptotics {
  double plug_in;      // n a / (2 r (1+a))
  double fixed_scale;  // (n/2) [log(1 + 1/r) - 1/((1+a)(1+r))]
  double flattened;    // (n/2) log(1 + a / ((1+a) r))
};
JsAsymptotics risk_asymptotics_js(const PredictiveProblem& problem, double a);

// One-pass MC estimates of the flattened-risk decomposition terms. The risk
// deviation bound reads: rho - (n/2) log IF <= (n/2) (A + B), and the lower
// counterpart uses L; all three terms are nonnegative by construction.
struct RiskDecomposition {
  double log_if_term;     // (n/2) log(1 + q/(n r)) with q the MC quadratic risk
  double distortion_a;    // IF/E(c) * SD(c) SD(1/c) + (1/r) SD(loss/n) SD(1/c)
  double distortion_b;    // (E(c) - IF)^2 / (IF * E(c))
  double distortion_l;    // SD(loss) SD((1 + loss/(nr))^-1) / (n r)
  double quadratic_risk;  // MC mean of the normalized squared loss
  double mean_c;          // MC mean of the flattening coefficient
};
RiskDecomposition risk_decomposition_mc(const PredictiveProblem& problem, const ParamPoint& theta,
                                        const LocationEstimator& estimator, FlattenSource source,
                                        const McConfig& mc);

// Risk of a convex mixture of Gaussian strategies, via inner MC on the
// mixture log density.
RiskReport mixture_strategy_risk(const PredictiveProblem& problem, const ParamPoint& theta,
                                 const std::vector<std::pair<double, GaussianStrategy>>& components,
                                 const McConfig& mc);

// Scaling convention for the Bayes-risk identity of the harmonic strategy:
// the rescaled parameters traversed by the integral are theta/v (literal) or
// theta/sqrt(v) (sqrt_scale) for v in ((1+1/r)^-1, 1).
enum class RescaleConvention { literal, sqrt_scale };

struct HarmonicBayesResult {
  RiskReport report;
  // crude bracket: (half log(1+1/r)) times the min/max of the quadratic risk
  // over the traversed rescalings; the estimate lies inside by construction
  double bracket_lo;
  double bracket_hi;
  RescaleConvention convention;
};

// Risk of the harmonic-prior Bayes predictive density via the identity
// rho = 1/2 * integral v^-1 q(theta_v, harmonic posterior mean) dv, evaluated
// with a 64-node Gauss-Legendre rule and shared-seed MC across nodes.
HarmonicBayesResult risk_harmonic_bayes(const PredictiveProblem& problem, const ParamPoint& theta,
                                        const McConfig& mc,
                                        RescaleConvention convention = RescaleConvention::literal);

// MC estimate of (n/2) E log(1 + ||est(X) - theta||^2/(n r sigma_p^2)), a
// lower bound for the risk of every Gaussian strategy centered at est(X).
RiskReport lower_bound_log_moment(const PredictiveProblem& problem, const ParamPoint& theta,
                                  const LocationEstimator& estimator, const McConfig& mc);

// Per-coordinate split of the flattening improvement over the plug-in scale
// at alpha = 1/((1+a)(1+r)): d1 from the scale correction, d2 the residual.
// Both are positive and increase in alpha on (0, 1).
struct ImprovementSplit {
  double d1;  // alpha / 2
  double d2;  // (log(1/(1-alpha)) - alpha) / 2
};
ImprovementSplit improvement_split(double alpha);

// Strategy factories.
GaussianStrategy make_best_invariant_strategy();
GaussianStrategy make_plugin_strategy(LocationEstimator estimator);
GaussianStrategy make_fixed_scale_strategy(LocationEstimator estimator, double c);
GaussianStrategy make_flattened_strategy(LocationEstimator estimator, FlattenSource source);
GaussianStrategy make_oracle_scale_strategy(LocationEstimator estimator, double q);

// Posterior predictive log density under the harmonic prior, computed as a
// ratio of prior marginals at the precision-weighted combination of x and y.
double harmonic_predictive_logdensity(const PredictiveProblem& problem,
                                      std::span<const double> x, std::span<const double> y);
DensityStrategy make_harmonic_bayes_strategy();

}  // namespace predrisk
