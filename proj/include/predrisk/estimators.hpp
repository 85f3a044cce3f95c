#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "predrisk/core_model.hpp"

namespace predrisk {

// A location estimator together with an optional companion estimate of its
// own quadratic risk. Risk estimates are reported in units of sigma_p^2
// (i.e. for the normalized problem), matching the flattening convention
// c = 1 + U / (n r).
struct LocationEstimator {
  std::string name;
  std::function<std::vector<double>(const PredictiveProblem&, std::span<const double>)> estimate;
  std::function<double(const PredictiveProblem&, std::span<const double>)> risk_estimator;

  bool has_risk_estimator() const { return static_cast<bool>(risk_estimator); }
};

std::vector<double> umvue(const PredictiveProblem& problem, std::span<const double> x);

// x scaled by (1 - (n-2) sigma_p^2 / ||x||^2); requires n >= 3 and x != 0.
std::vector<double> james_stein(const PredictiveProblem& problem, std::span<const double> x);

// Positive-part variant: shrinkage factor clipped at zero, defined at x = 0.
std::vector<double> james_stein_plus(const PredictiveProblem& problem, std::span<const double> x);

// Posterior mean under the prior ~ ||theta||^(-(n-2)), via the gradient of
// the log marginal; spherically symmetric shrinkage with factor in (0, 1).
std::vector<double> harmonic_posterior_mean(const PredictiveProblem& problem,
                                            std::span<const double> x);

// Oracle linear rule (a/(1+a)) x with a = ||theta||^2/(n sigma_p^2) supplied
// by the caller.
std::vector<double> ideal_linear(const PredictiveProblem& problem, std::span<const double> x,
                                 double a);

// Pointwise convex combination of estimators; weights must sum to 1 within
// 1e-12. Risk estimators of the components are not combined.
LocationEstimator convex_mixture(std::vector<LocationEstimator> estimators,
                                 std::vector<double> weights);

// Counterexample rule: coordinate 1 is inflated by sqrt(n / (2 log n)) when
// its normalized value is below sqrt(2 log n); all other coordinates pass
// through. Its squared-loss variance grows superlinearly in n.
std::vector<double> rasl_violator(const PredictiveProblem& problem, std::span<const double> x);

// Factories bundling each rule with its standard risk estimator.
LocationEstimator make_umvue();             // U = n
LocationEstimator make_james_stein();       // U = positive-part SURE
LocationEstimator make_james_stein_plus();  // U = positive-part SURE
LocationEstimator make_harmonic();          // U = Tweedie form on the harmonic marginal
LocationEstimator make_ideal_linear(double a);  // U = n a / (1+a)
LocationEstimator make_rasl_violator();     // no risk estimator
LocationEstimator make_estimator(const std::string& name);  // lookup by name

}  // namespace predrisk
