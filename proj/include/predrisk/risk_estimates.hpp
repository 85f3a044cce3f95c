#pragma once

#include <span>

#include "predrisk/core_model.hpp"
#include "predrisk/harmonic.hpp"

namespace predrisk {

// Provenance of a risk estimate used to build a flattening coefficient. Raw
// (unclipped) SURE is deliberately absent: its flattened risk integral does
// not exist, so the library refuses it as a source.
enum class FlattenSource { sure_plus, tweedie, oracle_if, custom };

struct FlatteningCoefficient {
  double value;  // > 0 always; >= 1 for sure_plus / oracle_if sources
  FlattenSource source;
};

// n - (n-2)^2 sigma_p^2 / ||x||^2; may be negative. Requires n >= 3, x != 0.
double sure_js(const PredictiveProblem& problem, std::span<const double> x);

// Positive part of sure_js, defined everywhere. Serves as the risk estimate
// for both the plain and the positive-part shrinkage rules.
double sure_js_plus(const PredictiveProblem& problem, std::span<const double> x);

// Unbiased risk estimate for the posterior mean under a spherically
// symmetric prior: n - [ ||grad log m||^2 - 2 (Lap m)/m ] at z = x/sigma_p.
double tweedie_risk_estimate(const PredictiveProblem& problem, std::span<const double> x,
                             const RadialMarginal& marginal);

// c = 1 + u_hat / (n r). sure_plus and oracle_if certify u_hat >= 0, hence
// c >= 1; tweedie and custom sources only guarantee c > 0 and are validated.
FlatteningCoefficient flattening(const PredictiveProblem& problem, double u_hat,
                                 FlattenSource source = FlattenSource::custom);

// Oracle coefficient 1 + q / (n r) from a known quadratic risk q >= 0.
FlatteningCoefficient ideal_flattening(const PredictiveProblem& problem, double q);

}  // namespace predrisk
