#include "predrisk/risk_estimates.hpp"

#include <cmath>
#include <string>

#include "predrisk/errors.hpp"

namespace predrisk {

namespace {
double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double t : v) s += t * t;
  return s;
}
}  // namespace

double sure_js(const PredictiveProblem& problem, std::span<const double> x) {
  require_dim(problem, x.size(), "sure_js");
  if (problem.n < 3) throw ValidationError("sure_js: needs n >= 3");
  const double ss = norm_sq(x);
  if (ss == 0.0) throw DegenerateInputError("sure_js: undefined at x = 0");
  const double df = problem.n - 2.0;
  return problem.n - df * df * problem.sigma_p2 / ss;
}

double sure_js_plus(const PredictiveProblem& problem, std::span<const double> x) {
  require_dim(problem, x.size(), "sure_js_plus");
  if (problem.n < 3) throw ValidationError("sure_js_plus: needs n >= 3");
  const double ss = norm_sq(x);
  const double df = problem.n - 2.0;
  if (ss * problem.n <= df * df * problem.sigma_p2) return 0.0;
  return problem.n - df * df * problem.sigma_p2 / ss;
}

double tweedie_risk_estimate(const PredictiveProblem& problem, std::span<const double> x,
                             const RadialMarginal& marginal) {
  require_dim(problem, x.size(), "tweedie_risk_estimate");
  const double t = norm_sq(x) / (2.0 * problem.sigma_p2);
  const MarginalLocal loc = marginal_local(marginal, problem.n, t);
  return problem.n - (loc.grad_log_sq - 2.0 * loc.laplacian_ratio);
}

FlatteningCoefficient flattening(const PredictiveProblem& problem, double u_hat,
                                 FlattenSource source) {
  if (!std::isfinite(u_hat)) throw ValidationError("flattening: non-finite risk estimate");
  if ((source == FlattenSource::sure_plus || source == FlattenSource::oracle_if) && u_hat < 0.0)
    throw ValidationError("flattening: nonnegative source produced a negative estimate " +
                          std::to_string(u_hat));
  const double value = 1.0 + u_hat / (problem.n * problem.r);
  if (!(value > 0.0))
    throw ValidationError("flattening: coefficient must be positive, got " +
                          std::to_string(value));
  return {value, source};
}

FlatteningCoefficient ideal_flattening(const PredictiveProblem& problem, double q) {
  if (!(q >= 0.0)) throw ValidationError("ideal_flattening: risk must be >= 0");
  return {1.0 + q / (problem.n * problem.r), FlattenSource::oracle_if};
}

}  // namespace predrisk
