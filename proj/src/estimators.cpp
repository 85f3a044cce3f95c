#include "predrisk/estimators.hpp"

#include <cmath>
#include <utility>

#include "predrisk/errors.hpp"
#include "predrisk/harmonic.hpp"
#include "predrisk/risk_estimates.hpp"

namespace predrisk {

namespace {
double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double t : v) s += t * t;
  return s;
}

std::vector<double> scaled(std::span<const double> x, double factor) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
  return out;
}
}  // namespace

std::vector<double> umvue(const PredictiveProblem& problem, std::span<const double> x) {
  require_dim(problem, x.size(), "umvue");
  return {x.begin(), x.end()};
}

std::vector<double> james_stein(const PredictiveProblem& problem, std::span<const double> x) {
  require_dim(problem, x.size(), "james_stein");
  if (problem.n < 3) throw ValidationError("james_stein: needs n >= 3");
  const double ss = norm_sq(x);
  if (ss == 0.0)
    throw DegenerateInputError("james_stein: undefined at x = 0; see james_stein_plus");
  return scaled(x, 1.0 - (problem.n - 2) * problem.sigma_p2 / ss);
}

std::vector<double> james_stein_plus(const PredictiveProblem& problem,
                                     std::span<const double> x) {
  require_dim(problem, x.size(), "james_stein_plus");
  if (problem.n < 3) throw ValidationError("james_stein_plus: needs n >= 3");
  const double ss = norm_sq(x);
  const double cut = (problem.n - 2) * problem.sigma_p2;
  if (ss <= cut) return std::vector<double>(x.size(), 0.0);
  return scaled(x, 1.0 - cut / ss);
}

std::vector<double> harmonic_posterior_mean(const PredictiveProblem& problem,
                                            std::span<const double> x) {
  require_dim(problem, x.size(), "harmonic_posterior_mean");
  const HarmonicMarginal marginal(problem.n);
  const double t = norm_sq(x) / (2.0 * problem.sigma_p2);
  return scaled(x, 1.0 + marginal.dlog_profile(t));
}

std::vector<double> ideal_linear(const PredictiveProblem& problem, std::span<const double> x,
                                 double a) {
  require_dim(problem, x.size(), "ideal_linear");
  if (!(a >= 0.0)) throw ValidationError("ideal_linear: signal energy a must be >= 0");
  return scaled(x, a / (1.0 + a));
}

LocationEstimator convex_mixture(std::vector<LocationEstimator> estimators,
                                 std::vector<double> weights) {
  if (estimators.empty()) throw ValidationError("convex_mixture: empty estimator list");
  if (estimators.size() != weights.size())
    throw ValidationError("convex_mixture: weight count must match estimator count");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("convex_mixture: weights must be >= 0");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw ValidationError("convex_mixture: weights must sum to 1 within 1e-12");
  LocationEstimator out;
  out.name = "mixture";
  out.estimate = [parts = std::move(estimators), weights = std::move(weights)](
                     const PredictiveProblem& problem, std::span<const double> x) {
    std::vector<double> acc(x.size(), 0.0);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (weights[k] == 0.0) continue;
      const std::vector<double> part = parts[k].estimate(problem, x);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weights[k] * part[i];
    }
    return acc;
  };
  return out;
}

std::vector<double> rasl_violator(const PredictiveProblem& problem, std::span<const double> x) {
  require_dim(problem, x.size(), "rasl_violator");
  if (problem.n < 2) throw ValidationError("rasl_violator: needs n >= 2");
  std::vector<double> out(x.begin(), x.end());
  const double sp = problem.sigma_p();
  const double z1 = x[0] / sp;
  const double cut = std::sqrt(2.0 * std::log(static_cast<double>(problem.n)));
  if (z1 < cut) out[0] = z1 * std::sqrt(problem.n / (2.0 * std::log(problem.n))) * sp;
  return out;
}

LocationEstimator make_umvue() {
  LocationEstimator e;
  e.name = "umvue";
  e.estimate = [](const PredictiveProblem& p, std::span<const double> x) { return umvue(p, x); };
  e.risk_estimator = [](const PredictiveProblem& p, std::span<const double>) {
    return static_cast<double>(p.n);
  };
  return e;
}

LocationEstimator make_james_stein() {
  LocationEstimator e;
  e.name = "js";
  e.estimate = [](const PredictiveProblem& p, std::span<const double> x) {
    return james_stein(p, x);
  };
  e.risk_estimator = [](const PredictiveProblem& p, std::span<const double> x) {
    return sure_js_plus(p, x);
  };
  return e;
}

LocationEstimator make_james_stein_plus() {
  LocationEstimator e;
  e.name = "js+";
  e.estimate = [](const PredictiveProblem& p, std::span<const double> x) {
    return james_stein_plus(p, x);
  };
  e.risk_estimator = [](const PredictiveProblem& p, std::span<const double> x) {
    return sure_js_plus(p, x);
  };
  return e;
}

LocationEstimator make_harmonic() {
  LocationEstimator e;
  e.name = "harmonic";
  e.estimate = [](const PredictiveProblem& p, std::span<const double> x) {
    return harmonic_posterior_mean(p, x);
  };
  e.risk_estimator = [](const PredictiveProblem& p, std::span<const double> x) {
    const HarmonicMarginal marginal(p.n);
    return tweedie_risk_estimate(p, x, marginal);
  };
  return e;
}

LocationEstimator make_ideal_linear(double a) {
  if (!(a >= 0.0)) throw ValidationError("make_ideal_linear: a must be >= 0");
  LocationEstimator e;
  e.name = "ideal";
  e.estimate = [a](const PredictiveProblem& p, std::span<const double> x) {
    return ideal_linear(p, x, a);
  };
  e.risk_estimator = [a](const PredictiveProblem& p, std::span<const double>) {
    return p.n * a / (1.0 + a);
  };
  return e;
}

LocationEstimator make_rasl_violator() {
  LocationEstimator e;
  e.name = "violator";
  e.estimate = [](const PredictiveProblem& p, std::span<const double> x) {
    return rasl_violator(p, x);
  };
  return e;
}

LocationEstimator make_estimator(const std::string& name) {
  if (name == "umvue") return make_umvue();
  if (name == "js" || name == "james_stein") return make_james_stein();
  if (name == "js+" || name == "james_stein_plus") return make_james_stein_plus();
  if (name == "harmonic") return make_harmonic();
  if (name == "violator") return make_rasl_violator();
  if (name.rfind("ideal:", 0) == 0) {
    double a = 0.0;
    try {
      a = std::stod(name.substr(6));
    } catch (const std::exception&) {
      throw ValidationError("make_estimator: bad ideal factor in '" + name + "'");
    }
    return make_ideal_linear(a);
  }
  throw ValidationError("make_estimator: unknown estimator '" + name +
                        "' (expected umvue, js, js+, harmonic, violator, ideal:<a>)");
}

}  // namespace predrisk
