#include "predrisk/core_model.hpp"

#include <cmath>

#include "predrisk/rng.hpp"

namespace predrisk {

double PredictiveProblem::sigma_p() const { return std::sqrt(sigma_p2); }

PredictiveProblem make_problem(int n, double sigma_p2, double sigma_f2) {
  if (n < 1) throw ValidationError("make_problem: dimension n must be >= 1, got " + std::to_string(n));
  if (!(sigma_p2 > 0.0) || !std::isfinite(sigma_p2))
    throw ValidationError("make_problem: sigma_p2 must be positive and finite");
  if (!(sigma_f2 > 0.0) || !std::isfinite(sigma_f2))
    throw ValidationError("make_problem: sigma_f2 must be positive and finite");
  PredictiveProblem p;
  p.n = n;
  p.sigma_p2 = sigma_p2;
  p.sigma_f2 = sigma_f2;
  p.r = sigma_f2 / sigma_p2;
  return p;
}

void require_dim(const PredictiveProblem& problem, std::size_t size, const char* what) {
  if (size != static_cast<std::size_t>(problem.n))
    throw ValidationError(std::string(what) + ": dimension " + std::to_string(size) +
                          " does not match problem n=" + std::to_string(problem.n));
}

ParamPoint make_param(const PredictiveProblem& problem, std::vector<double> theta) {
  require_dim(problem, theta.size(), "make_param");
  double ss = 0.0;
  for (double t : theta) {
    if (!std::isfinite(t)) throw ValidationError("make_param: non-finite coordinate");
    ss += t * t;
  }
  ParamPoint p;
  p.theta = std::move(theta);
  p.a_n = ss / (problem.n * problem.sigma_p2);
  return p;
}

ParamPoint param_zero(const PredictiveProblem& problem) {
  return make_param(problem, std::vector<double>(problem.n, 0.0));
}

ParamPoint param_radial(const PredictiveProblem& problem, double a) {
  if (a < 0.0) throw ValidationError("param_radial: signal energy a must be >= 0");
  const double coord = std::sqrt(a * problem.sigma_p2);
  return make_param(problem, std::vector<double>(problem.n, coord));
}

ParamPoint param_spike(const PredictiveProblem& problem, double height, int k) {
  if (k < 0 || k > problem.n)
    throw ValidationError("param_spike: spike count must lie in [0, n]");
  std::vector<double> theta(problem.n, 0.0);
  for (int i = 0; i < k; ++i) theta[i] = height;
  return make_param(problem, std::move(theta));
}

double GaussianPredictiveDensity::log_density(const PredictiveProblem& problem,
                                              std::span<const double> y) const {
  require_dim(problem, mean.size(), "log_density mean");
  require_dim(problem, y.size(), "log_density point");
  static const double kLog2Pi = 1.8378770664093454836;
  const double base = problem.sigma_f2;
  double out = 0.0;
  if (scalar_scale()) {
    const double v = scale[0] * base;
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - mean[i];
      ss += d * d;
    }
    out = -0.5 * problem.n * (kLog2Pi + std::log(v)) - ss / (2.0 * v);
  } else {
    require_dim(problem, scale.size(), "log_density scale");
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double v = scale[i] * base;
      const double d = y[i] - mean[i];
      out += -0.5 * (kLog2Pi + std::log(v)) - d * d / (2.0 * v);
    }
  }
  return out;
}

namespace {
void check_scales(std::span<const double> scale) {
  for (double c : scale)
    if (!(c > 0.0) || !std::isfinite(c))
      throw ValidationError("predictive density: scales must be positive and finite");
}
}  // namespace

GaussianPredictiveDensity make_g1(std::vector<double> mean, double c) {
  GaussianPredictiveDensity g;
  g.mean = std::move(mean);
  g.scale = {c};
  check_scales(g.scale);
  return g;
}

GaussianPredictiveDensity make_gp(std::vector<double> mean, std::vector<double> d) {
  if (d.size() != mean.size())
    throw ValidationError("make_gp: scale vector must match mean dimension");
  GaussianPredictiveDensity g;
  g.mean = std::move(mean);
  g.scale = std::move(d);
  check_scales(g.scale);
  return g;
}

void McConfig::validate() const {
  if (replicates < 2) throw ValidationError("McConfig: need at least 2 replicates");
  if (inner_samples < 1) throw ValidationError("McConfig: inner_samples must be >= 1");
}

std::vector<double> sample_past(const PredictiveProblem& problem, const ParamPoint& theta,
                                std::uint64_t seed) {
  require_dim(problem, theta.theta.size(), "sample_past");
  RngStream rng(seed, 0);
  const double sp = problem.sigma_p();
  std::vector<double> x(problem.n);
  for (int i = 0; i < problem.n; ++i) x[i] = theta.theta[i] + sp * rng.next_gaussian();
  return x;
}

}  // namespace predrisk
