#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "predrisk/errors.hpp"

namespace predrisk {

// Two-sample Gaussian sequence problem: a past observation X ~ N(theta, sigma_p2 * I)
// is used to build a predictive density for a future Y ~ N(theta, sigma_f2 * I).
// r = sigma_f2 / sigma_p2 is the future-to-past variability. All internal formulas
// normalize to sigma_p2 = 1 (the public API accepts arbitrary variances and rescales),
// so quadratic risks and unbiased risk estimates are reported in past-noise units.
struct PredictiveProblem {
  int n = 0;
  double sigma_p2 = 1.0;
  double sigma_f2 = 1.0;
  double r = 1.0;

  double sigma_p() const;
};

PredictiveProblem make_problem(int n, double sigma_p2 = 1.0, double sigma_f2 = 1.0);

// A parameter point together with its normalized signal energy a = |theta|^2 / (n sigma_p2).
// a is stored in normalized units so the radial closed forms can consume it directly.
struct ParamPoint {
  std::vector<double> theta;
  double a_n = 0.0;
};

ParamPoint make_param(const PredictiveProblem& problem, std::vector<double> theta);
ParamPoint param_zero(const PredictiveProblem& problem);
// |theta|^2 = n * a * sigma_p2, spread evenly over all coordinates.
ParamPoint param_radial(const PredictiveProblem& problem, double a);
// k spike coordinates of height h (in original units), the rest zero.
ParamPoint param_spike(const PredictiveProblem& problem, double height, int k);

// Member of the Gaussian predictive family: mean vector plus a scale that multiplies
// sigma_f2. scale.size() == 1 is the single-scale class, scale.size() == n the
// product (diagonal) class; a single-scale member embeds in the diagonal class as a
// constant diagonal with identical densities.
struct GaussianPredictiveDensity {
  std::vector<double> mean;
  std::vector<double> scale;

  bool scalar_scale() const { return scale.size() == 1; }
  double log_density(const PredictiveProblem& problem, std::span<const double> y) const;
};

GaussianPredictiveDensity make_g1(std::vector<double> mean, double c);
GaussianPredictiveDensity make_gp(std::vector<double> mean, std::vector<double> d);

struct McConfig {
  std::int64_t replicates = 10000;
  std::uint64_t master_seed = 0x9d2c5680u;  // documented library default, not wall clock
  std::int64_t inner_samples = 2000;        // for nested (generic-density) losses

  void validate() const;
};

enum class RiskMethod { closed_form, monte_carlo, quadrature };

struct RiskReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  RiskMethod method = RiskMethod::monte_carlo;
};

// One draw of the past observation X ~ N(theta, sigma_p2 * I).
std::vector<double> sample_past(const PredictiveProblem& problem, const ParamPoint& theta,
                                std::uint64_t seed);

// Shared validation helper: the point must match the problem dimension.
void require_dim(const PredictiveProblem& problem, std::size_t size, const char* what);

}  // namespace predrisk
