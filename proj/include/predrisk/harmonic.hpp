#pragma once

#include "predrisk/core_model.hpp"

namespace predrisk {

// Spherically symmetric prior marginal for normalized past data z = x/sigma_p:
// m(z) = h(t) up to a constant, with t = ||z||^2 / 2. Derivatives are taken
// with respect to t. Implementations may override the derivative members with
// analytic forms; the defaults use central finite differences on the radius
// s = ||z|| with step 1e-4 * (1 + s).
class RadialMarginal {
 public:
  virtual ~RadialMarginal() = default;
  virtual double log_profile(double t) const = 0;
  virtual double dlog_profile(double t) const;
  virtual double d2log_profile(double t) const;
};

// Local differential quantities of a radial marginal at squared radius 2t in
// dimension n. shrink multiplies z to give the posterior mean of the
// normalized problem: E[theta | z] = shrink * z.
struct MarginalLocal {
  double grad_log_sq;      // ||grad log m||^2
  double laplacian_ratio;  // (Laplacian m) / m
  double shrink;           // 1 + d/dt log h
};

MarginalLocal marginal_local(const RadialMarginal& marginal, int n, double t);

// log S_b(t) with S_b(t) = integral_0^1 u^(b-1) exp(-t u) du = t^(-b) g(b,t),
// where g is the lower incomplete gamma function. Evaluated by an alternating
// entire series for t <= 8 and by peak-factored adaptive quadrature above
// (relative tolerance 1e-10). Requires b > 0 and t >= 0.
double log_radial_slice(double b, double t);

// log of the lower incomplete gamma function, log g(b, t).
double log_lower_inc_gamma(double b, double t);

// Marginal of the prior proportional to ||theta||^(-(n-2)) under unit
// Gaussian noise. Radial profile h(t) = S_a(t) with a = (n-2)/2. The log
// derivative ratios are computed from slices at a, a+1, a+2, which are all
// positive, so no cancellation occurs anywhere on t >= 0.
class HarmonicMarginal final : public RadialMarginal {
 public:
  explicit HarmonicMarginal(int n);

  double log_profile(double t) const override;
  double dlog_profile(double t) const override;
  double d2log_profile(double t) const override;

  int dim() const { return n_; }
  double index() const { return a_; }

 private:
  int n_;
  double a_;
};

}  // namespace predrisk
