#include "predrisk/harmonic.hpp"

#include <cmath>
#include <string>

#include "predrisk/errors.hpp"
#include "predrisk/quadrature.hpp"

namespace predrisk {

namespace {

// Alternating series S_b(t) = sum_k (-1)^k t^k / (k! (b+k)). Entire in t;
// safe for t <= 8 where the largest term amplifies roundoff by < 1e7.
double series_slice(double b, double t) {
  double term = 1.0 / b;
  double sum = term;
  for (int k = 0; k < 400; ++k) {
    term *= -t / (k + 1) * ((b + k) / (b + k + 1));
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) return sum;
  }
  throw NumericalError("series_slice: no convergence at b=" + std::to_string(b) +
                       ", t=" + std::to_string(t));
}

// log S_b(t) for t > 8 via adaptive quadrature with the integrand peak
// factored out so the scaled integrand lies in (0, 1].
double quad_slice_log(double b, double t) {
  if (b < 1.0) {
    // substitute u = w^(1/b): S_b = (1/b) * integral_0^1 exp(-t w^(1/b)) dw,
    // which removes the endpoint singularity of u^(b-1)
    const double inv_b = 1.0 / b;
    auto f = [&](double w) { return w <= 0.0 ? 1.0 : std::exp(-t * std::pow(w, inv_b)); };
    QuadResult q = integrate_adaptive(f, 0.0, 1.0, 1e-10);
    return std::log(q.value) - std::log(b);
  }
  const double u_star = std::min(1.0, (b - 1.0) / t);
  const double peak = (b > 1.0 && u_star > 0.0) ? (b - 1.0) * std::log(u_star) - t * u_star
                                                : 0.0;
  auto f = [&](double u) {
    if (u <= 0.0) return b > 1.0 ? 0.0 : std::exp(-peak);
    return std::exp((b - 1.0) * std::log(u) - t * u - peak);
  };
  QuadResult q = integrate_adaptive(f, 0.0, 1.0, 1e-10);
  return peak + std::log(q.value);
}

}  // namespace

double log_radial_slice(double b, double t) {
  if (!(b > 0.0)) throw ValidationError("log_radial_slice: index b must be positive");
  if (!(t >= 0.0)) throw ValidationError("log_radial_slice: argument t must be >= 0");
  if (t == 0.0) return -std::log(b);
  if (t <= 8.0) return std::log(series_slice(b, t));
  return quad_slice_log(b, t);
}

double log_lower_inc_gamma(double b, double t) {
  if (!(t > 0.0)) throw ValidationError("log_lower_inc_gamma: t must be positive");
  return b * std::log(t) + log_radial_slice(b, t);
}

double RadialMarginal::dlog_profile(double t) const {
  // chain rule through the radius: d/dt log h = f'(s)/s, f(s) = log h(s^2/2)
  const double s = std::sqrt(2.0 * t);
  const double h = 1e-4 * (1.0 + s);
  if (s < h) {
    const double dt = 0.5 * h * h;
    return (log_profile(t + dt) - log_profile(t)) / dt;
  }
  const double fp = (log_profile(0.5 * (s + h) * (s + h)) -
                     log_profile(0.5 * (s - h) * (s - h))) /
                    (2.0 * h);
  return fp / s;
}

double RadialMarginal::d2log_profile(double t) const {
  const double s = std::sqrt(2.0 * t);
  const double h = 1e-4 * (1.0 + s);
  if (s < h) {
    const double dt = 1e-3;
    const double f0 = log_profile(t);
    const double f1 = log_profile(t + dt);
    const double f2 = log_profile(t + 2.0 * dt);
    return (f2 - 2.0 * f1 + f0) / (dt * dt);
  }
  const double fm = log_profile(0.5 * (s - h) * (s - h));
  const double f0 = log_profile(0.5 * s * s);
  const double fp = log_profile(0.5 * (s + h) * (s + h));
  const double d1 = (fp - fm) / (2.0 * h);
  const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
  return d2 / (s * s) - d1 / (s * s * s);
}

MarginalLocal marginal_local(const RadialMarginal& marginal, int n, double t) {
  if (n < 1) throw ValidationError("marginal_local: dimension must be >= 1");
  if (!(t >= 0.0)) throw ValidationError("marginal_local: t must be >= 0");
  const double l1 = marginal.dlog_profile(t);
  const double l2 = marginal.d2log_profile(t);
  MarginalLocal out;
  out.grad_log_sq = l1 * l1 * 2.0 * t;
  out.laplacian_ratio = 2.0 * t * (l2 + l1 * l1) + n * l1;
  out.shrink = 1.0 + l1;
  return out;
}

HarmonicMarginal::HarmonicMarginal(int n) : n_(n), a_(0.5 * (n - 2)) {
  if (n < 3)
    throw ValidationError("HarmonicMarginal: needs dimension >= 3, got " + std::to_string(n));
}

double HarmonicMarginal::log_profile(double t) const { return log_radial_slice(a_, t); }

double HarmonicMarginal::dlog_profile(double t) const {
  // h'(t) = -S_{a+1}(t), so h'/h is a ratio of positive slices
  return -std::exp(log_radial_slice(a_ + 1.0, t) - log_radial_slice(a_, t));
}

double HarmonicMarginal::d2log_profile(double t) const {
  // h''(t) = S_{a+2}(t); (log h)'' = h''/h - (h'/h)^2
  const double base = log_radial_slice(a_, t);
  const double r1 = -std::exp(log_radial_slice(a_ + 1.0, t) - base);
  const double r2 = std::exp(log_radial_slice(a_ + 2.0, t) - base);
  return r2 - r1 * r1;
}

}  // namespace predrisk
