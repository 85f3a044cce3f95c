#pragma once

// Reference numerics for the test suite, written directly from textbook
// formulas and kept independent of the library implementations they check.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double simpson_panel(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_panel(a, m, fa, flm, fm);
  const double right = simpson_panel(m, b, fm, frm, fb);
  if (depth <= 0) return left + right;
  if (std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on a finite interval.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return simpson_rec(f, a, b, fa, fm, fb, simpson_panel(a, b, fa, fm, fb), tol, 48);
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Regularized lower incomplete gamma P(s, x), series and continued fraction.
inline double gamma_p(double s, double x) {
  if (x < 0.0 || s <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(s);
  if (x < s + 1.0) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
      term *= x / (s + k);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(s, x)
  double b = x + 1.0 - s;
  double c = 1e308;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + s * std::log(x) - lg) * h;
}

inline double chi2_cdf(double x, double df) { return gamma_p(0.5 * df, 0.5 * x); }

// Noncentral chi-square CDF as a Poisson mixture of central ones.
inline double noncentral_chi2_cdf(double x, double df, double lambda) {
  if (lambda == 0.0) return chi2_cdf(x, df);
  const double half = 0.5 * lambda;
  // start at the modal Poisson index and expand both ways
  const int mode = static_cast<int>(half);
  auto log_pois = [&](int j) { return -half + j * std::log(half) - std::lgamma(j + 1.0); };
  double sum = 0.0;
  for (int j = mode; j >= 0; --j) {
    const double term = std::exp(log_pois(j)) * chi2_cdf(x, df + 2.0 * j);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  for (int j = mode + 1; j < mode + 4000; ++j) {
    const double term = std::exp(log_pois(j)) * chi2_cdf(x, df + 2.0 * j);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// KL divergence between scalar Gaussians by direct quadrature over +-12 sd.
inline double gaussian_kl_quadrature(double mp, double sp, double mq, double sq) {
  auto integrand = [&](double x) {
    const double zp = (x - mp) / sp;
    const double zq = (x - mq) / sq;
    const double log_ratio = std::log(sq / sp) + 0.5 * (zq * zq - zp * zp);
    return normal_pdf(zp) / sp * log_ratio;
  };
  const double lo = mp - 12.0 * sp;
  const double hi = mp + 12.0 * sp;
  return integrate(integrand, lo, hi, 1e-12);
}

}  // namespace oracle
