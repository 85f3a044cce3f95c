#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "predrisk/errors.hpp"

namespace predrisk {

inline double normal_pdf(double z) {
  static const double kInvSqrt2Pi = 0.3989422804014326779;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

// Upper tail P(Z > z), stable for large z.
inline double normal_sf(double z) { return 0.5 * std::erfc(z * 0.7071067811865475244); }

// Neumaier-compensated sum in index order. Used by every Monte Carlo reduction so
// the result does not depend on thread scheduling.
inline double compensated_sum(std::span<const double> v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased (n-1 denominator)
  std::size_t count = 0;
  double se_mean() const { return count > 1 ? std::sqrt(var / static_cast<double>(count)) : 0.0; }
};

inline MeanVar mean_var(std::span<const double> v) {
  if (v.empty()) throw DegenerateInputError("mean_var: empty sample");
  MeanVar out;
  out.count = v.size();
  out.mean = compensated_sum(v) / static_cast<double>(v.size());
  if (v.size() == 1) return out;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - out.mean;
    sq[i] = d * d;
  }
  out.var = compensated_sum(sq) / static_cast<double>(v.size() - 1);
  return out;
}

// Standard error of the sample variance via the fourth central moment:
// Var(s^2) ~ (m4 - s^4)/n. Good enough for the 3-SE guard bands in bound checks.
inline double variance_se(std::span<const double> v) {
  if (v.size() < 4) throw DegenerateInputError("variance_se: need at least 4 points");
  const MeanVar mv = mean_var(v);
  double m4 = 0.0;
  for (double x : v) {
    const double d = x - mv.mean;
    m4 += d * d * d * d;
  }
  m4 /= static_cast<double>(v.size());
  const double var_of_var = (m4 - mv.var * mv.var) / static_cast<double>(v.size());
  return var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
}

inline double log_sum_exp(std::span<const double> logs) {
  if (logs.empty()) throw DegenerateInputError("log_sum_exp: empty input");
  double m = logs[0];
  for (double l : logs)
    if (l > m) m = l;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

// Least-squares line fit with a 95% confidence half-width on the slope.
// Used by the regularity suite on (log n, log statistic) pairs.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_halfwidth = 0.0;  // 95%, t-distribution with m-2 df
  std::size_t points = 0;
};

inline SlopeFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_line: size mismatch");
  const std::size_t m = x.size();
  if (m < 2) throw DegenerateInputError("fit_line: need at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DegenerateInputError("fit_line: degenerate abscissae");
  SlopeFit fit;
  fit.points = m;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m == 2) return fit;  // interpolating line, zero residual, no CI
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss += r * r;
  }
  const double se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  // t quantiles (0.975) for the small dfs this suite actually uses.
  static const double kT[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  const std::size_t df = m - 2;
  const double t = df <= 10 ? kT[df - 1] : 1.96 + 2.4 / static_cast<double>(df);
  fit.ci_halfwidth = t * se;
  return fit;
}

}  // namespace predrisk
