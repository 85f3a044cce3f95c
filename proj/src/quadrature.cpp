#include "predrisk/quadrature.hpp"

#include <cmath>

namespace predrisk {

// Legendre nodes by Newton iteration from the Chebyshev initial guess.
std::vector<std::pair<double, double>> gauss_legendre(int order, double a, double b) {
  if (order < 1) throw ValidationError("gauss_legendre: order must be positive");
  if (!(a < b)) throw ValidationError("gauss_legendre: need a < b");
  const int n = order;
  std::vector<std::pair<double, double>> out(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    out[i] = {mid - half * x, half * w};
    out[n - 1 - i] = {mid + half * x, half * w};
  }
  return out;
}

}  // namespace predrisk
