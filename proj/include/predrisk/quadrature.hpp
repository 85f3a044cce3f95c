#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "predrisk/errors.hpp"

namespace predrisk {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (symmetric half listed).
constexpr double kKronrodNode[8] = {
    0.0,                    0.2077849550078985,  0.4058451513773972,  0.5860872354676911,
    0.7415311855993945,     0.8648644233597691,  0.9491079123427585,  0.9914553711208126};
constexpr double kKronrodWt[8] = {
    0.2094821410847278, 0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299786, 0.0229353220105292};
constexpr double kGaussWt[4] = {
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767, 0.1294849661688697};

struct Gk15 {
  double integral;
  double error;
};

template <class F>
Gk15 gk15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double kron = kKronrodWt[0] * f0;
  double gauss = kGaussWt[0] * f0;
  for (int j = 1; j < 8; ++j) {
    const double x = half * kKronrodNode[j];
    const double fsum = f(mid - x) + f(mid + x);
    kron += kKronrodWt[j] * fsum;
    if (j % 2 == 0) gauss += kGaussWt[j / 2] * fsum;
  }
  kron *= half;
  gauss *= half;
  return {kron, std::abs(kron - gauss)};
}

}  // namespace detail

// Adaptive Gauss-Kronrod on a finite interval. Bisects the interval with the
// largest error estimate until the accumulated error meets the tolerance.
// Throws NumericalError when the interval budget runs out first.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-10,
                              double abs_tol = 0.0, int max_intervals = 2000) {
  if (!(a < b)) throw ValidationError("integrate_adaptive: need a < b");
  struct Piece {
    double a, b, integral, error;
  };
  std::vector<Piece> pieces;
  auto first = detail::gk15(f, a, b);
  pieces.push_back({a, b, first.integral, first.error});
  int evals = 15;
  for (;;) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      total += pieces[i].integral;
      err += pieces[i].error;
      if (pieces[i].error > pieces[worst].error) worst = i;
    }
    const double goal = std::max(abs_tol, rel_tol * std::abs(total));
    if (err <= goal || pieces[worst].error == 0.0)
      return {total, err, evals};
    if (static_cast<int>(pieces.size()) >= max_intervals)
      throw NumericalError("integrate_adaptive: no convergence after " +
                           std::to_string(pieces.size()) + " intervals (err=" +
                           std::to_string(err) + ", goal=" + std::to_string(goal) + ")");
    const Piece p = pieces[worst];
    const double mid = 0.5 * (p.a + p.b);
    auto left = detail::gk15(f, p.a, mid);
    auto right = detail::gk15(f, mid, p.b);
    evals += 30;
    pieces[worst] = {p.a, mid, left.integral, left.error};
    pieces.push_back({mid, p.b, right.integral, right.error});
  }
}

// Fixed-order Gauss-Legendre nodes/weights on [a,b]; used where a deterministic
// non-adaptive rule is wanted (shared-seed Monte Carlo across nodes).
std::vector<std::pair<double, double>> gauss_legendre(int order, double a, double b);

}  // namespace predrisk
