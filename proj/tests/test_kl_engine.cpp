#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "predrisk/kl_engine.hpp"

#include "oracles.hpp"

using namespace predrisk;

namespace {

McConfig quick(std::int64_t replicates, std::uint64_t seed = 5150) {
  McConfig mc;
  mc.replicates = replicates;
  mc.master_seed = seed;
  return mc;
}

// Exact risk of the fixed-scale strategy at the unbiased center:
// (n/2)(log c + 1/c - 1) + n/(2 c r).
double fixed_scale_risk(const PredictiveProblem& p, double c) {
  return 0.5 * p.n * (std::log(c) + 1.0 / c - 1.0) + p.n / (2.0 * c * p.r);
}

}  // namespace

TEST_CASE("gaussian kl loss agrees with direct quadrature") {
  const PredictiveProblem p = make_problem(1, 1.0, 2.0);
  const ParamPoint theta = make_param(p, {0.7});
  const GaussianPredictiveDensity g = make_g1({-0.2}, 1.8);
  const double want = oracle::gaussian_kl_quadrature(0.7, std::sqrt(2.0), -0.2,
                                                     std::sqrt(1.8 * 2.0));
  CHECK(kl_loss_gaussian(p, theta, g) == doctest::Approx(want).epsilon(1e-9));

  // diagonal scales add per coordinate
  const PredictiveProblem p3 = make_problem(3, 1.0, 2.0);
  const ParamPoint t3 = make_param(p3, {0.7, 0.0, -1.0});
  const GaussianPredictiveDensity gp = make_gp({-0.2, 0.1, 0.0}, {1.8, 1.0, 0.5});
  double sum = 0.0;
  sum += oracle::gaussian_kl_quadrature(0.7, std::sqrt(2.0), -0.2, std::sqrt(3.6));
  sum += oracle::gaussian_kl_quadrature(0.0, std::sqrt(2.0), 0.1, std::sqrt(2.0));
  sum += oracle::gaussian_kl_quadrature(-1.0, std::sqrt(2.0), 0.0, std::sqrt(1.0));
  CHECK(kl_loss_gaussian(p3, t3, gp) == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("best invariant risk is constant and matches the closed form") {
  const PredictiveProblem p = make_problem(18, 1.0, 1.0);
  CHECK(risk_best_invariant(p) == doctest::Approx(9.0 * std::log(2.0)).epsilon(1e-12));

  const RiskReport at_zero =
      predictive_risk_mc(p, param_zero(p), make_best_invariant_strategy(), quick(20000));
  CHECK(std::fabs(at_zero.estimate - 9.0 * std::log(2.0)) < 3.0 * at_zero.std_error);

  const RiskReport at_radial =
      predictive_risk_mc(p, param_radial(p, 4.0), make_best_invariant_strategy(), quick(20000, 7));
  CHECK(std::fabs(at_radial.estimate - 9.0 * std::log(2.0)) < 3.0 * at_radial.std_error);
}

TEST_CASE("fixed-scale strategies hit their exact risks") {
  const PredictiveProblem p = make_problem(12, 1.0, 0.5);
  const ParamPoint theta = param_radial(p, 1.3);
  for (const double c : {1.0, 1.7, 3.0}) {
    const RiskReport rep =
        predictive_risk_mc(p, theta, make_fixed_scale_strategy(make_umvue(), c), quick(30000));
    CHECK(std::fabs(rep.estimate - fixed_scale_risk(p, c)) < 3.0 * rep.std_error);
  }
  // the plug-in strategy is the c = 1 member
  const RiskReport plug =
      predictive_risk_mc(p, theta, make_plugin_strategy(make_umvue()), quick(30000));
  CHECK(std::fabs(plug.estimate - fixed_scale_risk(p, 1.0)) < 3.0 * plug.std_error);
}

TEST_CASE("ideal linear closed forms") {
  const PredictiveProblem p = make_problem(10, 1.0, 2.0);
  CHECK(risk_ideal_linear(p, 3.0) ==
        doctest::Approx(5.0 * std::log(1.0 + 3.0 / (4.0 * 2.0))).epsilon(1e-12));
  CHECK(risk_ideal_linear(p, 0.0) == 0.0);

  const JsAsymptotics a = risk_asymptotics_js(p, 1.0);
  CHECK(a.plug_in == doctest::Approx(10.0 / (2.0 * 2.0 * 2.0)));
  CHECK(a.fixed_scale ==
        doctest::Approx(5.0 * (std::log(1.5) - 1.0 / (2.0 * 3.0))).epsilon(1e-12));
  CHECK(a.flattened == doctest::Approx(5.0 * std::log(1.0 + 1.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("oracle-scale strategy beats the plug-in scale at its own center") {
  const PredictiveProblem p = make_problem(30);
  const ParamPoint theta = param_radial(p, 1.0);
  const McConfig mc = quick(20000);
  const RiskReport quad = quadratic_risk_mc(p, theta, make_james_stein(), mc);
  const RiskReport oracle_scale = predictive_risk_mc(
      p, theta, make_oracle_scale_strategy(make_james_stein(), quad.estimate), mc);
  const RiskReport plug =
      predictive_risk_mc(p, theta, make_plugin_strategy(make_james_stein()), mc);
  CHECK(oracle_scale.estimate < plug.estimate);
}

TEST_CASE("quadratic risk of the unbiased rule is n") {
  const PredictiveProblem p = make_problem(25, 3.0, 1.0);
  const RiskReport quad = quadratic_risk_mc(p, param_radial(p, 2.0), make_umvue(), quick(30000));
  CHECK(std::fabs(quad.estimate - 25.0) < 3.0 * quad.std_error);
}

TEST_CASE("generic kl loss agrees with the gaussian closed form") {
  const PredictiveProblem p = make_problem(4, 1.0, 1.5);
  const ParamPoint theta = param_radial(p, 0.8);
  const GaussianPredictiveDensity g = make_g1(theta.theta, 1.9);
  const LogDensity logdensity = [&](std::span<const double> y) { return g.log_density(p, y); };
  const RiskReport rep = kl_loss_generic(p, theta, logdensity, quick(40000));
  CHECK(std::fabs(rep.estimate - kl_loss_gaussian(p, theta, g)) < 3.0 * rep.std_error);
}

TEST_CASE("single-component mixtures reduce to the component risk") {
  const PredictiveProblem p = make_problem(8);
  const ParamPoint theta = param_radial(p, 1.0);
  const std::vector<std::pair<double, GaussianStrategy>> parts{
      {1.0, make_fixed_scale_strategy(make_umvue(), 2.0)}};
  const RiskReport rep = mixture_strategy_risk(p, theta, parts, quick(4000));
  CHECK(std::fabs(rep.estimate - fixed_scale_risk(p, 2.0)) < 4.0 * rep.std_error);
}

TEST_CASE("flattened risk sits between the ideal term and its envelope") {
  const PredictiveProblem p = make_problem(60);
  const ParamPoint theta = param_radial(p, 1.0);
  const McConfig mc = quick(15000);
  const RiskDecomposition dec =
      risk_decomposition_mc(p, theta, make_james_stein_plus(), FlattenSource::sure_plus, mc);
  CHECK(dec.distortion_a >= 0.0);
  CHECK(dec.distortion_b >= 0.0);
  CHECK(dec.distortion_l >= 0.0);
  CHECK(dec.log_if_term > 0.0);
  CHECK(dec.mean_c > 1.0);

  const RiskReport risk = predictive_risk_mc(
      p, theta, make_flattened_strategy(make_james_stein_plus(), FlattenSource::sure_plus), mc);
  const double gap = risk.estimate - dec.log_if_term;
  CHECK(gap <= 0.5 * p.n * (dec.distortion_a + dec.distortion_b) + 3.0 * risk.std_error);
  CHECK(gap >= -0.5 * p.n * dec.distortion_l - 3.0 * risk.std_error);
}

TEST_CASE("log-moment lower bound reproduces the scalar quadrature value") {
  // (1/2) E log(1 + Z^2) for standard normal Z
  const double target = oracle::integrate(
      [](double z) { return 0.5 * std::log1p(z * z) * oracle::normal_pdf(z); }, -10.0, 10.0);
  CHECK(target == doctest::Approx(0.26666).epsilon(2e-4));

  const PredictiveProblem p = make_problem(1);
  const RiskReport rep =
      lower_bound_log_moment(p, param_zero(p), make_umvue(), quick(200000));
  CHECK(std::fabs(rep.estimate - target) < 3.0 * rep.std_error);
}

TEST_CASE("improvement split is positive and increasing") {
  const ImprovementSplit mid = improvement_split(0.5);
  CHECK(mid.d1 == doctest::Approx(0.25));
  CHECK(mid.d2 == doctest::Approx(0.5 * (std::log(2.0) - 0.5)).epsilon(1e-12));
  double prev_d1 = 0.0, prev_d2 = 0.0;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const ImprovementSplit s = improvement_split(alpha);
    CHECK(s.d1 > prev_d1);
    CHECK(s.d2 > prev_d2);
    prev_d1 = s.d1;
    prev_d2 = s.d2;
  }
  CHECK_THROWS_AS(improvement_split(1.0), ValidationError);
}

TEST_CASE("harmonic predictive log density matches brute-force importance sampling") {
  // m(x) = E ||T||^{-(n-2)} over T ~ N(x, sigma_p^2 I); the joint marginal
  // factors into the same expectation at the precision-weighted combination
  // times a gaussian in x - y.
  const PredictiveProblem p = make_problem(3, 1.0, 2.0);
  const std::vector<double> x{1.2, -0.4, 0.8};
  const std::vector<double> y{0.9, 0.3, -0.2};

  std::mt19937_64 gen(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double vw = 1.0 / (1.0 / p.sigma_p2 + 1.0 / p.sigma_f2);
  std::vector<double> w(3);
  for (int i = 0; i < 3; ++i) w[i] = vw * (x[i] / p.sigma_p2 + y[i] / p.sigma_f2);

  auto mean_inv_norm = [&](const std::vector<double>& center, double sd, int draws) {
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
      double ss = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double t = center[d] + sd * normal(gen);
        ss += t * t;
      }
      acc += 1.0 / std::sqrt(ss);
    }
    return acc / draws;
  };

  const int draws = 400000;
  double resid = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = x[i] - y[i];
    resid += -0.5 * std::log(2.0 * M_PI * (p.sigma_p2 + p.sigma_f2)) -
             d * d / (2.0 * (p.sigma_p2 + p.sigma_f2));
  }
  const double brute = resid + std::log(mean_inv_norm(w, std::sqrt(vw), draws)) -
                       std::log(mean_inv_norm(x, p.sigma_p(), draws));
  CHECK(harmonic_predictive_logdensity(p, x, y) == doctest::Approx(brute).epsilon(0.01));
}

TEST_CASE("harmonic bayes risk sits inside its bracket and improves at the origin") {
  const PredictiveProblem p = make_problem(6);
  const HarmonicBayesResult res = risk_harmonic_bayes(p, param_zero(p), quick(2000));
  CHECK(res.bracket_lo <= res.report.estimate + 1e-9);
  CHECK(res.report.estimate <= res.bracket_hi + 1e-9);
  CHECK(res.report.estimate < risk_best_invariant(p));

  const HarmonicBayesResult alt =
      risk_harmonic_bayes(p, param_zero(p), quick(2000), RescaleConvention::sqrt_scale);
  CHECK(alt.bracket_lo <= alt.report.estimate + 1e-9);
}
