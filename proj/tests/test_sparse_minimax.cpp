#include <doctest.h>

#include <cmath>
#include <vector>

#include "predrisk/sparse_minimax.hpp"

using namespace predrisk;

namespace {

McConfig quick(std::int64_t replicates, std::uint64_t seed = 808) {
  McConfig mc;
  mc.replicates = replicates;
  mc.master_seed = seed;
  return mc;
}

}  // namespace

TEST_CASE("sparse space membership counts nonzero coordinates") {
  const SparseSpace space = make_sparse_space(5, 2);
  CHECK(sparse_member(space, std::vector<double>{0.0, 1.0, 0.0, -2.0, 0.0}));
  CHECK_FALSE(sparse_member(space, std::vector<double>{0.1, 1.0, 0.0, -2.0, 0.0}));
  CHECK(sparse_member(make_sparse_space(3, 0), std::vector<double>{0.0, 0.0, 0.0}));
  CHECK_THROWS_AS(sparse_member(space, std::vector<double>{1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(make_sparse_space(0, 0), ValidationError);
  CHECK_THROWS_AS(make_sparse_space(5, 6), ValidationError);
}

TEST_CASE("canonical threshold and rate at the anchor occupancy") {
  CHECK(threshold_lambda(0.01) == doctest::Approx(3.0348544).epsilon(1e-7));
  CHECK(sparse_univariate_rate(0.01, 1.0) == doctest::Approx(0.046052).epsilon(1e-4));
  CHECK(sparse_univariate_rate(0.01, 2.0) ==
        doctest::Approx(0.5 * sparse_univariate_rate(0.01, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(threshold_lambda(0.0), ValidationError);
  CHECK_THROWS_AS(threshold_lambda(1.0), ValidationError);
  CHECK_THROWS_AS(sparse_univariate_rate(0.5, 0.0), ValidationError);
}

TEST_CASE("rule hands off exactly at the threshold") {
  const PredictiveProblem p = make_problem(1, 4.0, 4.0);
  const ThresholdRule rule = make_threshold_rule(0.01);
  const double cut = rule.lambda * 2.0;  // sigma_p = 2

  const GaussianPredictiveDensity at = threshold_density(rule, p, cut);
  CHECK(at.mean[0] == 0.0);
  CHECK(at.scale[0] == 1.0);
  const GaussianPredictiveDensity below = threshold_density(rule, p, -cut);
  CHECK(below.mean[0] == 0.0);
  const GaussianPredictiveDensity above = threshold_density(rule, p, cut + 1e-9);
  CHECK(above.mean[0] == doctest::Approx(cut + 1e-9));

  ThresholdRule mangled = rule;
  mangled.lambda *= 0.9;
  CHECK_THROWS_AS(threshold_density(mangled, p, 0.0), ValidationError);
  ThresholdRule odd = rule;
  odd.inner_scale = "flattened";
  CHECK_THROWS_AS(threshold_density(odd, p, 0.0), ValidationError);
  CHECK_THROWS_AS(threshold_density(rule, make_problem(2), 0.0), ValidationError);
}

TEST_CASE("risk profile: quiet at the origin, plug-in level in the far field") {
  const PredictiveProblem p = make_problem(1);
  const ThresholdRule rule = make_threshold_rule(0.01);
  const std::vector<double> grid{0.0, 8.0};
  const auto profile = threshold_risk_profile(rule, p, grid, quick(60000));
  REQUIRE(profile.size() == 2);
  // pointwise risk at 0 sits below the sparse rate scale
  CHECK(profile[0].risk < sparse_univariate_rate(0.01, 1.0));
  // far spikes ride the plug-in rule: quadratic risk 1/(2r)
  CHECK(std::fabs(profile[1].risk - 0.5) < 5.0 * profile[1].se);
  CHECK_THROWS_AS(threshold_risk_profile(rule, p, std::vector<double>{}, quick(100)),
                  ValidationError);
}

TEST_CASE("halving the threshold inflates the origin risk severalfold") {
  const PredictiveProblem p = make_problem(1);
  const ThresholdRule canonical = make_threshold_rule(0.01);
  const ThresholdRule half = make_threshold_rule(std::pow(0.01, 0.25));
  CHECK(half.lambda == doctest::Approx(0.5 * canonical.lambda).epsilon(1e-12));

  const std::vector<double> origin{0.0};
  const double rho = threshold_risk_profile(canonical, p, origin, quick(60000))[0].risk;
  const double rho_half = threshold_risk_profile(half, p, origin, quick(60000, 9))[0].risk;
  CHECK(rho_half > 2.0 * rho);
}

TEST_CASE("two-point prior profile peaks on the rate scale") {
  const PredictiveProblem p = make_problem(1);
  const ThresholdRule rule = make_threshold_rule(0.01);
  const std::vector<double> mu_grid{2.0, rule.lambda, rule.lambda + 0.5, 4.0};
  const auto profile = moment_prior_profile(rule, p, mu_grid, quick(40000));
  REQUIRE(profile.size() == mu_grid.size());
  double sup = 0.0;
  for (const auto& point : profile) {
    CHECK(point.risk >= 0.0);
    sup = std::max(sup, point.risk);
  }
  const double rate = sparse_univariate_rate(0.01, 1.0);
  CHECK(sup > 0.3 * rate);
  CHECK(sup < 3.0 * rate);
}

TEST_CASE("product lower bound reproduces the per-coordinate log moment") {
  const PredictiveProblem p = make_problem(5);
  const RiskReport rep = product_lower_bound(p, param_zero(p), make_umvue(), quick(50000));
  CHECK(std::fabs(rep.estimate - 5.0 * 0.26666) < 4.0 * rep.std_error + 5e-4);
}

TEST_CASE("sparse rate estimate fills rates, the exact ratio, and the csv") {
  const PredictiveProblem p = make_problem(400);
  const SparseSpace space = make_sparse_space(400, 4);
  const SparseRateEstimate est = sparse_minimax_estimate(p, space, quick(2000));
  CHECK(est.eta == doctest::Approx(0.01));
  CHECK(est.gaussian_rate == doctest::Approx(4.0 * std::log(100.0)).epsilon(1e-12));
  CHECK(est.unrestricted_rate == doctest::Approx(2.0 * std::log(100.0)).epsilon(1e-12));
  CHECK(est.ratio == 2.0);
  CHECK(est.empirical > 0.3 * est.gaussian_rate);
  CHECK(est.empirical < 1.5 * est.gaussian_rate);
  CHECK(est.empirical_se > 0.0);

  const std::string csv = sparse_csv(std::vector<SparseRateEstimate>{est});
  CHECK(csv.rfind("n,s,r,eta,univariate_rate,gaussian_rate,unrestricted_rate,empirical,ratio\n",
                  0) == 0);

  CHECK_THROWS_AS(sparse_minimax_estimate(make_problem(10), space, quick(2000)), ValidationError);
  CHECK_THROWS_AS(sparse_minimax_estimate(p, make_sparse_space(400, 0), quick(2000)),
                  ValidationError);
  CHECK_THROWS_AS(sparse_minimax_estimate(p, make_sparse_space(400, 40), quick(2000)),
                  ValidationError);
}
