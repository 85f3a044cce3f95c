#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "predrisk/rasl_suite.hpp"
#include "predrisk/stats.hpp"

using namespace predrisk;

namespace {

std::vector<ConditionPoint> power_points(double exponent, double wiggle = 0.0) {
  std::vector<ConditionPoint> pts;
  int sign = 1;
  for (int n : {10, 30, 100, 300, 1000}) {
    const double v = std::pow(static_cast<double>(n), exponent) * std::exp(sign * wiggle);
    pts.push_back({n, v, 0.01 * v});
    sign = -sign;
  }
  return pts;
}

McConfig quick(std::int64_t replicates, std::uint64_t seed = 99) {
  McConfig mc;
  mc.replicates = replicates;
  mc.master_seed = seed;
  return mc;
}

}  // namespace

TEST_CASE("growth scoring separates linear from quadratic statistics") {
  const ConditionRecord lin = score_growth("P1", power_points(1.0), 1.1);
  CHECK(lin.verdict == RaslVerdict::pass);
  CHECK(lin.slope.slope == doctest::Approx(1.0).epsilon(1e-9));

  const ConditionRecord quad = score_growth("P2", power_points(2.0), 1.1);
  CHECK(quad.verdict == RaslVerdict::fail);
  CHECK(quad.slope.slope - quad.slope.ci_halfwidth > 1.1);

  // a statistic riding exactly on the threshold is not rejected: the fit must
  // place the slope above threshold + CI before the order bound fails
  const ConditionRecord edge = score_growth("P2", power_points(1.1, 0.08), 1.1);
  CHECK(edge.verdict == RaslVerdict::pass);
  const ConditionRecord above = score_growth("P2", power_points(1.25, 0.02), 1.1);
  CHECK(above.verdict == RaslVerdict::fail);
  CHECK(above.slope.slope - above.slope.ci_halfwidth > 1.1);
}

TEST_CASE("growth scoring edge rules") {
  std::vector<ConditionPoint> zeros{{10, 0.0, 1.0}, {100, 0.0, 1.0}, {1000, 0.0, 1.0}};
  CHECK(score_growth("P32", zeros, 1.1).verdict == RaslVerdict::pass);

  // bias rule: everything inside three standard errors counts as flat
  std::vector<ConditionPoint> noise{{10, 0.5, 1.0}, {100, -0.8, 1.0}, {1000, 0.2, 1.0}};
  CHECK(score_growth("P31", noise, 0.55, true).verdict == RaslVerdict::pass);
  // without it a nonpositive entry cannot be fit on the log scale
  CHECK(score_growth("P31", noise, 0.55, false).verdict == RaslVerdict::indeterminate);

  std::vector<ConditionPoint> bad{{10, 1.0, 0.01},
                                  {100, std::numeric_limits<double>::quiet_NaN(), 0.01},
                                  {1000, 3.0, 0.01}};
  CHECK(score_growth("P1", bad, 1.1).verdict == RaslVerdict::indeterminate);
}

TEST_CASE("linear-rule loss variance stays under the closed-form bound") {
  const PredictiveProblem p = make_problem(10);
  CHECK(shrinkage_variance_bound(p, 0.8, 2.0) == doctest::Approx(12.288).epsilon(1e-12));
  CHECK_THROWS_AS(shrinkage_variance_bound(p, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(shrinkage_variance_bound(p, 1.2, 1.0), ValidationError);
  CHECK_THROWS_AS(shrinkage_variance_bound(p, 0.5, -1.0), ValidationError);

  std::mt19937_64 gen(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto sample_var = [&](double s, double a) {
    const ParamPoint theta = param_radial(p, a);
    std::vector<double> losses(40000);
    for (auto& L : losses) {
      double acc = 0.0;
      for (int i = 0; i < p.n; ++i) {
        const double d = s * (theta.theta[i] + normal(gen)) - theta.theta[i];
        acc += d * d;
      }
      L = acc;
    }
    return mean_var(losses).var;
  };
  // a = 0 attains the bound; positive energy leaves slack
  CHECK(sample_var(0.7, 0.0) == doctest::Approx(shrinkage_variance_bound(p, 0.7, 0.0)).epsilon(0.15));
  CHECK(sample_var(0.7, 1.5) < shrinkage_variance_bound(p, 0.7, 1.5));
}

TEST_CASE("sweep input validation") {
  const McConfig mc = quick(100);
  CHECK_THROWS_AS(run_rasl(make_umvue(), make_zero_family(), {10, 30}, 1.0, mc), ValidationError);
  CHECK_THROWS_AS(run_rasl(make_umvue(), make_zero_family(), {10, 30, 20}, 1.0, mc),
                  ValidationError);
  CHECK_THROWS_AS(run_rasl(make_umvue(), make_zero_family(), {10, 30, 100}, 0.0, mc),
                  ValidationError);
  CHECK_THROWS_AS(make_radial_family(-1.0), ValidationError);
}

TEST_CASE("unbiased rule passes every condition with a degenerate risk estimate") {
  const RaslReport rep =
      run_rasl(make_umvue(), make_radial_family(0.5), {10, 30, 100, 300}, 1.0, quick(4000));
  REQUIRE(rep.conditions.size() == 6);
  for (const auto& c : rep.conditions) {
    INFO(c.name, " slope=", c.slope.slope, " ci=", c.slope.ci_halfwidth);
    CHECK(c.verdict == RaslVerdict::pass);
  }
  // U = n exactly, so its variance statistic is identically zero
  for (const auto& pt : rep.condition("P32").statistic_by_n) CHECK(pt.value == 0.0);
  CHECK_THROWS_AS(rep.condition("P99"), ValidationError);
}

TEST_CASE("shrinkage rules certify on the production grid") {
  const std::vector<int> grid{10, 30, 100, 300, 1000};
  for (const auto& estimator : {make_james_stein(), make_james_stein_plus()})
    for (double a : {0.0, 1.0, 5.0}) {
      const RaslReport rep = run_rasl(estimator, make_radial_family(a), grid, 1.0, quick(4000));
      REQUIRE(rep.conditions.size() == 6);
      for (const auto& c : rep.conditions) {
        INFO(rep.estimator, " a=", a, " ", c.name, " slope=", c.slope.slope,
             " ci=", c.slope.ci_halfwidth);
        CHECK(c.verdict == RaslVerdict::pass);
      }
    }
}

TEST_CASE("the engineered violator is caught through its loss variance") {
  const RaslReport rep =
      run_rasl(make_estimator("violator"), make_zero_family(), {10, 30, 100, 300}, 1.0, quick(3000));
  REQUIRE(rep.conditions.size() == 3);  // no risk estimator, so no P3x
  const ConditionRecord& p2 = rep.condition("P2");
  CHECK(p2.verdict == RaslVerdict::fail);
  CHECK(p2.slope.slope - p2.slope.ci_halfwidth > 1.05);
  CHECK_FALSE(rep.all_pass());
}

TEST_CASE("report serializations carry every grid point") {
  const RaslReport rep =
      run_rasl(make_umvue(), make_zero_family(), {10, 30, 100}, 2.0, quick(500));
  const std::string csv = rasl_report_csv(rep);
  CHECK(csv.rfind("condition,n,value,se\n", 0) == 0);
  std::size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 1 + 6 * 3);

  const nlohmann::json j = nlohmann::json::parse(rasl_report_json(rep));
  CHECK(j["estimator"] == "umvue");
  CHECK(j["r"] == 2.0);
  REQUIRE(j["conditions"].size() == 6);
  CHECK(j["conditions"][0]["name"] == "P1");
  CHECK(j["conditions"][0]["points"].size() == 3);
  // U = n exactly: the bias and variance conditions are decided without a fit
  CHECK(j["conditions"][3]["verdict"] == "pass");
  CHECK(j["conditions"][4]["verdict"] == "pass");
}
