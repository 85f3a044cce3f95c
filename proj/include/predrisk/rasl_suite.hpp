#pragma once

#include <functional>
#include <string>
#include <vector>

#include "predrisk/core_model.hpp"
#include "predrisk/estimators.hpp"
#include "predrisk/stats.hpp"

namespace predrisk {

// Maps each dimension of the sweep grid to the parameter point used there.
using ThetaFamily = std::function<ParamPoint(const PredictiveProblem&)>;

ThetaFamily make_zero_family();
ThetaFamily make_radial_family(double a);

enum class RaslVerdict { pass, fail, indeterminate };

std::string to_string(RaslVerdict v);

struct ConditionPoint {
  int n;
  double value;
  double se;
};

// One regularity condition, its statistic across the dimension grid, and the
// log-log growth verdict. For the reciprocal-variance conditions (P2a, P33)
// the stored statistic is n * Var, the quantity required to stay bounded, and
// the threshold applies to its slope; the remaining conditions test the raw
// statistic against the stated order.
struct ConditionRecord {
  std::string name;  // P1, P2, P2a, P31, P32, P33
  std::vector<ConditionPoint> statistic_by_n;
  SlopeFit slope;
  double threshold;
  RaslVerdict verdict;
};

struct RaslReport {
  std::string estimator;
  double r = 1.0;
  std::vector<ConditionRecord> conditions;

  bool all_pass() const;
  const ConditionRecord& condition(const std::string& name) const;
};

// Runs one Monte Carlo sweep per dimension and scores every applicable
// condition: P1 (risk O(n)), P2 (loss variance O(n)), P2a (reciprocal-loss
// variance O(1/n)), and, when the estimator carries a risk estimator, P31
// (risk-estimate bias O(sqrt n)), P32 (risk-estimate variance O(n)), P33
// (reciprocal-estimate variance O(1/n)).
RaslReport run_rasl(const LocationEstimator& estimator, const ThetaFamily& family,
                    const std::vector<int>& n_grid, double r, const McConfig& mc);

ConditionRecord check_p1(const LocationEstimator& estimator, const ThetaFamily& family,
                         const std::vector<int>& n_grid, double r, const McConfig& mc);
ConditionRecord check_p2(const LocationEstimator& estimator, const ThetaFamily& family,
                         const std::vector<int>& n_grid, double r, const McConfig& mc);
ConditionRecord check_p2a(const LocationEstimator& estimator, const ThetaFamily& family,
                          const std::vector<int>& n_grid, double r, const McConfig& mc);
std::vector<ConditionRecord> check_p3(const LocationEstimator& estimator, const ThetaFamily& family,
                                      const std::vector<int>& n_grid, double r, const McConfig& mc);

// Slope-protocol verdict for an arbitrary positive statistic sequence,
// reusing the certification scoring (log-log growth against a threshold).
ConditionRecord score_growth(std::string name, std::vector<ConditionPoint> points,
                             double threshold, bool bias_rule = false);

// Exact upper bound 2 n s^2 (s^2 + 4 (1-s)^2 a) on the loss variance of the
// linear rule s * x at signal energy a.
double shrinkage_variance_bound(const PredictiveProblem& problem, double s, double a);

std::string rasl_report_json(const RaslReport& report);
std::string rasl_report_csv(const RaslReport& report);

}  // namespace predrisk
