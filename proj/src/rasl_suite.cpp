#include "predrisk/rasl_suite.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "predrisk/errors.hpp"
#include "predrisk/mc.hpp"
#include "predrisk/rng.hpp"

namespace predrisk {

ThetaFamily make_zero_family() {
  return [](const PredictiveProblem& p) { return param_zero(p); };
}

ThetaFamily make_radial_family(double a) {
  if (!(a >= 0.0)) throw ValidationError("make_radial_family: a must be >= 0");
  return [a](const PredictiveProblem& p) { return param_radial(p, a); };
}

std::string to_string(RaslVerdict v) {
  switch (v) {
    case RaslVerdict::pass: return "pass";
    case RaslVerdict::fail: return "fail";
    default: return "indeterminate";
  }
}

bool RaslReport::all_pass() const {
  for (const auto& c : conditions)
    if (c.verdict != RaslVerdict::pass) return false;
  return !conditions.empty();
}

const ConditionRecord& RaslReport::condition(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw ValidationError("RaslReport: no condition named " + name);
}

namespace {

// per-replicate sweep values: loss, 1/(1+loss/(nr)), u-hat, 1/(1+u-hat/(nr))
struct SweepCell {
  std::vector<double> loss, inv_loss, u, inv_u;
  bool has_u = false;
};

SweepCell sweep_dimension(const LocationEstimator& estimator, const ThetaFamily& family, int n,
                          double r, const McConfig& mc) {
  const PredictiveProblem problem = make_problem(n, 1.0, r);
  const ParamPoint theta = family(problem);
  const bool has_u = estimator.has_risk_estimator();
  const double nr = n * r;
  const std::uint64_t seed = derive_seed(mc.master_seed, static_cast<std::uint64_t>(n));
  const auto reps = run_replicates<std::array<double, 4>>(
      seed, mc.replicates, [&](RngStream& rng) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = theta.theta[i] + rng.next_gaussian();
        const std::vector<double> est = estimator.estimate(problem, x);
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
          const double d = est[i] - theta.theta[i];
          loss += d * d;
        }
        std::array<double, 4> out{loss, 1.0 / (1.0 + loss / nr), 0.0, 0.0};
        if (has_u) {
          const double u = estimator.risk_estimator(problem, x);
          out[2] = u;
          out[3] = 1.0 / (1.0 + u / nr);
        }
        return out;
      });
  SweepCell cell;
  cell.has_u = has_u;
  const std::size_t R = reps.size();
  cell.loss.resize(R);
  cell.inv_loss.resize(R);
  if (has_u) {
    cell.u.resize(R);
    cell.inv_u.resize(R);
  }
  for (std::size_t i = 0; i < R; ++i) {
    cell.loss[i] = reps[i][0];
    cell.inv_loss[i] = reps[i][1];
    if (has_u) {
      cell.u[i] = reps[i][2];
      cell.inv_u[i] = reps[i][3];
    }
  }
  return cell;
}

ConditionRecord score_condition(std::string name, std::vector<ConditionPoint> points,
                                double threshold, bool bias_rule) {
  ConditionRecord rec;
  rec.name = std::move(name);
  rec.statistic_by_n = std::move(points);
  rec.threshold = threshold;
  rec.slope = SlopeFit{0.0, 0.0, 0.0, rec.statistic_by_n.size()};

  bool all_zero = true;
  bool all_within_noise = true;
  bool loggable = true;
  for (const auto& p : rec.statistic_by_n) {
    if (!std::isfinite(p.value) || !std::isfinite(p.se)) {
      rec.verdict = RaslVerdict::indeterminate;
      return rec;
    }
    if (std::fabs(p.value) > 1e-12) all_zero = false;
    if (std::fabs(p.value) > 3.0 * p.se) all_within_noise = false;
    if (!(p.value > 0.0)) loggable = false;
  }
  if (all_zero || (bias_rule && all_within_noise)) {
    rec.verdict = RaslVerdict::pass;
    return rec;
  }
  if (!loggable) {
    rec.verdict = RaslVerdict::indeterminate;
    return rec;
  }
  std::vector<double> lx, ly;
  lx.reserve(rec.statistic_by_n.size());
  ly.reserve(rec.statistic_by_n.size());
  for (const auto& p : rec.statistic_by_n) {
    lx.push_back(std::log(static_cast<double>(p.n)));
    ly.push_back(std::log(p.value));
  }
  rec.slope = fit_line(lx, ly);
  // pass iff slope <= threshold + CI halfwidth: the fit must place the slope
  // strictly above the threshold before the order condition is rejected
  if (rec.slope.slope <= threshold + rec.slope.ci_halfwidth)
    rec.verdict = RaslVerdict::pass;
  else
    rec.verdict = RaslVerdict::fail;
  return rec;
}

}  // namespace

RaslReport run_rasl(const LocationEstimator& estimator, const ThetaFamily& family,
                    const std::vector<int>& n_grid, double r, const McConfig& mc) {
  mc.validate();
  if (n_grid.size() < 3) throw ValidationError("run_rasl: need at least 3 grid dimensions");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw ValidationError("run_rasl: dimension grid must be increasing");
  if (!(r > 0.0)) throw ValidationError("run_rasl: r must be positive");

  std::vector<ConditionPoint> p1, p2, p2a, p31, p32, p33;
  bool has_u = true;
  for (int n : n_grid) {
    const SweepCell cell = sweep_dimension(estimator, family, n, r, mc);
    has_u = has_u && cell.has_u;
    const MeanVar loss = mean_var(cell.loss);
    const MeanVar inv_loss = mean_var(cell.inv_loss);
    p1.push_back({n, loss.mean, loss.se_mean()});
    p2.push_back({n, loss.var, variance_se(cell.loss)});
    p2a.push_back({n, n * inv_loss.var, n * variance_se(cell.inv_loss)});
    if (cell.has_u) {
      std::vector<double> diff(cell.u.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = cell.u[i] - cell.loss[i];
      const MeanVar bias = mean_var(diff);
      const MeanVar u = mean_var(cell.u);
      const MeanVar inv_u = mean_var(cell.inv_u);
      p31.push_back({n, std::fabs(bias.mean), bias.se_mean()});
      p32.push_back({n, u.var, variance_se(cell.u)});
      p33.push_back({n, n * inv_u.var, n * variance_se(cell.inv_u)});
    }
  }

  RaslReport report;
  report.estimator = estimator.name;
  report.r = r;
  report.conditions.push_back(score_condition("P1", std::move(p1), 1.1, false));
  report.conditions.push_back(score_condition("P2", std::move(p2), 1.1, false));
  report.conditions.push_back(score_condition("P2a", std::move(p2a), 0.1, false));
  if (has_u) {
    report.conditions.push_back(score_condition("P31", std::move(p31), 0.55, true));
    report.conditions.push_back(score_condition("P32", std::move(p32), 1.1, false));
    report.conditions.push_back(score_condition("P33", std::move(p33), 0.1, false));
  }
  return report;
}

ConditionRecord check_p1(const LocationEstimator& estimator, const ThetaFamily& family,
                         const std::vector<int>& n_grid, double r, const McConfig& mc) {
  return run_rasl(estimator, family, n_grid, r, mc).condition("P1");
}

ConditionRecord check_p2(const LocationEstimator& estimator, const ThetaFamily& family,
                         const std::vector<int>& n_grid, double r, const McConfig& mc) {
  return run_rasl(estimator, family, n_grid, r, mc).condition("P2");
}

ConditionRecord check_p2a(const LocationEstimator& estimator, const ThetaFamily& family,
                          const std::vector<int>& n_grid, double r, const McConfig& mc) {
  return run_rasl(estimator, family, n_grid, r, mc).condition("P2a");
}

std::vector<ConditionRecord> check_p3(const LocationEstimator& estimator, const ThetaFamily& family,
                                      const std::vector<int>& n_grid, double r,
                                      const McConfig& mc) {
  if (!estimator.has_risk_estimator())
    throw ValidationError("check_p3: estimator '" + estimator.name + "' has no risk estimator");
  const RaslReport report = run_rasl(estimator, family, n_grid, r, mc);
  return {report.condition("P31"), report.condition("P32"), report.condition("P33")};
}

ConditionRecord score_growth(std::string name, std::vector<ConditionPoint> points,
                             double threshold, bool bias_rule) {
  return score_condition(std::move(name), std::move(points), threshold, bias_rule);
}

double shrinkage_variance_bound(const PredictiveProblem& problem, double s, double a) {
  if (!(s > 0.0 && s <= 1.0))
    throw ValidationError("shrinkage_variance_bound: factor must lie in (0, 1]");
  if (!(a >= 0.0)) throw ValidationError("shrinkage_variance_bound: a must be >= 0");
  const double sbar = 1.0 - s;
  return 2.0 * problem.n * s * s * (s * s + 4.0 * sbar * sbar * a);
}

std::string rasl_report_json(const RaslReport& report) {
  nlohmann::json j;
  j["estimator"] = report.estimator;
  j["r"] = report.r;
  j["conditions"] = nlohmann::json::array();
  for (const auto& c : report.conditions) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["threshold"] = c.threshold;
    jc["slope"] = c.slope.slope;
    jc["ci_halfwidth"] = c.slope.ci_halfwidth;
    jc["verdict"] = to_string(c.verdict);
    jc["points"] = nlohmann::json::array();
    for (const auto& p : c.statistic_by_n)
      jc["points"].push_back({{"n", p.n}, {"value", p.value}, {"se", p.se}});
    j["conditions"].push_back(std::move(jc));
  }
  return j.dump(2);
}

std::string rasl_report_csv(const RaslReport& report) {
  std::ostringstream out;
  out.precision(12);
  out << "condition,n,value,se\n";
  for (const auto& c : report.conditions)
    for (const auto& p : c.statistic_by_n)
      out << c.name << ',' << p.n << ',' << p.value << ',' << p.se << '\n';
  return out.str();
}

}  // namespace predrisk
