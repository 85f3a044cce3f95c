#include "predrisk/kl_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "predrisk/errors.hpp"
#include "predrisk/harmonic.hpp"
#include "predrisk/mc.hpp"
#include "predrisk/quadrature.hpp"
#include "predrisk/stats.hpp"

namespace predrisk {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<double> draw_past(const PredictiveProblem& p, const ParamPoint& theta,
                              RngStream& rng) {
  std::vector<double> x(p.n);
  const double sp = p.sigma_p();
  for (int i = 0; i < p.n; ++i) x[i] = theta.theta[i] + sp * rng.next_gaussian();
  return x;
}

double normalized_sq_error(const PredictiveProblem& p, std::span<const double> est,
                           const ParamPoint& theta) {
  double s = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const double d = est[i] - theta.theta[i];
    s += d * d;
  }
  return s / p.sigma_p2;
}

double true_logdensity(const PredictiveProblem& p, const ParamPoint& theta,
                       std::span<const double> y) {
  double s = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const double d = y[i] - theta.theta[i];
    s += d * d;
  }
  return -0.5 * p.n * (kLog2Pi + std::log(p.sigma_f2)) - s / (2.0 * p.sigma_f2);
}

RiskReport make_report(const MeanVar& mv, const McConfig& mc, RiskMethod method) {
  RiskReport r;
  r.estimate = mv.mean;
  r.std_error = mv.se_mean();
  r.replicates = mv.count;
  r.seed = mc.master_seed;
  r.method = method;
  return r;
}

}  // namespace

double kl_loss_gaussian(const PredictiveProblem& problem, const ParamPoint& theta,
                        const GaussianPredictiveDensity& g) {
  require_dim(problem, theta.theta.size(), "kl_loss_gaussian theta");
  require_dim(problem, g.mean.size(), "kl_loss_gaussian mean");
  const double two_sf2 = 2.0 * problem.sigma_f2;
  if (g.scalar_scale()) {
    const double c = g.scale[0];
    if (!(c > 0.0)) throw ValidationError("kl_loss_gaussian: scale must be positive");
    double ss = 0.0;
    for (int i = 0; i < problem.n; ++i) {
      const double d = g.mean[i] - theta.theta[i];
      ss += d * d;
    }
    return 0.5 * problem.n * (std::log(c) + 1.0 / c - 1.0) + ss / (two_sf2 * c);
  }
  require_dim(problem, g.scale.size(), "kl_loss_gaussian scale");
  double out = 0.0;
  for (int i = 0; i < problem.n; ++i) {
    const double c = g.scale[i];
    if (!(c > 0.0)) throw ValidationError("kl_loss_gaussian: scale must be positive");
    const double d = g.mean[i] - theta.theta[i];
    out += 0.5 * (std::log(c) + 1.0 / c - 1.0) + d * d / (two_sf2 * c);
  }
  return out;
}

RiskReport kl_loss_generic(const PredictiveProblem& problem, const ParamPoint& theta,
                           const LogDensity& logdensity, const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "kl_loss_generic");
  const double sf = std::sqrt(problem.sigma_f2);
  const MeanVar mv = run_replicates_mean(
      mc.master_seed, mc.replicates, [&](RngStream& rng) {
        std::vector<double> y(problem.n);
        for (int i = 0; i < problem.n; ++i)
          y[i] = theta.theta[i] + sf * rng.next_gaussian();
        const double ld = logdensity(y);
        if (!std::isfinite(ld))
          throw NumericalError("kl_loss_generic: non-finite log density in replicate " +
                               std::to_string(rng.stream_index()));
        return true_logdensity(problem, theta, y) - ld;
      });
  return make_report(mv, mc, RiskMethod::monte_carlo);
}

RiskReport predictive_risk_mc(const PredictiveProblem& problem, const ParamPoint& theta,
                              const GaussianStrategy& strategy, const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "predictive_risk_mc");
  const MeanVar mv = run_replicates_mean(mc.master_seed, mc.replicates, [&](RngStream& rng) {
    const std::vector<double> x = draw_past(problem, theta, rng);
    return kl_loss_gaussian(problem, theta, strategy(problem, x));
  });
  return make_report(mv, mc, RiskMethod::monte_carlo);
}

RiskReport predictive_risk_mc_generic(const PredictiveProblem& problem, const ParamPoint& theta,
                                      const DensityStrategy& strategy, const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "predictive_risk_mc_generic");
  const double sf = std::sqrt(problem.sigma_f2);
  const MeanVar mv = run_replicates_mean(mc.master_seed, mc.replicates, [&](RngStream& rng) {
    const std::vector<double> x = draw_past(problem, theta, rng);
    const LogDensity ld = strategy(problem, x);
    double acc = 0.0;
    std::vector<double> y(problem.n);
    for (std::int64_t s = 0; s < mc.inner_samples; ++s) {
      for (int i = 0; i < problem.n; ++i) y[i] = theta.theta[i] + sf * rng.next_gaussian();
      const double lv = ld(y);
      if (!std::isfinite(lv))
        throw NumericalError("predictive_risk_mc_generic: non-finite log density in replicate " +
                             std::to_string(rng.stream_index()));
      acc += true_logdensity(problem, theta, y) - lv;
    }
    return acc / static_cast<double>(mc.inner_samples);
  });
  return make_report(mv, mc, RiskMethod::monte_carlo);
}

RiskReport quadratic_risk_mc(const PredictiveProblem& problem, const ParamPoint& theta,
                             const LocationEstimator& estimator, const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "quadratic_risk_mc");
  const MeanVar mv = run_replicates_mean(mc.master_seed, mc.replicates, [&](RngStream& rng) {
    const std::vector<double> x = draw_past(problem, theta, rng);
    return normalized_sq_error(problem, estimator.estimate(problem, x), theta);
  });
  return make_report(mv, mc, RiskMethod::monte_carlo);
}

double risk_best_invariant(const PredictiveProblem& problem) {
  return 0.5 * problem.n * std::log1p(1.0 / problem.r);
}

double risk_ideal_linear(const PredictiveProblem& problem, double a) {
  if (!(a >= 0.0)) throw ValidationError("risk_ideal_linear: a must be >= 0");
  return 0.5 * problem.n * std::log1p(a / ((1.0 + a) * problem.r));
}

JsAsymptotics risk_asymptotics_js(const PredictiveProblem& problem, double a) {
  if (!(a > 0.0)) throw ValidationError("risk_asymptotics_js: a must be > 0");
  const double n = problem.n;
  const double r = problem.r;
  JsAsymptotics out;
  out.plug_in = n * a / (2.0 * r * (1.0 + a));
  out.fixed_scale = 0.5 * n * (std::log1p(1.0 / r) - 1.0 / ((1.0 + a) * (1.0 + r)));
  out.flattened = 0.5 * n * std::log1p(a / ((1.0 + a) * r));
  return out;
}

RiskDecomposition risk_decomposition_mc(const PredictiveProblem& problem, const ParamPoint& theta,
                                        const LocationEstimator& estimator, FlattenSource source,
                                        const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "risk_decomposition_mc");
  if (source == FlattenSource::custom)
    throw ValidationError(
        "risk_decomposition_mc: source must be sure_plus, tweedie, or oracle_if");
  const bool oracle = source == FlattenSource::oracle_if;
  if (!oracle && !estimator.has_risk_estimator())
    throw ValidationError("risk_decomposition_mc: estimator '" + estimator.name +
                          "' has no risk estimator");
  struct Rep {
    double loss;
    double u;
  };
  const std::vector<Rep> reps = run_replicates<Rep>(
      mc.master_seed, mc.replicates, [&](RngStream& rng) {
        const std::vector<double> x = draw_past(problem, theta, rng);
        Rep rep;
        rep.loss = normalized_sq_error(problem, estimator.estimate(problem, x), theta);
        rep.u = oracle ? 0.0 : estimator.risk_estimator(problem, x);
        return rep;
      });

  const double nr = problem.n * problem.r;
  const std::size_t R = reps.size();
  std::vector<double> loss(R), c(R), inv_c(R), inv_l(R);
  for (std::size_t i = 0; i < R; ++i) loss[i] = reps[i].loss;
  const MeanVar mv_loss = mean_var(loss);
  const double q = mv_loss.mean;
  const double ideal = 1.0 + q / nr;
  for (std::size_t i = 0; i < R; ++i) {
    c[i] = oracle ? ideal : flattening(problem, reps[i].u, source).value;
    inv_c[i] = 1.0 / c[i];
    inv_l[i] = 1.0 / (1.0 + loss[i] / nr);
  }
  const MeanVar mv_c = mean_var(c);
  const MeanVar mv_invc = mean_var(inv_c);
  const MeanVar mv_invl = mean_var(inv_l);

  const double sd_loss = std::sqrt(mv_loss.var);
  const double sd_c = std::sqrt(mv_c.var);
  const double sd_invc = std::sqrt(mv_invc.var);
  const double sd_invl = std::sqrt(mv_invl.var);

  RiskDecomposition out;
  out.quadratic_risk = q;
  out.mean_c = mv_c.mean;
  out.log_if_term = 0.5 * problem.n * std::log(ideal);
  out.distortion_a = ideal / mv_c.mean * sd_c * sd_invc +
                     (1.0 / problem.r) * (sd_loss / problem.n) * sd_invc;
  const double bias = mv_c.mean - ideal;
  out.distortion_b = bias * bias / (ideal * mv_c.mean);
  out.distortion_l = sd_loss * sd_invl / nr;
  return out;
}

RiskReport mixture_strategy_risk(const PredictiveProblem& problem, const ParamPoint& theta,
                                 const std::vector<std::pair<double, GaussianStrategy>>& components,
                                 const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "mixture_strategy_risk");
  if (components.empty()) throw ValidationError("mixture_strategy_risk: empty component list");
  double wsum = 0.0;
  for (const auto& [w, strat] : components) {
    if (!(w >= 0.0)) throw ValidationError("mixture_strategy_risk: weights must be >= 0");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-12)
    throw ValidationError("mixture_strategy_risk: weights must sum to 1 within 1e-12");

  const double sf = std::sqrt(problem.sigma_f2);
  const MeanVar mv = run_replicates_mean(mc.master_seed, mc.replicates, [&](RngStream& rng) {
    const std::vector<double> x = draw_past(problem, theta, rng);
    std::vector<GaussianPredictiveDensity> parts;
    std::vector<double> log_w;
    parts.reserve(components.size());
    log_w.reserve(components.size());
    for (const auto& [w, strat] : components) {
      if (w == 0.0) continue;
      parts.push_back(strat(problem, x));
      log_w.push_back(std::log(w));
    }
    std::vector<double> terms(parts.size());
    std::vector<double> y(problem.n);
    double acc = 0.0;
    for (std::int64_t s = 0; s < mc.inner_samples; ++s) {
      for (int i = 0; i < problem.n; ++i) y[i] = theta.theta[i] + sf * rng.next_gaussian();
      for (std::size_t k = 0; k < parts.size(); ++k)
        terms[k] = log_w[k] + parts[k].log_density(problem, y);
      acc += true_logdensity(problem, theta, y) - log_sum_exp(terms);
    }
    return acc / static_cast<double>(mc.inner_samples);
  });
  return make_report(mv, mc, RiskMethod::monte_carlo);
}

HarmonicBayesResult risk_harmonic_bayes(const PredictiveProblem& problem, const ParamPoint& theta,
                                        const McConfig& mc, RescaleConvention convention) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "risk_harmonic_bayes");
  const HarmonicMarginal marginal(problem.n);
  const int n = problem.n;
  const double v0 = problem.r / (1.0 + problem.r);
  const auto nodes = gauss_legendre(64, v0, 1.0);
  const double power = convention == RescaleConvention::literal ? 1.0 : 0.5;

  const double sp = problem.sigma_p();
  std::vector<std::vector<double>> scaled_theta(nodes.size(), std::vector<double>(n));
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double factor = 1.0 / std::pow(nodes[j].first, power);
    for (int i = 0; i < n; ++i) scaled_theta[j][i] = theta.theta[i] / sp * factor;
  }

  const std::vector<std::vector<double>> losses = run_replicates<std::vector<double>>(
      mc.master_seed, mc.replicates, [&](RngStream& rng) {
        std::vector<double> eps(n);
        for (int i = 0; i < n; ++i) eps[i] = rng.next_gaussian();
        std::vector<double> out(nodes.size());
        std::vector<double> x(n);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
          double t = 0.0;
          for (int i = 0; i < n; ++i) {
            x[i] = scaled_theta[j][i] + eps[i];
            t += x[i] * x[i];
          }
          const double shrink = 1.0 + marginal.dlog_profile(0.5 * t);
          double loss = 0.0;
          for (int i = 0; i < n; ++i) {
            const double d = shrink * x[i] - scaled_theta[j][i];
            loss += d * d;
          }
          out[j] = loss;
        }
        return out;
      });

  // integral estimate with per-replicate values for the standard error
  std::vector<double> integral(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      acc += nodes[j].second / nodes[j].first * losses[i][j];
    integral[i] = 0.5 * acc;
  }
  const MeanVar mv = mean_var(integral);

  double scale_mass = 0.0;
  std::vector<double> node_mean(nodes.size(), 0.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    scale_mass += 0.5 * nodes[j].second / nodes[j].first;
    std::vector<double> col(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) col[i] = losses[i][j];
    node_mean[j] = mean_var(col).mean;
  }

  HarmonicBayesResult result;
  result.report = make_report(mv, mc, RiskMethod::quadrature);
  result.bracket_lo = scale_mass * *std::min_element(node_mean.begin(), node_mean.end());
  result.bracket_hi = scale_mass * *std::max_element(node_mean.begin(), node_mean.end());
  result.convention = convention;
  return result;
}

RiskReport lower_bound_log_moment(const PredictiveProblem& problem, const ParamPoint& theta,
                                  const LocationEstimator& estimator, const McConfig& mc) {
  mc.validate();
  require_dim(problem, theta.theta.size(), "lower_bound_log_moment");
  const double nr = problem.n * problem.r;
  const MeanVar mv = run_replicates_mean(mc.master_seed, mc.replicates, [&](RngStream& rng) {
    const std::vector<double> x = draw_past(problem, theta, rng);
    const double loss = normalized_sq_error(problem, estimator.estimate(problem, x), theta);
    return 0.5 * problem.n * std::log1p(loss / nr);
  });
  return make_report(mv, mc, RiskMethod::monte_carlo);
}

ImprovementSplit improvement_split(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("improvement_split: alpha must lie in (0, 1)");
  ImprovementSplit out;
  out.d1 = 0.5 * alpha;
  out.d2 = 0.5 * (-std::log1p(-alpha) - alpha);
  return out;
}

GaussianStrategy make_best_invariant_strategy() {
  return [](const PredictiveProblem& p, std::span<const double> x) {
    return make_g1({x.begin(), x.end()}, 1.0 + 1.0 / p.r);
  };
}

GaussianStrategy make_plugin_strategy(LocationEstimator estimator) {
  return [est = std::move(estimator)](const PredictiveProblem& p, std::span<const double> x) {
    return make_g1(est.estimate(p, x), 1.0);
  };
}

GaussianStrategy make_fixed_scale_strategy(LocationEstimator estimator, double c) {
  if (!(c > 0.0)) throw ValidationError("make_fixed_scale_strategy: scale must be positive");
  return [est = std::move(estimator), c](const PredictiveProblem& p, std::span<const double> x) {
    return make_g1(est.estimate(p, x), c);
  };
}

GaussianStrategy make_flattened_strategy(LocationEstimator estimator, FlattenSource source) {
  if (!estimator.has_risk_estimator())
    throw ValidationError("make_flattened_strategy: estimator '" + estimator.name +
                          "' has no risk estimator");
  if (source == FlattenSource::oracle_if)
    throw ValidationError("make_flattened_strategy: use make_oracle_scale_strategy for oracle scales");
  return [est = std::move(estimator), source](const PredictiveProblem& p,
                                              std::span<const double> x) {
    const double u = est.risk_estimator(p, x);
    return make_g1(est.estimate(p, x), flattening(p, u, source).value);
  };
}

GaussianStrategy make_oracle_scale_strategy(LocationEstimator estimator, double q) {
  if (!(q >= 0.0)) throw ValidationError("make_oracle_scale_strategy: risk must be >= 0");
  return [est = std::move(estimator), q](const PredictiveProblem& p, std::span<const double> x) {
    return make_g1(est.estimate(p, x), ideal_flattening(p, q).value);
  };
}

double harmonic_predictive_logdensity(const PredictiveProblem& problem,
                                      std::span<const double> x, std::span<const double> y) {
  const DensityStrategy strategy = make_harmonic_bayes_strategy();
  return strategy(problem, x)(y);
}

DensityStrategy make_harmonic_bayes_strategy() {
  return [](const PredictiveProblem& p, std::span<const double> x) -> LogDensity {
    require_dim(p, x.size(), "harmonic bayes strategy");
    const HarmonicMarginal marginal(p.n);
    const int n = p.n;
    const double vx = p.sigma_p2;
    const double vy = p.sigma_f2;
    const double vw = vx * vy / (vx + vy);
    double tx = 0.0;
    for (double xi : x) tx += xi * xi;
    tx /= 2.0 * vx;
    // x-dependent part of the marginal ratio, computed once per past vector
    const double base = (1.0 - 0.5 * n) * (std::log(vw) - std::log(vx)) -
                        marginal.log_profile(tx) -
                        0.5 * n * (kLog2Pi + std::log(vx + vy));
    std::vector<double> past(x.begin(), x.end());
    return [marginal, n, vx, vy, vw, base, past = std::move(past)](std::span<const double> y) {
      if (y.size() != past.size())
        throw ValidationError("harmonic bayes strategy: future dimension mismatch");
      double tw = 0.0;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double w = (past[i] * vy + y[i] * vx) / (vx + vy);
        tw += w * w;
        const double d = y[i] - past[i];
        ss += d * d;
      }
      tw /= 2.0 * vw;
      return base + marginal.log_profile(tw) - ss / (2.0 * (vx + vy));
    };
  };
}

}  // namespace predrisk
