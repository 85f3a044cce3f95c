#include "predrisk/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "predrisk/errors.hpp"
#include "predrisk/kl_engine.hpp"
#include "predrisk/mc.hpp"
#include "predrisk/risk_estimates.hpp"

namespace predrisk {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_count(const std::string& field, int line_no, const char* what) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("batting csv line " + std::to_string(line_no) + ": field " + what +
                     " is not an integer: '" + field + "'");
  return value;
}

void validate_record(const BattingRecord& rec) {
  const auto bad = [&rec](const char* why) {
    throw ValidationError("batting record '" + rec.player + "': " + why);
  };
  if (rec.n1 < 1 || rec.n2 < 1) bad("at-bat counts must be >= 1");
  if (rec.h1 < 0 || rec.h1 > rec.n1) bad("first-period hits outside [0, n1]");
  if (rec.h2 < 0 || rec.h2 > rec.n2) bad("second-period hits outside [0, n2]");
}

double arcsin_sqrt(double p) { return std::asin(std::sqrt(p)); }

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double kl_loss_at(const PredictiveProblem& problem, const ParamPoint& theta,
                  std::vector<double> mean, double c) {
  return kl_loss_gaussian(problem, theta, make_g1(std::move(mean), c));
}

}  // namespace

std::vector<BattingRecord> parse_batting_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("batting csv: empty input");
  if (trim_cr(line) != "player,h1,n1,h2,n2")
    throw ParseError("batting csv line 1: expected header player,h1,n1,h2,n2");
  std::vector<BattingRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 5)
      throw ParseError("batting csv line " + std::to_string(line_no) + ": expected 5 fields, got " +
                       std::to_string(fields.size()));
    BattingRecord rec;
    rec.player = fields[0];
    if (rec.player.empty())
      throw ParseError("batting csv line " + std::to_string(line_no) + ": empty player name");
    rec.h1 = parse_count(fields[1], line_no, "h1");
    rec.n1 = parse_count(fields[2], line_no, "n1");
    rec.h2 = parse_count(fields[3], line_no, "h2");
    rec.n2 = parse_count(fields[4], line_no, "n2");
    validate_record(rec);
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ParseError("batting csv: no data rows");
  return records;
}

std::vector<BattingRecord> load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("batting csv: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_batting_csv(buffer.str());
}

TransformedData transform(std::span<const BattingRecord> records, double r) {
  if (records.empty()) throw ValidationError("transform: no records");
  if (!(r > 0.0)) throw ValidationError("transform: r must be > 0");
  const int n1 = records.front().n1;
  for (const BattingRecord& rec : records)
    if (rec.n1 != n1)
      throw ValidationError("transform: first-period at-bat counts differ ('" + rec.player +
                            "'); a scalar past variance needs a common count");
  TransformedData data;
  data.r = r;
  data.v_x = 1.0 / (4.0 * n1);
  for (const BattingRecord& rec : records) {
    data.x.push_back(arcsin_sqrt((rec.h1 + 0.25) / (rec.n1 + 0.5)));
    data.theta0.push_back(
        arcsin_sqrt(static_cast<double>(rec.h1 + rec.h2) / (rec.n1 + rec.n2)));
  }
  return data;
}

std::vector<double> grand_mean_js_plus(const PredictiveProblem& problem,
                                       std::span<const double> x, bool literal_df) {
  require_dim(problem, x.size(), "grand_mean_js_plus");
  if (problem.n < 4) throw ValidationError("grand_mean_js_plus: needs n >= 4");
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= problem.n;
  double ss = 0.0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  const double df = literal_df ? problem.n - 2.0 : problem.n - 3.0;
  const double factor = ss > df * problem.sigma_p2 ? 1.0 - df * problem.sigma_p2 / ss : 0.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = mean + factor * (x[i] - mean);
  return out;
}

double grand_mean_sure_plus(const PredictiveProblem& problem, std::span<const double> x,
                            bool literal_df) {
  require_dim(problem, x.size(), "grand_mean_sure_plus");
  if (problem.n < 4) throw ValidationError("grand_mean_sure_plus: needs n >= 4");
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= problem.n;
  double ss = 0.0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  const double df = literal_df ? problem.n - 2.0 : problem.n - 3.0;
  // Unbiased risk of x_bar + (1 - df sigma_p^2/S) d: divergence of the
  // deviation part is df (n-3)/S, so U = n - df (2(n-3) - df) sigma_p^2 / S,
  // clipped at zero like the origin-centered form.
  const double value = problem.n - df * (2.0 * (problem.n - 3.0) - df) * problem.sigma_p2 / ss;
  return std::max(0.0, value);
}

Table1 table1(const TransformedData& data, std::span<const double> r_grid,
              const Table1Options& options) {
  if (data.x.empty() || data.x.size() != data.theta0.size())
    throw ValidationError("table1: transformed data is empty or ragged");
  if (!(data.v_x > 0.0)) throw ValidationError("table1: past variance must be > 0");
  if (r_grid.empty()) throw ValidationError("table1: empty r grid");
  for (const double r : r_grid)
    if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("table1: r grid must be positive");
  if (options.replicates < 2) throw ValidationError("table1: needs >= 2 future replicates");

  Table1 out;
  out.centering = options.centering;
  out.literal_df = options.literal_df;
  out.seed = options.seed;

  const int n = static_cast<int>(data.x.size());
  for (std::size_t row_index = 0; row_index < r_grid.size(); ++row_index) {
    const double r = r_grid[row_index];
    const PredictiveProblem problem = make_problem(n, data.v_x, r * data.v_x);
    const ParamPoint theta = make_param(problem, data.theta0);
    const std::vector<double>& x = data.x;

    std::vector<double> shrunk;
    double u_shrunk = 0.0;
    if (options.centering == Centering::grand_mean) {
      shrunk = grand_mean_js_plus(problem, x, options.literal_df);
      u_shrunk = grand_mean_sure_plus(problem, x, options.literal_df);
    } else {
      shrunk = james_stein_plus(problem, x);
      u_shrunk = sure_js_plus(problem, x);
    }
    const std::vector<double> harmonic = harmonic_posterior_mean(problem, x);
    const double u_harmonic = tweedie_risk_estimate(problem, x, HarmonicMarginal(problem.n));

    Table1Row row;
    row.r = r;
    row.plug_in = kl_loss_at(problem, theta, shrunk, 1.0);
    row.best_invariant = kl_loss_at(problem, theta, x, 1.0 + 1.0 / r);
    row.shrunk_fixed_scale = kl_loss_at(problem, theta, shrunk, 1.0 + 1.0 / r);
    row.shrunk_flattened = kl_loss_at(problem, theta, shrunk, 1.0 + u_shrunk / (n * r));
    row.harmonic_flattened =
        kl_loss_at(problem, theta, harmonic, 1.0 + std::max(0.0, u_harmonic) / (n * r));

    // Loss of the posterior predictive: E_Y log(f_theta0(Y)/p_hat(Y)) with
    // Y drawn from the true future law; x stays fixed at the data.
    const double sf = std::sqrt(problem.sigma_f2);
    const double log_norm = -0.5 * n * std::log(2.0 * M_PI * problem.sigma_f2);
    const std::uint64_t row_seed = derive_seed(options.seed, 0xba5eull << 16 | row_index);
    const MeanVar loss = run_replicates_mean(
        row_seed, options.replicates, [&](RngStream& rng) {
          std::vector<double> y(data.theta0.size());
          double log_true = log_norm;
          for (std::size_t i = 0; i < y.size(); ++i) {
            const double z = rng.next_gaussian();
            y[i] = data.theta0[i] + sf * z;
            log_true -= 0.5 * z * z;
          }
          return log_true - harmonic_predictive_logdensity(problem, x, y);
        });
    row.bayes_predictive = loss.mean;
    row.bayes_predictive_se = loss.se_mean();
    out.rows.push_back(row);
  }
  return out;
}

std::string table1_csv(const Table1& table) {
  std::string out =
      "r,plug_in,best_invariant,shrunk_fixed_scale,shrunk_flattened,harmonic_flattened,"
      "bayes_predictive,bayes_predictive_se\n";
  char line[320];
  for (const Table1Row& row : table.rows) {
    std::snprintf(line, sizeof line, "%.10g,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.r,
                  row.plug_in, row.best_invariant, row.shrunk_fixed_scale, row.shrunk_flattened,
                  row.harmonic_flattened, row.bayes_predictive, row.bayes_predictive_se);
    out += line;
  }
  return out;
}

std::string table1_json(const Table1& table) {
  nlohmann::json doc;
  doc["centering"] = table.centering == Centering::grand_mean ? "grand_mean" : "origin";
  doc["literal_df"] = table.literal_df;
  doc["seed"] = table.seed;
  doc["rows"] = nlohmann::json::array();
  for (const Table1Row& row : table.rows) {
    nlohmann::json j;
    j["r"] = row.r;
    j["plug_in"] = row.plug_in;
    j["best_invariant"] = row.best_invariant;
    j["shrunk_fixed_scale"] = row.shrunk_fixed_scale;
    j["shrunk_flattened"] = row.shrunk_flattened;
    j["harmonic_flattened"] = row.harmonic_flattened;
    j["bayes_predictive"] = row.bayes_predictive;
    j["bayes_predictive_se"] = row.bayes_predictive_se;
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(2);
}

}  // namespace predrisk
