#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "predrisk/bounds_oracles.hpp"
#include "predrisk/betting_bound.hpp"
#include "predrisk/data_pipeline.hpp"
#include "predrisk/errors.hpp"
#include "predrisk/kl_engine.hpp"
#include "predrisk/rasl_suite.hpp"
#include "predrisk/sparse_minimax.hpp"

#ifndef PREDRISK_SOURCE_DIR
#define PREDRISK_SOURCE_DIR "."
#endif

namespace {

using namespace predrisk;

constexpr std::uint64_t kDefaultSeed = 0x9d2c5680u;  // fixed, never wall clock

// First line of every emitted table: the resolved run configuration. Wall
// time is deliberately not part of it so identical invocations produce
// byte-identical files.
std::string manifest_line(const std::string& subcommand, std::uint64_t seed,
                          const std::string& out_path,
                          const std::map<std::string, std::string>& config) {
  nlohmann::json doc;
  doc["subcommand"] = subcommand;
  doc["seed"] = seed;
  doc["out"] = out_path.empty() ? "-" : out_path;
  doc["config"] = config;
  return "# manifest: " + doc.dump() + "\n";
}

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty() || out_path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ParseError("cannot open output file '" + out_path + "'");
  out << payload;
}

std::vector<int> parse_int_grid(const std::string& text) {
  std::vector<int> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      grid.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ValidationError("bad integer grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("empty grid '" + text + "'");
  return grid;
}

std::vector<double> parse_double_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("bad numeric grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("empty grid '" + text + "'");
  return grid;
}

ParamPoint parse_theta_spec(const PredictiveProblem& problem, const std::string& spec) {
  if (spec == "zero") return param_zero(problem);
  if (spec.rfind("radial:", 0) == 0) {
    try {
      return param_radial(problem, std::stod(spec.substr(7)));
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("bad radial energy in theta spec '" + spec + "'");
    }
  }
  if (spec.rfind("spike:", 0) == 0) {
    const std::string body = spec.substr(6);
    const std::size_t comma = body.find(',');
    if (comma == std::string::npos)
      throw ValidationError("spike theta spec needs height,count: '" + spec + "'");
    try {
      const double height = std::stod(body.substr(0, comma));
      const int k = std::stoi(body.substr(comma + 1));
      return param_spike(problem, height, k);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("bad spike parameters in theta spec '" + spec + "'");
    }
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open theta file '" + path + "'");
    std::vector<double> theta;
    double value = 0.0;
    while (in >> value) theta.push_back(value);
    if (!in.eof()) throw ParseError("non-numeric content in theta file '" + path + "'");
    return make_param(problem, std::move(theta));
  }
  throw ValidationError("unknown theta spec '" + spec +
                        "' (expected zero, radial:<a>, spike:<h>,<k>, file:<path>)");
}

struct RiskArgs {
  int n = 0;
  double r = 1.0;
  std::string theta_spec = "zero";
  std::string estimator = "umvue";
  std::string scale = "sure+";
  std::int64_t replicates = 10000;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int cmd_risk(const RiskArgs& args) {
  const PredictiveProblem problem = make_problem(args.n, 1.0, args.r);
  const ParamPoint theta = parse_theta_spec(problem, args.theta_spec);
  const LocationEstimator estimator = make_estimator(args.estimator);
  McConfig mc;
  mc.replicates = args.replicates;
  mc.master_seed = args.seed;
  mc.validate();

  GaussianStrategy strategy;
  if (args.scale == "sure+") {
    strategy = make_flattened_strategy(estimator, FlattenSource::sure_plus);
  } else if (args.scale == "oracle") {
    const RiskReport quad = quadratic_risk_mc(problem, theta, estimator, mc);
    strategy = make_oracle_scale_strategy(estimator, quad.estimate);
  } else if (args.scale.rfind("fixed:", 0) == 0) {
    double c = 0.0;
    try {
      c = std::stod(args.scale.substr(6));
    } catch (const std::exception&) {
      throw ValidationError("bad fixed scale '" + args.scale + "'");
    }
    strategy = make_fixed_scale_strategy(estimator, c);
  } else {
    throw ValidationError("unknown scale '" + args.scale +
                          "' (expected fixed:<c>, sure+, oracle)");
  }

  const RiskReport report = predictive_risk_mc(problem, theta, strategy, mc);

  std::map<std::string, std::string> config{
      {"n", std::to_string(args.n)},           {"r", std::to_string(args.r)},
      {"theta_spec", args.theta_spec},         {"estimator", args.estimator},
      {"scale", args.scale},                   {"replicates", std::to_string(args.replicates)},
  };
  std::string payload = manifest_line("risk", args.seed, args.out, config);
  char line[512];
  if (args.scale == "sure+") {
    // Bracket columns: the ideal-flattening term from the measured quadratic
    // risk, and the closed-form ceiling on the deviation when n >= 10.
    const RiskReport quad = quadratic_risk_mc(problem, theta, estimator, mc);
    const double if_term =
        0.5 * problem.n * std::log1p(quad.estimate / (problem.n * problem.r));
    const double dev_bound = problem.n >= 10 ? theorem2_if_bound(problem.n, problem.r)
                                             : std::numeric_limits<double>::quiet_NaN();
    payload +=
        "n,r,estimator,scale,theta_spec,estimate,se,if_term,deviation,deviation_bound,"
        "replicates,seed\n";
    std::snprintf(line, sizeof line, "%d,%.10g,%s,%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%lld,%llu\n",
                  args.n, args.r, args.estimator.c_str(), args.scale.c_str(),
                  args.theta_spec.c_str(), report.estimate, report.std_error, if_term,
                  report.estimate - if_term, dev_bound,
                  static_cast<long long>(report.replicates),
                  static_cast<unsigned long long>(args.seed));
  } else {
    payload += "n,r,estimator,scale,theta_spec,estimate,se,replicates,seed\n";
    std::snprintf(line, sizeof line, "%d,%.10g,%s,%s,%s,%.10g,%.10g,%lld,%llu\n", args.n, args.r,
                  args.estimator.c_str(), args.scale.c_str(), args.theta_spec.c_str(),
                  report.estimate, report.std_error, static_cast<long long>(report.replicates),
                  static_cast<unsigned long long>(args.seed));
  }
  payload += line;
  emit(args.out, payload);
  return 0;
}

struct RaslArgs {
  std::string estimator = "js";
  std::string n_grid = "10,30,100,300,1000";
  double r = 1.0;
  double a = 0.0;
  std::int64_t replicates = 4000;
  std::uint64_t seed = kDefaultSeed;
  bool json = false;
  std::string out;
};

int cmd_rasl(const RaslArgs& args) {
  const LocationEstimator estimator = make_estimator(args.estimator);
  const std::vector<int> grid = parse_int_grid(args.n_grid);
  McConfig mc;
  mc.replicates = args.replicates;
  mc.master_seed = args.seed;
  mc.validate();
  const ThetaFamily family = args.a > 0.0 ? make_radial_family(args.a) : make_zero_family();
  const RaslReport report = run_rasl(estimator, family, grid, args.r, mc);

  std::map<std::string, std::string> config{
      {"estimator", args.estimator}, {"n_grid", args.n_grid},
      {"r", std::to_string(args.r)},  {"a", std::to_string(args.a)},
      {"replicates", std::to_string(args.replicates)},
      {"format", args.json ? "json" : "csv"},
  };
  std::string payload = manifest_line("rasl", args.seed, args.out, config);
  if (args.json) {
    payload += rasl_report_json(report);
    payload += '\n';
  } else {
    payload += "# verdicts:";
    for (const auto& c : report.conditions) payload += ' ' + c.name + '=' + to_string(c.verdict);
    payload += '\n';
    payload += rasl_report_csv(report);
  }
  emit(args.out, payload);
  return 0;
}

struct BoundsArgs {
  double r = 1.0;
  std::string n_grid = "10,20,28,50,100,300,1000";
  std::string out;
};

int cmd_bounds(const BoundsArgs& args) {
  if (!(args.r > 0.0)) throw ValidationError("bounds: r must be > 0");
  const std::vector<int> grid = parse_int_grid(args.n_grid);

  std::map<std::string, std::string> config{{"r", std::to_string(args.r)},
                                            {"n_grid", args.n_grid}};
  std::string payload = manifest_line("bounds", kDefaultSeed, args.out, config);
  char line[400];
  std::snprintf(line, sizeof line,
                "# r = %.10g: envelope = %.6g, oracle remainder = %.6g, reference = %.6g, "
                "suboptimality factor = %.6g\n",
                args.r, envelope_bound(args.r), oracle_bound_paper(args.r),
                oracle_bound_xu(args.r), suboptimality_factor(args.r));
  payload += line;
  payload += "n,a_n,b_n,l_n,e_n,f_n,k1,k2,k3,deviation_bound,if_bound\n";
  for (const int n : grid) {
    const BoundConstants c = constants(n);
    std::snprintf(line, sizeof line,
                  "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", c.n, c.a_n,
                  c.b_n, c.l_n, c.e_n, c.f_n, c.k1, c.k2, c.k3,
                  theorem2_deviation_bound(n, args.r), theorem2_if_bound(n, args.r));
    payload += line;
  }
  emit(args.out, payload);
  return 0;
}

struct Table1Args {
  std::string data = PREDRISK_SOURCE_DIR "/data/efron_morris_1970.csv";
  std::string r_grid = "0.1,0.2,0.5,1,2,5,10";
  std::string centering = "grand_mean";
  bool literal_df = false;
  std::int64_t replicates = 20000;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int cmd_table1(const Table1Args& args) {
  Table1Options options;
  if (args.centering == "grand_mean")
    options.centering = Centering::grand_mean;
  else if (args.centering == "origin")
    options.centering = Centering::origin;
  else
    throw ValidationError("unknown centering '" + args.centering +
                          "' (expected grand_mean or origin)");
  options.literal_df = args.literal_df;
  options.replicates = args.replicates;
  options.seed = args.seed;

  const std::vector<BattingRecord> records = load_csv(args.data);
  const TransformedData data = transform(records);
  const std::vector<double> grid = parse_double_grid(args.r_grid);
  const Table1 table = table1(data, grid, options);

  std::map<std::string, std::string> config{
      {"data", args.data},
      {"r_grid", args.r_grid},
      {"centering", args.centering},
      {"literal_df", args.literal_df ? "true" : "false"},
      {"replicates", std::to_string(args.replicates)},
  };
  std::string payload = manifest_line("table1", args.seed, args.out, config);
  payload += table1_csv(table);
  emit(args.out, payload);
  return 0;
}

struct SparseArgs {
  int n = 10000;
  int s = 10;
  double r = 1.0;
  std::int64_t replicates = 2000;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int cmd_sparse(const SparseArgs& args) {
  const PredictiveProblem problem = make_problem(args.n, 1.0, args.r);
  const SparseSpace space = make_sparse_space(args.n, args.s);
  McConfig mc;
  mc.replicates = args.replicates;
  mc.master_seed = args.seed;
  mc.validate();
  const SparseRateEstimate estimate = sparse_minimax_estimate(problem, space, mc);

  std::map<std::string, std::string> config{
      {"n", std::to_string(args.n)},
      {"s", std::to_string(args.s)},
      {"r", std::to_string(args.r)},
      {"replicates", std::to_string(args.replicates)},
  };
  std::string payload = manifest_line("sparse", args.seed, args.out, config);
  payload += sparse_csv(std::span<const SparseRateEstimate>(&estimate, 1));
  emit(args.out, payload);
  return 0;
}

struct BettingArgs {
  int count = 200;
  bool json = false;
  std::uint64_t seed = kDefaultSeed;
  std::string out;
};

int cmd_betting(const BettingArgs& args) {
  const std::vector<BettingCorpusEntry> corpus = make_betting_corpus(args.count, args.seed);
  std::vector<BettingCheck> checks;
  checks.reserve(corpus.size());
  int violations = 0;
  for (const BettingCorpusEntry& entry : corpus) {
    checks.push_back(check_betting_bound(entry.collection, entry.p, entry.q));
    if (!checks.back().satisfied) ++violations;
  }

  std::map<std::string, std::string> config{{"count", std::to_string(args.count)},
                                            {"format", args.json ? "json" : "csv"}};
  if (args.json) {
    nlohmann::json doc;
    doc["subcommand"] = "betting";
    doc["seed"] = args.seed;
    doc["config"] = config;
    doc["violations"] = violations;
    doc["checks"] = nlohmann::json::parse(betting_report_json(checks));
    emit(args.out, doc.dump(2) + "\n");
  } else {
    std::string payload = manifest_line("betting", args.seed, args.out, config);
    payload += "entry,lhs,c,kl,satisfied\n";
    char line[200];
    for (std::size_t i = 0; i < checks.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%.10g,%d,%.10g,%s\n", i, checks[i].lhs, checks[i].c,
                    checks[i].kl, checks[i].satisfied ? "true" : "false");
      payload += line;
    }
    char tail[80];
    std::snprintf(tail, sizeof tail, "# violations: %d of %d\n", violations, args.count);
    payload += tail;
    emit(args.out, payload);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian predictive density estimation experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file with key = value lines ([subcommand] sections)");

  RiskArgs risk_args;
  CLI::App* risk = app.add_subcommand("risk", "Monte Carlo predictive risk of one strategy");
  risk->add_option("--n", risk_args.n, "Dimension")->required();
  risk->add_option("--r", risk_args.r, "Future-to-past variance ratio");
  risk->add_option("--theta-spec", risk_args.theta_spec,
                   "zero | radial:<a> | spike:<h>,<k> | file:<path>");
  risk->add_option("--estimator", risk_args.estimator, "umvue|js|js+|harmonic|violator|ideal:<a>");
  risk->add_option("--scale", risk_args.scale, "fixed:<c> | sure+ | oracle");
  risk->add_option("--replicates", risk_args.replicates, "MC replicates");
  risk->add_option("--seed", risk_args.seed, "Master seed");
  risk->add_option("--out", risk_args.out, "Output CSV path (default stdout)");

  RaslArgs rasl_args;
  CLI::App* rasl = app.add_subcommand("rasl", "Regularity certification sweep");
  rasl->add_option("--estimator", rasl_args.estimator, "Estimator name");
  rasl->add_option("--n-grid", rasl_args.n_grid, "Comma-separated dimensions");
  rasl->add_option("--r", rasl_args.r, "Variance ratio");
  rasl->add_option("--a", rasl_args.a, "Radial signal energy (0 = zero family)");
  rasl->add_option("--replicates", rasl_args.replicates, "MC replicates per dimension");
  rasl->add_option("--seed", rasl_args.seed, "Master seed");
  rasl->add_flag("--json", rasl_args.json, "Emit the full JSON report instead of CSV");
  rasl->add_option("--out", rasl_args.out, "Output CSV path (default stdout)");

  BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand("bounds", "Closed-form constants and envelopes");
  bounds->add_option("--r", bounds_args.r, "Variance ratio")->required();
  bounds->add_option("--n-grid", bounds_args.n_grid, "Comma-separated dimensions (n >= 10)");
  bounds->add_option("--out", bounds_args.out, "Output CSV path (default stdout)");

  Table1Args table1_args;
  CLI::App* table = app.add_subcommand("table1", "Six-strategy loss table on batting data");
  table->add_option("--data", table1_args.data, "Batting CSV path");
  table->add_option("--r-grid", table1_args.r_grid, "Comma-separated variance ratios");
  table->add_option("--centering", table1_args.centering, "grand_mean | origin");
  table->add_flag("--literal-df", table1_args.literal_df,
                  "Use the n-2 factor on grand-mean deviations");
  table->add_option("--replicates", table1_args.replicates, "Future draws for the Bayes column");
  table->add_option("--seed", table1_args.seed, "Master seed");
  table->add_option("--out", table1_args.out, "Output CSV path (default stdout)");

  SparseArgs sparse_args;
  CLI::App* sparse = app.add_subcommand("sparse", "Sparse minimax rates and empirical risk");
  sparse->add_option("--n", sparse_args.n, "Dimension");
  sparse->add_option("--s", sparse_args.s, "Sparsity");
  sparse->add_option("--r", sparse_args.r, "Variance ratio");
  sparse->add_option("--replicates", sparse_args.replicates, "MC replicates");
  sparse->add_option("--seed", sparse_args.seed, "Master seed");
  sparse->add_option("--out", sparse_args.out, "Output CSV path (default stdout)");

  BettingArgs betting_args;
  CLI::App* betting = app.add_subcommand("betting", "Quantized divergence bound over a corpus");
  betting->add_option("--count", betting_args.count, "Corpus size");
  betting->add_flag("--json", betting_args.json, "Emit a JSON report instead of CSV");
  betting->add_option("--seed", betting_args.seed, "Master seed");
  betting->add_option("--out", betting_args.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (risk->parsed()) return cmd_risk(risk_args);
    if (rasl->parsed()) return cmd_rasl(rasl_args);
    if (bounds->parsed()) return cmd_bounds(bounds_args);
    if (table->parsed()) return cmd_table1(table1_args);
    if (sparse->parsed()) return cmd_sparse(sparse_args);
    if (betting->parsed()) return cmd_betting(betting_args);
  } catch (const predrisk::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
