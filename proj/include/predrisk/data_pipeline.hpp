#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "predrisk/core_model.hpp"

namespace predrisk {

// One player's split season: h1 hits in the first n1 at-bats, h2 in the
// remaining n2. The bundled corpus is the classic 18-player table where
// every first period has exactly 45 at-bats.
struct BattingRecord {
  std::string player;
  int h1 = 0;
  int n1 = 0;
  int h2 = 0;
  int n2 = 0;
};

// CSV with header player,h1,n1,h2,n2. Malformed rows raise ParseError with
// the line number; count invariants (0 <= h <= n, n >= 1) raise
// ValidationError naming the player.
std::vector<BattingRecord> parse_batting_csv(const std::string& text);
std::vector<BattingRecord> load_csv(const std::string& path);

// Variance-stabilized view of the split: x_i = arcsin sqrt((h1+1/4)/(n1+1/2))
// is approximately N(theta_i, 1/(4 n1)), and the full-season average plays
// the role of the unknown parameter, theta0_i = arcsin sqrt of it. Requires
// a common first-period at-bat count so the past variance is a scalar.
struct TransformedData {
  std::vector<double> x;
  std::vector<double> theta0;
  double v_x = 0.0;
  double r = 1.0;
};

TransformedData transform(std::span<const BattingRecord> records, double r = 1.0);

// Centering of the shrinkage columns: shrink toward the origin or toward
// the grand mean of x (the mean direction then passes through untouched).
enum class Centering { origin, grand_mean };

// Positive-part shrinkage of the deviations from the grand mean, and the
// unbiased estimate of its total quadratic risk in sigma_p^2 units. The
// default degrees-of-freedom factor on the deviations is n-3 (the divergence
// of the centered rule loses two, not one); literal_df = true uses n-2.
std::vector<double> grand_mean_js_plus(const PredictiveProblem& problem,
                                       std::span<const double> x, bool literal_df = false);
double grand_mean_sure_plus(const PredictiveProblem& problem, std::span<const double> x,
                            bool literal_df = false);

struct Table1Options {
  Centering centering = Centering::grand_mean;
  bool literal_df = false;
  std::int64_t replicates = 20000;  // future-draw MC for the Bayes column
  std::uint64_t seed = 0x9d2c5680u;
};

// Data-conditional KL losses at theta0 of the six strategies, one row per r.
// All Gaussian columns are closed form; the harmonic Bayes predictive is an
// MC average over future draws and carries a standard error.
struct Table1Row {
  double r = 0.0;
  double plug_in = 0.0;             // g[shrunk center, scale 1]
  double best_invariant = 0.0;      // g[x, 1 + 1/r]
  double shrunk_fixed_scale = 0.0;  // g[shrunk center, 1 + 1/r]
  double shrunk_flattened = 0.0;    // g[shrunk center, 1 + U/(nr)]
  double harmonic_flattened = 0.0;  // g[harmonic center, 1 + U/(nr)]
  double bayes_predictive = 0.0;    // harmonic posterior predictive
  double bayes_predictive_se = 0.0;
};

struct Table1 {
  std::vector<Table1Row> rows;
  Centering centering = Centering::grand_mean;
  bool literal_df = false;
  std::uint64_t seed = 0;
};

Table1 table1(const TransformedData& data, std::span<const double> r_grid,
              const Table1Options& options = {});

std::string table1_csv(const Table1& table);
std::string table1_json(const Table1& table);

}  // namespace predrisk
