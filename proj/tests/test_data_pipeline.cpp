#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "predrisk/data_pipeline.hpp"
#include "predrisk/errors.hpp"

using namespace predrisk;

namespace {

const std::string kDataPath = std::string(PREDRISK_SOURCE_DIR) + "/data/efron_morris_1970.csv";

const char* kSmallCsv =
    "player,h1,n1,h2,n2\n"
    "Clemente,18,45,127,367\n"
    "Berry,14,45,114,418\n"
    "Munson,8,45,129,408\n"
    "Alvis,7,45,14,70\n";

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("csv parser accepts the documented layout") {
  const auto records = parse_batting_csv(kSmallCsv);
  REQUIRE(records.size() == 4);
  CHECK(records[0].player == "Clemente");
  CHECK(records[0].h1 == 18);
  CHECK(records[0].n1 == 45);
  CHECK(records[0].h2 == 127);
  CHECK(records[0].n2 == 367);
  CHECK(records[3].player == "Alvis");
}

TEST_CASE("csv parser reports structure and count failures precisely") {
  CHECK_THROWS_AS(parse_batting_csv(""), ParseError);
  CHECK_THROWS_AS(parse_batting_csv("player,h1,n1\nA,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_batting_csv("player,h1,n1,h2,n2\n"), ParseError);  // no rows

  try {
    parse_batting_csv("player,h1,n1,h2,n2\nA,1,2,3\n");
    FAIL("short row should throw");
  } catch (const ParseError& e) {
    CHECK(contains(e.what(), "line 2"));
  }
  CHECK_THROWS_AS(parse_batting_csv("player,h1,n1,h2,n2\nA,x8,45,1,50\n"), ParseError);
  CHECK_THROWS_AS(parse_batting_csv("player,h1,n1,h2,n2\n,8,45,1,50\n"), ParseError);

  try {
    parse_batting_csv("player,h1,n1,h2,n2\nRuth,50,45,1,50\n");
    FAIL("h1 > n1 should throw");
  } catch (const ValidationError& e) {
    CHECK(contains(e.what(), "Ruth"));
  }
  CHECK_THROWS_AS(parse_batting_csv("player,h1,n1,h2,n2\nA,0,0,1,50\n"), ValidationError);
}

TEST_CASE("bundled season loads with a common first period") {
  const auto records = load_csv(kDataPath);
  REQUIRE(records.size() == 18);
  for (const auto& rec : records) CHECK(rec.n1 == 45);
  CHECK(records[0].player == "Clemente");
  CHECK(records[0].h1 == 18);
  CHECK(records[17].player == "Alvis");
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("variance-stabilizing transform") {
  const auto records = load_csv(kDataPath);
  const TransformedData data = transform(records);
  REQUIRE(data.x.size() == 18);
  CHECK(data.v_x == doctest::Approx(1.0 / 180.0).epsilon(1e-12));
  CHECK(data.x[0] == doctest::Approx(std::asin(std::sqrt(18.25 / 45.5))).epsilon(1e-12));
  CHECK(data.theta0[0] == doctest::Approx(std::asin(std::sqrt(145.0 / 412.0))).epsilon(1e-12));
  CHECK(data.r == 1.0);
  CHECK(transform(records, 2.5).r == 2.5);
  CHECK_THROWS_AS(transform(records, 0.0), ValidationError);

  // a hitless split still maps into (0, pi/2)
  const std::vector<BattingRecord> cold{{"A", 0, 45, 0, 100}, {"B", 12, 45, 80, 300}};
  const TransformedData tiny = transform(cold);
  CHECK(tiny.x[0] == doctest::Approx(std::asin(std::sqrt(0.25 / 45.5))).epsilon(1e-12));
  CHECK(tiny.x[0] > 0.0);

  const std::vector<BattingRecord> ragged{{"A", 10, 45, 50, 200}, {"B", 10, 50, 50, 200}};
  CHECK_THROWS_AS(transform(ragged), ValidationError);
  CHECK_THROWS_AS(transform(std::vector<BattingRecord>{}), ValidationError);
}

TEST_CASE("grand-mean shrinkage and its risk estimate by hand") {
  const PredictiveProblem p = make_problem(4);
  const std::vector<double> x{0.0, 0.0, 0.0, 4.0};
  // mean 1, deviations {-1,-1,-1,3}, S = 12

  const auto lindley = grand_mean_js_plus(p, x);
  CHECK(lindley[0] == doctest::Approx(1.0 - 11.0 / 12.0).epsilon(1e-12));
  CHECK(lindley[3] == doctest::Approx(1.0 + 3.0 * 11.0 / 12.0).epsilon(1e-12));
  const auto literal = grand_mean_js_plus(p, x, true);
  CHECK(literal[0] == doctest::Approx(1.0 - 10.0 / 12.0).epsilon(1e-12));

  CHECK(grand_mean_sure_plus(p, x) == doctest::Approx(4.0 - 1.0 / 12.0).epsilon(1e-12));
  CHECK(grand_mean_sure_plus(p, x, true) == doctest::Approx(4.0).epsilon(1e-12));

  // with no spread the rule returns the grand mean exactly
  const std::vector<double> flat{0.7, 0.7, 0.7, 0.7};
  const auto collapsed = grand_mean_js_plus(p, flat);
  for (const double v : collapsed) CHECK(v == 0.7);

  CHECK_THROWS_AS(grand_mean_js_plus(make_problem(3), std::vector<double>{1.0, 2.0, 3.0}),
                  ValidationError);
}

TEST_CASE("table of data-conditional losses at the frozen production cells") {
  const TransformedData data = transform(load_csv(kDataPath));
  const std::vector<double> grid{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  Table1Options options;
  options.literal_df = true;
  const Table1 table = table1(data, grid, options);
  REQUIRE(table.rows.size() == 7);

  const Table1Row& low = table.rows[0];   // r = 0.1
  const Table1Row& mid = table.rows[3];   // r = 1
  const Table1Row& high = table.rows[6];  // r = 10

  CHECK(std::fabs(low.plug_in - 23.097) < 1.5e-3);
  CHECK(std::fabs(low.best_invariant - 19.468) < 1.5e-3);
  CHECK(std::fabs(low.shrunk_fixed_scale - 15.499) < 1.5e-3);
  CHECK(std::fabs(low.shrunk_flattened - 11.574) < 1.5e-3);
  CHECK(std::fabs(low.harmonic_flattened - 19.326) < 1.5e-3);
  CHECK(std::fabs(low.bayes_predictive - 19.340) < 5e-3);

  CHECK(std::fabs(mid.plug_in - 2.310) < 1.5e-3);
  CHECK(std::fabs(mid.best_invariant - 5.076) < 1.5e-3);
  CHECK(std::fabs(mid.shrunk_fixed_scale - 2.893) < 1.5e-3);
  CHECK(std::fabs(mid.shrunk_flattened - 2.068) < 1.5e-3);
  CHECK(std::fabs(mid.harmonic_flattened - 5.005) < 1.5e-3);
  CHECK(std::fabs(mid.bayes_predictive - 5.021) < 5e-3);

  CHECK(std::fabs(high.shrunk_flattened - 0.228) < 1.5e-3);
  CHECK(std::fabs(high.plug_in - 0.231) < 1.5e-3);

  // every column falls as the future gets easier
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const Table1Row& a = table.rows[i - 1];
    const Table1Row& b = table.rows[i];
    CHECK(b.plug_in < a.plug_in);
    CHECK(b.best_invariant < a.best_invariant);
    CHECK(b.shrunk_fixed_scale < a.shrunk_fixed_scale);
    CHECK(b.shrunk_flattened < a.shrunk_flattened);
    CHECK(b.harmonic_flattened < a.harmonic_flattened);
    CHECK(b.bayes_predictive < a.bayes_predictive);
  }

  // the flattened shrinkage column wins every row
  for (const Table1Row& row : table.rows) {
    CHECK(row.shrunk_flattened < row.plug_in);
    CHECK(row.shrunk_flattened < row.best_invariant);
    CHECK(row.shrunk_flattened < row.shrunk_fixed_scale);
    CHECK(row.shrunk_flattened < row.harmonic_flattened);
    CHECK(row.shrunk_flattened < row.bayes_predictive);
    CHECK(row.bayes_predictive_se > 0.0);
    CHECK(row.bayes_predictive_se < 0.05);
  }
}

TEST_CASE("default degrees of freedom shifts only the flattened columns") {
  const TransformedData data = transform(load_csv(kDataPath));
  Table1Options options;
  options.replicates = 100;  // closed-form columns do not touch the MC
  const Table1 table = table1(data, std::vector<double>{0.1, 1.0, 10.0}, options);
  REQUIRE(table.rows.size() == 3);
  CHECK(std::fabs(table.rows[0].shrunk_flattened - 11.246) < 1.5e-3);
  CHECK(std::fabs(table.rows[0].plug_in - 21.756) < 1.5e-3);
  CHECK(std::fabs(table.rows[1].shrunk_flattened - 1.966) < 1.5e-3);
  CHECK(std::fabs(table.rows[2].shrunk_flattened - 0.215) < 1.5e-3);
  // the best-invariant column ignores the centering entirely
  CHECK(std::fabs(table.rows[1].best_invariant - 5.076) < 1.5e-3);
  for (const Table1Row& row : table.rows) CHECK(row.shrunk_flattened < row.plug_in);
}

TEST_CASE("losses are invariant under joint rescaling of data and variance") {
  const TransformedData data = transform(load_csv(kDataPath));
  TransformedData scaled;
  const double root = std::sqrt(data.v_x);
  scaled.v_x = 1.0;
  scaled.r = data.r;
  for (const double v : data.x) scaled.x.push_back(v / root);
  for (const double v : data.theta0) scaled.theta0.push_back(v / root);

  Table1Options options;
  options.replicates = 500;
  const Table1 a = table1(data, std::vector<double>{0.5, 2.0}, options);
  const Table1 b = table1(scaled, std::vector<double>{0.5, 2.0}, options);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].plug_in == doctest::Approx(b.rows[i].plug_in).epsilon(1e-9));
    CHECK(a.rows[i].best_invariant == doctest::Approx(b.rows[i].best_invariant).epsilon(1e-9));
    CHECK(a.rows[i].shrunk_fixed_scale ==
          doctest::Approx(b.rows[i].shrunk_fixed_scale).epsilon(1e-9));
    CHECK(a.rows[i].shrunk_flattened == doctest::Approx(b.rows[i].shrunk_flattened).epsilon(1e-9));
    CHECK(a.rows[i].harmonic_flattened ==
          doctest::Approx(b.rows[i].harmonic_flattened).epsilon(1e-9));
    CHECK(a.rows[i].bayes_predictive == doctest::Approx(b.rows[i].bayes_predictive).epsilon(1e-9));
  }
}

TEST_CASE("table validation and serialization") {
  const TransformedData data = transform(load_csv(kDataPath));
  CHECK_THROWS_AS(table1(data, std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(table1(data, std::vector<double>{0.0}), ValidationError);
  TransformedData ragged = data;
  ragged.theta0.pop_back();
  CHECK_THROWS_AS(table1(ragged, std::vector<double>{1.0}), ValidationError);
  Table1Options bad;
  bad.replicates = 1;
  CHECK_THROWS_AS(table1(data, std::vector<double>{1.0}, bad), ValidationError);

  Table1Options options;
  options.replicates = 200;
  const Table1 table = table1(data, std::vector<double>{0.5, 5.0}, options);
  const std::string csv = table1_csv(table);
  CHECK(csv.rfind("r,plug_in,best_invariant,shrunk_fixed_scale,shrunk_flattened,"
                  "harmonic_flattened,bayes_predictive,bayes_predictive_se\n",
                  0) == 0);
  std::size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 3);

  const nlohmann::json doc = nlohmann::json::parse(table1_json(table));
  CHECK(doc["centering"] == "grand_mean");
  CHECK(doc["literal_df"] == false);
  CHECK(doc["seed"] == 0x9d2c5680u);
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][1]["r"] == 5.0);
}
