// Runs the command-line tool as a subprocess and checks its tables and exit codes.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CARLEMAN_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> footer;

  std::string cell(std::size_t row, const std::string& col) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == col) return rows.at(row).at(i);
    throw std::out_of_range(col);
  }
  double num(std::size_t row, const std::string& col) const { return std::stod(cell(row, col)); }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

// Good enough for our own output: no quoted commas in the commands tested here.
Csv parse_csv(const std::string& text) {
  Csv c;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      c.footer[line.substr(2, eq - 2)] = line.substr(eq + 1);
    } else if (first) {
      c.header = split(line);
      first = false;
    } else {
      c.rows.push_back(split(line));
    }
  }
  return c;
}

std::string tmp_path(const std::string& name) { return std::string(CARLEMAN_TEST_TMPDIR) + "/" + name; }

}  // namespace

TEST(CliMu, TwoTerms) {
  const auto r = run("mu --weights unit --n 2");
  ASSERT_EQ(r.code, 0);
  const auto c = parse_csv(r.out);
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_EQ(c.header, (std::vector<std::string>{"N", "mu_N", "residual", "iterations"}));
  EXPECT_EQ(c.cell(0, "N"), "2");
  EXPECT_NEAR(c.num(0, "mu_N"), (1 + std::numbers::sqrt2) / 2, 1e-10);
  EXPECT_LE(std::abs(c.num(0, "residual")), 1e-10);
  EXPECT_EQ(c.footer.at("M"), "1");
}

TEST(CliMu, OneTerm) {
  const auto c = parse_csv(run("mu --weights unit --n 1").out);
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_EQ(c.cell(0, "N"), "1");
  EXPECT_EQ(c.num(0, "mu_N"), 1.0);
}

TEST(CliMu, RangeIsIncreasing) {
  const auto r = run("mu --weights power:alpha=1 --n-range 10:100:10");
  ASSERT_EQ(r.code, 0);
  const auto c = parse_csv(r.out);
  ASSERT_EQ(c.rows.size(), 10u);
  for (std::size_t i = 1; i < 10; ++i) EXPECT_GT(c.num(i, "mu_N"), c.num(i - 1, "mu_N"));
  EXPECT_EQ(c.cell(9, "N"), "100");
}

TEST(CliMu, UsageErrors) {
  EXPECT_EQ(run("mu --weights unit").code, 64);
  EXPECT_EQ(run("mu --weights unit --n 0").code, 64);
  EXPECT_EQ(run("mu --weights unit --n 2.5").code, 64);
  EXPECT_EQ(run("mu --weights bogus --n 2").code, 64);
  EXPECT_EQ(run("mu --weights unit --n 2 --format xml").code, 64);
  EXPECT_EQ(run("").code, 64);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(CliHypotheses, ExitCodes) {
  EXPECT_EQ(run("hypotheses --weights power:alpha=2 --kmax 10000").code, 0);
  EXPECT_EQ(run("hypotheses --weights unit --kmax 1000").code, 0);

  const std::string path = tmp_path("decreasing.txt");
  std::ofstream(path) << "1\n2\n3\n2.5\n4\n5\n";
  const auto r = run("hypotheses --weights file:" + path);
  EXPECT_EQ(r.code, 1);
  const auto c = parse_csv(r.out);
  bool found = false;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    if (c.cell(i, "id") == "non_decreasing") {
      found = true;
      EXPECT_EQ(c.cell(i, "status"), "fail");
      EXPECT_EQ(c.cell(i, "witness_k"), "3");
    }
  }
  EXPECT_TRUE(found);
}

TEST(CliBreakdown, Examples) {
  auto c = parse_csv(run("breakdown --weights unit --mu 0.5").out);
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_EQ(c.cell(0, "N_mu"), "1");

  const auto r = run("breakdown --weights unit --mu 2.8 --cap 1000");
  ASSERT_EQ(r.code, 0);
  c = parse_csv(r.out);
  EXPECT_EQ(c.cell(0, "N_mu"), "INF");
  EXPECT_EQ(c.cell(0, "status"), "no_breakdown_mu_at_least_e^M");

  // Close to e the predicted index is astronomically large, so the cap is hit first.
  c = parse_csv(run("breakdown --weights unit --mu 2.71827 --cap 100000").out);
  EXPECT_EQ(c.cell(0, "N_mu"), "INF");
  EXPECT_EQ(c.cell(0, "status"), "cap_reached");
  EXPECT_GT(c.num(0, "predicted_log_N_mu"), 1000.0);

  c = parse_csv(run("breakdown --weights unit --mu 2.0,2.3").out);
  ASSERT_EQ(c.rows.size(), 2u);
  EXPECT_LT(std::stol(c.cell(0, "N_mu")), std::stol(c.cell(1, "N_mu")));
}

TEST(CliAsymptotic, ShortGridIsUsageError) { EXPECT_EQ(run("asymptotic --weights unit --grid 10").code, 64); }

TEST(CliAsymptotic, FooterCarriesTarget) {
  const auto r = run("asymptotic --weights power:alpha=1 --grid 1e2,1e3,1e4,1e5");
  ASSERT_EQ(r.code, 0);
  const auto c = parse_csv(r.out);
  ASSERT_EQ(c.rows.size(), 4u);
  const double target = 2 * std::numbers::pi * std::numbers::pi * std::exp(0.5) / 4;
  EXPECT_NEAR(std::stod(c.footer.at("target_A")), target, 1e-12);
  EXPECT_NEAR(std::stod(c.footer.at("target_A")), 8.14, 0.01);
  for (const char* k : {"fitted_A", "fitted_B", "fit_rms"}) EXPECT_TRUE(c.footer.count(k)) << k;
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(c.num(i, "mu_exact"), std::exp(0.5));
}

TEST(CliExtremal, Examples) {
  auto c = parse_csv(run("extremal --weights unit --n 2").out);
  ASSERT_EQ(c.rows.size(), 2u);
  EXPECT_NEAR(c.num(0, "a_k"), 0.853553, 1e-6);
  EXPECT_NEAR(c.num(1, "a_k"), 0.146447, 1e-6);

  c = parse_csv(run("extremal --weights unit --n 1").out);
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_EQ(c.num(0, "a_k"), 1.0);

  const auto r = run("extremal --weights power:alpha=1 --n 5");
  ASSERT_EQ(r.code, 0);
  c = parse_csv(r.out);
  ASSERT_EQ(c.rows.size(), 5u);
  EXPECT_LE(std::stod(c.footer.at("oracle_gap")), 1e-6);
  EXPECT_LE(std::stod(c.footer.at("stationarity_residual")), 1e-10);
}

TEST(CliTheta, Values) {
  auto c = parse_csv(run("theta --weights unit --mu 2.7 --y inf").out);
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_NEAR(c.num(0, "theta"), c.num(0, "leading_term"), 5.0);
  c = parse_csv(run("theta --weights unit --mu 2 --y 0").out);
  EXPECT_EQ(c.num(0, "theta"), 0.0);
  EXPECT_EQ(run("theta --weights unit --mu 2.718281828459045 --y 1").code, 64);
}

TEST(CliOutput, DeterministicCsv) {
  const std::string args = "extremal --weights power:alpha=2 --n 6 --seed 7";
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(CliOutput, OutFileMatchesStdout) {
  const std::string path = tmp_path("mu_out.csv");
  std::remove(path.c_str());
  ASSERT_EQ(run("mu --weights unit --n-range 2:20:3 --out " + path).code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), run("mu --weights unit --n-range 2:20:3").out);
}

TEST(CliOutput, JsonRoundTripsExactly) {
  const auto csv = parse_csv(run("mu --weights power:alpha=3.5 --n-range 2:50:6").out);
  const auto r = run("mu --weights power:alpha=3.5 --n-range 2:50:6 --format json");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["command"], "mu");
  const auto& rows = doc["rows"];
  ASSERT_EQ(rows.size(), csv.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    // %.17g round-trips a double, so both renderings must give the same bits.
    EXPECT_EQ(rows[i]["mu_N"].get<double>(), csv.num(i, "mu_N"));
    EXPECT_EQ(rows[i]["residual"].get<double>(), csv.num(i, "residual"));
    EXPECT_EQ(rows[i]["N"].get<long>(), std::stol(csv.cell(i, "N")));
    // And re-serialising the parsed document gives back the same numbers.
    const auto again = nlohmann::json::parse(doc.dump());
    EXPECT_EQ(again["rows"][i]["mu_N"].get<double>(), rows[i]["mu_N"].get<double>());
  }
  EXPECT_EQ(doc["footer"]["M"].get<double>(), 1.0 / 4.5);
}
