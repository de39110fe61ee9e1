#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "carleman/extremal.hpp"

using namespace carleman;

namespace {

const double kMu2 = (1.0 + std::numbers::sqrt2) / 2.0;

// sum_n prod_{k<=n} a_k^{lambda_k/Lambda_n} by plain powers, no log space.
double direct_objective(const std::vector<double>& lam, const std::vector<double>& a) {
  double total = 0.0, pre = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    pre += lam[n];
    double g = 1.0;
    for (std::size_t k = 0; k <= n; ++k) g *= std::pow(a[k], lam[k] / pre);
    total += g;
  }
  return total;
}

WeightSequence family(int which) {
  switch (which) {
    case 0: return WeightSequence::unit();
    case 1: return WeightSequence::power(1.0);
    default: return WeightSequence::power(2.0);
  }
}

}  // namespace

TEST(Reconstruct, SinglePoint) {
  auto unit = WeightSequence::unit();
  const auto v = reconstruct_extremal(unit, 1.0, 1);
  ASSERT_EQ(v.a.size(), 1u);
  EXPECT_EQ(v.a[0], 1.0);
  EXPECT_EQ(v.objective, 1.0);
}

TEST(Reconstruct, TwoTermsMatchHandSolution) {
  auto unit = WeightSequence::unit();
  const auto s = section_constant(unit, estimate_constants(unit, 1000), 2);
  const auto v = reconstruct_extremal(unit, s.mu_N, 2);
  const double a1 = (2.0 + std::numbers::sqrt2) / 4.0;
  EXPECT_NEAR(v.a[0], a1, 1e-13);
  EXPECT_NEAR(v.a[1], 1.0 - a1, 1e-13);
  EXPECT_NEAR(v.a[0], 0.853553, 1e-6);
  EXPECT_NEAR(v.objective, kMu2, 1e-13);
  EXPECT_NEAR(v.objective, direct_objective({1, 1}, v.a), 1e-14);
}

TEST(Reconstruct, ObjectiveMatchesSectionConstant) {
  auto unit = WeightSequence::unit();
  const auto s = section_constant(unit, estimate_constants(unit, 1000), 10);
  const auto v = reconstruct_extremal(unit, s.mu_N, 10);
  EXPECT_NEAR(v.objective, s.mu_N, 1e-9);
  EXPECT_NEAR(std::accumulate(v.a.begin(), v.a.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(v.objective, direct_objective(std::vector<double>(10, 1.0), v.a), 1e-13);
  for (double x : v.a) EXPECT_GT(x, 0.0);
}

TEST(Reconstruct, RejectsMuBelowTheSectionConstant) {
  auto unit = WeightSequence::unit();
  EXPECT_THROW(reconstruct_extremal(unit, 1.1, 10), NumericError);
  EXPECT_THROW(reconstruct_extremal(unit, 1.5, 0), PreconditionError);
}

TEST(Stationarity, Examples) {
  auto unit = WeightSequence::unit();
  const auto c = estimate_constants(unit, 1000);
  const auto s2 = section_constant(unit, c, 2);
  EXPECT_LE(verify_stationarity(unit, reconstruct_extremal(unit, s2.mu_N, 2), s2.mu_N), 1e-10);

  const auto s3 = section_constant(unit, c, 3);
  const auto uniform = make_extremal(unit, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_GT(verify_stationarity(unit, uniform, s3.mu_N), 1e-3);

  EXPECT_EQ(verify_stationarity(unit, make_extremal(unit, {1.0}), 1.0), 0.0);
}

TEST(Oracle, Examples) {
  auto unit = WeightSequence::unit();
  EXPECT_NEAR(oracle_maximize(unit, 2, 4).objective, kMu2, 1e-6);
  EXPECT_EQ(oracle_maximize(unit, 1, 4).objective, 1.0);

  auto lin = WeightSequence::power(1.0);
  const auto s = section_constant(lin, estimate_constants(lin, 1000), 2);
  EXPECT_NEAR(oracle_maximize(lin, 2, 4).objective, s.mu_N, 1e-6);

  EXPECT_THROW(oracle_maximize(unit, 9, 4), PreconditionError);
  EXPECT_THROW(oracle_maximize(unit, 0, 4), PreconditionError);
}

TEST(Oracle, DeterministicForFixedSeed) {
  auto unit = WeightSequence::unit();
  OracleOptions o;
  o.seed = 42;
  const auto a = oracle_maximize(unit, 5, 3, o);
  const auto b = oracle_maximize(unit, 5, 3, o);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.objective, b.objective);
}

// ---------------------------------------------------------------------------
// Properties

TEST(ExtremalProperties, Telescoping) {
  for (int f = 0; f < 3; ++f) {
    auto seq = family(f);
    const auto c = estimate_constants(seq, 1000);
    for (std::size_t N : {2u, 10u, 50u, 100u}) {
      const auto s = section_constant(seq, c, N);
      const auto v = reconstruct_extremal(seq, s.mu_N, N);
      const double lhs = s.mu_N * v.a[N - 1] / seq.lambda(N);
      const double rhs = v.G[N - 1] / seq.prefix_sum(N);
      EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, rhs)) << "family " << f << " N=" << N;
    }
  }
}

TEST(ExtremalProperties, OracleAgreesWithBisection) {
  for (int f = 0; f < 3; ++f) {
    auto seq = family(f);
    const auto c = estimate_constants(seq, 1000);
    for (std::size_t N = 2; N <= 6; ++N) {
      const double mu = section_constant(seq, c, N).mu_N;
      EXPECT_NEAR(oracle_maximize(seq, N, 4).objective, mu, 1e-6) << "family " << f << " N=" << N;
    }
  }
}

TEST(ExtremalProperties, QuotientIsScaleInvariant) {
  auto seq = WeightSequence::power(2.0);
  const std::vector<double> a{0.3, 0.25, 0.2, 0.15, 0.1};
  const double base = carleman_quotient(seq, a);
  for (double scale : {1e-8, 0.5, 3.0, 1e8}) {
    std::vector<double> b(a);
    for (double& x : b) x *= scale;
    EXPECT_NEAR(carleman_quotient(seq, b), base, 1e-14 * base) << scale;
  }
}

TEST(ExtremalProperties, StationarityAtReconstructedOptimum) {
  for (int f = 0; f < 3; ++f) {
    auto seq = family(f);
    const auto c = estimate_constants(seq, 1000);
    for (std::size_t N : {2u, 5u, 20u, 60u, 100u}) {
      const auto s = section_constant(seq, c, N);
      const auto v = reconstruct_extremal(seq, s.mu_N, N);
      EXPECT_LE(verify_stationarity(seq, v, s.mu_N), 1e-8) << "family " << f << " N=" << N;
      EXPECT_NEAR(v.objective, s.mu_N, 1e-9);
    }
  }
}
