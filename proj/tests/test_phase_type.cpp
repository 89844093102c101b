#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dsslat/errors.hpp"
#include "dsslat/phase_type.hpp"
#include "dsslat/rng.hpp"
#include "support.hpp"

using namespace dsslat;
using testsup::expect_config_error;

TEST(PhaseType, ExponentialMatchesClosedForm) {
  const PhaseType e = make_exponential(2.0);
  EXPECT_NEAR(e.mean(), 0.5, 1e-12);
  EXPECT_NEAR(e.second_moment(), 0.5, 1e-12);
  EXPECT_NEAR(e.scv(), 1.0, 1e-12);
  for (double t : {0.0, 0.1, 0.7, 3.0}) {
    EXPECT_NEAR(e.ccdf(t), std::exp(-2.0 * t), 1e-12);
    EXPECT_NEAR(e.cdf(t), 1.0 - std::exp(-2.0 * t), 1e-12);
    EXPECT_NEAR(e.pdf(t), 2.0 * std::exp(-2.0 * t), 1e-12);
  }
}

TEST(PhaseType, HyperexpMatchesRequestedMoments) {
  for (double mean : {0.3, 1.0, 2.5}) {
    for (double scv : {1.0, 2.0, 5.0}) {
      const PhaseType h = make_hyperexp(mean, scv);
      EXPECT_NEAR(h.mean(), mean, 1e-12) << mean << " " << scv;
      EXPECT_NEAR(h.scv(), scv, 1e-10) << mean << " " << scv;
      EXPECT_NEAR(h.second_moment(), (scv + 1.0) * mean * mean, 1e-10);
    }
  }
}

// Balanced phase means put half the mean in each branch: weight p_i with
// rate 2 p_i / mean.
TEST(PhaseType, HyperexpDensityMatchesTwoBranchForm) {
  const double mean = 1.0, scv = 2.0;
  const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
  const double p2 = 1.0 - p1;
  const double r1 = 2.0 * p1 / mean, r2 = 2.0 * p2 / mean;
  const PhaseType h = make_hyperexp(mean, scv);
  for (double t : {0.0, 0.2, 0.9, 2.7}) {
    const double pdf = p1 * r1 * std::exp(-r1 * t) + p2 * r2 * std::exp(-r2 * t);
    const double ccdf = p1 * std::exp(-r1 * t) + p2 * std::exp(-r2 * t);
    EXPECT_NEAR(h.pdf(t), pdf, 1e-12);
    EXPECT_NEAR(h.ccdf(t), ccdf, 1e-12);
  }
}

TEST(PhaseType, HyperexpScvOneDegeneratesToExponential) {
  const PhaseType h = make_hyperexp(0.4, 1.0);
  const PhaseType e = make_exponential(2.5);
  for (double t : {0.0, 0.3, 1.1}) {
    EXPECT_NEAR(h.pdf(t), e.pdf(t), 1e-12);
    EXPECT_NEAR(h.ccdf(t), e.ccdf(t), 1e-12);
  }
}

TEST(PhaseType, ShiftedDelaysTheBody) {
  const ShiftedPhaseType s = make_shifted(0.2, make_hyperexp(0.8, 2.0));
  EXPECT_NEAR(s.mean(), 1.0, 1e-12);
  EXPECT_EQ(s.ccdf(0.0), 1.0);
  EXPECT_EQ(s.ccdf(0.19999), 1.0);
  EXPECT_EQ(s.pdf(0.1), 0.0);
  EXPECT_NEAR(s.ccdf(0.7), s.body.ccdf(0.5), 1e-15);
  EXPECT_NEAR(s.pdf(0.7), s.body.pdf(0.5), 1e-15);
}

TEST(PhaseType, AdvanceRowAgreesWithPhaseRow) {
  const PhaseType h = make_hyperexp(1.0, 2.0);
  std::vector<double> row = h.alpha();
  for (int i = 0; i < 3; ++i) h.advance_row(row, 0.1);
  const std::vector<double> direct = h.phase_row(0.3);
  ASSERT_EQ(row.size(), direct.size());
  for (std::size_t i = 0; i < row.size(); ++i)
    EXPECT_NEAR(row[i], direct[i], 1e-12);
}

// Erlang subgenerator is non-diagonal, exercising the substepped
// advance_row path.
TEST(PhaseType, NonDiagonalSubgeneratorIntegrates) {
  SquareMatrix a(2);
  a(0, 0) = -2.0;
  a(0, 1) = 2.0;
  a(1, 1) = -2.0;
  const PhaseType erlang({1.0, 0.0}, a);
  EXPECT_NEAR(erlang.mean(), 1.0, 1e-12);
  EXPECT_NEAR(erlang.scv(), 0.5, 1e-10);
  // The substepped integrator keeps h * rate at 1/4, good to ~1e-4 here;
  // grid solvers advance with far smaller steps and do much better.
  for (double t : {0.3, 1.0, 2.5}) {
    // Survival of Erlang-2 with rate 2: (1 + 2t) e^{-2t}.
    EXPECT_NEAR(erlang.ccdf(t), (1.0 + 2.0 * t) * std::exp(-2.0 * t), 1e-4);
    EXPECT_NEAR(erlang.pdf(t), 4.0 * t * std::exp(-2.0 * t), 1e-4);
  }
  std::vector<double> row = erlang.alpha();
  for (int i = 0; i < 5; ++i) erlang.advance_row(row, 0.2);
  const std::vector<double> direct = erlang.phase_row(1.0);
  for (std::size_t i = 0; i < row.size(); ++i)
    EXPECT_NEAR(row[i], direct[i], 1e-4);
}

TEST(PhaseType, SampleMomentsMatchWithinCltBound) {
  Rng rng(20240817);
  const PhaseType h = make_hyperexp(1.0, 2.0);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += h.sample(rng);
  // sd = sqrt(2), so the sample-mean sd is ~0.0032; 0.02 is > 6 sigma.
  EXPECT_NEAR(sum / n, 1.0, 0.02);

  const PhaseType e = make_exponential(2.0);
  sum = 0.0;
  for (int i = 0; i < n; ++i) sum += e.sample(rng);
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(PhaseType, ConstructionRejectsBadRepresentations) {
  SquareMatrix ok(1);
  ok(0, 0) = -1.0;
  expect_config_error([&] { PhaseType({}, SquareMatrix(0)); }, "alpha");
  expect_config_error([&] { PhaseType({0.5, 0.5}, ok); }, "sizes");
  expect_config_error([&] { PhaseType({-0.1}, ok); }, "negative");
  expect_config_error([&] { PhaseType({0.7}, ok); }, "sum");

  SquareMatrix pos(1);
  pos(0, 0) = 0.5;
  expect_config_error([&] { PhaseType({1.0}, pos); }, "diagonal");

  SquareMatrix noexit(2);
  noexit(0, 0) = -1.0;
  noexit(0, 1) = 1.0;
  noexit(1, 0) = 1.0;
  noexit(1, 1) = -1.0;
  expect_config_error([&] { PhaseType({1.0, 0.0}, noexit); }, "absorb");
}

TEST(PhaseType, FactoriesRejectBadParameters) {
  expect_config_error([] { make_exponential(0.0); }, "rate");
  expect_config_error([] { make_hyperexp(-1.0, 2.0); }, "mean");
  expect_config_error([] { make_hyperexp(1.0, 0.5); }, "scv");
  expect_config_error([] { make_hyperexp(1.0, 2.0, 0.3); }, "f");
  expect_config_error([] { make_shifted(-0.1, make_exponential(1.0)); },
                      "shift");
}
