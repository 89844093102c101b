#include <gtest/gtest.h>

#include <cmath>

#include "dsslat/errors.hpp"
#include "dsslat/storage_model.hpp"
#include "support.hpp"

using namespace dsslat;
using testsup::expect_config_error;

TEST(AvailabilityPmf, PinnedValues) {
  EXPECT_NEAR(availability_pmf(3, 0, 0.9), 0.001, 1e-15);
  EXPECT_NEAR(availability_pmf(4, 4, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(availability_pmf(4, 1, 0.9), 0.0036, 1e-15);
  EXPECT_NEAR(availability_pmf(5, 2, 0.3),
              10.0 * 0.09 * 0.7 * 0.7 * 0.7, 1e-15);
}

TEST(AvailabilityPmf, SumsToOne) {
  for (int d : {1, 2, 3, 4, 9, 17}) {
    for (double q : {0.0, 0.05, 0.3, 0.8, 0.95, 1.0}) {
      double sum = 0.0;
      for (int j = 0; j <= d; ++j) sum += availability_pmf(d, j, q);
      EXPECT_NEAR(sum, 1.0, 1e-12) << "d=" << d << " q=" << q;
    }
  }
}

TEST(AvailabilityPmf, RejectsBadArguments) {
  expect_config_error([] { availability_pmf(3, 4, 0.5); }, "[0, d]");
  expect_config_error([] { availability_pmf(3, -1, 0.5); }, "[0, d]");
  expect_config_error([] { availability_pmf(3, 1, 1.5); }, "q");
}

TEST(LossProbability, PinnedValues) {
  const SystemConfig sys = testsup::hot_cold(1.0);
  EXPECT_NEAR(loss_probability(sys.classes[0], 0.85), 0.003375, 1e-15);
  EXPECT_NEAR(loss_probability(sys.classes[1], 0.9), 0.0037, 1e-15);
  EXPECT_EQ(loss_probability(sys.classes[0], 1.0), 0.0);
  EXPECT_EQ(loss_probability(sys.classes[1], 1.0), 0.0);
  EXPECT_NEAR(loss_probability(sys.classes[1], 0.95), 4.8125e-4, 1e-15);
}

TEST(LossProbability, MonotoneNonincreasingInAvailability) {
  const SystemConfig sys = testsup::wide_cold(0.7, 1.0);
  for (const FileClass& fc : sys.classes) {
    double prev = 1.0;
    for (double q = 0.05; q <= 1.0; q += 0.05) {
      const double loss = loss_probability(fc, q);
      EXPECT_LE(loss, prev + 1e-12);
      prev = loss;
    }
  }
}

TEST(LossProbability, ComplementsServedMass) {
  const SystemConfig sys = testsup::wide_cold(0.7, 1.0);
  for (const FileClass& fc : sys.classes) {
    for (double q : {0.2, 0.6, 0.9}) {
      double served = 0.0;
      for (int j = fc.threshold; j <= fc.width; ++j)
        served += availability_pmf(fc.width, j, q);
      EXPECT_NEAR(loss_probability(fc, q) + served, 1.0, 1e-12);
    }
  }
}

// Work entering per server and unit time: each arrival with j servers up
// places one identical fragment on min(j, k) of them, so the hot/cold
// system at full availability carries 0.7*0.7*1.0*1 + 0.7*0.3*0.5*2.
TEST(SystemLoad, PinnedValues) {
  EXPECT_NEAR(system_load(testsup::hot_cold(1.0)), 0.7, 1e-12);
  EXPECT_NEAR(system_load(testsup::hot_cold(0.9)), 0.699111, 1e-9);
  EXPECT_NEAR(system_load(testsup::single_exp(1.0, 2.0)), 0.5, 1e-12);

  SystemConfig zero = testsup::hot_cold(0.0);
  EXPECT_EQ(system_load(zero), 0.0);
}

TEST(SystemLoad, MatchesDirectSummation) {
  for (double q : {0.3, 0.6, 0.8, 1.0}) {
    const SystemConfig sys = testsup::wide_cold(0.7, q);
    double expected = 0.0;
    for (const FileClass& fc : sys.classes) {
      double work = 0.0;
      for (int j = 1; j <= fc.width; ++j)
        work += std::min(j, fc.threshold) * availability_pmf(fc.width, j, q);
      expected += sys.arrival_rate * fc.popularity *
                  fc.fragment_service.mean() * work;
    }
    EXPECT_NEAR(system_load(sys), expected, 1e-12) << "q=" << q;
  }
}

TEST(SystemLoad, MonotoneInAvailabilityRateAndMean) {
  double prev = 0.0;
  for (double q = 0.0; q <= 1.0001; q += 0.1) {
    const double rho = system_load(testsup::hot_cold(std::min(q, 1.0)));
    EXPECT_GE(rho, prev - 1e-12);
    prev = rho;
  }
  prev = 0.0;
  for (double lambda = 0.1; lambda <= 1.0; lambda += 0.1) {
    SystemConfig sys = testsup::hot_cold(0.8);
    sys.arrival_rate = lambda;
    const double rho = system_load(sys);
    EXPECT_GE(rho, prev - 1e-12);
    prev = rho;
  }
  prev = 0.0;
  for (double mean = 0.2; mean <= 1.2; mean += 0.2) {
    SystemConfig sys = testsup::hot_cold(0.8);
    sys.classes[0].fragment_service = make_shifted(0.2, make_hyperexp(mean, 2.0));
    const double rho = system_load(sys);
    EXPECT_GE(rho, prev - 1e-12);
    prev = rho;
  }
}

TEST(StabilityCheck, ReportsRho) {
  const StabilityResult ok = stability_check(testsup::hot_cold(1.0));
  EXPECT_TRUE(ok.stable);
  EXPECT_NEAR(ok.rho, 0.7, 1e-12);

  const StabilityResult bad = stability_check(testsup::single_exp(2.0, 1.0));
  EXPECT_FALSE(bad.stable);
  EXPECT_NEAR(bad.rho, 2.0, 1e-12);

  const StabilityResult wide = stability_check(testsup::wide_cold(0.7, 0.8));
  EXPECT_TRUE(wide.stable);
  EXPECT_GT(wide.rho, 0.0);
  EXPECT_LT(wide.rho, 1.0);
}

TEST(SystemConfigValidate, NamesTheOffendingField) {
  expect_config_error(
      [] {
        SystemConfig sys = testsup::hot_cold(0.8);
        sys.arrival_rate = 0.0;
        sys.validate();
      },
      "lambda");
  expect_config_error(
      [] {
        SystemConfig sys = testsup::hot_cold(0.8);
        sys.availability = 1.2;
        sys.validate();
      },
      "q");
  expect_config_error(
      [] {
        SystemConfig sys = testsup::hot_cold(0.8);
        sys.classes.clear();
        sys.validate();
      },
      "classes");
  expect_config_error(
      [] {
        SystemConfig sys = testsup::hot_cold(0.8);
        sys.classes[0].popularity = 0.9;  // now sums to 1.2
        sys.validate();
      },
      "sum");
  expect_config_error(
      [] {
        SystemConfig sys = testsup::hot_cold(0.8);
        sys.classes[1].threshold = 5;  // k > d
        sys.validate();
      },
      "k");
}

TEST(FileClass, FileMeanCountsAllFragments) {
  const SystemConfig sys = testsup::hot_cold(1.0);
  EXPECT_NEAR(sys.classes[0].file_mean(), 1.0, 1e-12);   // k=1, 0.2 + 0.8
  EXPECT_NEAR(sys.classes[1].file_mean(), 1.0, 1e-12);   // k=2, 2 * 0.5
}
