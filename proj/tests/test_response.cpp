#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dsslat/errors.hpp"
#include "dsslat/response.hpp"
#include "dsslat/storage_model.hpp"
#include "dsslat/workload.hpp"
#include "support.hpp"

using namespace dsslat;

namespace {

// Enumerate all 2^j below/above patterns: k-th smallest exceeds u exactly
// when fewer than k coordinates sit at or below u.
double order_stat_by_enumeration(double fbar, int j, int k) {
  double prob = 0.0;
  for (int mask = 0; mask < (1 << j); ++mask) {
    int below = 0;
    double weight = 1.0;
    for (int b = 0; b < j; ++b) {
      if (mask & (1 << b)) {
        below += 1;
        weight *= 1.0 - fbar;
      } else {
        weight *= fbar;
      }
    }
    if (below < k) prob += weight;
  }
  return prob;
}

}  // namespace

TEST(OrderStat, MatchesSubsetEnumeration) {
  for (int j = 1; j <= 6; ++j)
    for (int k = 1; k <= j; ++k)
      for (double fbar : {0.0, 0.07, 0.31, 0.5, 0.77, 1.0})
        EXPECT_NEAR(order_stat_ccdf(fbar, j, k),
                    order_stat_by_enumeration(fbar, j, k), 1e-12)
            << "j=" << j << " k=" << k << " fbar=" << fbar;
}

TEST(OrderStat, MonotoneInThresholdAndUpCount) {
  const double fbar = 0.4;
  // Waiting for more fragments can only take longer...
  for (int j = 2; j <= 6; ++j)
    for (int k = 2; k <= j; ++k)
      EXPECT_GE(order_stat_ccdf(fbar, j, k), order_stat_ccdf(fbar, j, k - 1));
  // ...and more servers up can only make the k-th smallest smaller.
  for (int j = 2; j <= 6; ++j)
    for (int k = 1; k < j; ++k)
      EXPECT_LE(order_stat_ccdf(fbar, j, k), order_stat_ccdf(fbar, j - 1, k));
}

TEST(OrderStat, CurveLookupRequiresGridPoints) {
  WorkloadCurve curve;
  curve.step = 0.5;
  curve.values = {0.6, 0.3, 0.1};
  EXPECT_NEAR(order_stat_ccdf(curve, 2, 1, 0.5), 0.09, 1e-12);
  EXPECT_NEAR(order_stat_ccdf(curve, 2, 2, 0.5), 1.0 - 0.7 * 0.7, 1e-12);
  // Negative arguments are certainly exceeded; beyond the grid the curve has
  // decayed to zero.
  EXPECT_EQ(order_stat_ccdf(curve, 2, 1, -0.25), 1.0);
  EXPECT_EQ(order_stat_ccdf(curve, 2, 1, 7.0), 0.0);
  EXPECT_THROW(order_stat_ccdf(curve, 2, 1, 0.25), ConfigError);
  EXPECT_THROW(order_stat_ccdf(curve, 0, 1, 0.5), ConfigError);
}

TEST(ConditionalWeights, PinnedHotClass) {
  FileClass hot{"hot", 0.7, 3, 1, make_shifted(0.0, make_exponential(1.0))};
  const auto w = conditional_weights(hot, 0.8);
  ASSERT_EQ(w.size(), 3u);
  // B_1..B_3 at q = 0.8 are {.096, .384, .512}; all serve, norm .992.
  EXPECT_EQ(w[0].first, 1);
  EXPECT_NEAR(w[0].second, 0.096 / 0.992, 1e-12);
  EXPECT_NEAR(w[1].second, 0.384 / 0.992, 1e-12);
  EXPECT_NEAR(w[2].second, 0.512 / 0.992, 1e-12);
  double total = 0.0;
  for (const auto& [j, weight] : w) total += weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ConditionalWeights, DropsUpCountsBelowThreshold) {
  FileClass cold{"cold", 0.3, 4, 2, make_shifted(0.0, make_exponential(1.0))};
  const auto w = conditional_weights(cold, 0.9);
  ASSERT_EQ(w.size(), 3u);
  for (const auto& [j, weight] : w) EXPECT_GE(j, 2);
  testsup::expect_config_error([&] { conditional_weights(cold, 0.0); },
                               "q too small");
}

// Single class, one copy, full availability: R = W + X is the M/M/1 sojourn
// time, exponential with rate mu - lambda (the atom of W at zero makes the
// convolution collapse). lambda = 0.5, mu = 1: P(R > t) = e^{-t/2}, E[R] = 2.
TEST(ResponsePipeline, SingleExponentialMeanAndShape) {
  const SystemConfig sys = testsup::single_exp(0.5, 1.0);
  const WorkloadCurve wl = solve_workload_dde(sys);
  const ResponseCurve r = class_response_ccdf(wl, sys.classes[0], 1.0);
  EXPECT_NEAR(mean_response(r), 2.0, 1e-3);

  double worst = 0.0;
  for (std::size_t m = 0; m < r.values.size(); ++m) {
    const double t = m * r.step;
    worst = std::max(worst, std::abs(r.values[m] - std::exp(-0.5 * t)));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(ResponsePipeline, ClassCurveIsTheConditionalMixture) {
  const SystemConfig sys = testsup::hot_cold(0.8);
  const WorkloadCurve wl = solve_workload_dde(sys);
  const FileClass& cold = sys.classes[1];
  const double horizon = response_horizon(wl, cold);
  const ResponseCurve mix = class_response_ccdf(wl, cold, 0.8, horizon);

  const auto weights = conditional_weights(cold, 0.8);
  std::vector<ResponseCurve> parts;
  for (const auto& [j, w] : weights)
    parts.push_back(response_ccdf_jk(wl, cold, j, horizon));
  for (std::size_t m = 0; m < mix.values.size(); ++m) {
    double blended = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i)
      blended += weights[i].second * parts[i].values[m];
    ASSERT_NEAR(mix.values[m], blended, 1e-12);
  }
}

TEST(ResponsePipeline, SurvivalIsOneBelowStartup) {
  const SystemConfig sys = testsup::hot_cold(0.8);
  const WorkloadCurve wl = solve_workload_dde(sys);
  const ResponseCurve r = class_response_ccdf(wl, sys.classes[0], 0.8);
  for (std::size_t m = 0; m * r.step < 0.2 - 1e-12; ++m)
    EXPECT_EQ(r.values[m], 1.0);
  double prev = 1.0;
  for (double v : r.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
}

TEST(ResponsePipeline, UpCountBoundsAndErrors) {
  const SystemConfig sys = testsup::hot_cold(0.8);
  const WorkloadCurve wl = solve_workload_dde(sys);
  const FileClass& cold = sys.classes[1];
  const double horizon = response_horizon(wl, cold);
  // More servers up can only speed the k-th fragment up.
  const ResponseCurve r2 = response_ccdf_jk(wl, cold, 2, horizon);
  const ResponseCurve r4 = response_ccdf_jk(wl, cold, 4, horizon);
  for (std::size_t m = 0; m < r2.values.size(); ++m)
    EXPECT_LE(r4.values[m], r2.values[m] + 1e-12);
  EXPECT_THROW(response_ccdf_jk(wl, cold, 1, horizon), ConfigError);
  EXPECT_THROW(response_ccdf_jk(wl, cold, 5, horizon), ConfigError);
}

TEST(ServedMix, WeightsServedRequestsOnly) {
  const SystemConfig sys = testsup::hot_cold(0.9);
  const auto beta = served_mix_weights(sys);
  ASSERT_EQ(beta.size(), 2u);
  // p_i (1 - loss_i) renormalized; hand value for q = 0.9.
  const double hot = 0.7 * (1.0 - 0.001);
  const double cold = 0.3 * (1.0 - 0.0037);
  EXPECT_NEAR(beta[0], hot / (hot + cold), 1e-12);
  EXPECT_NEAR(beta[0], 0.7005680281309169, 1e-12);
  EXPECT_NEAR(beta[0] + beta[1], 1.0, 1e-12);
}

TEST(ServedMix, OverallCurveIsTheWeightedBlend) {
  const SystemConfig sys = testsup::hot_cold(0.8);
  const WorkloadCurve wl = solve_workload_dde(sys);
  double horizon = 0.0;
  for (const FileClass& fc : sys.classes)
    horizon = std::max(horizon, response_horizon(wl, fc));
  std::vector<ResponseCurve> curves;
  for (const FileClass& fc : sys.classes)
    curves.push_back(class_response_ccdf(wl, fc, 0.8, horizon));
  const ResponseCurve overall = overall_response_ccdf(curves, sys);
  const auto beta = served_mix_weights(sys);
  for (std::size_t m = 0; m < overall.values.size(); ++m)
    ASSERT_NEAR(overall.values[m],
                beta[0] * curves[0].values[m] + beta[1] * curves[1].values[m],
                1e-12);

  EXPECT_THROW(overall_response_ccdf({curves[0]}, sys), ConfigError);
  std::vector<ResponseCurve> skewed = curves;
  skewed[1].step *= 2.0;
  EXPECT_THROW(overall_response_ccdf(skewed, sys), ConfigError);
}

TEST(ResponsePipeline, PinnedHotColdMeans) {
  // Frozen from the production solver at default settings; guards against
  // regressions anywhere in the workload -> response chain.
  const auto solve_means = [](double q) {
    const SystemConfig sys = testsup::hot_cold(q);
    const WorkloadCurve wl = solve_workload_dde(sys);
    std::vector<double> means;
    for (const FileClass& fc : sys.classes)
      means.push_back(mean_response(class_response_ccdf(wl, fc, q)));
    return means;
  };
  const auto at_1 = solve_means(1.0);
  EXPECT_NEAR(at_1[0], 1.106332, 2e-6);
  EXPECT_NEAR(at_1[1], 0.755338, 2e-6);
  const auto at_08 = solve_means(0.8);
  EXPECT_NEAR(at_08[0], 1.247318, 2e-6);
  EXPECT_NEAR(at_08[1], 1.080793, 2e-6);
  // Losing availability slows both classes down.
  EXPECT_GT(at_08[0], at_1[0]);
  EXPECT_GT(at_08[1], at_1[1]);
}

TEST(MeanResponse, RejectsUndecayedCurves) {
  ResponseCurve stub;
  stub.step = 0.1;
  stub.values = {1.0, 0.9, 0.8};
  EXPECT_THROW(mean_response(stub), ConvergenceError);
}
