#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dsslat/storage_model.hpp"
#include "dsslat/workload.hpp"

namespace dsslat {

// Survival function of the download (response) time on a uniform grid:
// values[m] = P(R > m*step). Always 1 below the startup shift.
struct ResponseCurve {
  double step = 0.0;
  std::vector<double> values;

  double w_max() const {
    return values.empty() ? 0.0 : step * static_cast<double>(values.size() - 1);
  }
};

// P(k-th smallest of j independent workloads > u): fewer than k of the j
// sampled servers sit at or below u.
double order_stat_ccdf(double fbar, int j, int k);
double order_stat_ccdf(const WorkloadCurve& curve, int j, int k, double u);

// Distribution of the up-count j among contacted servers, conditioned on the
// request being served (j >= threshold). Pairs (j, weight), weights sum to 1.
std::vector<std::pair<int, double>> conditional_weights(const FileClass& fc,
                                                        double q);

// Grid horizon covering the workload range plus essentially all of the
// fragment service tail.
double response_horizon(const WorkloadCurve& curve, const FileClass& fc);

// Response survival given exactly j servers up: the k-th smallest workload
// among j plus one fragment service time.
ResponseCurve response_ccdf_jk(const WorkloadCurve& curve, const FileClass& fc,
                               int j, double horizon = 0.0);

// Served-request response survival for one class: the j-mixture of
// response_ccdf_jk under conditional_weights.
ResponseCurve class_response_ccdf(const WorkloadCurve& curve,
                                  const FileClass& fc, double q,
                                  double horizon = 0.0);

// Fraction of served requests belonging to each class; the mixture weights
// for the overall response distribution.
std::vector<double> served_mix_weights(const SystemConfig& config);

// Pointwise mixture of per-class curves under served_mix_weights. All curves
// must share one grid.
ResponseCurve overall_response_ccdf(const std::vector<ResponseCurve>& curves,
                                    const SystemConfig& config);

// E[R] by trapezoidal integration. Errors if the curve has not decayed to
// tail_tol by its horizon.
double mean_response(const ResponseCurve& curve, double tail_tol = 1e-6);

}  // namespace dsslat
