#pragma once

#include <cstddef>
#include <vector>

#include "dsslat/storage_model.hpp"

namespace dsslat {

// Stationary workload survival function of a single server in the
// many-server limit, tabulated on a uniform grid: values[m] = P(W > m*step).
struct WorkloadCurve {
  double step = 0.0;
  std::vector<double> values;

  double w_max() const {
    return values.empty() ? 0.0 : step * static_cast<double>(values.size() - 1);
  }
};

struct SolveOptions {
  double step = 0.0;        // 0 picks default_step(config)
  double eps_tail = 1e-8;   // integration stops once fbar drops below this
  std::size_t max_points = 4'000'000;
};

// Default grid step: min over classes of delta/20 (when delta > 0) and
// mean fragment time / 200, floored at 1e-4, then snapped so every class
// delta is an integer number of steps.
double default_step(const SystemConfig& config);

// Workload-dependent dispatch kernel: with j servers up and fragments going
// to the k least loaded of them, returns E[min(B, k)] - 1 where
// B ~ Binomial(j, 1 - fbar) counts servers at workload <= w. Special cases:
// k = 1 gives -fbar^j, k = j gives j - 1 - j*fbar.
double selection_kernel(int j, int k, double fbar);

// Integro-differential form of the workload fixed point. O(K^2) in the
// number of grid points K: each step re-evaluates a convolution of the
// kernel history with the fragment service density. The trapezoidal history
// integral has an O(step^2) absolute error floor; when eps_tail lies below
// that floor the returned curve ends where the tail stops being resolvable
// (its last value then exceeds eps_tail) instead of extending a plateau of
// quadrature noise.
WorkloadCurve solve_workload_ide(const SystemConfig& config,
                                 const SolveOptions& options = {});

// Delay-differential form: the convolution is carried as one auxiliary
// phase vector per (class, up-count) pair, integrated alongside fbar by the
// method of steps. O(K) and the production path.
WorkloadCurve solve_workload_dde(const SystemConfig& config,
                                 const SolveOptions& options = {});

// E[W] = integral of the survival function (trapezoidal on the grid).
double mean_workload(const WorkloadCurve& curve);

namespace detail {

// Slope of fbar in the startup region w < min delta, where no fragment has
// finished yet: -sum_i lambda p_i sum_{j>=1} B_j (1 + kernel(j, min(j,k))).
double slope_before_startup(const SystemConfig& config, double fbar);

}  // namespace detail

}  // namespace dsslat
