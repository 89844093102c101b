#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsslat/storage_model.hpp"

namespace dsslat {

struct SimConfig {
  SystemConfig system;
  int servers = 300;
  std::uint64_t arrivals = 1'000'000;  // per replication, warmup included
  double warmup_fraction = 0.2;
  int replications = 5;
  std::uint64_t seed = 1;
  bool concurrent = true;

  // Empirical response survival export; step 0 disables it.
  double export_step = 0.0;
  double export_horizon = 0.0;

  std::size_t trace_limit = 0;        // log the first N arrivals of rep 0
  std::size_t pair_probe_stride = 0;  // sample two fixed servers' workloads
  bool keep_samples = false;          // retain raw response samples
};

// One logged arrival; enough to replay the run off-line.
struct TraceRecord {
  double time = 0.0;
  int class_index = 0;
  std::vector<int> contacted;  // server ids in sampling order
  std::vector<char> up;        // availability flag per contacted server
  double fragment_time = 0.0;  // drawn only when some server was up
  bool served = false;
  double response = 0.0;       // meaningful when served
};

struct ClassSimReport {
  std::string label;
  std::uint64_t served = 0;
  std::uint64_t lost = 0;          // fewer than threshold servers up
  std::uint64_t lost_no_work = 0;  // no server up at all
  double loss_frequency = 0.0;     // lost / (lost + served)
  double response_mean = 0.0;      // pooled over replications
  double response_variance = 0.0;
  double response_ci95 = 0.0;      // over replication means
  std::vector<double> rep_means;
  std::vector<double> ccdf;        // on the export grid, when enabled
  std::vector<double> samples;     // when keep_samples
};

struct SimReport {
  int servers = 0;
  std::uint64_t arrivals = 0;
  int replications = 0;
  std::uint64_t seed = 0;
  double rho = 0.0;  // offered load; the expected busy fraction when stable
  bool stable = true;

  double busy_fraction = 0.0;
  double busy_ci95 = 0.0;
  std::vector<double> busy_reps;

  double mean_workload = 0.0;
  double workload_ci95 = 0.0;
  std::vector<double> workload_reps;

  std::vector<ClassSimReport> classes;
  std::vector<double> export_grid;

  double pair_correlation = 0.0;  // NaN unless probing was enabled
  std::vector<TraceRecord> trace;
};

// Workload-level discrete event run: per arrival, contact d distinct
// servers, flip availability per server, place one identical fragment time
// on the min(up, k) least-loaded available servers. Workloads drain at unit
// rate and are decayed lazily. Identical (config, seed) inputs produce a
// bit-identical report.
SimReport simulate(const SimConfig& config);

// Survival of `samples` evaluated at each grid point, strictly-greater
// convention.
std::vector<double> empirical_ccdf(std::span<const double> samples,
                                   std::span<const double> grid);

}  // namespace dsslat
