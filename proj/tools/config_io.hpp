#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dsslat/storage_model.hpp"

namespace dsslat::cli {

// Service-time description as written in config files: the constructor
// arguments rather than the materialized distribution, so an emitted echo
// re-parses to a field-identical spec.
struct ServiceSpec {
  std::string kind = "exp";  // exp | hyperexp
  double mean = 0.0;         // mean of the variable part (startup excluded)
  double scv = 1.0;          // hyperexp only
  double f = 0.5;            // hyperexp phase-weight shape
  bool operator==(const ServiceSpec&) const = default;
};

struct ClassSpec {
  std::string label;
  double p = 1.0;   // fraction of requests
  int d = 1;        // servers a file is spread over
  int k = 1;        // fragments needed to reconstruct
  double delta = 0.0;  // constant startup time per fragment
  ServiceSpec service;
  bool operator==(const ClassSpec&) const = default;
};

enum class SweepVariable { none, q, lambda };

struct SolverSettings {
  std::string method = "dde";  // dde (fast) | ide (reference)
  double step = 0.0;           // 0 picks the automatic grid step
  double eps_tail = 1e-8;
  std::size_t max_points = 4'000'000;
  bool operator==(const SolverSettings&) const = default;
};

struct SimulatorSettings {
  int servers = 300;
  std::uint64_t arrivals = 1'000'000;  // per replication, warmup included
  double warmup = 0.2;                 // fraction of arrivals discarded
  int replications = 5;
  std::uint64_t seed = 1;
  bool operator==(const SimulatorSettings&) const = default;
};

// Which artifacts a solve run writes. Means and losses land in summary.json;
// curves are CSV files.
struct OutputRequest {
  bool workload_curve = true;
  bool response_curves = true;
  bool means = true;
  bool loss_table = true;
  bool operator==(const OutputRequest&) const = default;
};

struct ExperimentSpec {
  double lambda = 0.0;
  double q = 1.0;
  std::vector<ClassSpec> classes;
  SweepVariable sweep_variable = SweepVariable::none;
  std::vector<double> sweep_values;  // strictly increasing when present
  OutputRequest outputs;
  SolverSettings solver;
  SimulatorSettings simulator;
  bool operator==(const ExperimentSpec&) const = default;
};

// JSON schema: {lambda, q, classes: [{label, p, d, k, delta, service:
// {kind, mean | file_mean, scv, f}}], sweep?, outputs?, solver?, simulator?}.
// file_mean = k * (delta + variable-part mean) is normalized to `mean` on
// parse. Throws ConfigError naming the offending field.
ExperimentSpec parse_experiment(const std::string& json_text);
ExperimentSpec load_experiment(const std::string& path);

// Normal-form JSON echo; parse_experiment(emit_experiment(s)) == s.
std::string emit_experiment(const ExperimentSpec& spec);

// Materializes the service distributions and validates the result.
SystemConfig to_system_config(const ExperimentSpec& spec);
ShiftedPhaseType build_service(const ClassSpec& cls);

void apply_sweep_value(ExperimentSpec& spec, SweepVariable var, double value);

// Pinned parameter sets: example1, example2, example3-msr, example3-mbr.
// theta > 0 overrides the cold-class fragment size of the example3 variants
// (file mean = k * theta, startup included).
ExperimentSpec preset(const std::string& name, double theta = 0.0);
std::vector<std::string> preset_names();

}  // namespace dsslat::cli
