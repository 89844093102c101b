#pragma once

#include <string>
#include <vector>

#include "dsslat/phase_type.hpp"

namespace dsslat {

// One file class: a fraction `popularity` of requests, each file spread over
// `width` servers, any `threshold` fragments reconstruct it. Hot data is the
// special case threshold = 1 (plain replication).
struct FileClass {
  std::string label;
  double popularity = 1.0;   // fraction of requests for this class
  int width = 1;             // servers a file is spread over (d)
  int threshold = 1;         // fragments needed to reconstruct (k)
  ShiftedPhaseType fragment_service;  // time to serve one fragment

  // Total service time of a file equals threshold identical fragment times.
  double file_mean() const { return threshold * fragment_service.mean(); }

  bool operator==(const FileClass&) const = default;
};

struct SystemConfig {
  double arrival_rate = 0.0;  // request rate per server (lambda)
  double availability = 1.0;  // probability a contacted server is up (q)
  std::vector<FileClass> classes;

  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

// P(exactly `up` of the `width` contacted servers are available).
double availability_pmf(int width, int up, double q);

// P(fewer than `threshold` contacted servers are up): the request is lost.
double loss_probability(const FileClass& fc, double q);

// Long-run fraction of busy servers. Each arrival with j servers up puts one
// fragment of work on min(j, threshold) servers, so per class the load is
// lambda * p * E[fragment] * sum_j min(j, k) * P(j up).
double system_load(const SystemConfig& config);

struct StabilityResult {
  bool stable = false;
  double rho = 0.0;
};

StabilityResult stability_check(const SystemConfig& config);

}  // namespace dsslat
