#include "dsslat/storage_model.hpp"

#include <cmath>
#include <string>

#include "dsslat/errors.hpp"

namespace dsslat {

namespace {

double binomial_coeff(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

void SystemConfig::validate() const {
  if (!(arrival_rate > 0.0) || !std::isfinite(arrival_rate)) {
    throw ConfigError("lambda: arrival rate must be positive");
  }
  if (!(availability >= 0.0 && availability <= 1.0)) {
    throw ConfigError("q: availability must lie in [0, 1]");
  }
  if (classes.empty()) {
    throw ConfigError("classes: at least one file class is required");
  }
  double total_popularity = 0.0;
  for (const FileClass& fc : classes) {
    const std::string where = "class '" + fc.label + "': ";
    if (fc.label.empty()) throw ConfigError("class label must be nonempty");
    if (!(fc.popularity >= 0.0 && fc.popularity <= 1.0)) {
      throw ConfigError(where + "p must lie in [0, 1]");
    }
    if (fc.width < 1) throw ConfigError(where + "d must be >= 1");
    if (fc.threshold < 1 || fc.threshold > fc.width) {
      throw ConfigError(where + "k must satisfy 1 <= k <= d");
    }
    if (fc.fragment_service.shift < 0.0) {
      throw ConfigError(where + "delta must be nonnegative");
    }
    total_popularity += fc.popularity;
  }
  if (std::abs(total_popularity - 1.0) > 1e-9) {
    throw ConfigError("classes: popularities must sum to 1");
  }
}

double availability_pmf(int width, int up, double q) {
  if (width < 1) throw ConfigError("d must be >= 1");
  if (up < 0 || up > width) throw ConfigError("available count must lie in [0, d]");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q must lie in [0, 1]");
  // pow(0, 0) == 1 covers the degenerate q = 0 and q = 1 ends.
  return binomial_coeff(width, up) * std::pow(q, up) *
         std::pow(1.0 - q, width - up);
}

double loss_probability(const FileClass& fc, double q) {
  double p = 0.0;
  for (int j = 0; j < fc.threshold; ++j) p += availability_pmf(fc.width, j, q);
  return std::min(1.0, p);
}

double system_load(const SystemConfig& config) {
  double rho = 0.0;
  for (const FileClass& fc : config.classes) {
    double assigned = 0.0;  // E[min(j, k)] over the availability pmf, j >= 1
    for (int j = 1; j <= fc.width; ++j) {
      assigned += std::min(j, fc.threshold) *
                  availability_pmf(fc.width, j, config.availability);
    }
    rho += config.arrival_rate * fc.popularity * fc.fragment_service.mean() *
           assigned;
  }
  return rho;
}

StabilityResult stability_check(const SystemConfig& config) {
  config.validate();
  const double rho = system_load(config);
  return StabilityResult{rho < 1.0, rho};
}

}  // namespace dsslat
