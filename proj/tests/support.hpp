#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "dsslat/errors.hpp"
#include "dsslat/phase_type.hpp"
#include "dsslat/storage_model.hpp"

namespace testsup {

using namespace dsslat;

// M/G/1-shaped degenerate system: one class, one server contacted, no
// startup shift unless given.
inline SystemConfig single_exp(double lambda, double mu, double delta = 0.0) {
  SystemConfig sys;
  sys.arrival_rate = lambda;
  sys.availability = 1.0;
  sys.classes = {
      FileClass{"only", 1.0, 1, 1, make_shifted(delta, make_exponential(mu))}};
  return sys;
}

inline SystemConfig single_h2(double lambda, double mean, double scv) {
  SystemConfig sys;
  sys.arrival_rate = lambda;
  sys.availability = 1.0;
  sys.classes = {
      FileClass{"only", 1.0, 1, 1, make_shifted(0.0, make_hyperexp(mean, scv))}};
  return sys;
}

// Two-class reference system used across suites: replicated hot data next
// to (4,2)-coded cold data, hyperexponential bodies, common startup 0.2.
inline SystemConfig hot_cold(double q) {
  SystemConfig sys;
  sys.arrival_rate = 0.7;
  sys.availability = q;
  sys.classes = {
      FileClass{"hot", 0.7, 3, 1, make_shifted(0.2, make_hyperexp(0.8, 2.0))},
      FileClass{"cold", 0.3, 4, 2, make_shifted(0.2, make_hyperexp(0.3, 2.0))}};
  return sys;
}

// Wider-spread variant: (9,6)-coded cold data, startup 0.1.
inline SystemConfig wide_cold(double lambda, double q) {
  SystemConfig sys;
  sys.arrival_rate = lambda;
  sys.availability = q;
  sys.classes = {
      FileClass{"hot", 0.7, 3, 1, make_shifted(0.1, make_hyperexp(0.9, 2.0))},
      FileClass{"cold", 0.3, 9, 6,
                make_shifted(0.1, make_hyperexp(1.0 / 6.0 - 0.1, 2.0))}};
  return sys;
}

// Stationary workload survival of M/M/1 at workload w.
inline double mm1_fbar(double lambda, double mu, double w) {
  return (lambda / mu) * std::exp(-(mu - lambda) * w);
}

// Stationary workload survival of M/H2/1 with balanced-means two-phase
// service: two-exponential mixture from the transform's pole pair.
inline double mh21_fbar(double lambda, double mean, double scv, double w) {
  const double p1 = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
  const double p2 = 1.0 - p1;
  const double mu1 = 2.0 * p1 / mean, mu2 = 2.0 * p2 / mean;
  const double b = mu1 + mu2 - lambda;
  const double c = mu1 * mu2 - lambda * (p1 * mu2 + p2 * mu1);
  const double disc = std::sqrt(b * b - 4.0 * c);
  const double s1 = 0.5 * (-b + disc), s2 = 0.5 * (-b - disc);
  const double rho = lambda * mean;
  const double a1 =
      -(1.0 - rho) * (mu1 + s1) * (mu2 + s1) / (s1 * (s1 - s2));
  const double a2 =
      -(1.0 - rho) * (mu1 + s2) * (mu2 + s2) / (s2 * (s2 - s1));
  return a1 * std::exp(s1 * w) + a2 * std::exp(s2 * w);
}

inline double binom_coeff(int n, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

template <class F>
void expect_config_error(F&& fn, const std::string& needle) {
  bool threw = false;
  try {
    fn();
  } catch (const ConfigError& e) {
    threw = true;
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos)
        << "message: " << e.what();
  }
  EXPECT_TRUE(threw) << "expected ConfigError mentioning '" << needle << "'";
}

}  // namespace testsup
