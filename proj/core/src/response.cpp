#include "dsslat/response.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsslat/errors.hpp"
#include "service_grid.hpp"

namespace dsslat {

namespace {

constexpr double kMonotoneSlack = 1e-6;  // tolerated quadrature wiggle

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// fbar at grid index l, reading 0 past the tabulated tail.
double fbar_at(const WorkloadCurve& curve, std::size_t l) {
  return l < curve.values.size() ? curve.values[l] : 0.0;
}

// Shared convolution core: response survival = Gbar(w) + integral over
// [0, w - shift] of weights(u) g(w - u) du, where weights is a workload
// order-statistic survival sampled on the curve grid.
ResponseCurve convolve_with_service(const WorkloadCurve& curve,
                                    const FileClass& fc,
                                    const std::vector<double>& weights,
                                    double horizon) {
  const double h = curve.step;
  if (!(h > 0.0)) throw ConfigError("workload curve has no grid");
  if (horizon <= 0.0) throw ConfigError("response horizon must be positive");

  detail::ServiceGrid grid(fc.fragment_service, h);
  const std::size_t s = static_cast<std::size_t>(grid.shift_steps());
  const std::size_t points =
      static_cast<std::size_t>(std::ceil(horizon / h - 1e-9)) + 1;
  const std::size_t last_weight = weights.size() - 1;

  ResponseCurve out{h, {}};
  out.values.reserve(points);
  double worst_violation = 0.0;
  for (std::size_t m = 0; m < points; ++m) {
    double v = grid.survival_node(m);
    if (m > s) {
      const std::size_t upper = m - s;
      const std::size_t cap = std::min(upper, last_weight);
      double acc = 0.0;
      for (std::size_t l = 0; l <= cap; ++l) {
        const double w = (l == 0 || l == upper) ? 0.5 : 1.0;
        acc += w * weights[l] * grid.density_node(m - l);
      }
      v += acc * h;
    }
    if (!out.values.empty()) {
      const double prev = out.values.back();
      if (v > prev) {
        worst_violation = std::max(worst_violation, v - prev);
        v = prev;
      }
    }
    out.values.push_back(clamp01(v));
  }
  if (worst_violation > kMonotoneSlack) {
    throw ConvergenceError("response quadrature lost monotonicity; refine the step");
  }
  return out;
}

}  // namespace

double order_stat_ccdf(double fbar, int j, int k) {
  if (j < 1 || k < 1 || k > j) {
    throw ConfigError("order statistic requires 1 <= k <= j");
  }
  if (!(fbar >= -1e-9 && fbar <= 1.0 + 1e-9)) {
    throw ConfigError("order statistic: fbar outside [0, 1]");
  }
  fbar = clamp01(fbar);
  const double below = 1.0 - fbar;
  // P(fewer than k of j workloads land at or below u).
  double coeff = 1.0;  // binom(j, m)
  double below_pow = 1.0;
  double sum = 0.0;
  // fbar^{j-m} by downward ladder.
  std::vector<double> fb_pow(static_cast<std::size_t>(k), 1.0);
  for (int m = 0; m < k; ++m) {
    double p = 1.0;
    for (int t = 0; t < j - m; ++t) p *= fbar;
    fb_pow[m] = p;
  }
  for (int m = 0; m < k; ++m) {
    sum += coeff * below_pow * fb_pow[m];
    coeff = coeff * (j - m) / (m + 1);
    below_pow *= below;
  }
  return sum;
}

double order_stat_ccdf(const WorkloadCurve& curve, int j, int k, double u) {
  if (!(curve.step > 0.0)) throw ConfigError("workload curve has no grid");
  if (u < 0.0) return 1.0;
  const double pos = u / curve.step;
  const std::size_t l = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(l)) > 1e-6) {
    throw ConfigError("order statistic evaluation point must lie on the curve grid");
  }
  return order_stat_ccdf(fbar_at(curve, l), j, k);
}

std::vector<std::pair<int, double>> conditional_weights(const FileClass& fc,
                                                        double q) {
  double norm = 0.0;
  for (int j = fc.threshold; j <= fc.width; ++j) {
    norm += availability_pmf(fc.width, j, q);
  }
  if (!(norm > 0.0)) {
    throw ConfigError("class '" + fc.label +
                      "': no availability pattern can serve a request (q too small)");
  }
  std::vector<std::pair<int, double>> w;
  w.reserve(fc.width - fc.threshold + 1);
  for (int j = fc.threshold; j <= fc.width; ++j) {
    w.emplace_back(j, availability_pmf(fc.width, j, q) / norm);
  }
  return w;
}

double response_horizon(const WorkloadCurve& curve, const FileClass& fc) {
  return curve.w_max() + fc.fragment_service.shift +
         50.0 * fc.fragment_service.body.mean();
}

ResponseCurve response_ccdf_jk(const WorkloadCurve& curve, const FileClass& fc,
                               int j, double horizon) {
  if (j < fc.threshold || j > fc.width) {
    throw ConfigError("class '" + fc.label + "': up-count j must lie in [k, d]");
  }
  if (horizon <= 0.0) horizon = response_horizon(curve, fc);
  std::vector<double> weights(curve.values.size());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] = order_stat_ccdf(curve.values[l], j, fc.threshold);
  }
  return convolve_with_service(curve, fc, weights, horizon);
}

ResponseCurve class_response_ccdf(const WorkloadCurve& curve,
                                  const FileClass& fc, double q,
                                  double horizon) {
  if (horizon <= 0.0) horizon = response_horizon(curve, fc);
  const auto jw = conditional_weights(fc, q);
  // The j-mixture commutes with the service convolution, so mix the
  // order-statistic curves first and convolve once.
  std::vector<double> weights(curve.values.size(), 0.0);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    double acc = 0.0;
    for (const auto& [j, wj] : jw) {
      acc += wj * order_stat_ccdf(curve.values[l], j, fc.threshold);
    }
    weights[l] = acc;
  }
  return convolve_with_service(curve, fc, weights, horizon);
}

std::vector<double> served_mix_weights(const SystemConfig& config) {
  config.validate();
  std::vector<double> w(config.classes.size());
  double norm = 0.0;
  for (std::size_t c = 0; c < config.classes.size(); ++c) {
    const FileClass& fc = config.classes[c];
    w[c] = fc.popularity *
           (1.0 - loss_probability(fc, config.availability));
    norm += w[c];
  }
  if (!(norm > 0.0)) {
    throw ConfigError("no class can be served at this availability");
  }
  for (double& x : w) x /= norm;
  return w;
}

ResponseCurve overall_response_ccdf(const std::vector<ResponseCurve>& curves,
                                    const SystemConfig& config) {
  if (curves.size() != config.classes.size()) {
    throw ConfigError("one response curve per class is required");
  }
  const std::vector<double> w = served_mix_weights(config);
  for (const ResponseCurve& rc : curves) {
    if (rc.step != curves.front().step ||
        rc.values.size() != curves.front().values.size()) {
      throw ConfigError("class response curves must share one grid");
    }
  }
  ResponseCurve out{curves.front().step,
                    std::vector<double>(curves.front().values.size(), 0.0)};
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (std::size_t m = 0; m < out.values.size(); ++m) {
      out.values[m] += w[c] * curves[c].values[m];
    }
  }
  return out;
}

double mean_response(const ResponseCurve& curve, double tail_tol) {
  if (curve.values.size() < 2) {
    throw ConfigError("response curve has no grid");
  }
  if (curve.values.back() > tail_tol) {
    throw ConvergenceError("response horizon too short: tail " +
                           std::to_string(curve.values.back()) +
                           " above tolerance");
  }
  double s = 0.5 * (curve.values.front() + curve.values.back());
  for (std::size_t m = 1; m + 1 < curve.values.size(); ++m) {
    s += curve.values[m];
  }
  return s * curve.step;
}

}  // namespace dsslat
