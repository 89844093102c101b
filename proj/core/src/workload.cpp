#include "dsslat/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "dsslat/errors.hpp"
#include "service_grid.hpp"

namespace dsslat {

namespace {

constexpr double kBoundSlack = 1e-9;  // tolerated numeric excursion from [0,1]

// The trapezoidal history integral pins the reference solver to an O(h^2)
// absolute error floor; once the true tail decays below it the computed
// curve wiggles at that scale instead of decreasing. Wiggles under this
// slack are flattened; only an excursion far above the floor means the
// step is genuinely too coarse.
constexpr double kIdeMonoSlack = 1e-4;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Greatest common divisor of positive reals up to rounding noise.
double real_gcd(double a, double b) {
  const double tol = 1e-9 * std::max(a, b);
  while (b > tol) {
    double r = std::fmod(a, b);
    if (r < tol || b - r < tol) r = 0.0;
    a = std::exchange(b, r);
  }
  return a;
}

struct ClassCtx {
  const FileClass* fc = nullptr;
  double weight = 0.0;       // lambda * p
  double tail = 0.0;         // 1 - B_0: fraction of arrivals placing any work
  std::vector<double> bj;    // availability pmf over up-counts 0..d
  std::vector<int> kappa;    // min(j, threshold)
  int shift_steps = 0;
  detail::ServiceGrid grid;

  ClassCtx(const FileClass& c, const SystemConfig& config, double step)
      : fc(&c),
        weight(config.arrival_rate * c.popularity),
        grid(c.fragment_service, step) {
    bj.resize(c.width + 1);
    kappa.resize(c.width + 1);
    for (int j = 0; j <= c.width; ++j) {
      bj[j] = availability_pmf(c.width, j, config.availability);
      kappa[j] = std::min(j, c.threshold);
    }
    tail = 1.0 - bj[0];
    shift_steps = grid.shift_steps();
  }

  // sum_j B_j * kernel(j, min(j,k), fbar); the workload-dependent part of
  // the arrival bracket.
  double kernel_mix(double fbar) const {
    double s = 0.0;
    for (int j = 1; j <= fc->width; ++j) {
      s += bj[j] * selection_kernel(j, kappa[j], fbar);
    }
    return s;
  }
};

struct SolveSetup {
  double step = 0.0;
  double rho = 0.0;
  std::vector<ClassCtx> classes;
};

SolveSetup prepare(const SystemConfig& config, const SolveOptions& options) {
  const StabilityResult st = stability_check(config);
  if (!st.stable) {
    throw UnstableError("system load rho >= 1; no stationary workload", st.rho);
  }
  SolveSetup setup;
  setup.rho = st.rho;
  setup.step = options.step > 0.0 ? options.step : default_step(config);
  if (!(setup.step > 0.0) || !std::isfinite(setup.step)) {
    throw ConfigError("step must be positive");
  }
  if (!(options.eps_tail > 0.0 && options.eps_tail < 1.0)) {
    throw ConfigError("eps_tail must lie in (0, 1)");
  }
  setup.classes.reserve(config.classes.size());
  for (const FileClass& fc : config.classes) {
    setup.classes.emplace_back(fc, config, setup.step);
  }
  return setup;
}

// Appends fbar_next after bound and monotonicity checks. A small negative
// value is the tail crossing zero within truncation error and terminates the
// solve via the eps_tail loop condition; only a violent undershoot means the
// step failed to resolve the curve. mono_slack is the largest uptick the
// solver's own noise can explain: anything below it is flattened, anything
// above it is a step-size failure.
void accept_point(std::vector<double>& values, double fbar_next,
                  double mono_slack) {
  const double prev = values.back();
  if (fbar_next < -0.01 || fbar_next > 1.0 + kBoundSlack) {
    throw ConvergenceError("workload survival left [0, 1]; step too coarse");
  }
  if (fbar_next > prev + mono_slack) {
    throw ConvergenceError("workload survival increased; step too coarse");
  }
  values.push_back(std::min(prev, clamp01(fbar_next)));
}

}  // namespace

double default_step(const SystemConfig& config) {
  config.validate();
  double h = std::numeric_limits<double>::infinity();
  double shift_gcd = 0.0;
  for (const FileClass& fc : config.classes) {
    h = std::min(h, fc.fragment_service.mean() / 200.0);
    const double shift = fc.fragment_service.shift;
    if (shift > 0.0) {
      h = std::min(h, shift / 20.0);
      shift_gcd = shift_gcd == 0.0 ? shift : real_gcd(shift_gcd, shift);
    }
  }
  h = std::max(h, 1e-4);
  if (shift_gcd > 0.0) {
    if (shift_gcd < h * 1e-3) {
      throw ConfigError("class deltas share no usable common divisor; pass an explicit step");
    }
    h = shift_gcd / std::ceil(shift_gcd / h - 1e-9);
  }
  return h;
}

double selection_kernel(int j, int k, double fbar) {
  if (j < 1 || k < 1 || k > j) {
    throw ConfigError("selection_kernel requires 1 <= k <= j");
  }
  if (!(fbar >= -1e-6 && fbar <= 1.0 + 1e-6)) {
    throw ConfigError("selection_kernel: fbar outside [0, 1]");
  }
  fbar = clamp01(fbar);
  const double below = 1.0 - fbar;

  // E[min(B, k)] - 1 with B ~ Binomial(j, below). Power ladders avoid
  // calling pow in the solvers' hot path.
  double fb_pow = 1.0;
  std::vector<double> below_pow(static_cast<size_t>(j) + 1);
  below_pow[0] = 1.0;
  for (int i = 1; i <= j; ++i) below_pow[i] = below_pow[i - 1] * below;

  double sum = -1.0;
  double coeff = 1.0;  // binom(j, i) walked downward from i = j
  for (int i = j; i >= 1; --i) {
    sum += std::min(i, k) * coeff * fb_pow * below_pow[i];
    coeff = coeff * i / (j - i + 1);
    fb_pow *= fbar;
  }
  return sum;
}

double mean_workload(const WorkloadCurve& curve) {
  if (curve.values.size() < 2) return 0.0;
  double s = 0.5 * (curve.values.front() + curve.values.back());
  for (std::size_t m = 1; m + 1 < curve.values.size(); ++m) {
    s += curve.values[m];
  }
  return s * curve.step;
}

namespace detail {

double slope_before_startup(const SystemConfig& config, double fbar) {
  double slope = 0.0;
  for (const FileClass& fc : config.classes) {
    double acc = 0.0;
    for (int j = 1; j <= fc.width; ++j) {
      acc += availability_pmf(fc.width, j, config.availability) *
             (1.0 + selection_kernel(j, std::min(j, fc.threshold), fbar));
    }
    slope -= config.arrival_rate * fc.popularity * acc;
  }
  return slope;
}

}  // namespace detail

WorkloadCurve solve_workload_ide(const SystemConfig& config,
                                 const SolveOptions& options) {
  SolveSetup setup = prepare(config, options);
  const double h = setup.step;
  WorkloadCurve curve{h, {setup.rho}};
  if (setup.rho < options.eps_tail) return curve;

  std::vector<double>& values = curve.values;
  const std::size_t nc = setup.classes.size();
  std::vector<std::vector<double>> mix(nc);  // kernel_mix along the grid
  std::vector<double> conv_prev(nc, 0.0);    // convolution at the last node
  for (std::size_t c = 0; c < nc; ++c) {
    mix[c].push_back(setup.classes[c].kernel_mix(setup.rho));
  }

  // Below its error floor the scheme stops making monotone progress: new
  // record lows become rare, then stop. A long stretch with no strict
  // decrease marks the floor; the unresolved plateau past the last record
  // is dropped and the resolved prefix returned.
  std::size_t max_shift = 0;
  for (const ClassCtx& cc : setup.classes) {
    max_shift = std::max(max_shift, static_cast<std::size_t>(cc.shift_steps));
  }
  const std::size_t stall_window = std::max<std::size_t>(64, 2 * max_shift);
  std::size_t last_drop = 0;

  std::vector<double> conv_base(nc), gbar_next(nc), mix_next(nc);
  while (values.back() >= options.eps_tail) {
    const std::size_t m = values.size() - 1;
    if (m + 1 >= options.max_points) {
      throw ConvergenceError("workload tail did not reach eps_tail within max_points");
    }

    double rhs_m = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      ClassCtx& cc = setup.classes[c];
      rhs_m -= cc.weight *
               (cc.tail * cc.grid.survival_node(m) + mix[c][m] - conv_prev[c]);
    }

    // Trapezoidal convolution integral at the next node, less the endpoint
    // term when the startup shift is zero (it involves the still-unknown
    // kernel value at m+1 and is patched during correction).
    for (std::size_t c = 0; c < nc; ++c) {
      ClassCtx& cc = setup.classes[c];
      const std::size_t s = static_cast<std::size_t>(cc.shift_steps);
      double acc = 0.0;
      if (m + 1 > s) {
        const std::size_t upper = m + 1 - s;  // integration nodes 0..upper
        const std::size_t last_known = std::min(upper, m);
        for (std::size_t l = 0; l <= last_known; ++l) {
          const double w = (l == 0 || l == upper) ? 0.5 : 1.0;
          acc += w * mix[c][l] * cc.grid.density_node(m + 1 - l);
        }
      }
      conv_base[c] = acc * h;
      gbar_next[c] = cc.grid.survival_node(m + 1);
    }

    // Heun predictor plus two corrector sweeps.
    double fbar_next = values[m] + h * rhs_m;
    for (int sweep = 0; sweep < 2; ++sweep) {
      double rhs_n = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        ClassCtx& cc = setup.classes[c];
        mix_next[c] = cc.kernel_mix(clamp01(fbar_next));
        double conv = conv_base[c];
        if (cc.shift_steps == 0) {
          conv += 0.5 * h * cc.grid.density_node(0) * mix_next[c];
        }
        rhs_n -= cc.weight * (cc.tail * gbar_next[c] + mix_next[c] - conv);
      }
      fbar_next = values[m] + 0.5 * h * (rhs_m + rhs_n);
    }

    accept_point(values, fbar_next, kIdeMonoSlack);
    if (values[m + 1] < values[m]) {
      last_drop = m + 1;
    } else if (m + 1 - last_drop >= stall_window) {
      values.resize(last_drop + 1);
      break;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      ClassCtx& cc = setup.classes[c];
      mix[c].push_back(cc.kernel_mix(values.back()));
      conv_prev[c] = conv_base[c];
      if (cc.shift_steps == 0) {
        conv_prev[c] += 0.5 * h * cc.grid.density_node(0) * mix[c].back();
      }
    }
  }
  return curve;
}

WorkloadCurve solve_workload_dde(const SystemConfig& config,
                                 const SolveOptions& options) {
  SolveSetup setup = prepare(config, options);
  const double h = setup.step;
  WorkloadCurve curve{h, {setup.rho}};
  if (setup.rho < options.eps_tail) return curve;

  std::vector<double>& values = curve.values;
  std::vector<double> derivs;  // fbar' at each node, for midpoint recovery
  const std::size_t nc = setup.classes.size();

  // Auxiliary state per class: one phase vector per up-count j = 1..d,
  // carrying the service-convolved kernel history. Flat layout (j-1)*n + p.
  std::vector<std::vector<double>> xi(nc);
  std::vector<int> order(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    order[c] = setup.classes[c].fc->fragment_service.body.order();
    xi[c].assign(static_cast<std::size_t>(setup.classes[c].fc->width) *
                     order[c],
                 0.0);
  }

  auto xi_like = [&] {
    std::vector<std::vector<double>> v(nc);
    for (std::size_t c = 0; c < nc; ++c) v[c].assign(xi[c].size(), 0.0);
    return v;
  };
  std::vector<std::vector<double>> k1 = xi_like(), k2 = xi_like(),
                                   k3 = xi_like(), k4 = xi_like(),
                                   stage = xi_like();

  // Derivative of (fbar, xi) at one of the three stage abscissae of the step
  // starting at node m: 0 -> w_m, 1 -> w_m + h/2, 2 -> w_m + h.
  auto derivative = [&](double fbar_stage,
                        const std::vector<std::vector<double>>& xi_stage,
                        int abscissa, std::size_t m,
                        std::vector<std::vector<double>>& dxi) -> double {
    const double fbar_cl = clamp01(fbar_stage);
    double dfbar = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      ClassCtx& cc = setup.classes[c];
      const int n = order[c];
      const PhaseType& body = cc.fc->fragment_service.body;
      const std::size_t s = static_cast<std::size_t>(cc.shift_steps);
      const bool active = s == 0 || m >= s;

      double gbar;
      if (abscissa == 0) gbar = cc.grid.survival_node(m);
      else if (abscissa == 1) gbar = cc.grid.survival_mid(m);
      else gbar = cc.grid.survival_node(m + 1);

      double fb_delay = 0.0;
      if (active) {
        if (s == 0) {
          fb_delay = fbar_cl;
        } else {
          const std::size_t a = m - s;
          if (abscissa == 0) {
            fb_delay = values[a];
          } else if (abscissa == 2) {
            fb_delay = values[a + 1];
          } else {
            // Cubic Hermite midpoint from stored values and slopes.
            fb_delay = 0.5 * (values[a] + values[a + 1]) +
                       0.125 * h * (derivs[a] - derivs[a + 1]);
          }
          fb_delay = clamp01(fb_delay);
        }
      }

      double acc = 0.0;
      for (int j = 1; j <= cc.fc->width; ++j) {
        const double* xi_j = xi_stage[c].data() + static_cast<std::size_t>(j - 1) * n;
        double* dxi_j = dxi[c].data() + static_cast<std::size_t>(j - 1) * n;
        double alpha_xi = 0.0;
        for (int p = 0; p < n; ++p) alpha_xi += body.alpha()[p] * xi_j[p];
        acc += cc.bj[j] *
               (gbar + selection_kernel(j, cc.kappa[j], fbar_cl) - alpha_xi);

        if (active) {
          const double forcing = selection_kernel(j, cc.kappa[j], fb_delay);
          for (int r = 0; r < n; ++r) {
            double v = forcing * body.exit_rates()[r];
            if (body.diagonal()) {
              v += body.subgenerator()(r, r) * xi_j[r];
            } else {
              for (int p = 0; p < n; ++p) {
                v += body.subgenerator()(r, p) * xi_j[p];
              }
            }
            dxi_j[r] = v;
          }
        } else {
          for (int r = 0; r < n; ++r) dxi_j[r] = 0.0;
        }
      }
      dfbar -= cc.weight * acc;
    }
    return dfbar;
  };

  auto blend = [&](const std::vector<std::vector<double>>& base,
                   const std::vector<std::vector<double>>& slope, double f,
                   std::vector<std::vector<double>>& out) {
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t i = 0; i < base[c].size(); ++i) {
        out[c][i] = base[c][i] + f * slope[c][i];
      }
    }
  };

  while (values.back() >= options.eps_tail) {
    const std::size_t m = values.size() - 1;
    if (m + 1 >= options.max_points) {
      throw ConvergenceError("workload tail did not reach eps_tail within max_points");
    }
    const double f_m = values[m];

    const double k1f = derivative(f_m, xi, 0, m, k1);
    derivs.push_back(k1f);

    blend(xi, k1, 0.5 * h, stage);
    const double k2f = derivative(f_m + 0.5 * h * k1f, stage, 1, m, k2);

    blend(xi, k2, 0.5 * h, stage);
    const double k3f = derivative(f_m + 0.5 * h * k2f, stage, 1, m, k3);

    blend(xi, k3, h, stage);
    const double k4f = derivative(f_m + h * k3f, stage, 2, m, k4);

    const double f_next =
        f_m + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    accept_point(values, f_next, kBoundSlack);
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t i = 0; i < xi[c].size(); ++i) {
        xi[c][i] += h / 6.0 *
                    (k1[c][i] + 2.0 * k2[c][i] + 2.0 * k3[c][i] + k4[c][i]);
      }
    }
  }
  return curve;
}

}  // namespace dsslat
