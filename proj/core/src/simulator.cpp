#include "dsslat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <numeric>
#include <utility>

#include "dsslat/errors.hpp"
#include "dsslat/rng.hpp"

namespace dsslat {
namespace {

// Two-sided 95% t quantiles for small sample CIs over replication means.
double t_quantile_95(int df) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571,
                                     2.447,  2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131};
  if (df < 1) return std::numeric_limits<double>::quiet_NaN();
  if (df <= 15) return table[df - 1];
  if (df <= 20) return 2.09;
  if (df <= 30) return 2.04;
  return 1.96;
}

struct MeanCi {
  double mean = 0.0;
  double ci95 = 0.0;
};

MeanCi mean_ci(const std::vector<double>& reps) {
  MeanCi out;
  if (reps.empty()) return out;
  out.mean = std::accumulate(reps.begin(), reps.end(), 0.0) / reps.size();
  if (reps.size() < 2) return out;
  double ss = 0.0;
  for (double v : reps) ss += (v - out.mean) * (v - out.mean);
  double se = std::sqrt(ss / (reps.size() - 1) / reps.size());
  out.ci95 = t_quantile_95(static_cast<int>(reps.size()) - 1) * se;
  return out;
}

struct Welford {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
};

struct ClassTally {
  std::uint64_t served = 0;
  std::uint64_t lost = 0;
  std::uint64_t lost_no_work = 0;
  Welford response;
  std::vector<std::uint64_t> hist;  // export-grid bins + overflow
  std::vector<double> samples;
};

struct PairProbe {
  std::uint64_t n = 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;

  void add(double x, double y) {
    ++n;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  double correlation() const {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double cx = sxx - sx * sx / n;
    double cy = syy - sy * sy / n;
    double cxy = sxy - sx * sy / n;
    if (cx <= 0.0 || cy <= 0.0) return 0.0;
    return cxy / std::sqrt(cx * cy);
  }
};

struct RepResult {
  double busy_fraction = 0.0;
  double mean_workload = 0.0;
  std::vector<ClassTally> classes;
  PairProbe probe;
  std::vector<TraceRecord> trace;
};

struct Candidate {
  int server = 0;
  double backlog = 0.0;
};

RepResult run_replication(const SimConfig& cfg, int rep_index,
                          std::size_t grid_points) {
  const SystemConfig& sys = cfg.system;
  const int n = cfg.servers;
  const double q = sys.availability;
  const std::size_t n_classes = sys.classes.size();

  std::vector<double> popularity_cum(n_classes);
  double acc = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    acc += sys.classes[c].popularity;
    popularity_cum[c] = acc;
  }
  popularity_cum.back() = 1.0;

  RepResult out;
  out.classes.resize(n_classes);
  if (grid_points > 0)
    for (auto& tally : out.classes) tally.hist.assign(grid_points + 1, 0);

  Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(rep_index));

  std::vector<double> workload(n, 0.0);
  std::vector<double> touched(n, 0.0);

  double t = 0.0;
  double measure_start = 0.0;
  bool measuring = cfg.warmup_fraction <= 0.0;
  double busy_acc = 0.0;
  double area_acc = 0.0;

  // Decay a server's backlog to time `now`; accumulate busy time and
  // workload area only inside the measurement window.
  auto flush = [&](int s, double now) {
    double elapsed = now - touched[s];
    double w = workload[s];
    if (measuring) {
      double drained = std::min(elapsed, w);
      busy_acc += drained;
      area_acc += drained * (w - 0.5 * drained);
    }
    workload[s] = std::max(0.0, w - elapsed);
    touched[s] = now;
  };

  const std::uint64_t warmup_arrivals = static_cast<std::uint64_t>(
      static_cast<double>(cfg.arrivals) * cfg.warmup_fraction);
  const double arrival_rate = sys.arrival_rate * n;

  std::vector<int> chosen;
  std::vector<char> up_flags;
  std::vector<Candidate> available;

  for (std::uint64_t a = 0; a < cfg.arrivals; ++a) {
    t += rng.exponential(arrival_rate);

    if (!measuring && a == warmup_arrivals) {
      for (int s = 0; s < n; ++s) flush(s, t);
      measuring = true;
      measure_start = t;
    }
    const bool counted = a >= warmup_arrivals;

    double u = rng.uniform01();
    std::size_t c = 0;
    while (c + 1 < n_classes && u > popularity_cum[c]) ++c;
    const FileClass& fc = sys.classes[c];
    ClassTally& tally = out.classes[c];

    chosen.clear();
    for (int i = 0; i < fc.width; ++i) {
      int s;
      do {
        s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      } while (std::find(chosen.begin(), chosen.end(), s) != chosen.end());
      chosen.push_back(s);
    }

    up_flags.clear();
    int up_count = 0;
    for (int i = 0; i < fc.width; ++i) {
      bool up = rng.bernoulli(q);
      up_flags.push_back(up ? 1 : 0);
      up_count += up ? 1 : 0;
    }

    double fragment = 0.0;
    bool served = false;
    double response = 0.0;

    if (up_count == 0) {
      if (counted) {
        ++tally.lost;
        ++tally.lost_no_work;
      }
    } else {
      fragment = fc.fragment_service.sample(rng);

      available.clear();
      for (int i = 0; i < fc.width; ++i) {
        if (!up_flags[i]) continue;
        flush(chosen[i], t);
        available.push_back({chosen[i], workload[chosen[i]]});
      }

      // Random tie-break matters only when a strict subset gets the work.
      if (up_count > fc.threshold)
        for (std::size_t i = available.size() - 1; i > 0; --i)
          std::swap(available[i], available[rng.below(i + 1)]);
      std::stable_sort(available.begin(), available.end(),
                       [](const Candidate& a, const Candidate& b) {
                         return a.backlog < b.backlog;
                       });

      if (up_count >= fc.threshold) {
        served = true;
        response = available[fc.threshold - 1].backlog + fragment;
        if (counted) {
          ++tally.served;
          tally.response.add(response);
          if (!tally.hist.empty()) {
            double pos = response / cfg.export_step - 1e-9;
            std::size_t bin =
                pos <= 0.0 ? 0
                           : static_cast<std::size_t>(std::ceil(pos));
            tally.hist[std::min(bin, tally.hist.size() - 1)] += 1;
          }
          if (cfg.keep_samples) tally.samples.push_back(response);
        }
      } else if (counted) {
        ++tally.lost;
      }

      int assigned = std::min(up_count, fc.threshold);
      for (int i = 0; i < assigned; ++i)
        workload[available[i].server] += fragment;
    }

    if (rep_index == 0 && static_cast<std::size_t>(a) < cfg.trace_limit) {
      TraceRecord rec;
      rec.time = t;
      rec.class_index = static_cast<int>(c);
      rec.contacted = chosen;
      rec.up = up_flags;
      rec.fragment_time = fragment;
      rec.served = served;
      rec.response = response;
      out.trace.push_back(std::move(rec));
    }

    if (counted && cfg.pair_probe_stride > 0 && n >= 2 &&
        a % cfg.pair_probe_stride == 0) {
      double w0 = std::max(0.0, workload[0] - (t - touched[0]));
      double w1 = std::max(0.0, workload[1] - (t - touched[1]));
      out.probe.add(w0, w1);
    }
  }

  for (int s = 0; s < n; ++s) flush(s, t);
  double span = t - measure_start;
  if (span > 0.0) {
    out.busy_fraction = busy_acc / (span * n);
    out.mean_workload = area_acc / (span * n);
  }
  return out;
}

}  // namespace

SimReport simulate(const SimConfig& config) {
  config.system.validate();
  int max_width = 0;
  for (const auto& fc : config.system.classes)
    max_width = std::max(max_width, fc.width);
  if (config.servers < max_width)
    throw ConfigError("servers must be at least the largest spread width");
  if (config.arrivals == 0) throw ConfigError("arrivals must be positive");
  if (config.warmup_fraction < 0.0 || config.warmup_fraction >= 1.0)
    throw ConfigError("warmup_fraction must lie in [0, 1)");
  if (config.replications < 1)
    throw ConfigError("replications must be positive");
  if (config.export_step < 0.0 || config.export_horizon < 0.0 ||
      (config.export_step > 0.0) != (config.export_horizon > 0.0))
    throw ConfigError("export_step and export_horizon must be set together");

  std::size_t grid_points = 0;
  std::vector<double> grid;
  if (config.export_step > 0.0) {
    grid_points = static_cast<std::size_t>(
                      std::ceil(config.export_horizon / config.export_step -
                                1e-9)) +
                  1;
    grid.resize(grid_points);
    for (std::size_t m = 0; m < grid_points; ++m)
      grid[m] = static_cast<double>(m) * config.export_step;
  }

  std::vector<RepResult> reps(config.replications);
  if (config.concurrent && config.replications > 1) {
    std::vector<std::future<RepResult>> futures;
    futures.reserve(config.replications);
    for (int r = 0; r < config.replications; ++r)
      futures.push_back(std::async(std::launch::async, run_replication,
                                   std::cref(config), r, grid_points));
    for (int r = 0; r < config.replications; ++r) reps[r] = futures[r].get();
  } else {
    for (int r = 0; r < config.replications; ++r)
      reps[r] = run_replication(config, r, grid_points);
  }

  SimReport report;
  report.servers = config.servers;
  report.arrivals = config.arrivals;
  report.replications = config.replications;
  report.seed = config.seed;
  auto stability = stability_check(config.system);
  report.rho = stability.rho;
  report.stable = stability.stable;
  report.export_grid = grid;

  for (const auto& rep : reps) {
    report.busy_reps.push_back(rep.busy_fraction);
    report.workload_reps.push_back(rep.mean_workload);
  }
  auto busy = mean_ci(report.busy_reps);
  report.busy_fraction = busy.mean;
  report.busy_ci95 = busy.ci95;
  auto area = mean_ci(report.workload_reps);
  report.mean_workload = area.mean;
  report.workload_ci95 = area.ci95;

  const std::size_t n_classes = config.system.classes.size();
  report.classes.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassSimReport& cls = report.classes[c];
    cls.label = config.system.classes[c].label;

    Welford pooled;
    std::vector<std::uint64_t> hist(grid_points > 0 ? grid_points + 1 : 0, 0);
    for (const auto& rep : reps) {
      const ClassTally& tally = rep.classes[c];
      cls.served += tally.served;
      cls.lost += tally.lost;
      cls.lost_no_work += tally.lost_no_work;
      cls.rep_means.push_back(tally.response.mean);
      if (tally.response.count > 0) {
        // Chan et al. pairwise merge of count/mean/M2.
        double delta = tally.response.mean - pooled.mean;
        std::uint64_t total = pooled.count + tally.response.count;
        pooled.m2 += tally.response.m2 + delta * delta *
                                             (double(pooled.count) *
                                              double(tally.response.count)) /
                                             double(total);
        pooled.mean += delta * double(tally.response.count) / double(total);
        pooled.count = total;
      }
      for (std::size_t b = 0; b < hist.size(); ++b) hist[b] += tally.hist[b];
      if (config.keep_samples)
        cls.samples.insert(cls.samples.end(), tally.samples.begin(),
                           tally.samples.end());
    }
    cls.response_mean = pooled.mean;
    cls.response_variance = pooled.variance();
    auto ci = mean_ci(cls.rep_means);
    cls.response_ci95 = ci.ci95;
    std::uint64_t decided = cls.served + cls.lost;
    cls.loss_frequency =
        decided > 0 ? static_cast<double>(cls.lost) / decided : 0.0;

    if (grid_points > 0 && pooled.count > 0) {
      cls.ccdf.resize(grid_points);
      std::uint64_t above = pooled.count;
      for (std::size_t m = 0; m < grid_points; ++m) {
        above -= hist[m];
        cls.ccdf[m] = static_cast<double>(above) / pooled.count;
      }
    }
  }

  if (config.pair_probe_stride > 0) {
    std::vector<double> corr;
    for (const auto& rep : reps) {
      double c = rep.probe.correlation();
      if (std::isfinite(c)) corr.push_back(c);
    }
    report.pair_correlation =
        corr.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : mean_ci(corr).mean;
  } else {
    report.pair_correlation = std::numeric_limits<double>::quiet_NaN();
  }

  report.trace = std::move(reps.front().trace);
  return report;
}

std::vector<double> empirical_ccdf(std::span<const double> samples,
                                   std::span<const double> grid) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(grid.size(), 0.0);
  if (sorted.empty()) return out;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), grid[m]);
    out[m] = static_cast<double>(sorted.end() - it) / sorted.size();
  }
  return out;
}

}  // namespace dsslat
