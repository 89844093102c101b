#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "dsslat/curve_io.hpp"
#include "dsslat/errors.hpp"
#include "dsslat/response.hpp"
#include "dsslat/simulator.hpp"
#include "dsslat/workload.hpp"

namespace dsslat::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

fs::path ensure_dir(const std::string& out_dir) {
  fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir.string());
  return dir;
}

// Final artifacts appear whole or not at all: write a sibling temp file,
// then rename over the target.
void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw ConfigError("cannot write output file: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

void check_format(const std::string& format) {
  if (format != "csv" && format != "json")
    throw ConfigError("format must be csv or json");
}

struct SolvedPoint {
  double rho = 0.0;
  WorkloadCurve workload;
  double mean_w = 0.0;
  std::vector<double> losses;          // per class, service-order
  std::vector<ResponseCurve> responses;
  std::vector<double> mean_responses;
  std::vector<double> served_weights;
  double overall_mean = 0.0;
};

SolvedPoint solve_point(const SystemConfig& sys, const SolverSettings& so,
                        bool with_responses) {
  SolvedPoint pt;
  pt.rho = system_load(sys);
  SolveOptions opt;
  opt.step = so.step;
  opt.eps_tail = so.eps_tail;
  opt.max_points = so.max_points;
  pt.workload = so.method == "ide" ? solve_workload_ide(sys, opt)
                                   : solve_workload_dde(sys, opt);
  pt.mean_w = mean_workload(pt.workload);
  for (const auto& fc : sys.classes)
    pt.losses.push_back(loss_probability(fc, sys.availability));
  if (!with_responses) return pt;

  // One shared horizon so all class curves live on the same grid.
  double horizon = 0.0;
  for (const auto& fc : sys.classes)
    horizon = std::max(horizon, response_horizon(pt.workload, fc));
  pt.served_weights = served_mix_weights(sys);
  for (std::size_t i = 0; i < sys.classes.size(); ++i) {
    pt.responses.push_back(class_response_ccdf(pt.workload, sys.classes[i],
                                               sys.availability, horizon));
    pt.mean_responses.push_back(mean_response(pt.responses.back()));
    pt.overall_mean += pt.served_weights[i] * pt.mean_responses.back();
  }
  return pt;
}

struct SweepRow {
  double value = 0.0;
  bool stable = true;
  double rho = 0.0;
  std::vector<double> losses;
  std::vector<double> mean_responses;  // empty when unstable
  double overall_mean = 0.0;
};

// Load and losses are closed-form, so an unstable point still reports them;
// only the response means go missing.
SweepRow solve_row(const ExperimentSpec& spec, double value) {
  SystemConfig sys = to_system_config(spec);
  SweepRow row;
  row.value = value;
  row.rho = system_load(sys);
  for (const auto& fc : sys.classes)
    row.losses.push_back(loss_probability(fc, sys.availability));
  try {
    SolvedPoint pt = solve_point(sys, spec.solver, true);
    row.mean_responses = pt.mean_responses;
    row.overall_mean = pt.overall_mean;
  } catch (const UnstableError&) {
    row.stable = false;
  }
  return row;
}

// Points run concurrently; rows come back merged in point order, so output
// is independent of scheduling.
std::vector<SweepRow> solve_rows(const std::vector<ExperimentSpec>& points,
                                 const std::vector<double>& values) {
  std::vector<std::future<SweepRow>> futures;
  futures.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ExperimentSpec& p = points[i];
    const double v = values[i];
    futures.push_back(
        std::async(std::launch::async, [&p, v] { return solve_row(p, v); }));
  }
  std::vector<SweepRow> rows;
  rows.reserve(futures.size());
  for (auto& f : futures) rows.push_back(f.get());
  return rows;
}

}  // namespace

int run_with_exit_code(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnstableError& e) {
    err << "unstable: " << e.what() << " (rho = " << e.rho() << ")\n";
    return kExitUnstable;
  } catch (const ConvergenceError& e) {
    err << "unconverged: " << e.what() << '\n';
    return kExitUnconverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

void cmd_solve(const ExperimentSpec& spec, const std::string& out_dir) {
  SystemConfig sys = to_system_config(spec);
  fs::path dir = ensure_dir(out_dir);
  const bool with_responses =
      spec.outputs.means || spec.outputs.response_curves;
  SolvedPoint pt = solve_point(sys, spec.solver, with_responses);

  if (spec.outputs.workload_curve)
    write_workload_csv((dir / "workload.csv").string(), pt.workload);
  if (spec.outputs.response_curves)
    for (std::size_t i = 0; i < sys.classes.size(); ++i)
      write_response_csv(
          (dir / ("response_" + sys.classes[i].label + ".csv")).string(),
          pt.responses[i]);

  ordered_json summary;
  summary["schema_version"] = 1;
  summary["rho"] = pt.rho;
  summary["mean_workload"] = pt.mean_w;
  auto& classes = summary["classes"] = ordered_json::array();
  for (std::size_t i = 0; i < sys.classes.size(); ++i) {
    ordered_json jc;
    jc["label"] = sys.classes[i].label;
    if (spec.outputs.loss_table) jc["loss"] = pt.losses[i];
    if (spec.outputs.means) {
      jc["mean_response"] = pt.mean_responses[i];
      jc["served_weight"] = pt.served_weights[i];
    }
    classes.push_back(jc);
  }
  if (spec.outputs.means) summary["mean_response"] = pt.overall_mean;
  write_text_atomic(dir / "summary.json", summary.dump(2) + "\n");
  write_text_atomic(dir / "config_echo.json", emit_experiment(spec));

  std::cout << "solved: rho = " << pt.rho << ", mean workload = " << pt.mean_w;
  if (spec.outputs.means)
    std::cout << ", mean response = " << pt.overall_mean;
  std::cout << " -> " << dir.string() << '\n';
}

void cmd_simulate(const ExperimentSpec& spec, const std::string& out_dir,
                  bool dump_samples) {
  SystemConfig sys = to_system_config(spec);
  fs::path dir = ensure_dir(out_dir);

  SimConfig sc;
  sc.system = sys;
  sc.servers = spec.simulator.servers;
  sc.arrivals = spec.simulator.arrivals;
  sc.warmup_fraction = spec.simulator.warmup;
  sc.replications = spec.simulator.replications;
  sc.seed = spec.simulator.seed;
  sc.keep_samples = dump_samples;
  SimReport report = simulate(sc);

  ordered_json out;
  out["schema_version"] = 1;
  out["servers"] = report.servers;
  out["arrivals_per_replication"] = report.arrivals;
  out["replications"] = report.replications;
  out["seed"] = report.seed;
  out["rho"] = report.rho;
  out["stable"] = report.stable;
  out["busy_fraction"] = report.busy_fraction;
  out["busy_ci95"] = report.busy_ci95;
  out["mean_workload"] = report.mean_workload;
  out["workload_ci95"] = report.workload_ci95;
  auto& classes = out["classes"] = ordered_json::array();
  for (const auto& c : report.classes) {
    ordered_json jc;
    jc["label"] = c.label;
    jc["served"] = c.served;
    jc["lost"] = c.lost;
    jc["loss_frequency"] = c.loss_frequency;
    jc["response_mean"] = c.response_mean;
    jc["response_variance"] = c.response_variance;
    jc["response_ci95"] = c.response_ci95;
    classes.push_back(jc);
  }
  write_text_atomic(dir / "sim_summary.json", out.dump(2) + "\n");
  write_text_atomic(dir / "config_echo.json", emit_experiment(spec));

  if (dump_samples) {
    std::ostringstream csv;
    csv << "class,response\n" << std::setprecision(12);
    for (const auto& c : report.classes)
      for (double r : c.samples) csv << c.label << ',' << r << '\n';
    write_text_atomic(dir / "samples.csv", csv.str());
  }

  std::cout << "simulated " << report.replications << " x " << report.arrivals
            << " arrivals: busy fraction = " << report.busy_fraction
            << " (rho = " << report.rho << ") -> " << dir.string() << '\n';
}

void cmd_table1(const SolverSettings& solver, const std::string& out_dir,
                const std::string& format) {
  check_format(format);
  ExperimentSpec base = preset("example1");
  base.solver = solver;
  fs::path dir = ensure_dir(out_dir);

  std::vector<double> qs;
  for (int i = 0; i <= 8; ++i) qs.push_back(1.0 - 0.05 * i);
  std::vector<ExperimentSpec> points;
  for (double q : qs) {
    ExperimentSpec p = base;
    p.q = q;
    points.push_back(std::move(p));
  }
  std::vector<SweepRow> rows = solve_rows(points, qs);
  for (const auto& row : rows)
    if (!row.stable)
      throw UnstableError("table point did not admit a stationary workload",
                          row.rho);
  const SweepRow& baseline = rows.front();  // q = 1

  const std::size_t nc = base.classes.size();
  auto pct = [&](const SweepRow& row, std::size_t i) {
    return 100.0 * (row.mean_responses[i] / baseline.mean_responses[i] - 1.0);
  };

  if (format == "csv") {
    std::ostringstream csv;
    csv << "q";
    for (const auto& c : base.classes) csv << ',' << c.label << "_pct_increase";
    for (const auto& c : base.classes) csv << ',' << c.label << "_loss";
    csv << '\n';
    for (const auto& row : rows) {
      csv << num(row.value);
      for (std::size_t i = 0; i < nc; ++i) csv << ',' << num(pct(row, i));
      for (std::size_t i = 0; i < nc; ++i) csv << ',' << num(row.losses[i]);
      csv << '\n';
    }
    write_text_atomic(dir / "table1.csv", csv.str());
  } else {
    ordered_json out;
    out["schema_version"] = 1;
    auto& jrows = out["rows"] = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json jr;
      jr["q"] = row.value;
      for (std::size_t i = 0; i < nc; ++i)
        jr[base.classes[i].label + "_pct_increase"] = pct(row, i);
      for (std::size_t i = 0; i < nc; ++i)
        jr[base.classes[i].label + "_loss"] = row.losses[i];
      jrows.push_back(jr);
    }
    write_text_atomic(dir / "table1.json", out.dump(2) + "\n");
  }
  write_text_atomic(dir / "config_echo.json", emit_experiment(base));

  std::cout << std::fixed << std::setprecision(2);
  std::cout << std::setw(6) << "q";
  for (const auto& c : base.classes)
    std::cout << std::setw(12) << (c.label + " +%");
  for (const auto& c : base.classes)
    std::cout << std::setw(12) << (c.label + " loss");
  std::cout << '\n';
  for (const auto& row : rows) {
    std::cout << std::setw(6) << row.value;
    for (std::size_t i = 0; i < nc; ++i)
      std::cout << std::setw(12) << pct(row, i);
    std::cout << std::setprecision(6);
    for (std::size_t i = 0; i < nc; ++i)
      std::cout << std::setw(12) << row.losses[i];
    std::cout << std::setprecision(2) << '\n';
  }
  std::cout.unsetf(std::ios::fixed);
  std::cout << std::setprecision(6);
}

void cmd_sweep(const ExperimentSpec& spec_in, SweepVariable var,
               std::vector<double> values, const std::string& out_dir,
               const std::string& format) {
  check_format(format);
  ExperimentSpec spec = spec_in;
  if (var == SweepVariable::none) {
    var = spec.sweep_variable;
    values = spec.sweep_values;
  }
  if (var == SweepVariable::none)
    throw ConfigError(
        "sweep variable is required (config sweep block or --var)");
  if (values.empty())
    throw ConfigError("sweep values are required (config sweep block or --values)");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1]))
      throw ConfigError("sweep values must be strictly increasing");
  spec.sweep_variable = var;
  spec.sweep_values = values;
  const char* var_name = var == SweepVariable::q ? "q" : "lambda";

  // Every swept point must validate before any point is solved.
  std::vector<ExperimentSpec> points;
  points.reserve(values.size());
  for (double v : values) {
    ExperimentSpec p = spec;
    p.sweep_variable = SweepVariable::none;
    p.sweep_values.clear();
    apply_sweep_value(p, var, v);
    to_system_config(p);
    points.push_back(std::move(p));
  }

  fs::path dir = ensure_dir(out_dir);
  std::vector<SweepRow> rows = solve_rows(points, values);
  const std::size_t nc = spec.classes.size();

  if (format == "csv") {
    std::ostringstream csv;
    csv << var_name << ",mean_response";
    for (const auto& c : spec.classes) csv << ",mean_response_" << c.label;
    csv << ",rho";
    for (const auto& c : spec.classes) csv << ",loss_" << c.label;
    csv << ",status\n";
    for (const auto& row : rows) {
      csv << num(row.value);
      if (row.stable) {
        csv << ',' << num(row.overall_mean);
        for (std::size_t i = 0; i < nc; ++i)
          csv << ',' << num(row.mean_responses[i]);
      } else {
        for (std::size_t i = 0; i < nc + 1; ++i) csv << ',';
      }
      csv << ',' << num(row.rho);
      for (std::size_t i = 0; i < nc; ++i) csv << ',' << num(row.losses[i]);
      csv << ',' << (row.stable ? "ok" : "unstable") << '\n';
    }
    write_text_atomic(dir / "sweep.csv", csv.str());
  } else {
    ordered_json out;
    out["schema_version"] = 1;
    auto& jrows = out["rows"] = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json jr;
      jr[var_name] = row.value;
      jr["mean_response"] =
          row.stable ? ordered_json(row.overall_mean) : ordered_json(nullptr);
      for (std::size_t i = 0; i < nc; ++i)
        jr["mean_response_" + spec.classes[i].label] =
            row.stable ? ordered_json(row.mean_responses[i])
                       : ordered_json(nullptr);
      jr["rho"] = row.rho;
      for (std::size_t i = 0; i < nc; ++i)
        jr["loss_" + spec.classes[i].label] = row.losses[i];
      jr["status"] = row.stable ? "ok" : "unstable";
      jrows.push_back(jr);
    }
    write_text_atomic(dir / "sweep.json", out.dump(2) + "\n");
  }
  write_text_atomic(dir / "config_echo.json", emit_experiment(spec));

  std::size_t unstable = 0;
  for (const auto& row : rows) unstable += row.stable ? 0 : 1;
  std::cout << "swept " << var_name << " over " << rows.size() << " points";
  if (unstable > 0) std::cout << " (" << unstable << " unstable, flagged)";
  std::cout << " -> " << dir.string() << '\n';
}

}  // namespace dsslat::cli
