#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config_io.hpp"
#include "dsslat/errors.hpp"

namespace {

using namespace dsslat;
using namespace dsslat::cli;

// Flags shared by the subcommands that take a model: where the parameters
// come from (--config or --preset) plus point overrides.
struct SpecFlags {
  std::string config_path;
  std::string preset_name;
  double theta = 0.0;
  double q = 0.0;
  double lambda = 0.0;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* q_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;

  void add_to(CLI::App* cmd) {
    CLI::Option* config_opt =
        cmd->add_option("-c,--config", config_path, "experiment config JSON");
    CLI::Option* preset_opt =
        cmd->add_option("-p,--preset", preset_name,
                        "built-in parameter set: example1, example2, "
                        "example3-msr, example3-mbr")
            ->check(CLI::IsMember(preset_names()));
    config_opt->excludes(preset_opt);
    preset_opt->excludes(config_opt);
    theta_opt = cmd->add_option(
        "--theta", theta,
        "cold fragment mean for the example3 presets (file mean = k*theta)");
    q_opt = cmd->add_option("--q", q, "override node availability");
    lambda_opt =
        cmd->add_option("--lambda", lambda, "override arrival rate per server");
  }

  ExperimentSpec resolve() const {
    ExperimentSpec spec;
    if (!config_path.empty()) {
      if (theta_opt->count() > 0)
        throw ConfigError("--theta applies to presets only");
      spec = load_experiment(config_path);
    } else if (!preset_name.empty()) {
      spec = preset(preset_name, theta_opt->count() > 0 ? theta : 0.0);
    } else {
      throw ConfigError("one of --config or --preset is required");
    }
    if (q_opt->count() > 0) spec.q = q;
    if (lambda_opt->count() > 0) spec.lambda = lambda;
    return spec;
  }
};

struct SolverFlags {
  std::string method;
  double step = 0.0;
  double eps_tail = 0.0;
  std::uint64_t max_points = 0;
  CLI::Option* method_opt = nullptr;
  CLI::Option* step_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* max_opt = nullptr;

  void add_to(CLI::App* cmd) {
    method_opt = cmd->add_option("--method", method,
                                 "workload solver: dde (fast) or ide "
                                 "(reference)")
                     ->check(CLI::IsMember({"dde", "ide"}));
    step_opt = cmd->add_option("--step", step, "grid step (0 = automatic)");
    eps_opt = cmd->add_option("--eps-tail", eps_tail,
                              "tail mass where integration stops");
    max_opt = cmd->add_option("--max-points", max_points, "grid point budget");
  }

  void apply(SolverSettings& settings) const {
    if (method_opt->count() > 0) settings.method = method;
    if (step_opt->count() > 0) settings.step = step;
    if (eps_opt->count() > 0) settings.eps_tail = eps_tail;
    if (max_opt->count() > 0)
      settings.max_points = static_cast<std::size_t>(max_points);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Mean-field latency solver and simulator for erasure-coded storage "
      "with hot and cold data"};
  app.require_subcommand(1);

  // solve
  CLI::App* solve = app.add_subcommand(
      "solve", "solve the workload fixed point and the response curves");
  SpecFlags solve_spec;
  SolverFlags solve_solver;
  std::string solve_out = ".";
  solve_spec.add_to(solve);
  solve_solver.add_to(solve);
  solve->add_option("-o,--out-dir", solve_out, "output directory");

  // simulate
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the finite-system discrete-event simulation");
  SpecFlags sim_spec;
  std::string sim_out = ".";
  int sim_servers = 0;
  std::uint64_t sim_arrivals = 0;
  int sim_reps = 0;
  double sim_warmup = 0.0;
  std::uint64_t sim_seed = 0;
  bool sim_dump_samples = false;
  sim_spec.add_to(simulate);
  CLI::Option* servers_opt =
      simulate->add_option("-n,--servers", sim_servers, "number of servers");
  CLI::Option* arrivals_opt = simulate->add_option(
      "--arrivals", sim_arrivals, "arrivals per replication (warmup included)");
  CLI::Option* reps_opt = simulate->add_option("--replications", sim_reps,
                                               "independent replications");
  CLI::Option* warmup_opt = simulate->add_option(
      "--warmup", sim_warmup, "fraction of arrivals discarded as warmup");
  CLI::Option* seed_opt =
      simulate->add_option("--seed", sim_seed, "master random seed");
  simulate->add_flag("--dump-samples", sim_dump_samples,
                     "write per-request response samples to samples.csv");
  simulate->add_option("-o,--out-dir", sim_out, "output directory");

  // table1
  CLI::App* table1 = app.add_subcommand(
      "table1",
      "availability study on the built-in example1 parameters: q from 1.0 "
      "down to 0.6, mean-response increase and loss per class");
  SolverFlags table_solver;
  std::string table_out = ".";
  std::string table_format = "csv";
  table_solver.add_to(table1);
  table1->add_option("-o,--out-dir", table_out, "output directory");
  table1->add_option("--format", table_format, "table file format")
      ->check(CLI::IsMember({"csv", "json"}));

  // sweep
  CLI::App* sweep = app.add_subcommand(
      "sweep", "solve a point per value of q or lambda into one table");
  SpecFlags sweep_spec;
  SolverFlags sweep_solver;
  std::string sweep_out = ".";
  std::string sweep_format = "csv";
  std::string sweep_var;
  std::vector<double> sweep_values;
  sweep_spec.add_to(sweep);
  sweep_solver.add_to(sweep);
  CLI::Option* var_opt =
      sweep->add_option("--var", sweep_var, "swept variable")
          ->check(CLI::IsMember({"q", "lambda"}));
  sweep->add_option("--values", sweep_values,
                    "comma-separated sweep values, strictly increasing")
      ->delimiter(',');
  sweep->add_option("-o,--out-dir", sweep_out, "output directory");
  sweep->add_option("--format", sweep_format, "table file format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  return run_with_exit_code(
      [&] {
        if (solve->parsed()) {
          ExperimentSpec spec = solve_spec.resolve();
          solve_solver.apply(spec.solver);
          cmd_solve(spec, solve_out);
        } else if (simulate->parsed()) {
          ExperimentSpec spec = sim_spec.resolve();
          if (servers_opt->count() > 0) spec.simulator.servers = sim_servers;
          if (arrivals_opt->count() > 0) spec.simulator.arrivals = sim_arrivals;
          if (reps_opt->count() > 0) spec.simulator.replications = sim_reps;
          if (warmup_opt->count() > 0) spec.simulator.warmup = sim_warmup;
          if (seed_opt->count() > 0) spec.simulator.seed = sim_seed;
          cmd_simulate(spec, sim_out, sim_dump_samples);
        } else if (table1->parsed()) {
          SolverSettings settings;
          table_solver.apply(settings);
          cmd_table1(settings, table_out, table_format);
        } else {
          ExperimentSpec spec = sweep_spec.resolve();
          sweep_solver.apply(spec.solver);
          SweepVariable var = SweepVariable::none;
          if (var_opt->count() > 0)
            var = sweep_var == "q" ? SweepVariable::q : SweepVariable::lambda;
          cmd_sweep(spec, var, sweep_values, sweep_out, sweep_format);
        }
      },
      std::cerr);
}
