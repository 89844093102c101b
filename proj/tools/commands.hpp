#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config_io.hpp"

namespace dsslat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUnstable = 3;
inline constexpr int kExitUnconverged = 4;

// Runs body and maps the model/solver exception taxonomy onto the exit-code
// contract, printing the reason to err.
int run_with_exit_code(const std::function<void()>& body, std::ostream& err);

// Solves the workload fixed point and writes workload.csv,
// response_<label>.csv per class, summary.json, config_echo.json.
void cmd_solve(const ExperimentSpec& spec, const std::string& out_dir);

// Runs the finite-system simulation and writes sim_summary.json,
// config_echo.json, and (optionally) samples.csv with one row per served
// request: class label, response time.
void cmd_simulate(const ExperimentSpec& spec, const std::string& out_dir,
                  bool dump_samples);

// Availability study on the built-in example1 parameters: q from 1.0 down
// to 0.6 in steps of 0.05, mean-response percentage increase relative to
// q = 1 and loss probability per class. Writes table1.csv or table1.json.
void cmd_table1(const SolverSettings& solver, const std::string& out_dir,
                const std::string& format);

// Solves one point per sweep value (concurrently) and writes a single
// sweep.csv or sweep.json merged in value order, plus config_echo.json.
// var == none falls back to the spec's sweep block. Unstable points are
// flagged in a status column; the run continues.
void cmd_sweep(const ExperimentSpec& spec, SweepVariable var,
               std::vector<double> values, const std::string& out_dir,
               const std::string& format);

}  // namespace dsslat::cli
