#pragma once

#include <vector>

#include "dsslat/rng.hpp"

namespace dsslat {

// Dense row-major square matrix; phase spaces here are tiny (n <= 8 or so).
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double& operator()(int r, int c) { return a_[static_cast<size_t>(r) * n_ + c]; }
  double operator()(int r, int c) const {
    return a_[static_cast<size_t>(r) * n_ + c];
  }

  bool operator==(const SquareMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<double> a_;
};

// Phase-type distribution PH(alpha, A): the absorption time of a CTMC with
// transient-state generator A started from the row vector alpha. The exit
// rate vector is mu = -A*1. Construction validates alpha and A and rejects
// representations that cannot absorb.
class PhaseType {
 public:
  PhaseType(std::vector<double> alpha, SquareMatrix subgenerator);

  int order() const { return static_cast<int>(alpha_.size()); }

  double pdf(double t) const;   // alpha e^{At} mu
  double cdf(double t) const;
  double ccdf(double t) const;  // alpha e^{At} 1
  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }
  double scv() const;           // variance / mean^2

  // Absorption-time draw by walking the chain.
  double sample(Rng& rng) const;

  // Row vector alpha e^{At}; the sub-distribution over phases at time t.
  std::vector<double> phase_row(double t) const;

  // Advance a phase row by dt (row <- row e^{A dt}). Exact for diagonal A,
  // high-order substepped integration otherwise. Shared by the grid solvers.
  void advance_row(std::vector<double>& row, double dt) const;

  const std::vector<double>& alpha() const { return alpha_; }
  const SquareMatrix& subgenerator() const { return a_; }
  const std::vector<double>& exit_rates() const { return exit_; }
  bool diagonal() const { return diagonal_; }

  bool operator==(const PhaseType&) const = default;

 private:
  std::vector<double> alpha_;
  SquareMatrix a_;
  std::vector<double> exit_;
  bool diagonal_ = false;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

PhaseType make_exponential(double rate);

// Two-phase hyperexponential matched to (mean, scv) with balanced phase
// means (each phase carries half the mean). Only the balanced shape
// f = 0.5 is supported; scv must be >= 1. scv == 1 degenerates to an
// exponential with both phase rates equal.
PhaseType make_hyperexp(double mean, double scv, double f = 0.5);

// Constant startup plus a phase-type remainder: T = shift + Y.
struct ShiftedPhaseType {
  double shift = 0.0;
  PhaseType body;

  double mean() const { return shift + body.mean(); }
  double pdf(double t) const { return t < shift ? 0.0 : body.pdf(t - shift); }
  double ccdf(double t) const {
    return t < shift ? 1.0 : body.ccdf(t - shift);
  }
  double sample(Rng& rng) const { return shift + body.sample(rng); }

  bool operator==(const ShiftedPhaseType&) const = default;
};

ShiftedPhaseType make_shifted(double shift, PhaseType body);

}  // namespace dsslat
