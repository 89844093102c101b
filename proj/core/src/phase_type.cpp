#include "dsslat/phase_type.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "dsslat/errors.hpp"

namespace dsslat {

namespace {

constexpr double kTol = 1e-12;

// Solve M x = b for small dense M by Gaussian elimination with partial
// pivoting. Throws if M is numerically singular.
std::vector<double> solve_linear(SquareMatrix m, std::vector<double> b) {
  const int n = m.size();
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    }
    if (std::abs(m(pivot, col)) < 1e-300) {
      throw ConfigError("phase-type subgenerator is singular; no finite mean");
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(m(col, c), m(pivot, c));
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) m(r, c) -= f * m(col, c);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= m(r, c) * x[c];
    x[r] = s / m(r, r);
  }
  return x;
}

}  // namespace

PhaseType::PhaseType(std::vector<double> alpha, SquareMatrix subgenerator)
    : alpha_(std::move(alpha)), a_(std::move(subgenerator)) {
  const int n = static_cast<int>(alpha_.size());
  if (n == 0) throw ConfigError("phase-type alpha is empty");
  if (a_.size() != n) {
    throw ConfigError("phase-type alpha and subgenerator sizes differ");
  }
  double alpha_sum = 0.0;
  for (double p : alpha_) {
    if (!(p >= -kTol) || !std::isfinite(p)) {
      throw ConfigError("phase-type alpha has a negative entry");
    }
    alpha_sum += p;
  }
  if (std::abs(alpha_sum - 1.0) > 1e-9) {
    throw ConfigError("phase-type alpha does not sum to 1");
  }

  exit_.assign(n, 0.0);
  diagonal_ = true;
  bool can_exit = false;
  for (int r = 0; r < n; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < n; ++c) {
      const double v = a_(r, c);
      if (!std::isfinite(v)) throw ConfigError("phase-type subgenerator has a non-finite entry");
      if (r == c) {
        if (v >= 0.0) throw ConfigError("phase-type subgenerator diagonal must be negative");
      } else {
        if (v < -kTol) throw ConfigError("phase-type subgenerator off-diagonal must be nonnegative");
        if (v > kTol) diagonal_ = false;
      }
      row_sum += v;
    }
    if (row_sum > kTol) {
      throw ConfigError("phase-type subgenerator row sums must be <= 0");
    }
    exit_[r] = std::max(0.0, -row_sum);
    if (exit_[r] > 0.0) can_exit = true;
  }
  if (!can_exit) {
    throw ConfigError("phase-type subgenerator has no exit rate; never absorbs");
  }

  // Moments: E[Y^m] = m! alpha (-A)^{-m} 1.
  SquareMatrix neg(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) neg(r, c) = -a_(r, c);
  std::vector<double> ones(n, 1.0);
  const std::vector<double> y = solve_linear(neg, ones);
  const std::vector<double> z = solve_linear(neg, y);
  mean_ = 0.0;
  second_moment_ = 0.0;
  for (int r = 0; r < n; ++r) {
    mean_ += alpha_[r] * y[r];
    second_moment_ += 2.0 * alpha_[r] * z[r];
  }
}

double PhaseType::scv() const {
  const double var = second_moment_ - mean_ * mean_;
  return var / (mean_ * mean_);
}

void PhaseType::advance_row(std::vector<double>& row, double dt) const {
  const int n = order();
  if (dt == 0.0) return;
  if (diagonal_) {
    for (int r = 0; r < n; ++r) row[r] *= std::exp(a_(r, r) * dt);
    return;
  }
  // Classical 4th-order step on row' = row A, substepped so the local step
  // stays well below the fastest rate in A.
  double max_rate = 0.0;
  for (int r = 0; r < n; ++r) max_rate = std::max(max_rate, -a_(r, r));
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(dt * max_rate * 4.0)));
  const double h = dt / substeps;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto mul = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (int c = 0; c < n; ++c) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += v[r] * a_(r, c);
      out[c] = s;
    }
  };
  for (int s = 0; s < substeps; ++s) {
    mul(row, k1);
    for (int r = 0; r < n; ++r) tmp[r] = row[r] + 0.5 * h * k1[r];
    mul(tmp, k2);
    for (int r = 0; r < n; ++r) tmp[r] = row[r] + 0.5 * h * k2[r];
    mul(tmp, k3);
    for (int r = 0; r < n; ++r) tmp[r] = row[r] + h * k3[r];
    mul(tmp, k4);
    for (int r = 0; r < n; ++r) {
      row[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
    }
  }
}

std::vector<double> PhaseType::phase_row(double t) const {
  std::vector<double> row = alpha_;
  advance_row(row, t);
  return row;
}

double PhaseType::pdf(double t) const {
  if (t < 0.0) return 0.0;
  const std::vector<double> row = phase_row(t);
  double s = 0.0;
  for (int r = 0; r < order(); ++r) s += row[r] * exit_[r];
  return s;
}

double PhaseType::ccdf(double t) const {
  if (t < 0.0) return 1.0;
  const std::vector<double> row = phase_row(t);
  double s = 0.0;
  for (int r = 0; r < order(); ++r) s += row[r];
  return s;
}

double PhaseType::cdf(double t) const { return 1.0 - ccdf(t); }

double PhaseType::sample(Rng& rng) const {
  const int n = order();
  // Pick the entry phase from alpha.
  double u = rng.uniform01();
  int phase = n - 1;
  double acc = 0.0;
  for (int r = 0; r < n; ++r) {
    acc += alpha_[r];
    if (u < acc) {
      phase = r;
      break;
    }
  }
  double t = 0.0;
  while (true) {
    const double hold_rate = -a_(phase, phase);
    t += rng.exponential(hold_rate);
    // Exit with probability exit/hold, otherwise jump to a transient phase.
    double v = rng.uniform01() * hold_rate;
    double cum = exit_[phase];
    if (v < cum) return t;
    int next = phase;
    for (int c = 0; c < n; ++c) {
      if (c == phase) continue;
      cum += a_(phase, c);
      if (v < cum) {
        next = c;
        break;
      }
    }
    phase = next;
  }
}

PhaseType make_exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("exponential rate must be positive");
  }
  SquareMatrix a(1);
  a(0, 0) = -rate;
  return PhaseType({1.0}, a);
}

PhaseType make_hyperexp(double mean, double scv, double f) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw ConfigError("hyperexponential mean must be positive");
  }
  if (std::abs(f - 0.5) > kTol) {
    throw ConfigError("hyperexponential shape f: only balanced means (f = 0.5) is supported");
  }
  if (scv < 1.0 - 1e-9) {
    throw ConfigError("hyperexponential scv must be >= 1");
  }
  const double ratio = std::max(0.0, (scv - 1.0) / (scv + 1.0));
  const double p1 = 0.5 * (1.0 + std::sqrt(ratio));
  const double p2 = 1.0 - p1;
  // Balanced means: p1/mu1 = p2/mu2 = mean/2.
  const double mu1 = 2.0 * p1 / mean;
  const double mu2 = 2.0 * p2 / mean;
  SquareMatrix a(2);
  a(0, 0) = -mu1;
  a(1, 1) = -mu2;
  return PhaseType({p1, p2}, a);
}

ShiftedPhaseType make_shifted(double shift, PhaseType body) {
  if (shift < 0.0 || !std::isfinite(shift)) {
    throw ConfigError("service shift (startup time) must be nonnegative");
  }
  return ShiftedPhaseType{shift, std::move(body)};
}

}  // namespace dsslat
