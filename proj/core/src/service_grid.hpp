#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dsslat/errors.hpp"
#include "dsslat/phase_type.hpp"

namespace dsslat::detail {

// Fragment service survival and density sampled on a uniform grid of step h,
// at both grid nodes and midpoints. Rows of alpha e^{At} are evaluated
// exactly for diagonal generators and by substepped high-order integration
// otherwise; values are cached and extended on demand.
class ServiceGrid {
 public:
  ServiceGrid(const ShiftedPhaseType& service, double step)
      : service_(&service), step_(step) {
    const double shift = service.shift;
    const double s_real = shift / step;
    shift_steps_ = static_cast<int>(std::llround(s_real));
    if (std::abs(shift_steps_ * step - shift) > 1e-9 * std::max(1.0, shift)) {
      throw ConfigError("step must divide every class delta");
    }
  }

  int shift_steps() const { return shift_steps_; }

  // Survival Gbar(m h).
  double survival_node(std::size_t m) {
    if (m < static_cast<std::size_t>(shift_steps_)) return 1.0;
    return survival_half(2 * (m - shift_steps_));
  }

  // Survival Gbar((m + 1/2) h).
  double survival_mid(std::size_t m) {
    if (2 * m + 1 < 2 * static_cast<std::size_t>(shift_steps_)) return 1.0;
    return survival_half(2 * (m - shift_steps_) + 1);
  }

  // Density g(m h); zero before the startup shift.
  double density_node(std::size_t m) {
    if (m < static_cast<std::size_t>(shift_steps_)) return 0.0;
    return density_half(2 * (m - shift_steps_));
  }

 private:
  // Index r counts half-steps of elapsed service time past the shift.
  double survival_half(std::size_t r) {
    ensure(r);
    return surv_[r];
  }
  double density_half(std::size_t r) {
    ensure(r);
    return dens_[r];
  }

  void ensure(std::size_t r) {
    if (r < surv_.size()) return;
    const PhaseType& body = service_->body;
    const int n = body.order();
    if (surv_.empty()) {
      row_ = body.alpha();
      push_current();
    }
    while (surv_.size() <= r) {
      if (body.diagonal()) {
        // Exact: rebuild the row from scratch at each time to avoid
        // accumulating multiplicative rounding.
        const double t = 0.5 * step_ * static_cast<double>(surv_.size());
        for (int p = 0; p < n; ++p) {
          row_[p] = body.alpha()[p] * std::exp(body.subgenerator()(p, p) * t);
        }
      } else {
        body.advance_row(row_, 0.5 * step_);
      }
      push_current();
    }
  }

  void push_current() {
    const PhaseType& body = service_->body;
    double s = 0.0;
    double d = 0.0;
    for (int p = 0; p < body.order(); ++p) {
      s += row_[p];
      d += row_[p] * body.exit_rates()[p];
    }
    surv_.push_back(s);
    dens_.push_back(d);
  }

  const ShiftedPhaseType* service_;
  double step_;
  int shift_steps_ = 0;
  std::vector<double> row_;
  std::vector<double> surv_;   // body ccdf at r * h/2 past the shift
  std::vector<double> dens_;   // body pdf at r * h/2 past the shift
};

}  // namespace dsslat::detail
