#pragma once

#include "accel/operators.hpp"

namespace accel::detail {

/// Accumulates an IterationTrace, feeds the observer and detects divergence.
class TraceRecorder {
 public:
  TraceRecorder(const RunControl& control, const AveragedOperator* op)
      : control_(control), op_(op) {}

  /// Records one operator application; `current` is the iterate adopted after it
  /// and `output` the operator value it was built from, when that differs.
  void record(const Vec& current, double step, double residual, double parameter, bool restarted,
              const Vec* output = nullptr) {
    const std::size_t application = trace_.size() + 1;
    if (!current.allFinite() || !std::isfinite(step) || !std::isfinite(residual)) {
      throw DivergedError(application, trace_);
    }
    trace_.step_norms.push_back(step);
    trace_.residuals.push_back(residual);
    trace_.parameters.push_back(parameter);
    trace_.restarts.push_back(restarted);
    if (control_.fixed_point) trace_.distances.push_back(norm(current - *control_.fixed_point));
    if (control_.observer) control_.observer(application, output ? *output : current);
  }

  /// Rejects a non-finite intermediate point before it is recorded.
  void check_finite(const Vec& point) const {
    if (!point.allFinite()) throw DivergedError(trace_.size() + 1, trace_);
  }

  double norm(const Vec& v) const { return op_ ? op_->norm(v) : v.norm(); }

  bool budget_left(std::size_t needed = 1) const {
    return trace_.size() + needed <= control_.budget;
  }
  std::size_t applications() const { return trace_.size(); }
  double tol() const { return control_.tol; }

  IterationTrace& trace() { return trace_; }

  IterationTrace finish(Vec final_point, StopReason stop) {
    trace_.final_point = std::move(final_point);
    trace_.stop = stop;
    return std::move(trace_);
  }

 private:
  const RunControl& control_;
  const AveragedOperator* op_;
  IterationTrace trace_;
};

}  // namespace accel::detail
