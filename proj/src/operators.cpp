#include "accel/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "accel/rng.hpp"
#include "recorder.hpp"

namespace accel {

AveragedOperator::AveragedOperator(Map apply, double alpha, Index dim)
    : apply_(std::move(apply)), alpha_(alpha), dim_(dim) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw AdmissibilityError("averaging constant must lie in (0,1), got " + std::to_string(alpha));
  }
  if (dim <= 0) throw AdmissibilityError("operator dimension must be positive");
}

Vec AveragedOperator::operator()(const Vec& x) const {
  if (x.size() != dim_) {
    throw Error("operator of dimension " + std::to_string(dim_) + " applied to a point of size " +
                std::to_string(x.size()));
  }
  Vec out = apply_(x);
  if (out.size() != dim_) throw Error("operator output has the wrong dimension");
  return out;
}

AveragedOperator& AveragedOperator::set_primal(Map readout) {
  primal_ = std::move(readout);
  return *this;
}

Vec AveragedOperator::primal(const Vec& x) const { return primal_ ? primal_(x) : x; }

AveragedOperator& AveragedOperator::set_metric(Mat metric) {
  if (metric.rows() != dim_ || metric.cols() != dim_) throw Error("metric has the wrong shape");
  metric_ = std::make_shared<const Mat>(std::move(metric));
  return *this;
}

double AveragedOperator::squared_norm(const Vec& v) const {
  if (!metric_) return v.squaredNorm();
  return std::max(0.0, v.dot(*metric_ * v));
}

double AveragedOperator::norm(const Vec& v) const { return std::sqrt(squared_norm(v)); }

AffineOperator::AffineOperator(Mat R_, Vec d_, double alpha_)
    : R(std::move(R_)), d(std::move(d_)), alpha(alpha_) {
  if (R.rows() != R.cols()) throw Error("affine operator: R must be square");
  if (d.size() != R.rows()) throw Error("affine operator: d has the wrong length");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw AdmissibilityError("averaging constant must lie in (0,1)");
  }
}

AveragedOperator AffineOperator::as_operator() const {
  return AveragedOperator([R = R, d = d](const Vec& x) -> Vec { return R * x + d; }, alpha,
                          R.rows());
}

std::size_t IterationTrace::restart_count() const {
  return static_cast<std::size_t>(std::count(restarts.begin(), restarts.end(), true));
}

DivergedError::DivergedError(std::size_t step, IterationTrace partial)
    : Error("iteration diverged: non-finite iterate at step " + std::to_string(step)),
      step_(step),
      partial_(std::move(partial)) {}

IterationTrace km_iterate(const AveragedOperator& T, const Vec& x0, const RunControl& control) {
  if (control.budget < 1) throw AdmissibilityError("km_iterate needs max_iters >= 1");
  if (control.tol < 0.0) throw AdmissibilityError("km_iterate needs tol >= 0");
  detail::TraceRecorder rec(control, &T);
  Vec x = x0;
  rec.check_finite(x);
  while (rec.budget_left()) {
    Vec next = T(x);
    const double residual = rec.norm(next - x);
    x = std::move(next);
    rec.record(x, residual, residual, 1.0, false);
    if (residual <= control.tol) return rec.finish(std::move(x), StopReason::Converged);
  }
  return rec.finish(std::move(x), StopReason::Budget);
}

IterationTrace km_iterate(const AveragedOperator& T, const Vec& x0, std::size_t max_iters,
                          double tol) {
  RunControl control;
  control.budget = max_iters;
  control.tol = tol;
  return km_iterate(T, x0, control);
}

std::optional<double> estimate_rate(const IterationTrace& trace, std::size_t k) {
  if (k < 1 || k >= trace.step_norms.size()) {
    throw std::out_of_range("estimate_rate: index outside the recorded steps");
  }
  const double denominator = trace.step_norms[k - 1];
  if (denominator == 0.0) return std::nullopt;
  return trace.step_norms[k] / denominator;
}

double log_rate_slope(const IterationTrace& trace, std::size_t first, std::size_t last) {
  if (last >= trace.step_norms.size() || first >= last) {
    throw std::out_of_range("log_rate_slope: invalid window");
  }
  const double count = static_cast<double>(last - first + 1);
  double mean_k = 0.0, mean_y = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    if (!(trace.step_norms[k] > 0.0)) throw AnalysisError("log_rate_slope: zero step norm");
    mean_k += static_cast<double>(k);
    mean_y += std::log(trace.step_norms[k]);
  }
  mean_k /= count;
  mean_y /= count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = first; k <= last; ++k) {
    const double dk = static_cast<double>(k) - mean_k;
    sxy += dk * (std::log(trace.step_norms[k]) - mean_y);
    sxx += dk * dk;
  }
  return sxy / sxx;
}

std::vector<std::complex<double>> eigenvalues(const Mat& R) {
  Eigen::EigenSolver<Mat> solver(R, false);
  if (solver.info() != Eigen::Success) throw AnalysisError("eigenvalue computation failed");
  const auto& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

double spectral_rate(const AffineOperator& A, double unit_tol) {
  double rate = 0.0;
  for (const auto& lambda : eigenvalues(A.R)) {
    if (std::abs(lambda - 1.0) > unit_tol) rate = std::max(rate, std::abs(lambda));
  }
  return rate;
}

EigenDiskCheck check_eigen_disk(const AffineOperator& A, double tol) {
  EigenDiskCheck result;
  result.worst_violation = -std::numeric_limits<double>::infinity();
  const double center = 1.0 - A.alpha;
  for (const auto& lambda : eigenvalues(A.R)) {
    const double violation = std::abs(lambda - center) - A.alpha;
    if (violation > result.worst_violation) {
      result.worst_violation = violation;
      result.worst_eigenvalue = lambda;
    }
  }
  result.inside = result.worst_violation <= tol;
  return result;
}

bool has_fixed_point(const AffineOperator& A, double tol) {
  const Mat gap = Mat::Identity(A.dim(), A.dim()) - A.R;
  const Vec x = gap.completeOrthogonalDecomposition().solve(A.d);
  return (gap * x - A.d).norm() <= tol * std::max(1.0, A.d.norm());
}

namespace {

double averagedness_violation(const AveragedOperator& T, std::size_t sample, std::uint64_t seed,
                              double scale) {
  SplitMix64 rng(seed ^ (static_cast<std::uint64_t>(sample + 1) * 0xD1B54A32D192ED03ULL));
  Vec x(T.dim()), y(T.dim());
  for (Index i = 0; i < T.dim(); ++i) x[i] = scale * rng.normal();
  for (Index i = 0; i < T.dim(); ++i) y[i] = scale * rng.normal();
  const Vec tx = T(x);
  const Vec ty = T(y);
  const double a = T.alpha();
  const double lhs = T.squared_norm(tx - ty) + (1.0 - a) / a * T.squared_norm((x - tx) - (y - ty));
  const double rhs = T.squared_norm(x - y);
  return (lhs - rhs) / std::max(1.0, rhs);
}

}  // namespace

AveragednessCheck check_averagedness(const AveragedOperator& T, std::size_t samples,
                                     std::uint64_t seed, double slack, double scale) {
  std::vector<double> violations(samples);
  const auto n = static_cast<std::ptrdiff_t>(samples);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    violations[static_cast<std::size_t>(s)] =
        averagedness_violation(T, static_cast<std::size_t>(s), seed, scale);
  }
  AveragednessCheck result;
  result.worst_violation = -std::numeric_limits<double>::infinity();
  for (double v : violations) result.worst_violation = std::max(result.worst_violation, v);
  result.passed = result.worst_violation <= slack;
  return result;
}

AveragednessCheck check_averagedness_serial(const AveragedOperator& T, std::size_t samples,
                                            std::uint64_t seed, double slack, double scale) {
  AveragednessCheck result;
  result.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    result.worst_violation =
        std::max(result.worst_violation, averagedness_violation(T, s, seed, scale));
  }
  result.passed = result.worst_violation <= slack;
  return result;
}

}  // namespace accel
