#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "accel/common.hpp"

namespace accel {

/// A map on R^N together with its declared averaging constant alpha in (0,1).
///
/// Evaluation is a pure function of the input. An operator may carry a
/// primal readout (the point whose objective is reported, e.g. v for the
/// ADMM meta-variable) and a positive semidefinite metric in which it is
/// averaged; both default to the identity.
class AveragedOperator {
 public:
  using Map = std::function<Vec(const Vec&)>;

  AveragedOperator(Map apply, double alpha, Index dim);

  Vec operator()(const Vec& x) const;

  double alpha() const { return alpha_; }
  Index dim() const { return dim_; }

  AveragedOperator& set_primal(Map readout);
  Vec primal(const Vec& x) const;

  AveragedOperator& set_metric(Mat metric);
  const Mat* metric() const { return metric_.get(); }
  /// Norm induced by the metric (Euclidean without one).
  double norm(const Vec& v) const;
  double squared_norm(const Vec& v) const;

 private:
  Map apply_;
  Map primal_;
  std::shared_ptr<const Mat> metric_;
  double alpha_;
  Index dim_;
};

/// T(x) = R x + d.
struct AffineOperator {
  AffineOperator(Mat R, Vec d, double alpha);

  Vec operator()(const Vec& x) const { return R * x + d; }
  AveragedOperator as_operator() const;
  Index dim() const { return R.rows(); }

  Mat R;
  Vec d;
  double alpha;
};

enum class StopReason { Budget, Converged };

/// One two-step (OIM) or four-step (OAIM) block of an online inertial run.
struct BlockRecord {
  enum class Outcome { Accelerated, Restart, NoAcceleration };
  Outcome outcome = Outcome::NoAcceleration;
  double ratio = 0.0;            ///< c: worst contraction ratio observed in the block
  double residual_before = 0.0;  ///< residual carried into the block
  double residual_end = 0.0;     ///< residual at the block boundary, after any rollback
  double parameter = 0.0;        ///< gamma used inside the block
  double parameter_next = 0.0;   ///< gamma chosen for the next block
  std::size_t last_application = 0;
};

/// Per-application record of a fixed-point run.
///
/// Entry j describes the j-th operator application: the step it produced,
/// the residual ||T(z) - z|| at the point z it was applied to, the scheme
/// parameter in force and whether the application ended in a rollback.
struct IterationTrace {
  std::vector<double> step_norms;
  std::vector<double> residuals;
  std::vector<double> distances;  ///< ||x - xbar|| after each application, when xbar is known
  std::vector<double> parameters;
  std::vector<bool> restarts;
  std::vector<BlockRecord> blocks;
  double initial_residual = 0.0;
  Vec final_point;
  StopReason stop = StopReason::Budget;

  std::size_t size() const { return residuals.size(); }
  std::size_t restart_count() const;
};

/// A non-finite iterate appeared. Carries the trace up to the failure.
class DivergedError : public Error {
 public:
  DivergedError(std::size_t step, IterationTrace partial);
  std::size_t step() const { return step_; }
  const IterationTrace& partial() const { return partial_; }

 private:
  std::size_t step_;
  IterationTrace partial_;
};

/// Called after every application with the operator output it produced. For
/// relaxed steps this is T(x_k) rather than the relaxed iterate; after a
/// rollback it is the restored iterate.
using Observer = std::function<void(std::size_t application, const Vec& output)>;

/// Budget, stopping rule and diagnostics shared by every runner.
struct RunControl {
  std::size_t budget = 100000;  ///< operator applications
  double tol = 1e-12;           ///< stop once the residual is <= tol
  std::optional<Vec> fixed_point;
  Observer observer;
};

/// Krasnoselskii-Mann iteration x_{k+1} = T(x_k).
IterationTrace km_iterate(const AveragedOperator& T, const Vec& x0, const RunControl& control);
IterationTrace km_iterate(const AveragedOperator& T, const Vec& x0, std::size_t max_iters = 100000,
                          double tol = 1e-12);

/// v_k = ||x_{k+1} - x_k|| / ||x_k - x_{k-1}||; nullopt when the denominator vanishes.
std::optional<double> estimate_rate(const IterationTrace& trace, std::size_t k);

/// Least-squares slope of log ||x_{k+1} - x_k|| against k over [first, last].
double log_rate_slope(const IterationTrace& trace, std::size_t first, std::size_t last);

std::vector<std::complex<double>> eigenvalues(const Mat& R);

/// Largest modulus over eigenvalues of R with |lambda - 1| > unit_tol (0 if none).
double spectral_rate(const AffineOperator& A, double unit_tol = 1e-8);

struct EigenDiskCheck {
  bool inside = true;
  double worst_violation = 0.0;  ///< max over eigenvalues of |lambda - (1-alpha)| - alpha
  std::complex<double> worst_eigenvalue;
};

/// Whether every eigenvalue lies in the disk of center 1-alpha and radius alpha.
EigenDiskCheck check_eigen_disk(const AffineOperator& A, double tol = 1e-10);

/// True when d lies in the column space of I - R (Fix T nonempty).
bool has_fixed_point(const AffineOperator& A, double tol = 1e-9);

struct AveragednessCheck {
  bool passed = true;
  double worst_violation = 0.0;  ///< relative to max(1, ||x - y||^2)
};

/// Sampled averagedness test on seeded random pairs with entries N(0, scale^2):
///   ||Tx - Ty||^2 + (1-alpha)/alpha ||(I-T)x - (I-T)y||^2 <= ||x - y||^2 + slack.
/// Uses the operator's metric when it has one. Pairs are evaluated in parallel.
AveragednessCheck check_averagedness(const AveragedOperator& T, std::size_t samples = 100,
                                     std::uint64_t seed = 0, double slack = 1e-8,
                                     double scale = 1.0);
/// Serial reference of check_averagedness; identical result for identical input.
AveragednessCheck check_averagedness_serial(const AveragedOperator& T, std::size_t samples = 100,
                                            std::uint64_t seed = 0, double slack = 1e-8,
                                            double scale = 1.0);

}  // namespace accel
