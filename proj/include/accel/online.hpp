#pragma once

#include <optional>

#include "accel/common.hpp"
#include "accel/operators.hpp"

namespace accel {

/// Settings of the self-tuning schedulers.
struct OnlineOptions {
  double epsilon = 1e-4;
  /// OIM/OAIM only: use eps_l = epsilon / sqrt(l) with l the number of accelerations so far.
  bool sublinear_epsilon = false;
  /// Keep eta = 1 / gamma = 0 throughout; the run then reproduces km_iterate.
  bool disable_acceleration = false;
  /// OIM/OAIM only: upper bound applied to every gamma the scheduler picks.
  std::optional<double> parameter_cap;
};

/// ORM bookkeeping; eta and iterate history for one run.
struct OrmState {
  double eta = 1.0;       ///< eta_k, used for the step that produced x_k
  double eta_prev = 1.0;  ///< eta_{k-1}
  Vec x;                  ///< x_k
  double last_step = 0.0;      ///< ||x_k - x_{k-1}||
  double previous_step = 0.0;  ///< ||x_{k-1} - x_{k-2}||
  double epsilon = 1e-4;
  double alpha = 0.5;
};

/// Next ORM relaxation parameter from the clamped rate estimate v in [0,1]:
///   (2 - eps) eta / (2 alpha eta + 1 - v) + eps / (4 alpha),
/// clamped to [eps/(4 alpha), 1/alpha - eps/(4 alpha)].
double orm_next_eta(double alpha, double epsilon, double eta, double v);

/// Virtual dominant eigenvalue behind an inertial two-step rate v at inertia gamma:
/// v^2 / (gamma v - gamma + v).
double oim_lambda_estimate(double v, double gamma);
/// Same for an alternated cycle with two-step contraction v:
/// (gamma + sqrt(gamma^2 + 4 gamma v + 4 v)) / (2 (gamma + 1)).
double oaim_lambda_estimate(double v, double gamma);

/// Online Relaxation Method. Parameters in the trace are eta per application.
IterationTrace orm_run(const AveragedOperator& T, const Vec& x0, const OnlineOptions& options,
                       const RunControl& control);

/// State of OIM between two-step blocks.
struct OimState {
  Vec x_prev;  ///< x_{2k-1}
  Vec x;       ///< x_{2k}
  Vec y;       ///< y_{2k}
  double gamma = 0.0;
  double residual = 0.0;  ///< ||x_{2k} - y_{2k}||
  std::size_t accelerations = 0;
};

/// Online Inertia Method. Trace blocks record each two-step block.
IterationTrace oim_run(const AveragedOperator& T, const Vec& x1, const OnlineOptions& options,
                       const RunControl& control);

/// State of OAIM between four-step blocks.
struct OaimState {
  Vec x_prev;  ///< x_{4k-1}
  Vec x;       ///< x_{4k}
  double gamma = 0.0;
  double residual = 0.0;  ///< ||x_{4k} - x_{4k-1}||
  std::size_t accelerations = 0;
};

/// Online Alternated Inertia Method. Trace blocks record each four-step block.
IterationTrace oaim_run(const AveragedOperator& T, const Vec& x3, const OnlineOptions& options,
                        const RunControl& control);

}  // namespace accel
