#pragma once

#include <functional>
#include <optional>

#include "accel/common.hpp"
#include "accel/operators.hpp"
#include "accel/problems.hpp"

namespace accel {

/// Soft thresholding sign(x_i) max(|x_i| - threshold, 0).
Vec prox_l1(const Vec& x, double threshold);
/// x / (1 + step * weight), the prox of step * (weight/2) ||.||^2.
Vec prox_l2sq(const Vec& x, double weight, double step);

/// prox_{g/L}(x - grad f(x) / L).
Vec prox_grad_apply(const Problem& problem, double lipschitz, const Vec& x);

/// Proximal-gradient operator with step 1/L, declared 2/3-averaged. The
/// problem must outlive the operator.
AveragedOperator make_prox_grad_operator(const Problem& problem,
                                         std::optional<double> lipschitz = {});

/// FISTA on the proximal-gradient operator, t_1 = 1 and
/// t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2. With `restart` the momentum is reset
/// whenever (y_k - x_{k+1})^T (x_{k+1} - x_k) > 0. Trace parameters hold the
/// momentum coefficient used for each step.
IterationTrace fista_run(const Problem& problem, const Vec& x0, const RunControl& control,
                         bool restart = false);

/// Subproblem solvers of ADMM for min f(u) + g(v) s.t. u = v (M = I).
class AdmmSplit {
 public:
  AdmmSplit(const Problem& problem, double rho);

  double rho() const { return rho_; }
  Index dim() const { return dim_; }
  /// argmin_w f(w) + rho/2 ||w - target||^2.
  Vec solve_u(const Vec& target) const { return solve_u_(target); }
  /// argmin_w g(w) + rho/2 ||w - z||^2.
  Vec prox_g(const Vec& z) const;

 private:
  std::function<Vec(const Vec&)> solve_u_;
  Regularizer regularizer_;
  double rho_;
  Index dim_;
};

/// ADMM iterate together with the history the inertial variant needs.
struct AdmmState {
  Vec u;            ///< u_k
  Vec v;            ///< v_k
  Vec lambda;       ///< lambda_k
  Vec prev_lambda;  ///< lambda_{k-1}
  double rho = 1.0;

  /// y_k = lambda_k + rho v_k.
  Vec meta() const { return lambda + rho * v; }
};

/// u_0 = v_0 and lambda_{-1} = lambda_0.
AdmmState admm_init(const AdmmSplit& split, const Vec& v0, const Vec& lambda0);
/// Splits a meta-variable x into v = prox_{g/rho}(x/rho), lambda = x - rho v.
AdmmState admm_from_meta(const AdmmSplit& split, const Vec& meta);

/// One standard ADMM iteration; returns the new state and stores the
/// meta-variable x_{k+1} = lambda_k + rho u_{k+1} in `meta_out` when given.
AdmmState admm_step(const AdmmSplit& split, const AdmmState& state, Vec* meta_out = nullptr);
/// Relaxed ADMM with z = eta u_{k+1} + (1-eta) v_k, eta in (0,2).
AdmmState relaxed_admm_step(const AdmmSplit& split, const AdmmState& state, double eta,
                            Vec* meta_out = nullptr);
/// Inertial ADMM; `meta_out` receives x_{k+1} = lambda_k + rho u_{k+1}. The
/// new state's meta() is y_{k+1} = x_{k+1} + gamma (x_{k+1} - x_k).
AdmmState inertial_admm_step(const AdmmSplit& split, const AdmmState& state, double gamma,
                             Vec* meta_out = nullptr);

/// T_admm on the meta-variable, declared 1/2-averaged; primal readout v.
/// `split` is copied into the operator.
AveragedOperator make_admm_operator(const AdmmSplit& split);

/// Fast ADMM with restart (restart factor 0.999). The trace follows the
/// meta-variable lambda_k + rho v_k; its residual is the combined-residual
/// square root ||x_k - xhat_k||, with xhat the extrapolated meta-variable.
IterationTrace fast_admm_run(const AdmmSplit& split, const Vec& v0, const Vec& lambda0,
                             const RunControl& control);

/// Largest eigenvalue of M^T M by power iteration to relative tolerance rel_tol.
double operator_norm_squared(const Mat& M, double rel_tol = 1e-13);

/// Step sizes and proximal maps of Condat's primal-dual method on
/// f(u) + h(M u), with f the problem's regularizer.
class CondatSplit {
 public:
  /// sigma defaults to 1 / (tau ||M||^2); an explicit sigma must keep sigma tau ||M||^2 <= 1.
  explicit CondatSplit(const Problem& problem, double tau = 0.5,
                       std::optional<double> sigma = std::nullopt);

  double tau() const { return tau_; }
  double sigma() const { return sigma_; }
  double norm_squared() const { return norm_squared_; }
  Index primal_dim() const { return primal_dim_; }
  Index dual_dim() const { return dual_dim_; }

  Vec apply_M(const Vec& u) const;
  Vec apply_Mt(const Vec& lambda) const;
  Vec prox_f(const Vec& u) const;
  /// argmin_w h(w) + sigma/2 ||w - z||^2.
  Vec prox_h(const Vec& z) const { return prox_h_(z); }
  /// [[I/tau, -M^T], [-M, I/sigma]], in which the stacked operator is averaged.
  Mat metric() const;

 private:
  Mat M_;  ///< empty for the identity
  std::function<Vec(const Vec&)> prox_h_;
  Regularizer regularizer_;
  double tau_;
  double sigma_;
  double norm_squared_;
  Index primal_dim_;
  Index dual_dim_;
};

struct CondatState {
  Vec u;
  Vec lambda;

  Vec stacked() const;
  static CondatState from_stacked(const Vec& x, Index primal_dim);
};

CondatState condat_step(const CondatSplit& split, const CondatState& state);

/// Condat's iteration on the stacked vector [u; lambda], declared
/// 1/2-averaged in the metric of CondatSplit::metric(); primal readout u.
AveragedOperator make_condat_operator(const CondatSplit& split);

}  // namespace accel
