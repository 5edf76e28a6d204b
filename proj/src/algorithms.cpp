#include "accel/algorithms.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "recorder.hpp"

namespace accel {

Vec prox_l1(const Vec& x, double threshold) {
  if (!(threshold >= 0.0)) throw AdmissibilityError("soft-threshold level must be nonnegative");
  return x.array().sign() * (x.array().abs() - threshold).max(0.0);
}

Vec prox_l2sq(const Vec& x, double weight, double step) {
  if (!(weight >= 0.0 && step >= 0.0)) {
    throw AdmissibilityError("prox_l2sq needs nonnegative weight and step");
  }
  return x / (1.0 + step * weight);
}

Vec prox_grad_apply(const Problem& problem, double lipschitz, const Vec& x) {
  if (!(lipschitz > 0.0)) throw AdmissibilityError("Lipschitz constant must be positive");
  const Vec gradient = problem.smooth_gradient(x);
  if (!gradient.allFinite()) throw Error("non-finite gradient in proximal-gradient step");
  return problem.regularizer().prox(x - gradient / lipschitz, 1.0 / lipschitz);
}

AveragedOperator make_prox_grad_operator(const Problem& problem, std::optional<double> lipschitz) {
  const double L = lipschitz ? *lipschitz : problem.lipschitz();
  if (!(L > 0.0)) throw AdmissibilityError("Lipschitz constant must be positive");
  return AveragedOperator(
      [&problem, L](const Vec& x) -> Vec { return prox_grad_apply(problem, L, x); }, 2.0 / 3.0,
      problem.dim());
}

IterationTrace fista_run(const Problem& problem, const Vec& x0, const RunControl& control,
                         bool restart) {
  if (control.budget < 1) throw AdmissibilityError("FISTA needs a budget of at least 1");
  const double L = problem.lipschitz();
  detail::TraceRecorder rec(control, nullptr);
  rec.check_finite(x0);
  Vec x = x0;
  Vec y = x0;
  double t = 1.0;
  double momentum = 0.0;
  while (rec.budget_left()) {
    Vec next = prox_grad_apply(problem, L, y);
    const double residual = (next - y).norm();
    if (rec.applications() == 0) rec.trace().initial_residual = residual;
    const double step = (next - x).norm();
    const double used = momentum;
    bool restarted = false;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (restart && (y - next).dot(next - x) > 0.0) {
      restarted = true;
      t = 1.0;
      momentum = 0.0;
      y = next;
    } else {
      momentum = (t - 1.0) / t_next;
      y = next + momentum * (next - x);
      t = t_next;
    }
    x = std::move(next);
    rec.record(x, step, residual, used, restarted);
    if (residual <= control.tol) return rec.finish(std::move(x), StopReason::Converged);
  }
  return rec.finish(std::move(x), StopReason::Budget);
}

// ----------------------------------------------------------------- ADMM

AdmmSplit::AdmmSplit(const Problem& problem, double rho)
    : solve_u_(problem.smooth_prox_solver(rho)),
      regularizer_(problem.regularizer()),
      rho_(rho),
      dim_(problem.dim()) {}

Vec AdmmSplit::prox_g(const Vec& z) const { return regularizer_.prox(z, 1.0 / rho_); }

AdmmState admm_init(const AdmmSplit& split, const Vec& v0, const Vec& lambda0) {
  if (v0.size() != split.dim() || lambda0.size() != split.dim()) {
    throw Error("ADMM initial point has the wrong dimension");
  }
  return AdmmState{v0, v0, lambda0, lambda0, split.rho()};
}

AdmmState admm_from_meta(const AdmmSplit& split, const Vec& meta) {
  Vec v = split.prox_g(meta / split.rho());
  Vec lambda = meta - split.rho() * v;
  return admm_init(split, v, lambda);
}

AdmmState admm_step(const AdmmSplit& split, const AdmmState& s, Vec* meta_out) {
  const double rho = split.rho();
  Vec u = split.solve_u(s.v - s.lambda / rho);
  Vec v = split.prox_g(u + s.lambda / rho);
  Vec lambda = s.lambda + rho * (u - v);
  if (meta_out) *meta_out = s.lambda + rho * u;
  return AdmmState{std::move(u), std::move(v), std::move(lambda), s.lambda, rho};
}

AdmmState relaxed_admm_step(const AdmmSplit& split, const AdmmState& s, double eta,
                            Vec* meta_out) {
  if (!(eta > 0.0 && eta < 2.0)) throw AdmissibilityError("relaxed ADMM needs eta in (0,2)");
  const double rho = split.rho();
  Vec u = split.solve_u(s.v - s.lambda / rho);
  const Vec z = eta * u + (1.0 - eta) * s.v;
  Vec v = split.prox_g(z + s.lambda / rho);
  Vec lambda = s.lambda + rho * (z - v);
  AdmmState next{std::move(u), std::move(v), std::move(lambda), s.lambda, rho};
  if (meta_out) *meta_out = next.meta();
  return next;
}

AdmmState inertial_admm_step(const AdmmSplit& split, const AdmmState& s, double gamma,
                             Vec* meta_out) {
  if (!(gamma >= 0.0)) throw AdmissibilityError("inertial ADMM needs gamma >= 0");
  const double rho = split.rho();
  Vec u = split.solve_u(s.v - s.lambda / rho);
  const Vec momentum = (u - s.u) + (s.lambda - s.prev_lambda) / rho;
  Vec v = split.prox_g(u + s.lambda / rho + gamma * momentum);
  Vec lambda = s.lambda + rho * (u - v) + gamma * rho * momentum;
  if (meta_out) *meta_out = s.lambda + rho * u;
  return AdmmState{std::move(u), std::move(v), std::move(lambda), s.lambda, rho};
}

AveragedOperator make_admm_operator(const AdmmSplit& split) {
  AveragedOperator T(
      [split](const Vec& x) -> Vec {
        const double rho = split.rho();
        const Vec v = split.prox_g(x / rho);
        const Vec lambda = x - rho * v;
        return lambda + rho * split.solve_u(v - lambda / rho);
      },
      0.5, split.dim());
  T.set_primal([split](const Vec& x) -> Vec { return split.prox_g(x / split.rho()); });
  return T;
}

IterationTrace fast_admm_run(const AdmmSplit& split, const Vec& v0, const Vec& lambda0,
                             const RunControl& control) {
  constexpr double kRestartFactor = 0.999;
  if (control.budget < 1) throw AdmissibilityError("Fast ADMM needs a budget of at least 1");
  const double rho = split.rho();
  detail::TraceRecorder rec(control, nullptr);
  Vec v = v0, lambda = lambda0;
  Vec v_prev = v0, lambda_prev = lambda0;
  Vec v_hat = v0, lambda_hat = lambda0;
  double t = 1.0;
  double combined_prev = std::numeric_limits<double>::infinity();
  double momentum = 0.0;
  Vec meta_prev = lambda + rho * v;
  while (rec.budget_left()) {
    const Vec u = split.solve_u(v_hat - lambda_hat / rho);
    Vec v_new = split.prox_g(u + lambda_hat / rho);
    Vec lambda_new = lambda_hat + rho * (u - v_new);
    const double combined =
        (lambda_new - lambda_hat).squaredNorm() / rho + rho * (v_new - v_hat).squaredNorm();
    Vec meta = lambda_new + rho * v_new;
    const double residual = (meta - (lambda_hat + rho * v_hat)).norm();
    if (rec.applications() == 0) rec.trace().initial_residual = residual;
    const double used = momentum;

    v_prev = std::move(v);
    lambda_prev = std::move(lambda);
    v = std::move(v_new);
    lambda = std::move(lambda_new);
    bool restarted = false;
    if (combined < kRestartFactor * combined_prev) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      momentum = (t - 1.0) / t_next;
      v_hat = v + momentum * (v - v_prev);
      lambda_hat = lambda + momentum * (lambda - lambda_prev);
      t = t_next;
      combined_prev = combined;
    } else {
      restarted = true;
      t = 1.0;
      momentum = 0.0;
      v_hat = v_prev;
      lambda_hat = lambda_prev;
      combined_prev /= kRestartFactor;
    }
    const double step = (meta - meta_prev).norm();
    meta_prev = meta;
    rec.record(meta, step, residual, used, restarted);
    if (residual <= control.tol) return rec.finish(std::move(meta), StopReason::Converged);
  }
  return rec.finish(std::move(meta_prev), StopReason::Budget);
}

// --------------------------------------------------------------- Condat

double operator_norm_squared(const Mat& M, double rel_tol) {
  if (M.size() == 0) throw Error("operator_norm_squared of an empty matrix");
  Vec x = Vec::Ones(M.cols()) / std::sqrt(static_cast<double>(M.cols()));
  double estimate = 0.0;
  constexpr int kMaxIterations = 100000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vec w = M.transpose() * (M * x);
    const double next = x.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    x = w / norm;
    if (std::abs(next - estimate) <= rel_tol * std::abs(next)) return next;
    estimate = next;
  }
  throw AnalysisError("power iteration did not reach its tolerance");
}

CondatSplit::CondatSplit(const Problem& problem, double tau, std::optional<double> sigma)
    : regularizer_(problem.regularizer()), tau_(tau), primal_dim_(problem.dim()) {
  if (!(tau > 0.0)) throw ConfigError("Condat step tau must be positive");
  PrimalDualSplit pd = problem.primal_dual_split();
  M_ = std::move(pd.M);
  if (M_.size() == 0) {
    norm_squared_ = 1.0;
    dual_dim_ = primal_dim_;
  } else {
    if (M_.cols() != primal_dim_) throw Error("primal-dual map has the wrong width");
    norm_squared_ = operator_norm_squared(M_);
    dual_dim_ = M_.rows();
  }
  sigma_ = sigma ? *sigma : 1.0 / (tau_ * norm_squared_);
  if (!(sigma_ > 0.0) || sigma_ * tau_ * norm_squared_ > 1.0 + 1e-12) {
    throw ConfigError("Condat steps need sigma > 0 and sigma tau ||M||^2 <= 1");
  }
  prox_h_ = pd.make_prox_h(sigma_);
}

Vec CondatSplit::apply_M(const Vec& u) const { return M_.size() == 0 ? u : Vec(M_ * u); }

Vec CondatSplit::apply_Mt(const Vec& lambda) const {
  return M_.size() == 0 ? lambda : Vec(M_.transpose() * lambda);
}

Vec CondatSplit::prox_f(const Vec& u) const { return regularizer_.prox(u, tau_); }

Mat CondatSplit::metric() const {
  const Index n = primal_dim_, m = dual_dim_;
  Mat P = Mat::Zero(n + m, n + m);
  P.topLeftCorner(n, n).diagonal().setConstant(1.0 / tau_);
  P.bottomRightCorner(m, m).diagonal().setConstant(1.0 / sigma_);
  const Mat M = M_.size() == 0 ? Mat(Mat::Identity(m, n)) : M_;
  P.bottomLeftCorner(m, n) = -M;
  P.topRightCorner(n, m) = -M.transpose();
  return P;
}

Vec CondatState::stacked() const {
  Vec x(u.size() + lambda.size());
  x << u, lambda;
  return x;
}

CondatState CondatState::from_stacked(const Vec& x, Index primal_dim) {
  if (primal_dim < 0 || primal_dim > x.size()) throw Error("stacked vector too short");
  return CondatState{x.head(primal_dim), x.tail(x.size() - primal_dim)};
}

CondatState condat_step(const CondatSplit& split, const CondatState& s) {
  if (s.u.size() != split.primal_dim() || s.lambda.size() != split.dual_dim()) {
    throw Error("Condat state has the wrong dimension");
  }
  const double tau = split.tau();
  const double sigma = split.sigma();
  Vec u = split.prox_f(s.u - tau * split.apply_Mt(s.lambda));
  const Vec mapped = split.apply_M(2.0 * u - s.u);
  Vec lambda = s.lambda + sigma * mapped - sigma * split.prox_h(s.lambda / sigma + mapped);
  return CondatState{std::move(u), std::move(lambda)};
}

AveragedOperator make_condat_operator(const CondatSplit& split) {
  const Index n = split.primal_dim();
  AveragedOperator T(
      [split, n](const Vec& x) -> Vec {
        return condat_step(split, CondatState::from_stacked(x, n)).stacked();
      },
      0.5, n + split.dual_dim());
  T.set_metric(split.metric());
  T.set_primal([n](const Vec& x) -> Vec { return x.head(n); });
  return T;
}

}  // namespace accel
