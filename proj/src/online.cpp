#include "accel/online.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recorder.hpp"

namespace accel {

namespace {

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && std::isfinite(epsilon))) {
    throw AdmissibilityError("online schedulers need epsilon > 0");
  }
}

double current_epsilon(const OnlineOptions& options, std::size_t accelerations) {
  if (!options.sublinear_epsilon || accelerations == 0) return options.epsilon;
  return options.epsilon / std::sqrt(static_cast<double>(accelerations));
}

double capped(const OnlineOptions& options, double gamma) {
  return options.parameter_cap ? std::min(gamma, *options.parameter_cap) : gamma;
}

// numerator / denominator; a vanishing denominator sets `degenerate`.
double ratio(double numerator, double denominator, bool& degenerate) {
  if (!(denominator > 0.0)) {
    degenerate = true;
    return 0.0;
  }
  return numerator / denominator;
}

}  // namespace

double orm_next_eta(double alpha, double epsilon, double eta, double v) {
  const double lower = epsilon / (4.0 * alpha);
  const double upper = 1.0 / alpha - epsilon / (4.0 * alpha);
  const double clamped_v = std::clamp(v, 0.0, 1.0);
  const double next = (2.0 - epsilon) * eta / (2.0 * alpha * eta + 1.0 - clamped_v) + lower;
  return std::clamp(next, lower, upper);
}

double oim_lambda_estimate(double v, double gamma) { return v * v / (gamma * v - gamma + v); }

double oaim_lambda_estimate(double v, double gamma) {
  return (gamma + std::sqrt(gamma * gamma + 4.0 * gamma * v + 4.0 * v)) / (2.0 * (gamma + 1.0));
}

IterationTrace orm_run(const AveragedOperator& T, const Vec& x0, const OnlineOptions& options,
                       const RunControl& control) {
  const double alpha = T.alpha();
  require_epsilon(options.epsilon);
  if (options.epsilon > 2.0 * std::min(alpha, 1.0 - alpha)) {
    throw AdmissibilityError("ORM needs epsilon <= 2 min(alpha, 1 - alpha) = " +
                             std::to_string(2.0 * std::min(alpha, 1.0 - alpha)));
  }
  if (control.budget < 2) throw AdmissibilityError("ORM needs a budget of at least 2");

  detail::TraceRecorder rec(control, &T);
  rec.check_finite(x0);
  OrmState s;
  s.alpha = alpha;
  s.epsilon = options.epsilon;
  s.x = x0;

  // Two unrelaxed steps (eta_1 = eta_2 = 1) so that v_k has a full history.
  for (int warmup = 0; warmup < 2; ++warmup) {
    Vec next = T(s.x);
    const double residual = rec.norm(next - s.x);
    if (warmup == 0) rec.trace().initial_residual = residual;
    s.previous_step = s.last_step;
    s.last_step = residual;
    s.x = std::move(next);
    rec.record(s.x, residual, residual, 1.0, false);
    if (residual <= control.tol) return rec.finish(std::move(s.x), StopReason::Converged);
  }

  while (rec.budget_left()) {
    if (!(s.previous_step > 0.0)) return rec.finish(std::move(s.x), StopReason::Converged);
    double eta_next = 1.0;
    if (!options.disable_acceleration) {
      const double v = s.eta_prev * s.last_step / (s.eta * s.previous_step);
      eta_next = orm_next_eta(alpha, s.epsilon, s.eta, v);
    }
    const Vec image = T(s.x);
    const double residual = rec.norm(image - s.x);
    Vec next = image + (eta_next - 1.0) * (image - s.x);
    const double step = rec.norm(next - s.x);
    s.eta_prev = s.eta;
    s.eta = eta_next;
    s.previous_step = s.last_step;
    s.last_step = step;
    s.x = std::move(next);
    rec.record(s.x, step, residual, eta_next, false, &image);
    if (residual <= control.tol) return rec.finish(std::move(s.x), StopReason::Converged);
  }
  return rec.finish(std::move(s.x), StopReason::Budget);
}

IterationTrace oim_run(const AveragedOperator& T, const Vec& x1, const OnlineOptions& options,
                       const RunControl& control) {
  require_epsilon(options.epsilon);
  if (control.budget < 4) throw AdmissibilityError("OIM needs a budget of at least 4");

  detail::TraceRecorder rec(control, &T);
  rec.check_finite(x1);
  OimState s;
  s.y = x1;
  s.x_prev = x1;
  s.x = T(x1);
  s.residual = rec.norm(s.x - s.y);
  rec.trace().initial_residual = s.residual;
  rec.record(s.x, s.residual, s.residual, 0.0, false);
  if (s.residual <= control.tol) return rec.finish(std::move(s.x), StopReason::Converged);

  while (rec.budget_left(2)) {
    const double gamma = s.gamma;
    Vec y3 = s.x + gamma * (s.x - s.x_prev);
    rec.check_finite(y3);
    Vec x3 = T(y3);
    const double r3 = rec.norm(x3 - y3);
    const double d2 = rec.norm(x3 - s.x);
    rec.record(x3, d2, r3, gamma, false);

    Vec y4 = x3 + gamma * (x3 - s.x);
    rec.check_finite(y4);
    Vec x4 = T(y4);
    const double r4 = rec.norm(x4 - y4);
    const double d3 = rec.norm(x4 - x3);
    const double d1 = rec.norm(s.x - s.x_prev);

    bool degenerate = false;
    const double c = std::max(ratio(r4, r3, degenerate), ratio(r3, s.residual, degenerate));
    const double eps = current_epsilon(options, s.accelerations);

    BlockRecord block;
    block.ratio = c;
    block.residual_before = s.residual;
    block.parameter = gamma;

    if (degenerate) {
      block.residual_end = r4;
      rec.record(x4, d3, r4, gamma, false);
      block.last_application = rec.applications();
      rec.trace().blocks.push_back(block);
      return rec.finish(std::move(x4), StopReason::Converged);
    }

    double gamma_next = 0.0;
    bool restart = false;
    if (options.disable_acceleration) {
      block.outcome = BlockRecord::Outcome::NoAcceleration;
    } else if (c <= 1.0 - eps) {
      block.outcome = BlockRecord::Outcome::Accelerated;
      const double v =
          std::sqrt(ratio(d3 * d3 + d2 * d2, d2 * d2 + d1 * d1, degenerate));
      const double lambda = std::min(oim_lambda_estimate(v, gamma), 1.0 - eps);
      if (!degenerate && std::isfinite(lambda) && lambda > 0.0) {
        const double root = 1.0 - std::sqrt(1.0 - lambda);
        gamma_next = capped(options, std::max(0.0, root * root / lambda));
      }
      ++s.accelerations;
    } else if (gamma > 0.0) {
      block.outcome = BlockRecord::Outcome::Restart;
      restart = true;
    } else {
      block.outcome = BlockRecord::Outcome::NoAcceleration;
    }

    block.parameter_next = gamma_next;
    s.gamma = gamma_next;
    double residual_now = r4;
    if (restart) {
      // Roll back to (x_{2k-1}, x_{2k}, y_{2k}); the state already holds it.
      rec.record(s.x, rec.norm(s.x - x3), s.residual, gamma, true);
      residual_now = s.residual;
    } else {
      rec.record(x4, d3, r4, gamma, false);
      s.x_prev = std::move(x3);
      s.x = std::move(x4);
      s.y = std::move(y4);
      s.residual = r4;
    }
    block.residual_end = residual_now;
    block.last_application = rec.applications();
    rec.trace().blocks.push_back(block);
    if (!restart && (r3 <= control.tol || r4 <= control.tol)) {
      return rec.finish(std::move(s.x), StopReason::Converged);
    }
  }
  return rec.finish(std::move(s.x), StopReason::Budget);
}

IterationTrace oaim_run(const AveragedOperator& T, const Vec& x3, const OnlineOptions& options,
                        const RunControl& control) {
  require_epsilon(options.epsilon);
  if (control.budget < 8) throw AdmissibilityError("OAIM needs a budget of at least 8");

  detail::TraceRecorder rec(control, &T);
  rec.check_finite(x3);
  OaimState s;
  s.x_prev = x3;
  s.x = T(x3);
  s.residual = rec.norm(s.x - s.x_prev);
  rec.trace().initial_residual = s.residual;
  rec.record(s.x, s.residual, s.residual, 0.0, false);
  if (s.residual <= control.tol) return rec.finish(std::move(s.x), StopReason::Converged);

  while (rec.budget_left(4)) {
    const double gamma = s.gamma;

    Vec y1 = s.x + gamma * (s.x - s.x_prev);
    rec.check_finite(y1);
    Vec p1 = T(y1);
    rec.record(p1, rec.norm(p1 - s.x), rec.norm(p1 - y1), gamma, false);

    Vec p2 = T(p1);
    const double plain_first = rec.norm(p2 - p1);
    rec.record(p2, plain_first, plain_first, gamma, false);

    Vec y3 = p2 + gamma * (p2 - p1);
    rec.check_finite(y3);
    Vec p3 = T(y3);
    rec.record(p3, rec.norm(p3 - p2), rec.norm(p3 - y3), gamma, false);

    Vec p4 = T(p3);
    const double plain_second = rec.norm(p4 - p3);

    bool degenerate = false;
    const double c = std::max(ratio(plain_second, plain_first, degenerate),
                              ratio(plain_first, s.residual, degenerate));
    const double eps = current_epsilon(options, s.accelerations);

    BlockRecord block;
    block.ratio = c;
    block.residual_before = s.residual;
    block.parameter = gamma;

    if (degenerate) {
      rec.record(p4, plain_second, plain_second, gamma, false);
      block.residual_end = plain_second;
      block.last_application = rec.applications();
      rec.trace().blocks.push_back(block);
      return rec.finish(std::move(p4), StopReason::Converged);
    }

    double gamma_next = 0.0;
    bool restart = false;
    if (options.disable_acceleration) {
      block.outcome = BlockRecord::Outcome::NoAcceleration;
    } else if (c <= 1.0 - eps) {
      block.outcome = BlockRecord::Outcome::Accelerated;
      const double v = ratio(rec.norm(p4 - p2), rec.norm(p2 - s.x), degenerate);
      const double lambda = std::min(oaim_lambda_estimate(v, gamma), 1.0 - eps);
      if (!degenerate && std::isfinite(lambda) && lambda > 0.0) {
        const double g = (2.0 * lambda * lambda + (std::sqrt(2.0) - 1.0) * lambda) /
                         (2.0 * lambda * (1.0 - lambda) + 0.5);
        gamma_next = capped(options, std::max(0.0, g));
      }
      ++s.accelerations;
    } else if (gamma > 0.0) {
      block.outcome = BlockRecord::Outcome::Restart;
      restart = true;
    } else {
      block.outcome = BlockRecord::Outcome::NoAcceleration;
    }

    block.parameter_next = gamma_next;
    s.gamma = gamma_next;
    if (restart) {
      // (x_{4k+3}, x_{4k+4}) = (x_{4k-1}, x_{4k}); the state already holds it.
      rec.record(s.x, rec.norm(s.x - p3), s.residual, gamma, true);
    } else {
      rec.record(p4, plain_second, plain_second, gamma, false);
      s.x_prev = std::move(p3);
      s.x = std::move(p4);
      s.residual = plain_second;
    }
    block.residual_end = s.residual;
    block.last_application = rec.applications();
    rec.trace().blocks.push_back(block);
    if (!restart && (plain_first <= control.tol || plain_second <= control.tol)) {
      return rec.finish(std::move(s.x), StopReason::Converged);
    }
  }
  return rec.finish(std::move(s.x), StopReason::Budget);
}

}  // namespace accel
