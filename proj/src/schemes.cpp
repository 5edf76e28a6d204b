#include "accel/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recorder.hpp"

namespace accel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void reject(Admissibility policy, const std::string& message) {
  if (policy == Admissibility::Enforce) throw AdmissibilityError(message);
  warn(message);
}

// Largest root modulus of mu^2 - (1+gamma) lambda mu + gamma lambda.
double inertial_root_modulus(double lambda, double gamma) {
  const double b = (1.0 + gamma) * lambda;
  const double disc = b * b - 4.0 * gamma * lambda;
  if (disc >= 0.0) return 0.5 * (std::abs(b) + std::sqrt(disc));
  return std::sqrt(gamma * lambda);
}

double alternated_two_step(double lambda, double gamma) {
  return std::abs((1.0 + gamma) * lambda * lambda - gamma * lambda);
}

constexpr std::size_t kIntervalPoints = 512;
constexpr double kGridStep = 1e-3;
constexpr double kGammaMax = 3.0;

// 512 interior grid points of [lo, hi] plus both endpoints.
std::vector<double> interval_grid(double lo, double hi) {
  std::vector<double> grid;
  grid.reserve(kIntervalPoints + 2);
  grid.push_back(lo);
  for (std::size_t i = 1; i <= kIntervalPoints; ++i) {
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (kIntervalPoints + 1));
  }
  grid.push_back(hi);
  return grid;
}

template <class Rate>
OptimalChoice minimize_on_grid(Rate&& rate, double lo, double hi_exclusive, bool include_lo,
                               double candidate) {
  OptimalChoice best{candidate, rate(candidate)};
  const auto steps = static_cast<std::size_t>(std::ceil((hi_exclusive - lo) / kGridStep));
  for (std::size_t k = include_lo ? 0 : 1; k <= steps; ++k) {
    const double p = lo + kGridStep * static_cast<double>(k);
    if (p >= hi_exclusive) break;
    const double r = rate(p);
    if (r < best.rate) best = {p, r};
  }
  return best;
}

}  // namespace

SchemeTag tag_of(const SchemeKind& scheme) {
  return std::visit(Overloaded{[](const Plain&) { return SchemeTag::Plain; },
                               [](const Relaxation&) { return SchemeTag::Relaxation; },
                               [](const Inertia&) { return SchemeTag::Inertia; },
                               [](const AltInertia&) { return SchemeTag::AltInertia; }},
                    scheme);
}

std::string_view to_string(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::Plain:
      return "plain";
    case SchemeTag::Relaxation:
      return "relaxation";
    case SchemeTag::Inertia:
      return "inertia";
    case SchemeTag::AltInertia:
      return "alt_inertia";
  }
  return "unknown";
}

void check_relaxation_parameter(double alpha, double eta, Admissibility policy) {
  if (!(eta > 0.0 && eta < 1.0 / alpha)) {
    reject(policy, "relaxation parameter " + std::to_string(eta) + " outside (0, 1/alpha) = (0, " +
                       std::to_string(1.0 / alpha) + ")");
  }
}

void check_alternated_parameter(double alpha, double gamma, Admissibility policy) {
  if (!(gamma >= 0.0 && gamma <= (1.0 - alpha) / alpha)) {
    reject(policy, "alternated inertia parameter " + std::to_string(gamma) +
                       " outside [0, (1-alpha)/alpha] = [0, " +
                       std::to_string((1.0 - alpha) / alpha) + "]");
  }
}

Vec relaxed_step(const AveragedOperator& T, double eta, const Vec& x, Admissibility policy) {
  check_relaxation_parameter(T.alpha(), eta, policy);
  const Vec tx = T(x);
  return tx + (eta - 1.0) * (tx - x);
}

InertialStep inertial_step(const AveragedOperator& T, double gamma, const Vec& x,
                           const Vec& previous) {
  if (gamma < 0.0) throw AdmissibilityError("inertia parameter must be nonnegative");
  Vec y = x + gamma * (x - previous);
  Vec next = T(y);
  return {std::move(next), std::move(y)};
}

AlternatedCycle alternated_cycle(const AveragedOperator& T, double gamma, const Vec& x,
                                 Admissibility policy) {
  check_alternated_parameter(T.alpha(), gamma, policy);
  Vec first = T(x);
  Vec second = T(first + gamma * (first - x));
  return {std::move(first), std::move(second)};
}

bool inertia_admissible_const(double alpha, double gamma) {
  const double lhs = (1.0 - gamma) * (1.0 - gamma);
  const double rhs = alpha / (1.0 - alpha) * gamma * (1.0 + gamma);
  return lhs > rhs;
}

OptimalChoice optimal_relaxation(double alpha, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw AdmissibilityError("alpha must lie in (0,1)");
  if (!(lambda < 1.0)) throw InvalidSpectrumError("dominant eigenvalue must be < 1");
  if (lambda < 1.0 - 2.0 * alpha) {
    throw InvalidSpectrumError("dominant eigenvalue below the disk bound 1 - 2 alpha");
  }
  const double denominator = 2.0 * alpha + 1.0 - lambda;
  return {2.0 / denominator, (2.0 * alpha - 1.0 + lambda) / denominator};
}

OptimalChoice optimal_inertia(double lambda) {
  if (!(lambda < 1.0)) throw InvalidSpectrumError("dominant eigenvalue must be < 1");
  if (lambda <= 0.0) return {0.0, 0.0};
  const double root = 1.0 - std::sqrt(1.0 - lambda);
  return {root * root / lambda, root};
}

OptimalChoice optimal_alt_inertia(double lambda) {
  if (!(lambda < 1.0)) throw InvalidSpectrumError("dominant eigenvalue must be < 1");
  if (lambda <= 0.0) return {0.0, 0.0};
  const double gamma = (2.0 * lambda * lambda + (std::sqrt(2.0) - 1.0) * lambda) /
                       (2.0 * lambda * (1.0 - lambda) + 0.5);
  return {gamma, gamma * gamma / (4.0 * (1.0 + gamma))};
}

std::vector<std::complex<double>> modified_spectrum(std::span<const double> eigs,
                                                    const SchemeKind& scheme) {
  std::vector<std::complex<double>> out;
  out.reserve(2 * eigs.size());
  std::visit(Overloaded{
                 [&](const Plain&) {
                   for (double l : eigs) out.emplace_back(l);
                 },
                 [&](const Relaxation& r) {
                   for (double l : eigs) out.emplace_back(r.eta * l + (1.0 - r.eta));
                 },
                 [&](const Inertia& in) {
                   for (double l : eigs) {
                     const std::complex<double> b = (1.0 + in.gamma) * l;
                     const std::complex<double> s = std::sqrt(b * b - 4.0 * in.gamma * l);
                     out.push_back(0.5 * (b + s));
                     out.push_back(0.5 * (b - s));
                   }
                 },
                 [&](const AltInertia& a) {
                   for (double l : eigs) out.emplace_back((1.0 + a.gamma) * l * l - a.gamma * l);
                 }},
             scheme);
  return out;
}

double scheme_rate(std::span<const double> eigs, const SchemeKind& scheme) {
  double rate = 0.0;
  std::visit(Overloaded{
                 [&](const Plain&) {
                   for (double l : eigs) rate = std::max(rate, std::abs(l));
                 },
                 [&](const Relaxation& r) {
                   for (double l : eigs) rate = std::max(rate, std::abs(r.eta * l + 1.0 - r.eta));
                 },
                 [&](const Inertia& in) {
                   for (double l : eigs) rate = std::max(rate, inertial_root_modulus(l, in.gamma));
                 },
                 [&](const AltInertia& a) {
                   for (double l : eigs) rate = std::max(rate, alternated_two_step(l, a.gamma));
                   rate = std::sqrt(rate);
                 }},
             scheme);
  return rate;
}

BestScheme best_scheme(double lambda_min, double lambda_max) {
  if (!(lambda_min > -1.0 && lambda_min <= lambda_max && lambda_max < 1.0)) {
    throw InvalidSpectrumError("best_scheme needs -1 < lambda_min <= lambda_max < 1");
  }
  BestScheme best;
  const std::array<double, 2> ends{lambda_min, lambda_max};
  const double eta_max = 2.0 / (1.0 - lambda_min);
  best.per_scheme[0] = minimize_on_grid(
      [&](double eta) { return scheme_rate(ends, Relaxation{eta}); }, 0.0, eta_max, false,
      2.0 / (2.0 - lambda_min - lambda_max));

  const std::vector<double> grid = interval_grid(lambda_min, lambda_max);
  best.per_scheme[1] = minimize_on_grid(
      [&](double g) { return scheme_rate(grid, Inertia{g}); }, 0.0, kGammaMax + 0.5 * kGridStep,
      true, optimal_inertia(lambda_max).parameter);
  best.per_scheme[2] = minimize_on_grid(
      [&](double g) { return scheme_rate(grid, AltInertia{g}); }, 0.0,
      kGammaMax + 0.5 * kGridStep, true, optimal_alt_inertia(lambda_max).parameter);

  // Ties go to alternated inertia, then inertia, then relaxation.
  constexpr std::array<std::size_t, 3> order{2, 1, 0};
  constexpr std::array<SchemeTag, 3> tags{SchemeTag::Relaxation, SchemeTag::Inertia,
                                          SchemeTag::AltInertia};
  std::size_t winner = order[0];
  for (std::size_t i : order) {
    if (best.per_scheme[i].rate < best.per_scheme[winner].rate) winner = i;
  }
  best.scheme = tags[winner];
  best.parameter = best.per_scheme[winner].parameter;
  best.rate = best.per_scheme[winner].rate;
  return best;
}

IterationTrace run_scheme(const AveragedOperator& T, const SchemeKind& scheme, const Vec& x0,
                          const RunControl& control, Admissibility policy) {
  if (control.budget < 1) throw AdmissibilityError("run needs a budget of at least 1");
  detail::TraceRecorder rec(control, &T);
  rec.check_finite(x0);

  if (const auto* r = std::get_if<Relaxation>(&scheme)) {
    check_relaxation_parameter(T.alpha(), r->eta, policy);
  } else if (const auto* a = std::get_if<AltInertia>(&scheme)) {
    check_alternated_parameter(T.alpha(), a->gamma, policy);
  } else if (const auto* in = std::get_if<Inertia>(&scheme)) {
    if (in->gamma < 0.0) throw AdmissibilityError("inertia parameter must be nonnegative");
  }

  SchemeState state{x0, x0, true};
  Vec x = x0;
  while (rec.budget_left()) {
    double parameter = 1.0;
    state.preimage = x;
    Vec image;
    Vec next;
    std::visit(Overloaded{[&](const Plain&) { next = image = T(x); },
                          [&](const Relaxation& r) {
                            parameter = r.eta;
                            image = T(x);
                            next = image + (r.eta - 1.0) * (image - x);
                          },
                          [&](const Inertia& in) {
                            parameter = in.gamma;
                            auto step = inertial_step(T, in.gamma, x, state.previous);
                            next = image = std::move(step.next);
                            state.preimage = std::move(step.preimage);
                          },
                          [&](const AltInertia& a) {
                            parameter = a.gamma;
                            if (state.even_phase) {
                              next = image = T(x);
                            } else {
                              auto step = inertial_step(T, a.gamma, x, state.previous);
                              next = image = std::move(step.next);
                              state.preimage = std::move(step.preimage);
                            }
                          }},
               scheme);
    const double residual = rec.norm(image - state.preimage);
    const double step = rec.norm(next - x);
    state.previous = std::move(x);
    state.even_phase = !state.even_phase;
    x = std::move(next);
    rec.record(x, step, residual, parameter, false, &image);
    if (residual <= control.tol) return rec.finish(std::move(x), StopReason::Converged);
  }
  return rec.finish(std::move(x), StopReason::Budget);
}

}  // namespace accel
