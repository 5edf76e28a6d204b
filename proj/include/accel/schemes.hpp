#pragma once

#include <array>
#include <complex>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "accel/common.hpp"
#include "accel/operators.hpp"

namespace accel {

struct Plain {};
struct Relaxation {
  double eta = 1.0;
};
struct Inertia {
  double gamma = 0.0;
};
struct AltInertia {
  double gamma = 0.0;
};

/// A fixed-parameter modification of the plain fixed-point iteration.
using SchemeKind = std::variant<Plain, Relaxation, Inertia, AltInertia>;

enum class SchemeTag { Plain, Relaxation, Inertia, AltInertia };

SchemeTag tag_of(const SchemeKind& scheme);
std::string_view to_string(SchemeTag tag);

/// History needed to run any of the static schemes.
struct SchemeState {
  Vec previous;  ///< x_{k-1}
  Vec preimage;  ///< y_k, the point T was last applied to
  bool even_phase = true;
};

/// eta T(x) + (1-eta) x, with eta in (0, 1/alpha).
Vec relaxed_step(const AveragedOperator& T, double eta, const Vec& x,
                 Admissibility policy = Admissibility::Enforce);

struct InertialStep {
  Vec next;      ///< x_{k+1} = T(y_k)
  Vec preimage;  ///< y_k = x_k + gamma (x_k - x_{k-1})
};
InertialStep inertial_step(const AveragedOperator& T, double gamma, const Vec& x,
                           const Vec& previous);

struct AlternatedCycle {
  Vec first;   ///< plain step T(x_k)
  Vec second;  ///< inertial step from first, using first - x_k
};
/// A plain step followed by an inertial step, gamma in [0, (1-alpha)/alpha].
AlternatedCycle alternated_cycle(const AveragedOperator& T, double gamma, const Vec& x,
                                 Admissibility policy = Admissibility::Enforce);

/// Constant-inertia convergence condition (1-gamma)^2 > alpha/(1-alpha) gamma (1+gamma).
bool inertia_admissible_const(double alpha, double gamma);

void check_relaxation_parameter(double alpha, double eta, Admissibility policy);
void check_alternated_parameter(double alpha, double gamma, Admissibility policy);

struct OptimalChoice {
  double parameter = 0.0;
  double rate = 0.0;
};

/// eta* = 2/(2 alpha + 1 - lambda), rate (2 alpha - 1 + lambda)/(2 alpha + 1 - lambda)
/// for a real spectrum in [1 - 2 alpha, lambda] plus {1}.
OptimalChoice optimal_relaxation(double alpha, double lambda);
/// gamma* = (1 - sqrt(1-lambda))^2 / lambda, rate 1 - sqrt(1-lambda); spectrum in [0, lambda].
OptimalChoice optimal_inertia(double lambda);
/// Worst case over intermediate eigenvalues in [0, lambda]. The rate is per
/// alternated cycle (two operator applications).
OptimalChoice optimal_alt_inertia(double lambda);

/// Image of a real spectrum under the scheme's iteration matrix. Inertia
/// maps each eigenvalue to the two roots of mu^2 - (1+gamma) lambda mu + gamma lambda;
/// alternated inertia maps to the two-step eigenvalue (1+gamma) lambda^2 - gamma lambda.
std::vector<std::complex<double>> modified_spectrum(std::span<const double> eigs,
                                                    const SchemeKind& scheme);

/// Per-application rate of a scheme on the worst eigenvalue of `eigs`.
double scheme_rate(std::span<const double> eigs, const SchemeKind& scheme);

struct BestScheme {
  SchemeTag scheme = SchemeTag::Relaxation;
  double parameter = 0.0;
  double rate = 0.0;
  /// Optimal per-application rate and parameter found for each scheme, indexed
  /// relaxation, inertia, alternated inertia.
  std::array<OptimalChoice, 3> per_scheme{};
};

/// Grid minimization of the per-application rate for a real spectrum in
/// [lambda_min, lambda_max] (plus the eigenvalue 1).
BestScheme best_scheme(double lambda_min, double lambda_max);

/// Fixed-parameter run of any scheme. Entries of the trace are operator
/// applications; the residual is ||T(z) - z|| at the point z the operator was applied to.
IterationTrace run_scheme(const AveragedOperator& T, const SchemeKind& scheme, const Vec& x0,
                          const RunControl& control,
                          Admissibility policy = Admissibility::Enforce);

}  // namespace accel
