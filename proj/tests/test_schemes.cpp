#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "accel/algorithms.hpp"
#include "accel/schemes.hpp"
#include "support.hpp"

using namespace accel;
using accel::testing::random_averaged_affine;
using accel::testing::random_vec;

namespace {

AveragedOperator halving(Index n = 1) {
  return AveragedOperator([](const Vec& x) -> Vec { return 0.5 * x; }, 0.5, n);
}

Vec scalar(double v) { return Vec::Constant(1, v); }

// Spectral radius of the inertial iteration matrix [[(1+g) R, -g R], [I, 0]].
double inertial_matrix_radius(const Mat& R, double gamma) {
  const Index n = R.rows();
  Mat block = Mat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = (1.0 + gamma) * R;
  block.topRightCorner(n, n) = -gamma * R;
  block.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  double radius = 0.0;
  for (const auto& mu : eigenvalues(block)) radius = std::max(radius, std::abs(mu));
  return radius;
}

}  // namespace

TEST(RelaxedStep, Examples) {
  const AveragedOperator T = halving();
  EXPECT_DOUBLE_EQ(relaxed_step(T, 1.0, scalar(3.0))(0), 1.5);
  EXPECT_NEAR(relaxed_step(T, 4.0 / 3.0, scalar(1.0))(0), 1.0 / 3.0, 1e-15);
}

TEST(RelaxedStep, AdmissibilityPolicy) {
  const AveragedOperator T = halving();
  EXPECT_THROW(relaxed_step(T, 2.0, scalar(1.0)), AdmissibilityError);
  EXPECT_THROW(relaxed_step(T, 0.0, scalar(1.0)), AdmissibilityError);
  EXPECT_THROW(relaxed_step(T, -0.5, scalar(1.0)), AdmissibilityError);
  EXPECT_DOUBLE_EQ(relaxed_step(T, 2.5, scalar(1.0), Admissibility::Warn)(0), -0.25);
}

TEST(RelaxedStep, GradientOperatorScalesStepsize) {
  // T(x) = x - grad f(x) / L for f = 1/2 x^T Q x - c^T x.
  accel::SplitMix64 rng(2);
  const Mat B = accel::testing::random_mat(4, 4, rng);
  const Mat Q = B.transpose() * B + Mat::Identity(4, 4);
  const Vec c = random_vec(4, rng);
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues().maxCoeff();
  const AveragedOperator T([&](const Vec& x) -> Vec { return x - (Q * x - c) / L; }, 0.5, 4);
  const Vec x = random_vec(4, rng);
  const double eta = 1.7;
  EXPECT_LE((relaxed_step(T, eta, x) - (x - eta / L * (Q * x - c))).norm(), 1e-13);
}

TEST(RelaxedStep, RelaxedOperatorIsEtaAlphaAveraged) {
  const AffineOperator A = random_averaged_affine(6, 0.4, 17);
  const AveragedOperator T = A.as_operator();
  for (double eta : {0.5, 1.0, 1.8, 2.4}) {
    const AveragedOperator relaxed([&T, eta](const Vec& x) { return relaxed_step(T, eta, x); },
                                   eta * T.alpha(), T.dim());
    EXPECT_TRUE(check_averagedness(relaxed).passed) << "eta " << eta;
  }
}

TEST(InertialStep, Examples) {
  const AveragedOperator T = halving();
  const auto plain = inertial_step(T, 0.0, scalar(2.0), scalar(7.0));
  EXPECT_DOUBLE_EQ(plain.next(0), 1.0);
  EXPECT_DOUBLE_EQ(plain.preimage(0), 2.0);

  const auto still = inertial_step(T, 5.0, scalar(2.0), scalar(2.0));
  EXPECT_DOUBLE_EQ(still.preimage(0), 2.0);

  const auto pushed = inertial_step(T, 1.0, scalar(2.0), scalar(1.0));
  EXPECT_DOUBLE_EQ(pushed.preimage(0), 3.0);
  EXPECT_DOUBLE_EQ(pushed.next(0), 1.5);

  EXPECT_THROW(inertial_step(T, -0.1, scalar(1.0), scalar(0.0)), AdmissibilityError);
}

TEST(AlternatedCycle, ZeroGammaIsTwoPlainSteps) {
  const AveragedOperator T = halving();
  const auto cycle = alternated_cycle(T, 0.0, scalar(8.0));
  EXPECT_DOUBLE_EQ(cycle.first(0), 4.0);
  EXPECT_DOUBLE_EQ(cycle.second(0), 2.0);
}

TEST(AlternatedCycle, EqualsPlainThenRelaxedComposition) {
  const LassoProblem problem = gen_lasso(accel::testing::small_lasso());
  const AveragedOperator T = make_prox_grad_operator(problem);
  const double bound = (1.0 - T.alpha()) / T.alpha();
  accel::SplitMix64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = random_vec(problem.dim(), rng);
    const double gamma = bound * rng.uniform();
    const auto cycle = alternated_cycle(T, gamma, x);
    const Vec composed = T(relaxed_step(T, 1.0 + gamma, x));
    EXPECT_LE((cycle.second - composed).norm(), 1e-12 * std::max(1.0, composed.norm()));
  }
}

TEST(AlternatedCycle, GradientSecondStepUsesScaledStepsize) {
  accel::SplitMix64 rng(4);
  const Mat B = accel::testing::random_mat(3, 3, rng);
  const Mat Q = B.transpose() * B + 0.1 * Mat::Identity(3, 3);
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues().maxCoeff();
  const AveragedOperator T([&](const Vec& x) -> Vec { return x - Q * x / L; }, 0.5, 3);
  const Vec x = random_vec(3, rng);
  const double gamma = 0.6;
  const auto cycle = alternated_cycle(T, gamma, x);
  const Vec expected = cycle.first - (1.0 + gamma) / L * (Q * cycle.first);
  EXPECT_LE((cycle.second - expected).norm(), 1e-13);
}

TEST(AlternatedCycle, EnforcesParameterBound) {
  const LassoProblem problem = gen_lasso(accel::testing::small_lasso());
  const AveragedOperator T = make_prox_grad_operator(problem);
  const Vec x = Vec::Zero(T.dim());
  EXPECT_NO_THROW(alternated_cycle(T, 0.5, x));
  EXPECT_THROW(alternated_cycle(T, 0.51, x), AdmissibilityError);
  EXPECT_THROW(alternated_cycle(T, -0.1, x), AdmissibilityError);
  EXPECT_NO_THROW(alternated_cycle(T, 0.9, x, Admissibility::Warn));
}

TEST(InertiaAdmissible, Boundary) {
  EXPECT_TRUE(inertia_admissible_const(0.5, 0.3));
  EXPECT_FALSE(inertia_admissible_const(0.5, 0.34));
  EXPECT_TRUE(inertia_admissible_const(2.0 / 3.0, 0.2));
  for (double alpha : {0.1, 0.5, 0.9}) EXPECT_TRUE(inertia_admissible_const(alpha, 0.0));
  // alpha = 1/2 reduces the quadratic inequality to 1 > 3 gamma.
  for (double g = 0.0; g < 1.0; g += 0.01) {
    EXPECT_EQ(inertia_admissible_const(0.5, g), 1.0 > 3.0 * g + 1e-12) << g;
  }
}

TEST(OptimalRelaxation, ClosedForms) {
  const auto half = optimal_relaxation(0.5, 0.5);
  EXPECT_NEAR(half.parameter, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(half.rate, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(optimal_relaxation(0.5, 1.0 - 1e-9).parameter, 2.0, 1e-8);
  EXPECT_THROW(optimal_relaxation(0.5, 1.0), InvalidSpectrumError);
  EXPECT_THROW(optimal_relaxation(0.5, -0.5), InvalidSpectrumError);
  EXPECT_THROW(optimal_relaxation(1.2, 0.5), AdmissibilityError);
}

TEST(OptimalRelaxation, GridOracle) {
  accel::SplitMix64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = 0.1 + 0.85 * rng.uniform();
    const double lo = 1.0 - 2.0 * alpha;
    const double lambda = lo + (0.99 - lo) * rng.uniform();
    double best_eta = 0.0, best_rate = INFINITY;
    for (double eta = 1e-3; eta < 1.0 / alpha; eta += 1e-3) {
      const double r = std::max(std::abs(eta * lo + 1.0 - eta), std::abs(eta * lambda + 1.0 - eta));
      if (r < best_rate) best_rate = r, best_eta = eta;
    }
    const auto closed = optimal_relaxation(alpha, lambda);
    EXPECT_NEAR(closed.parameter, best_eta, 1e-3);
    EXPECT_NEAR(closed.rate, best_rate, 1e-3);
  }
}

TEST(OptimalInertia, ClosedForms) {
  const auto c = optimal_inertia(0.75);
  EXPECT_NEAR(c.parameter, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.rate, 0.5, 1e-15);
  EXPECT_EQ(optimal_inertia(0.0).parameter, 0.0);
  EXPECT_EQ(optimal_inertia(-0.3).rate, 0.0);
  EXPECT_THROW(optimal_inertia(1.0), InvalidSpectrumError);

  for (double kappa : {0.01, 0.1, 0.5}) {
    const auto m = optimal_inertia(1.0 - kappa);
    const double s = std::sqrt(kappa);
    EXPECT_NEAR(m.parameter, (1.0 - s) / (1.0 + s), 1e-12);
    EXPECT_NEAR(m.rate, 1.0 - s, 1e-12);
  }
}

TEST(OptimalInertia, RateAtLeastHalfLambda) {
  for (double lambda = 0.001; lambda < 1.0; lambda += 0.001) {
    EXPECT_GE(optimal_inertia(lambda).rate, lambda / 2.0);
  }
}

TEST(OptimalInertia, CompanionMatrixGridOracle) {
  accel::SplitMix64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const double lambda = 0.05 + 0.9 * rng.uniform();
    const Mat R = Vec((Vec(2) << 0.0, lambda).finished()).asDiagonal();
    double best_gamma = 0.0, best_rate = INFINITY;
    for (double g = 0.0; g <= 1.0; g += 1e-3) {
      const double r = inertial_matrix_radius(R, g);
      if (r < best_rate) best_rate = r, best_gamma = g;
    }
    const auto closed = optimal_inertia(lambda);
    EXPECT_NEAR(closed.parameter, best_gamma, 1e-2) << lambda;
    EXPECT_NEAR(closed.rate, best_rate, 1e-3) << lambda;
  }
}

TEST(OptimalInertia, ExceedsOneThirdExactlyBelowQuarter) {
  for (double kappa = 0.005; kappa < 1.0; kappa += 0.005) {
    if (std::abs(kappa - 0.25) < 1e-9) continue;
    EXPECT_EQ(optimal_inertia(1.0 - kappa).parameter > 1.0 / 3.0, kappa < 0.25) << kappa;
  }
}

TEST(OptimalAltInertia, ClosedForms) {
  const auto c = optimal_alt_inertia(0.5);
  EXPECT_NEAR(c.parameter, 0.70711, 1e-5);
  EXPECT_NEAR(c.rate, 0.07322, 1e-5);
  const auto tiny = optimal_alt_inertia(1e-9);
  EXPECT_LT(tiny.parameter, 1e-8);
  EXPECT_LT(tiny.rate, 1e-16);
  EXPECT_THROW(optimal_alt_inertia(1.5), InvalidSpectrumError);
}

TEST(OptimalAltInertia, ExceedsOneBelowThreshold) {
  const double threshold = (3.0 - std::sqrt(2.0)) / 4.0;
  for (double kappa = 0.002; kappa < 1.0; kappa += 0.002) {
    if (std::abs(kappa - threshold) < 1e-3) continue;
    EXPECT_EQ(optimal_alt_inertia(1.0 - kappa).parameter > 1.0, kappa < threshold) << kappa;
  }
}

TEST(ModifiedSpectrum, Maps) {
  const std::vector<double> eigs{0.5, -0.2, 0.9};
  const auto same = modified_spectrum(eigs, Relaxation{1.0});
  ASSERT_EQ(same.size(), eigs.size());
  for (std::size_t i = 0; i < eigs.size(); ++i) EXPECT_DOUBLE_EQ(same[i].real(), eigs[i]);

  const std::vector<double> half{0.5};
  const auto roots = modified_spectrum(half, Inertia{0.0});
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(std::abs(roots[0] - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(roots[1]), 0.0, 1e-15);

  const std::vector<double> negative{-0.4};
  const auto neg = modified_spectrum(negative, Inertia{0.2});
  EXPECT_GE(std::max(std::abs(neg[0]), std::abs(neg[1])), 0.48 - 1e-12);

  const auto alt = modified_spectrum(half, AltInertia{0.5});
  ASSERT_EQ(alt.size(), 1u);
  EXPECT_DOUBLE_EQ(alt[0].real(), 1.5 * 0.25 - 0.25);
}

TEST(ModifiedSpectrum, InertialRootsSatisfyPolynomial) {
  const std::vector<double> eigs{0.3, 0.8, -0.5};
  const double g = 0.4;
  const auto roots = modified_spectrum(eigs, Inertia{g});
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    for (int r = 0; r < 2; ++r) {
      const auto mu = roots[2 * i + r];
      EXPECT_LT(std::abs(mu * mu - (1.0 + g) * eigs[i] * mu + g * eigs[i]), 1e-14);
    }
  }
}

TEST(SchemeRate, AltInertiaIsPerApplication) {
  const std::vector<double> eigs{0.5};
  const double two_step = std::abs(1.5 * 0.25 - 0.5 * 0.5);
  EXPECT_NEAR(scheme_rate(eigs, AltInertia{0.5}), std::sqrt(two_step), 1e-15);
  EXPECT_NEAR(scheme_rate(eigs, Plain{}), 0.5, 1e-15);
}

TEST(BestScheme, Examples) {
  EXPECT_NE(best_scheme(0.0, 0.9).scheme, SchemeTag::Relaxation);
  EXPECT_EQ(best_scheme(0.0, 0.5).scheme, SchemeTag::AltInertia);
  const auto zero = best_scheme(0.0, 0.0);
  EXPECT_EQ(zero.rate, 0.0);
  for (const auto& choice : zero.per_scheme) EXPECT_EQ(choice.rate, 0.0);
  EXPECT_NEAR(best_scheme(0.4, 0.4).per_scheme[0].rate, 0.0, 1e-12);
  EXPECT_THROW(best_scheme(0.5, 0.4), InvalidSpectrumError);
  EXPECT_THROW(best_scheme(-1.0, 0.4), InvalidSpectrumError);
  EXPECT_THROW(best_scheme(0.0, 1.0), InvalidSpectrumError);
}

TEST(BestScheme, RelaxationWinsOnNegativeSide) {
  const auto best = best_scheme(-0.8, 0.3);
  EXPECT_EQ(best.scheme, SchemeTag::Relaxation);
  EXPECT_LT(best.rate, 1.0);
}

TEST(RunScheme, PlainMatchesKm) {
  const AffineOperator A = random_averaged_affine(5, 0.5, 2);
  RunControl control;
  control.budget = 50;
  control.tol = 0.0;
  const Vec x0 = Vec::Ones(5);
  const auto km = km_iterate(A.as_operator(), x0, control);
  const auto plain = run_scheme(A.as_operator(), Plain{}, x0, control);
  EXPECT_EQ(km.final_point, plain.final_point);
  EXPECT_EQ(km.residuals, plain.residuals);
}

TEST(RunScheme, InertiaMatchesRepeatedSteps) {
  const AffineOperator A = random_averaged_affine(4, 0.5, 3);
  const AveragedOperator T = A.as_operator();
  RunControl control;
  control.budget = 20;
  control.tol = 0.0;
  const Vec x0 = Vec::Ones(4);
  const auto trace = run_scheme(T, Inertia{0.3}, x0, control);
  Vec prev = x0, x = x0;
  for (int k = 0; k < 20; ++k) {
    auto step = inertial_step(T, 0.3, x, prev);
    EXPECT_NEAR(trace.residuals[k], (step.next - step.preimage).norm(), 1e-14);
    prev = x;
    x = step.next;
  }
  EXPECT_EQ(trace.final_point, x);
}

TEST(RunScheme, AltInertiaMatchesCycles) {
  const AffineOperator A = random_averaged_affine(4, 0.5, 5);
  const AveragedOperator T = A.as_operator();
  RunControl control;
  control.budget = 20;
  control.tol = 0.0;
  Vec x = Vec::Ones(4);
  const auto trace = run_scheme(T, AltInertia{0.8}, x, control);
  for (int k = 0; k < 10; ++k) x = alternated_cycle(T, 0.8, x).second;
  EXPECT_LE((trace.final_point - x).norm(), 1e-14);
}

TEST(RunScheme, RejectsInadmissibleParameters) {
  const AveragedOperator T = halving();
  RunControl control;
  control.budget = 5;
  EXPECT_THROW(run_scheme(T, Relaxation{2.0}, scalar(1.0), control), AdmissibilityError);
  EXPECT_THROW(run_scheme(T, AltInertia{1.5}, scalar(1.0), control), AdmissibilityError);
  EXPECT_THROW(run_scheme(T, Inertia{-1.0}, scalar(1.0), control), AdmissibilityError);
  control.budget = 0;
  EXPECT_THROW(run_scheme(T, Plain{}, scalar(1.0), control), AdmissibilityError);
}
