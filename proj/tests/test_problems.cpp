#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "accel/algorithms.hpp"
#include "accel/harness.hpp"
#include "accel/problems.hpp"
#include "accel/rng.hpp"
#include "support.hpp"

using namespace accel;
using accel::testing::random_vec;
using accel::testing::small_lasso;
using accel::testing::TempDir;
using accel::testing::write_text;

namespace {

const LogisticProblem& logistic(RegularizerKind kind) {
  static const LogisticProblem l1 = load_logistic(bundled_dataset(), RegularizerKind::L1, 0.1);
  static const LogisticProblem l2 =
      load_logistic(bundled_dataset(), RegularizerKind::L2Squared, 0.01);
  return kind == RegularizerKind::L1 ? l1 : l2;
}

// Central differences with a step scaled to the coordinate.
Vec finite_difference_gradient(const Problem& p, const Vec& x) {
  Vec g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    Vec plus = x, minus = x;
    plus(i) += h;
    minus(i) -= h;
    g(i) = (p.smooth_value(plus) - p.smooth_value(minus)) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST(SplitMix64, ReferenceStream) {
  accel::SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  accel::SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  accel::SplitMix64 u(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(GenLasso, ShapeAndUnitColumns) {
  const LassoProblem p = gen_lasso(LassoOptions{});
  ASSERT_EQ(p.A().rows(), 100);
  ASSERT_EQ(p.A().cols(), 300);
  for (Index j = 0; j < p.A().cols(); ++j) EXPECT_NEAR(p.A().col(j).norm(), 1.0, 1e-12);
  EXPECT_EQ((p.truth().array() != 0.0).count(), 90);
  EXPECT_NEAR(p.lambda(), 0.1 * (p.A().transpose() * p.b()).cwiseAbs().maxCoeff(), 1e-15);
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(p.A() * p.A().transpose())
                       .eigenvalues()
                       .maxCoeff();
  EXPECT_NEAR(p.lipschitz(), L, 1e-10 * L);
  EXPECT_LE((p.b() - p.A() * p.truth()).norm(), 0.001 * 100 * 3);
}

TEST(GenLasso, DeterministicPerSeed) {
  const LassoProblem a = gen_lasso(small_lasso(11));
  const LassoProblem b = gen_lasso(small_lasso(11));
  const LassoProblem c = gen_lasso(small_lasso(12));
  EXPECT_EQ(a.A(), b.A());
  EXPECT_EQ(a.b(), b.b());
  EXPECT_EQ(a.lambda(), b.lambda());
  EXPECT_NE(a.A(), c.A());
}

TEST(GenLasso, NoiselessEmptySignal) {
  LassoOptions o = small_lasso();
  o.nonzeros = 0;
  o.noise = 0.0;
  const LassoProblem p = gen_lasso(o);
  EXPECT_EQ(p.b().norm(), 0.0);
  const auto ref = reference_solution(p);
  EXPECT_EQ(ref.objective, 0.0);
  EXPECT_EQ(ref.minimizer.norm(), 0.0);
}

TEST(GenLasso, RejectsBadOptions) {
  LassoOptions o = small_lasso();
  o.nonzeros = o.cols + 1;
  EXPECT_THROW(gen_lasso(o), ConfigError);
  o = small_lasso();
  o.noise = -1.0;
  EXPECT_THROW(gen_lasso(o), ConfigError);
  o = small_lasso();
  o.rows = 0;
  EXPECT_THROW(gen_lasso(o), ConfigError);
  o = small_lasso();
  o.lambda = -0.5;
  EXPECT_THROW(gen_lasso(o), ConfigError);
}

TEST(Lasso, ValueAndGradientAtOrigin) {
  const LassoProblem p = gen_lasso(small_lasso());
  const Vec zero = Vec::Zero(p.dim());
  EXPECT_DOUBLE_EQ(p.objective(zero), 0.5 * p.b().squaredNorm());
  EXPECT_LE((p.smooth_gradient(zero) + p.A().transpose() * p.b()).norm(), 1e-15);
}

TEST(Lasso, LargeLambdaGivesZeroMinimizer) {
  const LassoProblem base = gen_lasso(small_lasso());
  const double threshold = (base.A().transpose() * base.b()).cwiseAbs().maxCoeff();
  const LassoProblem p(base.A(), base.b(), 1.01 * threshold);
  const auto ref = reference_solution(p);
  EXPECT_EQ(ref.minimizer.norm(), 0.0);
  EXPECT_DOUBLE_EQ(ref.objective, 0.5 * base.b().squaredNorm());
}

TEST(Lasso, PrimalDualSplitProx) {
  const LassoProblem p = gen_lasso(small_lasso());
  const PrimalDualSplit split = p.primal_dual_split();
  EXPECT_FALSE(split.identity());
  EXPECT_EQ(split.M, p.A());
  const double sigma = 0.7;
  const auto prox = split.make_prox_h(sigma);
  accel::SplitMix64 rng(1);
  const Vec z = random_vec(p.A().rows(), rng);
  const Vec w = prox(z);
  // Optimality of 1/2 ||w - b||^2 + sigma/2 ||w - z||^2.
  EXPECT_LE(((w - p.b()) + sigma * (w - z)).norm(), 1e-14);
}

TEST(Logistic, NormalizationAndBound) {
  const LogisticProblem& p = logistic(RegularizerKind::L1);
  EXPECT_EQ(p.samples(), 351);
  EXPECT_EQ(p.dim(), 33);
  const double m = static_cast<double>(p.samples());
  for (Index j = 0; j < p.dim(); ++j) {
    const double mean = p.features().col(j).mean();
    EXPECT_LE(std::abs(mean), 1e-10);
    const double var = (p.features().col(j).array() - mean).square().sum() / m;
    EXPECT_NEAR(var, 1.0, 1e-8);
  }
  for (Index i = 0; i < p.samples(); ++i) EXPECT_EQ(std::abs(p.labels()(i)), 1.0);
  EXPECT_DOUBLE_EQ(p.lipschitz(), p.features().rowwise().squaredNorm().maxCoeff());
  EXPECT_EQ(p.name(), "logistic_l1");
  EXPECT_EQ(logistic(RegularizerKind::L2Squared).name(), "logistic_l2");
}

TEST(Logistic, ValueAtOriginIsLogTwo) {
  for (auto kind : {RegularizerKind::L1, RegularizerKind::L2Squared}) {
    EXPECT_NEAR(logistic(kind).smooth_value(Vec::Zero(33)), std::log(2.0), 1e-13);
  }
}

TEST(Logistic, RegularizerProxKinds) {
  accel::SplitMix64 rng(2);
  const Vec x = random_vec(33, rng);
  EXPECT_EQ(logistic(RegularizerKind::L1).regularizer().prox(x, 0.3), prox_l1(x, 0.03));
  EXPECT_EQ(logistic(RegularizerKind::L2Squared).regularizer().prox(x, 0.3),
            prox_l2sq(x, 0.01, 0.3));
}

TEST(Logistic, StableForHugeMargins) {
  const LogisticProblem& p = logistic(RegularizerKind::L2Squared);
  const Vec big = Vec::Constant(p.dim(), 1e4);
  EXPECT_TRUE(std::isfinite(p.smooth_value(big)));
  EXPECT_TRUE(p.smooth_gradient(big).allFinite());
  EXPECT_TRUE(std::isfinite(p.smooth_value(-big)));
}

TEST(Gradients, MatchCentralDifferences) {
  const LassoProblem lasso = gen_lasso(small_lasso());
  const Problem* problems[] = {&lasso, &logistic(RegularizerKind::L1),
                               &logistic(RegularizerKind::L2Squared)};
  accel::SplitMix64 rng(17);
  for (const Problem* p : problems) {
    for (int t = 0; t < 10; ++t) {
      const Vec x = random_vec(p->dim(), rng, 0.5);
      const Vec g = p->smooth_gradient(x);
      const Vec fd = finite_difference_gradient(*p, x);
      EXPECT_LE((g - fd).norm() / std::max(1e-12, g.norm()), 1e-6) << p->name();
    }
  }
}

TEST(Gradients, LipschitzBoundHoldsEmpirically) {
  const LassoProblem lasso = gen_lasso(small_lasso());
  const Problem* problems[] = {&lasso, &logistic(RegularizerKind::L2Squared)};
  accel::SplitMix64 rng(23);
  for (const Problem* p : problems) {
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Vec x = random_vec(p->dim(), rng);
      const Vec y = random_vec(p->dim(), rng);
      worst = std::max(worst, (p->smooth_gradient(x) - p->smooth_gradient(y)).norm() / (x - y).norm());
    }
    EXPECT_LE(worst, p->lipschitz() * (1.0 + 1e-12)) << p->name();
  }
}

TEST(Objective, ConvexAlongSegments) {
  const LassoProblem lasso = gen_lasso(small_lasso());
  const Problem* problems[] = {&lasso, &logistic(RegularizerKind::L1),
                               &logistic(RegularizerKind::L2Squared)};
  accel::SplitMix64 rng(29);
  for (const Problem* p : problems) {
    for (int t = 0; t < 100; ++t) {
      const Vec x = random_vec(p->dim(), rng);
      const Vec y = random_vec(p->dim(), rng);
      const double theta = rng.uniform();
      EXPECT_LE(p->objective(theta * x + (1.0 - theta) * y),
                theta * p->objective(x) + (1.0 - theta) * p->objective(y) + 1e-10);
    }
  }
}

TEST(Reference, L2LogisticOptimality) {
  const LogisticProblem& p = logistic(RegularizerKind::L2Squared);
  const auto ref = reference_solution(p);
  EXPECT_TRUE(ref.certified);
  EXPECT_LE(ref.certificate, 1e-12);
  // The prox-grad certificate bounds the gradient of F by about 3 L times itself.
  EXPECT_LE((p.smooth_gradient(ref.minimizer) + 0.01 * ref.minimizer).norm(),
            3.0 * (p.lipschitz() + 0.01) * ref.certificate);
}

TEST(Reference, InvariantToWarmStart) {
  const LassoProblem lasso = gen_lasso(small_lasso());
  const Problem* problems[] = {&lasso, &logistic(RegularizerKind::L1)};
  accel::SplitMix64 rng(31);
  for (const Problem* p : problems) {
    const auto cold = reference_solution(*p);
    const auto warm = reference_solution(*p, random_vec(p->dim(), rng));
    EXPECT_TRUE(cold.certified);
    EXPECT_TRUE(warm.certified);
    EXPECT_NEAR(cold.objective, warm.objective, 1e-10) << p->name();
  }
}

TEST(Reference, UncertifiedAtIterationCap) {
  const LassoProblem p = gen_lasso(small_lasso());
  const auto capped = reference_solution(p, std::nullopt, 1e-12, 3);
  EXPECT_FALSE(capped.certified);
  EXPECT_EQ(capped.iterations, 3u);
  EXPECT_THROW(reference_solution(p, Vec::Zero(3)), Error);
}

TEST(StronglyConvexLogistic, ProxGradRateBelowOne) {
  const LogisticProblem& p = logistic(RegularizerKind::L2Squared);
  RunControl control;
  control.budget = 3000;
  control.tol = 0.0;
  const auto trace = km_iterate(make_prox_grad_operator(p), Vec::Zero(p.dim()), control);
  const double slope = log_rate_slope(trace, 1500, 2999);
  EXPECT_LT(std::exp(slope), 1.0 - 1e-6);
}

TEST(LabeledCsv, ParsesLabelsAndSkipsComments) {
  TempDir dir("csv");
  write_text(dir / "d.csv", "# header\n1,2,g\n\n3, 4 ,b\n5,6,+1\n7,8,-1\n9,10,1\n");
  const LabeledData data = read_labeled_csv(dir / "d.csv");
  ASSERT_EQ(data.features.rows(), 5);
  ASSERT_EQ(data.features.cols(), 2);
  EXPECT_EQ(data.features(1, 1), 4.0);
  const std::vector<double> labels(data.labels.data(), data.labels.data() + 5);
  EXPECT_EQ(labels, (std::vector<double>{1, -1, 1, -1, 1}));
}

TEST(LabeledCsv, ErrorsCarryLineNumbers) {
  TempDir dir("csv_errors");
  const auto line_of = [&](const std::string& text) -> std::size_t {
    write_text(dir / "bad.csv", text);
    try {
      read_labeled_csv(dir / "bad.csv");
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("1,2,g\n1,g\n"), 2u);
  EXPECT_EQ(line_of("1,2,g\n# c\n1,x,b\n"), 3u);
  EXPECT_EQ(line_of("1,2,g\n1,2,maybe\n"), 2u);
  EXPECT_EQ(line_of("g\n"), 1u);
  write_text(dir / "empty.csv", "# nothing\n");
  EXPECT_THROW(read_labeled_csv(dir / "empty.csv"), DatasetError);
  EXPECT_THROW(read_labeled_csv(dir / "missing.csv"), Error);
}

TEST(LabeledCsv, SingleClassIsDatasetError) {
  TempDir dir("csv_class");
  write_text(dir / "one.csv", "1,2,g\n3,5,g\n4,1,g\n");
  EXPECT_THROW(load_logistic(dir / "one.csv", RegularizerKind::L1, 0.1), DatasetError);
}

TEST(Normalize, DropsConstantColumns) {
  Mat raw(4, 3);
  raw << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 9;
  const Normalized n = normalize_features(raw);
  EXPECT_EQ(n.dropped, (std::vector<Index>{1}));
  ASSERT_EQ(n.features.cols(), 2);
  EXPECT_NEAR(n.features.col(0).squaredNorm() / 4.0, 1.0, 1e-12);
  EXPECT_THROW(normalize_features(Mat::Ones(3, 2)), DatasetError);
}

TEST(MatrixMarket, LassoRoundTrip) {
  TempDir dir("mtx");
  const LassoProblem p = gen_lasso(small_lasso(5));
  write_lasso(p, dir / "inst");
  const LassoProblem q = read_lasso(dir / "inst");
  EXPECT_EQ(p.A(), q.A());
  EXPECT_EQ(p.b(), q.b());
  EXPECT_EQ(p.truth(), q.truth());
  EXPECT_EQ(p.lambda(), q.lambda());
  EXPECT_EQ(p.seed(), q.seed());
}

TEST(MatrixMarket, MalformedFiles) {
  TempDir dir("mtx_bad");
  const auto line_of = [&](const std::string& text) -> std::size_t {
    write_text(dir / "m.mtx", text);
    try {
      read_matrix_market(dir / "m.mtx");
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("%%MatrixMarket matrix coordinate real general\n"), 1u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix array real general\n% c\n2 x\n"), 3u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix array real general\n2 1\n1.0\n2.0\n3.0\n"), 5u);
  EXPECT_NE(line_of("%%MatrixMarket matrix array real general\n2 1\n1.0\n"), 0u);
  EXPECT_EQ(line_of("%%MatrixMarket matrix array real general\n1 1\nabc\n"), 3u);
  EXPECT_EQ(line_of(""), 1u);
}
