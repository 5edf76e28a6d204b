#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "accel/common.hpp"

namespace accel {

enum class RegularizerKind { None, L1, L2Squared };

/// g(x) = weight * ||x||_1 or (weight/2) ||x||^2.
struct Regularizer {
  RegularizerKind kind = RegularizerKind::None;
  double weight = 0.0;

  double value(const Vec& x) const;
  /// argmin_w step * g(w) + 1/2 ||w - x||^2.
  Vec prox(const Vec& x, double step) const;
};

/// Data for the primal-dual splitting f(u) + h(M u): f is the regularizer,
/// h a smooth term reached through its proximal map.
struct PrimalDualSplit {
  /// Linear map; empty means the identity of size dim().
  Mat M;
  /// Returns a map z -> argmin_w h(w) + sigma/2 ||w - z||^2.
  std::function<std::function<Vec(const Vec&)>(double sigma)> make_prox_h;
  bool identity() const { return M.size() == 0; }
};

/// Composite objective F = f + g with f smooth and g a simple regularizer.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual double smooth_value(const Vec& x) const = 0;
  virtual Vec smooth_gradient(const Vec& x) const = 0;
  /// Lipschitz constant (or the documented upper bound) of the smooth gradient.
  virtual double lipschitz() const = 0;
  /// A solver for w -> argmin_w f(w) + rho/2 ||w - target||^2. The returned
  /// map is pure and may cache factorizations for the given rho.
  virtual std::function<Vec(const Vec&)> smooth_prox_solver(double rho) const = 0;
  virtual PrimalDualSplit primal_dual_split() const = 0;

  const Regularizer& regularizer() const { return regularizer_; }
  double objective(const Vec& x) const { return smooth_value(x) + regularizer_.value(x); }

 protected:
  explicit Problem(Regularizer regularizer) : regularizer_(regularizer) {}

 private:
  Regularizer regularizer_;
};

struct LassoOptions {
  std::uint64_t seed = 0;
  Index rows = 100;
  Index cols = 300;
  Index nonzeros = 90;
  double noise = 0.001;
  /// lambda = lambda_factor * ||A^T b||_inf unless lambda is given.
  double lambda_factor = 0.1;
  std::optional<double> lambda;
};

/// 1/2 ||A x - b||^2 + lambda ||x||_1.
class LassoProblem : public Problem {
 public:
  LassoProblem(Mat A, Vec b, double lambda, Vec truth = {}, std::uint64_t seed = 0);

  std::string name() const override { return "lasso"; }
  Index dim() const override { return A_.cols(); }
  double smooth_value(const Vec& x) const override;
  Vec smooth_gradient(const Vec& x) const override;
  double lipschitz() const override { return lipschitz_; }
  std::function<Vec(const Vec&)> smooth_prox_solver(double rho) const override;
  PrimalDualSplit primal_dual_split() const override;

  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }
  const Vec& truth() const { return truth_; }
  double lambda() const { return regularizer().weight; }
  std::uint64_t seed() const { return seed_; }

 private:
  Mat A_;
  Vec b_;
  Vec truth_;
  std::uint64_t seed_;
  double lipschitz_;
};

/// Synthetic lasso instance from SplitMix64 draws: A column-major, then the
/// support (partial Fisher-Yates), then its values, then the noise.
LassoProblem gen_lasso(const LassoOptions& options);

/// Writes <prefix>.A.mtx, <prefix>.b.mtx and <prefix>.p.mtx (dense matrix market).
void write_lasso(const LassoProblem& problem, const std::filesystem::path& prefix);
/// Reads back a problem written by write_lasso.
LassoProblem read_lasso(const std::filesystem::path& prefix);
void write_matrix_market(const std::filesystem::path& path, const Mat& M,
                         const std::vector<std::string>& comments = {});
Mat read_matrix_market(const std::filesystem::path& path);

/// Mean logistic loss over samples plus a regularizer.
class LogisticProblem : public Problem {
 public:
  /// `features` rows are samples (already normalized); labels are +-1.
  LogisticProblem(Mat features, Vec labels, Regularizer regularizer);

  std::string name() const override;
  Index dim() const override { return features_.cols(); }
  double smooth_value(const Vec& x) const override;
  Vec smooth_gradient(const Vec& x) const override;
  /// max_i ||a_i||^2.
  double lipschitz() const override { return lipschitz_; }
  std::function<Vec(const Vec&)> smooth_prox_solver(double rho) const override;
  PrimalDualSplit primal_dual_split() const override;

  const Mat& features() const { return features_; }
  const Vec& labels() const { return labels_; }
  Index samples() const { return features_.rows(); }

 private:
  Mat features_;
  Vec labels_;
  double lipschitz_;
};

struct LabeledData {
  Mat features;  ///< raw, one row per sample
  Vec labels;    ///< +-1
};

/// Parses "f1,...,fn,label" rows; labels g/b or +-1. Blank and '#' lines are skipped.
LabeledData read_labeled_csv(const std::filesystem::path& path);

struct Normalized {
  Mat features;
  std::vector<Index> dropped;  ///< indices of constant columns removed
};
/// Zero mean and unit (population) variance per column; constant columns dropped.
Normalized normalize_features(const Mat& raw);

LogisticProblem make_logistic(const LabeledData& data, RegularizerKind kind, double weight);
LogisticProblem load_logistic(const std::filesystem::path& path, RegularizerKind kind,
                              double weight);

struct ReferenceSolution {
  double objective = 0.0;  ///< F*
  Vec minimizer;           ///< x*
  double certificate = 0.0;  ///< proximal-gradient residual at x*
  std::size_t iterations = 0;
  bool certified = false;  ///< certificate <= 1e-12
};

/// High-accuracy optimum by restarted FISTA (residual <= 1e-12, at most 1e6 iterations).
ReferenceSolution reference_solution(const Problem& problem, std::optional<Vec> start = {},
                                     double tol = 1e-12, std::size_t max_iterations = 1000000);

}  // namespace accel
