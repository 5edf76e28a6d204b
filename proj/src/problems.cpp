#include "accel/problems.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "accel/algorithms.hpp"
#include "accel/rng.hpp"

namespace accel {

double Regularizer::value(const Vec& x) const {
  switch (kind) {
    case RegularizerKind::None:
      return 0.0;
    case RegularizerKind::L1:
      return weight * x.lpNorm<1>();
    case RegularizerKind::L2Squared:
      return 0.5 * weight * x.squaredNorm();
  }
  return 0.0;
}

Vec Regularizer::prox(const Vec& x, double step) const {
  switch (kind) {
    case RegularizerKind::None:
      return x;
    case RegularizerKind::L1:
      return prox_l1(x, step * weight);
    case RegularizerKind::L2Squared:
      return prox_l2sq(x, weight, step);
  }
  return x;
}

// ---------------------------------------------------------------- lasso

namespace {

double largest_gram_eigenvalue(const Mat& A) {
  const Mat gram = A.rows() <= A.cols() ? Mat(A * A.transpose()) : Mat(A.transpose() * A);
  Eigen::SelfAdjointEigenSolver<Mat> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw AnalysisError("Gram eigenvalue computation failed");
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

LassoProblem::LassoProblem(Mat A, Vec b, double lambda, Vec truth, std::uint64_t seed)
    : Problem(Regularizer{RegularizerKind::L1, lambda}),
      A_(std::move(A)),
      b_(std::move(b)),
      truth_(std::move(truth)),
      seed_(seed) {
  if (A_.rows() != b_.size()) throw Error("lasso: b must have one entry per row of A");
  if (!(lambda >= 0.0)) throw ConfigError("lasso: lambda must be nonnegative");
  lipschitz_ = largest_gram_eigenvalue(A_);
  if (!(lipschitz_ > 0.0)) throw DatasetError("lasso: A^T A must be nonzero");
}

double LassoProblem::smooth_value(const Vec& x) const { return 0.5 * (A_ * x - b_).squaredNorm(); }

Vec LassoProblem::smooth_gradient(const Vec& x) const { return A_.transpose() * (A_ * x - b_); }

std::function<Vec(const Vec&)> LassoProblem::smooth_prox_solver(double rho) const {
  if (!(rho > 0.0)) throw ConfigError("penalty rho must be positive");
  Mat system = A_.transpose() * A_;
  system.diagonal().array() += rho;
  auto factor = std::make_shared<const Eigen::LLT<Mat>>(system);
  if (factor->info() != Eigen::Success) throw SubproblemError("lasso: factorization failed");
  auto rhs_base = std::make_shared<const Vec>(A_.transpose() * b_);
  return [factor, rhs_base, rho](const Vec& target) -> Vec {
    return factor->solve(*rhs_base + rho * target);
  };
}

PrimalDualSplit LassoProblem::primal_dual_split() const {
  PrimalDualSplit split;
  split.M = A_;
  split.make_prox_h = [b = b_](double sigma) {
    return std::function<Vec(const Vec&)>(
        [b, sigma](const Vec& z) -> Vec { return (b + sigma * z) / (1.0 + sigma); });
  };
  return split;
}

LassoProblem gen_lasso(const LassoOptions& options) {
  if (options.rows <= 0 || options.cols <= 0) throw ConfigError("lasso: dimensions must be positive");
  if (options.nonzeros < 0 || options.nonzeros > options.cols) {
    throw ConfigError("lasso: nonzeros must lie in [0, n]");
  }
  if (!(options.noise >= 0.0)) throw ConfigError("lasso: noise level must be nonnegative");

  std::uint64_t seed = options.seed;
  for (;;) {
    SplitMix64 rng(seed);
    Mat A(options.rows, options.cols);
    for (Index j = 0; j < A.cols(); ++j) {
      for (Index i = 0; i < A.rows(); ++i) A(i, j) = rng.normal();
    }
    const Eigen::RowVectorXd norms = A.colwise().norm();
    if ((norms.array() == 0.0).any()) {
      seed += SplitMix64::kGamma;
      continue;
    }
    A.array().rowwise() /= norms.array();

    std::vector<Index> positions(static_cast<std::size_t>(options.cols));
    std::iota(positions.begin(), positions.end(), Index{0});
    const auto n = static_cast<std::uint64_t>(options.cols);
    for (Index i = 0; i < options.nonzeros; ++i) {
      const auto offset = static_cast<Index>(rng.index(n - static_cast<std::uint64_t>(i)));
      std::swap(positions[static_cast<std::size_t>(i)], positions[static_cast<std::size_t>(i + offset)]);
    }
    Vec truth = Vec::Zero(options.cols);
    for (Index i = 0; i < options.nonzeros; ++i) {
      truth[positions[static_cast<std::size_t>(i)]] = rng.normal();
    }
    Vec noise(options.rows);
    for (Index i = 0; i < options.rows; ++i) noise[i] = options.noise * rng.normal();

    Vec b = A * truth + noise;
    const double lambda =
        options.lambda ? *options.lambda : options.lambda_factor * (A.transpose() * b).lpNorm<Eigen::Infinity>();
    return LassoProblem(std::move(A), std::move(b), lambda, std::move(truth), options.seed);
  }
}

// -------------------------------------------------------- matrix market

void write_matrix_market(const std::filesystem::path& path, const Mat& M,
                         const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "%%MatrixMarket matrix array real general\n";
  for (const auto& c : comments) out << "% " << c << '\n';
  out << M.rows() << ' ' << M.cols() << '\n';
  out << std::setprecision(17);
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) out << M(i, j) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

double parse_double(const std::string& token, std::size_t line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ParseError("not a number: '" + token + "'", line);
  }
  return value;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct MatrixMarketFile {
  Mat matrix;
  std::vector<std::string> comments;
};

MatrixMarketFile read_matrix_market_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) throw ParseError("empty matrix market file", 1);
  ++number;
  if (trim(line) != "%%MatrixMarket matrix array real general") {
    throw ParseError("unsupported matrix market header", number);
  }
  MatrixMarketFile file;
  Index rows = -1, cols = -1;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '%') {
      file.comments.push_back(trim(t.substr(1)));
      continue;
    }
    std::istringstream dims(t);
    if (!(dims >> rows >> cols) || rows < 0 || cols < 0) {
      throw ParseError("bad dimension line", number);
    }
    std::string extra;
    if (dims >> extra) throw ParseError("bad dimension line", number);
    break;
  }
  if (rows < 0) throw ParseError("missing dimension line", number);
  file.matrix.resize(rows, cols);
  Index filled = 0;
  const Index total = rows * cols;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    if (filled >= total) throw ParseError("more values than declared", number);
    file.matrix(filled % rows, filled / rows) = parse_double(t, number);
    ++filled;
  }
  if (filled != total) throw ParseError("fewer values than declared", number);
  return file;
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return prefix.string() + suffix;
}

std::string format_double(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

}  // namespace

Mat read_matrix_market(const std::filesystem::path& path) {
  return read_matrix_market_file(path).matrix;
}

void write_lasso(const LassoProblem& problem, const std::filesystem::path& prefix) {
  const std::vector<std::string> meta{"problem = lasso", "seed = " + std::to_string(problem.seed()),
                                      "lambda = " + format_double(problem.lambda()),
                                      "lipschitz = " + format_double(problem.lipschitz())};
  write_matrix_market(with_suffix(prefix, ".A.mtx"), problem.A(), meta);
  write_matrix_market(with_suffix(prefix, ".b.mtx"), problem.b(), {"right-hand side b"});
  const Vec truth = problem.truth().size() ? problem.truth() : Vec::Zero(problem.dim());
  write_matrix_market(with_suffix(prefix, ".p.mtx"), truth, {"planted sparse vector p"});
}

LassoProblem read_lasso(const std::filesystem::path& prefix) {
  const auto a_file = read_matrix_market_file(with_suffix(prefix, ".A.mtx"));
  const Mat b = read_matrix_market(with_suffix(prefix, ".b.mtx"));
  const Mat p = read_matrix_market(with_suffix(prefix, ".p.mtx"));
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  for (const auto& c : a_file.comments) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(c.substr(0, eq));
    const std::string value = trim(c.substr(eq + 1));
    if (key == "lambda") lambda = parse_double(value, 0);
    if (key == "seed") seed = std::stoull(value);
  }
  if (!lambda) throw ParseError("lasso file lacks a 'lambda' comment", 0);
  if (b.cols() != 1 || p.cols() != 1) throw ParseError("b and p must be column vectors", 0);
  return LassoProblem(a_file.matrix, b.col(0), *lambda, p.col(0), seed);
}

// ------------------------------------------------------------- logistic

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonIterations = 50;

}  // namespace

LogisticProblem::LogisticProblem(Mat features, Vec labels, Regularizer regularizer)
    : Problem(regularizer), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() != labels_.size()) throw DatasetError("one label per sample required");
  if (features_.rows() == 0 || features_.cols() == 0) throw DatasetError("empty dataset");
  if (!((labels_.array() == 1.0) || (labels_.array() == -1.0)).all()) {
    throw DatasetError("labels must be +1 or -1");
  }
  if (!(regularizer.weight >= 0.0)) throw ConfigError("regularization weight must be nonnegative");
  lipschitz_ = features_.rowwise().squaredNorm().maxCoeff();
  if (!(lipschitz_ > 0.0)) throw DatasetError("all samples are zero");
}

std::string LogisticProblem::name() const {
  switch (regularizer().kind) {
    case RegularizerKind::L1:
      return "logistic_l1";
    case RegularizerKind::L2Squared:
      return "logistic_l2";
    case RegularizerKind::None:
      break;
  }
  return "logistic";
}

double LogisticProblem::smooth_value(const Vec& x) const {
  const Vec margins = labels_.cwiseProduct(features_ * x);
  double total = 0.0;
  for (Index i = 0; i < margins.size(); ++i) total += softplus(-margins[i]);
  return total / static_cast<double>(samples());
}

Vec LogisticProblem::smooth_gradient(const Vec& x) const {
  const Vec margins = labels_.cwiseProduct(features_ * x);
  Vec weights(margins.size());
  for (Index i = 0; i < margins.size(); ++i) weights[i] = -labels_[i] * sigmoid(-margins[i]);
  return features_.transpose() * weights / static_cast<double>(samples());
}

std::function<Vec(const Vec&)> LogisticProblem::smooth_prox_solver(double rho) const {
  if (!(rho > 0.0)) throw ConfigError("penalty rho must be positive");
  // Damped Newton on phi(w) = f(w) + rho/2 ||w - target||^2, started at target.
  return [this, rho](const Vec& target) -> Vec {
    const auto phi = [&](const Vec& w) {
      return smooth_value(w) + 0.5 * rho * (w - target).squaredNorm();
    };
    const double m = static_cast<double>(samples());
    Vec w = target;
    double value = phi(w);
    for (int it = 0; it < kNewtonIterations; ++it) {
      const Vec margins = labels_.cwiseProduct(features_ * w);
      Vec weights(margins.size());
      Vec curvature(margins.size());
      for (Index i = 0; i < margins.size(); ++i) {
        const double s = sigmoid(-margins[i]);
        weights[i] = -labels_[i] * s;
        curvature[i] = s * (1.0 - s);
      }
      const Vec gradient = features_.transpose() * weights / m + rho * (w - target);
      if (gradient.norm() <= kNewtonTol) return w;
      Mat hessian = features_.transpose() * curvature.asDiagonal() * features_ / m;
      hessian.diagonal().array() += rho;
      const Vec direction = -hessian.llt().solve(gradient);
      const double slope = gradient.dot(direction);
      double step = 1.0;
      double trial_value = phi(w + direction);
      while (trial_value > value + 1e-4 * step * slope + 1e-15 * std::abs(value) && step > 1e-10) {
        step *= 0.5;
        trial_value = phi(w + step * direction);
      }
      w += step * direction;
      value = trial_value;
    }
    const Vec final_gradient = smooth_gradient(w) + rho * (w - target);
    if (final_gradient.norm() <= kNewtonTol) return w;
    throw SubproblemError("logistic Newton solver stopped at gradient norm " +
                          std::to_string(final_gradient.norm()) + " after " +
                          std::to_string(kNewtonIterations) + " iterations");
  };
}

PrimalDualSplit LogisticProblem::primal_dual_split() const {
  PrimalDualSplit split;
  split.make_prox_h = [this](double sigma) { return smooth_prox_solver(sigma); };
  return split;
}

LabeledData read_labeled_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::string line;
  std::size_t number = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (t.back() == ',') fields.emplace_back();
    if (fields.size() < 2) throw ParseError("need at least one feature and a label", number);
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       number);
    }
    const std::string& label = fields.back();
    if (label == "g" || label == "+1" || label == "1") {
      labels.push_back(1.0);
    } else if (label == "b" || label == "-1") {
      labels.push_back(-1.0);
    } else {
      throw ParseError("unknown label '" + label + "'", number);
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t j = 0; j + 1 < fields.size(); ++j) row.push_back(parse_double(fields[j], number));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetError("dataset " + path.string() + " has no samples");

  LabeledData data;
  data.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
  data.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    data.labels[static_cast<Index>(i)] = labels[i];
  }
  return data;
}

Normalized normalize_features(const Mat& raw) {
  if (raw.rows() == 0) throw DatasetError("no samples to normalize");
  const double m = static_cast<double>(raw.rows());
  Normalized out;
  std::vector<Index> kept;
  std::vector<Vec> columns;
  for (Index j = 0; j < raw.cols(); ++j) {
    const Vec centered = raw.col(j).array() - raw.col(j).mean();
    const double variance = centered.squaredNorm() / m;
    if (!(variance > 0.0)) {
      out.dropped.push_back(j);
      continue;
    }
    columns.push_back(centered / std::sqrt(variance));
  }
  if (columns.empty()) throw DatasetError("every feature column is constant");
  out.features.resize(raw.rows(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.features.col(static_cast<Index>(j)) = columns[j];
  return out;
}

LogisticProblem make_logistic(const LabeledData& data, RegularizerKind kind, double weight) {
  const bool has_positive = (data.labels.array() == 1.0).any();
  const bool has_negative = (data.labels.array() == -1.0).any();
  if (!has_positive || !has_negative) throw DatasetError("dataset needs both classes");
  Normalized normalized = normalize_features(data.features);
  for (Index j : normalized.dropped) {
    warn("dropping constant feature column " + std::to_string(j));
  }
  return LogisticProblem(std::move(normalized.features), data.labels, Regularizer{kind, weight});
}

LogisticProblem load_logistic(const std::filesystem::path& path, RegularizerKind kind,
                              double weight) {
  return make_logistic(read_labeled_csv(path), kind, weight);
}

// ------------------------------------------------------------ reference

ReferenceSolution reference_solution(const Problem& problem, std::optional<Vec> start, double tol,
                                     std::size_t max_iterations) {
  const double L = problem.lipschitz();
  Vec x = start ? *start : Vec::Zero(problem.dim());
  if (x.size() != problem.dim()) throw Error("reference start has the wrong dimension");
  Vec y = x;
  double t = 1.0;
  ReferenceSolution ref;
  for (std::size_t k = 0; k < max_iterations; ++k) {
    Vec next = prox_grad_apply(problem, L, y);
    ref.iterations = k + 1;
    if ((next - y).norm() <= tol) {
      const double certificate = (prox_grad_apply(problem, L, next) - next).norm();
      if (certificate <= tol) {
        x = std::move(next);
        ref.certificate = certificate;
        ref.certified = true;
        break;
      }
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((y - next).dot(next - x) > 0.0) {
      t = 1.0;
      y = next;
    } else {
      y = next + ((t - 1.0) / t_next) * (next - x);
      t = t_next;
    }
    x = std::move(next);
  }
  if (!ref.certified) {
    ref.certificate = (prox_grad_apply(problem, L, x) - x).norm();
    ref.certified = ref.certificate <= tol;
    if (!ref.certified) {
      warn("reference solution for " + problem.name() + " only reached residual " +
           std::to_string(ref.certificate));
    }
  }
  ref.minimizer = x;
  ref.objective = problem.objective(x);
  return ref;
}

}  // namespace accel
