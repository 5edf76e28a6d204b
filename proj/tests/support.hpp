#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "accel/common.hpp"
#include "accel/operators.hpp"
#include "accel/problems.hpp"
#include "accel/rng.hpp"

namespace accel::testing {

inline Vec random_vec(Index n, SplitMix64& rng, double scale = 1.0) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

inline Mat random_mat(Index rows, Index cols, SplitMix64& rng) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

/// alpha * N + (1 - alpha) I with ||N||_2 = shrink <= 1.
inline AffineOperator random_averaged_affine(Index n, double alpha, std::uint64_t seed,
                                             double shrink = 1.0) {
  SplitMix64 rng(seed);
  Mat N = random_mat(n, n, rng);
  const double norm = Eigen::JacobiSVD<Mat>(N).singularValues()(0);
  N *= shrink / norm;
  return AffineOperator(alpha * N + (1.0 - alpha) * Mat::Identity(n, n), random_vec(n, rng),
                        alpha);
}

/// Symmetric R with the given eigenvalues in a seeded orthonormal basis.
inline AffineOperator symmetric_affine(const Vec& eigenvalues, double alpha, std::uint64_t seed,
                                       bool zero_offset = true) {
  SplitMix64 rng(seed);
  const Index n = eigenvalues.size();
  Eigen::HouseholderQR<Mat> qr(random_mat(n, n, rng));
  const Mat Q = qr.householderQ();
  Vec d = zero_offset ? Vec::Zero(n) : random_vec(n, rng);
  return AffineOperator(Q * eigenvalues.asDiagonal() * Q.transpose(), d, alpha);
}

inline LassoOptions small_lasso(std::uint64_t seed = 3) {
  LassoOptions o;
  o.seed = seed;
  o.rows = 20;
  o.cols = 40;
  o.nonzeros = 8;
  return o;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh directory under the system temp directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("accel_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace accel::testing
