#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace accel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or parameter is outside its admissible range.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Eigen-solver or other spectral analysis failure.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

/// The spectrum handed to an optimal-parameter formula is not in its domain.
class InvalidSpectrumError : public Error {
 public:
  using Error::Error;
};

/// An inner argmin did not reach its tolerance.
class SubproblemError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV row, matrix market file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// The dataset parsed but cannot define the requested problem.
class DatasetError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario configuration; detected before any compute.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// How out-of-range scheme parameters are handled.
enum class Admissibility { Enforce, Warn };

/// Writes a one-line warning to stderr.
void warn(const std::string& message);

}  // namespace accel
