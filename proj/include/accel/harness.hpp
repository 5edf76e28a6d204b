#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "accel/common.hpp"
#include "accel/operators.hpp"
#include "accel/problems.hpp"
#include "accel/schemes.hpp"

namespace accel {

enum class ProblemKind { Lasso, LogisticL1, LogisticL2 };
enum class AlgorithmKind { ProxGrad, Admm, Condat, Fista, FastAdmm };
enum class SchemeChoice { Plain, Relaxation, Inertia, AltInertia, Orm, Oim, Oaim };

std::string to_string(ProblemKind kind);
std::string to_string(AlgorithmKind kind);
std::string to_string(SchemeChoice scheme);
ProblemKind parse_problem_kind(const std::string& name);
AlgorithmKind parse_algorithm_kind(const std::string& name);
SchemeChoice parse_scheme_choice(const std::string& name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Lasso;
  std::uint64_t seed = 0;
  std::filesystem::path data;  ///< logistic CSV; empty selects the bundled ionosphere file
  /// Regularization weight; defaults to 0.1 ||A^T b||_inf (lasso), 0.1 (l1) or 0.01 (l2).
  std::optional<double> lambda;
};

struct ScenarioConfig {
  ProblemSpec problem;
  AlgorithmKind algorithm = AlgorithmKind::ProxGrad;
  SchemeChoice scheme = SchemeChoice::Plain;
  std::optional<double> parameter;  ///< eta or gamma of a static scheme
  double epsilon = 1e-4;
  bool sublinear_epsilon = false;
  std::size_t budget = 1000;
  double rho = 1.0;
  double tau = 0.5;
  std::optional<double> sigma;
  std::optional<std::filesystem::path> output;
};

/// Parses the INI-style config: [problem] kind seed data lambda,
/// [algorithm] name rho tau sigma, [scheme] name parameter epsilon sublinear,
/// [run] budget out. '#' and ';' start comments.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Averaging constant the algorithm's operator declares.
double declared_alpha(AlgorithmKind algorithm);

/// Rejects inadmissible combinations with ConfigError; performs no compute.
void validate(const ScenarioConfig& config);

/// A constructed problem with its reference optimum.
struct ProblemInstance {
  std::shared_ptr<const Problem> problem;
  ReferenceSolution reference;
};
ProblemInstance build_problem(const ProblemSpec& spec);
/// Path of the ionosphere CSV shipped with the sources.
std::filesystem::path bundled_dataset();

struct TraceRow {
  std::size_t iter = 0;
  double objective_error = 0.0;  ///< clamped below at 1e-16
  double raw_error = 0.0;
  double residual = 0.0;
  double parameter = 0.0;
  bool restarted = false;
};

struct ScenarioSummary {
  std::string label;
  double final_error = 0.0;
  std::size_t applications = 0;
  std::size_t accelerations = 0;
  std::size_t restarts = 0;
  StopReason stop = StopReason::Budget;
  bool diverged = false;
};

struct ScenarioResult {
  std::vector<TraceRow> rows;
  ScenarioSummary summary;
  std::optional<std::string> error;  ///< set when the scenario failed
};

inline constexpr const char* kTraceHeader = "iter,objective_error,residual,parameter,restarted";

/// Runs one scenario. Divergence is reported in the result (summary.diverged,
/// partial rows) rather than thrown; configuration problems throw ConfigError.
ScenarioResult run_scenario(const ScenarioConfig& config, const ProblemInstance& instance);
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Trace CSV with kTraceHeader; a diverged run ends with a row of nan values.
void write_trace_csv(std::ostream& out, const ScenarioResult& result);
/// Unclamped objective errors: "iter,objective_error_raw".
void write_raw_csv(std::ostream& out, const ScenarioResult& result);
/// Writes <path> and <path>.raw.csv, each through a temporary file and rename.
void write_trace_files(const std::filesystem::path& path, const ScenarioResult& result);
std::string format_summary(const ScenarioSummary& summary);

struct SuiteEntry {
  ScenarioConfig config;
  ScenarioResult result;
};
struct SuiteResult {
  std::string name;  ///< <problem>_<family>
  std::vector<SuiteEntry> entries;
};

/// Scenarios compared for an algorithm family: plain, the baseline (FISTA for
/// prox_grad, Fast ADMM for admm, none for condat), ORM, OIM and OAIM.
std::vector<ScenarioConfig> suite_scenarios(const ProblemSpec& problem, AlgorithmKind family,
                                            std::size_t budget, double epsilon = 1e-4);

/// Runs the suite with up to `workers` concurrent scenarios (0: OpenMP default).
SuiteResult compare_suite(const ProblemSpec& problem, AlgorithmKind family, std::size_t budget,
                          double epsilon = 1e-4, int workers = 0);
/// Sequential reference of compare_suite.
SuiteResult compare_suite_serial(const ProblemSpec& problem, AlgorithmKind family,
                                 std::size_t budget, double epsilon = 1e-4);

/// One row per application with <label>_error and <label>_parameter columns.
void write_suite_csv(std::ostream& out, const SuiteResult& suite);
/// Writes <dir>/<name>_<label>.csv per scenario, then <dir>/<name>.csv.
void write_suite_files(const std::filesystem::path& dir, const SuiteResult& suite);

struct SweepCell {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  SchemeTag scheme = SchemeTag::Plain;
  double parameter = 0.0;
  double rate = 0.0;
};

/// best_scheme over lambda_min <= lambda_max on the grid {i / resolution, i < resolution}.
std::vector<SweepCell> sweep_spectrum(int resolution, int workers = 0);
std::vector<SweepCell> sweep_spectrum_serial(int resolution);
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

/// Writes `content` to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace accel
