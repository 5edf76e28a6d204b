#include "accel/harness.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "accel/algorithms.hpp"
#include "accel/online.hpp"

namespace accel {

namespace {

template <class Enum, std::size_t N>
Enum lookup(const std::array<std::pair<const char*, Enum>, N>& table, const std::string& name,
            const char* what) {
  for (const auto& [key, value] : table) {
    if (name == key) return value;
  }
  std::string known;
  for (const auto& entry : table) known += std::string(known.empty() ? "" : ", ") + entry.first;
  throw ConfigError("unknown " + std::string(what) + " '" + name + "' (expected one of " + known +
                    ")");
}

template <class Enum, std::size_t N>
std::string name_of(const std::array<std::pair<const char*, Enum>, N>& table, Enum value) {
  for (const auto& [key, v] : table) {
    if (v == value) return key;
  }
  return "unknown";
}

constexpr std::array<std::pair<const char*, ProblemKind>, 3> kProblems{{
    {"lasso", ProblemKind::Lasso},
    {"logistic_l1", ProblemKind::LogisticL1},
    {"logistic_l2", ProblemKind::LogisticL2},
}};
constexpr std::array<std::pair<const char*, AlgorithmKind>, 5> kAlgorithms{{
    {"prox_grad", AlgorithmKind::ProxGrad},
    {"admm", AlgorithmKind::Admm},
    {"condat", AlgorithmKind::Condat},
    {"fista", AlgorithmKind::Fista},
    {"fast_admm", AlgorithmKind::FastAdmm},
}};
constexpr std::array<std::pair<const char*, SchemeChoice>, 7> kSchemes{{
    {"plain", SchemeChoice::Plain},
    {"relaxation", SchemeChoice::Relaxation},
    {"inertia", SchemeChoice::Inertia},
    {"alt_inertia", SchemeChoice::AltInertia},
    {"orm", SchemeChoice::Orm},
    {"oim", SchemeChoice::Oim},
    {"oaim", SchemeChoice::Oaim},
}};

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& value, const std::string& key, std::size_t line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
    throw ConfigError("line " + std::to_string(line) + ": '" + key + "' needs a number, got '" +
                      value + "'");
  }
  return x;
}

std::uint64_t parse_count(const std::string& value, const std::string& key, std::size_t line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE || value.front() == '-') {
    throw ConfigError("line " + std::to_string(line) + ": '" + key +
                      "' needs a nonnegative integer, got '" + value + "'");
  }
  return x;
}

bool parse_flag(const std::string& value, const std::string& key, std::size_t line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": '" + key + "' needs true or false");
}

std::size_t minimum_budget(SchemeChoice scheme) {
  switch (scheme) {
    case SchemeChoice::Orm:
      return 2;
    case SchemeChoice::Oim:
      return 4;
    case SchemeChoice::Oaim:
      return 8;
    default:
      return 1;
  }
}

bool is_baseline(AlgorithmKind algorithm) {
  return algorithm == AlgorithmKind::Fista || algorithm == AlgorithmKind::FastAdmm;
}

std::string scenario_label(const ScenarioConfig& config) {
  return is_baseline(config.algorithm) ? to_string(config.algorithm) : to_string(config.scheme);
}

}  // namespace

std::string to_string(ProblemKind kind) { return name_of(kProblems, kind); }
std::string to_string(AlgorithmKind kind) { return name_of(kAlgorithms, kind); }
std::string to_string(SchemeChoice scheme) { return name_of(kSchemes, scheme); }
ProblemKind parse_problem_kind(const std::string& name) {
  return lookup(kProblems, name, "problem");
}
AlgorithmKind parse_algorithm_kind(const std::string& name) {
  return lookup(kAlgorithms, name, "algorithm");
}
SchemeChoice parse_scheme_choice(const std::string& name) {
  return lookup(kSchemes, name, "scheme");
}

// --------------------------------------------------------------- config

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig config;
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    const std::string text = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("line " + std::to_string(line) + ": bad section");
      section = trim(text.substr(1, text.size() - 2));
      if (section != "problem" && section != "algorithm" && section != "scheme" &&
          section != "run") {
        throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line) + ": key outside of a section");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (value.empty()) {
      throw ConfigError("line " + std::to_string(line) + ": '" + key + "' has no value");
    }
    const std::string qualified = section + "." + key;
    if (qualified == "problem.kind") {
      config.problem.kind = parse_problem_kind(value);
    } else if (qualified == "problem.seed") {
      config.problem.seed = parse_count(value, key, line);
    } else if (qualified == "problem.data") {
      config.problem.data = value;
    } else if (qualified == "problem.lambda") {
      config.problem.lambda = parse_real(value, key, line);
    } else if (qualified == "algorithm.name") {
      config.algorithm = parse_algorithm_kind(value);
    } else if (qualified == "algorithm.rho") {
      config.rho = parse_real(value, key, line);
    } else if (qualified == "algorithm.tau") {
      config.tau = parse_real(value, key, line);
    } else if (qualified == "algorithm.sigma") {
      config.sigma = parse_real(value, key, line);
    } else if (qualified == "scheme.name") {
      config.scheme = parse_scheme_choice(value);
    } else if (qualified == "scheme.parameter") {
      config.parameter = parse_real(value, key, line);
    } else if (qualified == "scheme.epsilon") {
      config.epsilon = parse_real(value, key, line);
    } else if (qualified == "scheme.sublinear") {
      config.sublinear_epsilon = parse_flag(value, key, line);
    } else if (qualified == "run.budget") {
      config.budget = parse_count(value, key, line);
    } else if (qualified == "run.out") {
      config.output = value;
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "' in [" +
                        section + "]");
    }
  }
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

double declared_alpha(AlgorithmKind algorithm) {
  switch (algorithm) {
    case AlgorithmKind::ProxGrad:
    case AlgorithmKind::Fista:
      return 2.0 / 3.0;
    case AlgorithmKind::Admm:
    case AlgorithmKind::Condat:
    case AlgorithmKind::FastAdmm:
      return 0.5;
  }
  return 0.5;
}

void validate(const ScenarioConfig& config) {
  const double alpha = declared_alpha(config.algorithm);
  const std::string scheme = to_string(config.scheme);
  if (is_baseline(config.algorithm) && config.scheme != SchemeChoice::Plain) {
    throw ConfigError(to_string(config.algorithm) + " is a baseline and only runs as 'plain'");
  }
  if (config.budget < minimum_budget(config.scheme)) {
    throw ConfigError(scheme + " needs a budget of at least " +
                      std::to_string(minimum_budget(config.scheme)));
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (config.scheme == SchemeChoice::Orm && config.epsilon > 2.0 * std::min(alpha, 1.0 - alpha)) {
    throw ConfigError("ORM needs epsilon <= 2 min(alpha, 1 - alpha) = " +
                      format_number(2.0 * std::min(alpha, 1.0 - alpha)));
  }
  if (!(config.rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(config.tau > 0.0)) throw ConfigError("tau must be positive");
  if (config.sigma && !(*config.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (config.problem.lambda && !(*config.problem.lambda >= 0.0)) {
    throw ConfigError("lambda must be nonnegative");
  }
  if (config.problem.kind != ProblemKind::Lasso) {
    const auto path = config.problem.data.empty() ? bundled_dataset() : config.problem.data;
    if (!std::filesystem::exists(path)) throw ConfigError("dataset not found: " + path.string());
  }
  switch (config.scheme) {
    case SchemeChoice::Relaxation:
      if (!config.parameter) throw ConfigError("relaxation needs a parameter (eta)");
      if (!(*config.parameter > 0.0 && *config.parameter < 1.0 / alpha)) {
        throw ConfigError("relaxation parameter must lie in (0, 1/alpha) = (0, " +
                          format_number(1.0 / alpha) + ")");
      }
      break;
    case SchemeChoice::Inertia:
      if (!config.parameter) throw ConfigError("inertia needs a parameter (gamma)");
      if (!(*config.parameter >= 0.0)) throw ConfigError("inertia parameter must be >= 0");
      break;
    case SchemeChoice::AltInertia:
      if (!config.parameter) throw ConfigError("alt_inertia needs a parameter (gamma)");
      if (!(*config.parameter >= 0.0 && *config.parameter <= (1.0 - alpha) / alpha)) {
        throw ConfigError("alt_inertia parameter must lie in [0, (1-alpha)/alpha] = [0, " +
                          format_number((1.0 - alpha) / alpha) + "]");
      }
      break;
    default:
      break;
  }
}

// ------------------------------------------------------------- problems

std::filesystem::path bundled_dataset() { return ACCEL_BUNDLED_DATA; }

ProblemInstance build_problem(const ProblemSpec& spec) {
  ProblemInstance instance;
  switch (spec.kind) {
    case ProblemKind::Lasso: {
      LassoOptions options;
      options.seed = spec.seed;
      options.lambda = spec.lambda;
      instance.problem = std::make_shared<const LassoProblem>(gen_lasso(options));
      break;
    }
    case ProblemKind::LogisticL1:
    case ProblemKind::LogisticL2: {
      const bool l1 = spec.kind == ProblemKind::LogisticL1;
      const double weight = spec.lambda ? *spec.lambda : (l1 ? 0.1 : 0.01);
      const auto path = spec.data.empty() ? bundled_dataset() : spec.data;
      instance.problem = std::make_shared<const LogisticProblem>(load_logistic(
          path, l1 ? RegularizerKind::L1 : RegularizerKind::L2Squared, weight));
      break;
    }
  }
  instance.reference = reference_solution(*instance.problem);
  return instance;
}

// ------------------------------------------------------------ scenarios

ScenarioResult run_scenario(const ScenarioConfig& config, const ProblemInstance& instance) {
  validate(config);
  const Problem& problem = *instance.problem;
  const double optimum = instance.reference.objective;

  std::vector<double> errors;
  errors.reserve(config.budget);
  std::function<Vec(const Vec&)> primal = [](const Vec& x) { return x; };

  RunControl control;
  control.budget = config.budget;
  control.tol = 0.0;
  control.observer = [&](std::size_t, const Vec& x) {
    errors.push_back(problem.objective(primal(x)) - optimum);
  };

  std::optional<AveragedOperator> op;
  std::optional<AdmmSplit> admm;
  Vec x0;
  switch (config.algorithm) {
    case AlgorithmKind::ProxGrad:
    case AlgorithmKind::Fista:
      op.emplace(make_prox_grad_operator(problem));
      x0 = Vec::Zero(problem.dim());
      break;
    case AlgorithmKind::Admm:
    case AlgorithmKind::FastAdmm:
      admm.emplace(problem, config.rho);
      op.emplace(make_admm_operator(*admm));
      x0 = Vec::Zero(problem.dim());
      break;
    case AlgorithmKind::Condat: {
      const CondatSplit split(problem, config.tau, config.sigma);
      op.emplace(make_condat_operator(split));
      x0 = Vec::Zero(op->dim());
      break;
    }
  }
  primal = [&op](const Vec& x) { return op->primal(x); };

  OnlineOptions online;
  online.epsilon = config.epsilon;
  online.sublinear_epsilon = config.sublinear_epsilon;

  ScenarioResult result;
  result.summary.label = scenario_label(config);
  IterationTrace trace;
  try {
    if (config.algorithm == AlgorithmKind::Fista) {
      trace = fista_run(problem, x0, control);
    } else if (config.algorithm == AlgorithmKind::FastAdmm) {
      trace = fast_admm_run(*admm, x0, x0, control);
    } else {
      switch (config.scheme) {
        case SchemeChoice::Plain:
          trace = km_iterate(*op, x0, control);
          break;
        case SchemeChoice::Relaxation:
          trace = run_scheme(*op, Relaxation{*config.parameter}, x0, control);
          break;
        case SchemeChoice::Inertia:
          trace = run_scheme(*op, Inertia{*config.parameter}, x0, control);
          break;
        case SchemeChoice::AltInertia:
          trace = run_scheme(*op, AltInertia{*config.parameter}, x0, control);
          break;
        case SchemeChoice::Orm:
          trace = orm_run(*op, x0, online, control);
          break;
        case SchemeChoice::Oim:
          trace = oim_run(*op, x0, online, control);
          break;
        case SchemeChoice::Oaim:
          trace = oaim_run(*op, x0, online, control);
          break;
      }
    }
  } catch (const DivergedError& e) {
    trace = e.partial();
    result.summary.diverged = true;
    result.error = e.what();
  }

  const std::size_t n = std::min(trace.size(), errors.size());
  result.rows.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    result.rows.push_back(TraceRow{j + 1, std::max(errors[j], 1e-16), errors[j],
                                   trace.residuals[j], trace.parameters[j],
                                   static_cast<bool>(trace.restarts[j])});
  }
  auto& summary = result.summary;
  summary.applications = trace.size();
  summary.final_error = n ? errors[n - 1] : std::nan("");
  summary.restarts = trace.restart_count();
  summary.stop = trace.stop;
  if (config.scheme == SchemeChoice::Orm) {
    summary.accelerations = static_cast<std::size_t>(
        std::count_if(trace.parameters.begin(), trace.parameters.end(),
                      [](double eta) { return eta != 1.0; }));
  } else {
    summary.accelerations = static_cast<std::size_t>(
        std::count_if(trace.blocks.begin(), trace.blocks.end(), [](const BlockRecord& b) {
          return b.outcome == BlockRecord::Outcome::Accelerated;
        }));
  }
  return result;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate(config);
  return run_scenario(config, build_problem(config.problem));
}

void write_trace_csv(std::ostream& out, const ScenarioResult& result) {
  out << kTraceHeader << '\n';
  for (const auto& row : result.rows) {
    out << row.iter << ',' << format_number(row.objective_error) << ','
        << format_number(row.residual) << ',' << format_number(row.parameter) << ','
        << (row.restarted ? 1 : 0) << '\n';
  }
  if (result.summary.diverged) out << result.rows.size() + 1 << ",nan,nan,nan,0\n";
}

void write_raw_csv(std::ostream& out, const ScenarioResult& result) {
  out << "iter,objective_error_raw\n";
  for (const auto& row : result.rows) out << row.iter << ',' << format_number(row.raw_error) << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path temporary = path;
  temporary += ".tmp";
  {
    std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + temporary.string());
    out << content;
    if (!out) throw Error("failed writing " + temporary.string());
  }
  std::filesystem::rename(temporary, path);
}

void write_trace_files(const std::filesystem::path& path, const ScenarioResult& result) {
  std::ostringstream trace, raw;
  write_trace_csv(trace, result);
  write_raw_csv(raw, result);
  write_file_atomic(path, trace.str());
  std::filesystem::path sidecar = path;
  sidecar += ".raw.csv";
  write_file_atomic(sidecar, raw.str());
}

std::string format_summary(const ScenarioSummary& s) {
  std::ostringstream out;
  out << "scenario=" << s.label << " applications=" << s.applications
      << " final_error=" << format_number(s.final_error) << " accelerations=" << s.accelerations
      << " restarts=" << s.restarts << " stop="
      << (s.diverged ? "diverged" : s.stop == StopReason::Converged ? "converged" : "budget");
  return out.str();
}

// ---------------------------------------------------------------- suite

std::vector<ScenarioConfig> suite_scenarios(const ProblemSpec& problem, AlgorithmKind family,
                                            std::size_t budget, double epsilon) {
  if (is_baseline(family)) {
    throw ConfigError("compare takes an algorithm family: prox_grad, admm or condat");
  }
  ScenarioConfig base;
  base.problem = problem;
  base.algorithm = family;
  base.budget = budget;
  base.epsilon = epsilon;
  std::vector<ScenarioConfig> scenarios;
  scenarios.push_back(base);
  if (family != AlgorithmKind::Condat) {
    ScenarioConfig baseline = base;
    baseline.algorithm = family == AlgorithmKind::ProxGrad ? AlgorithmKind::Fista
                                                           : AlgorithmKind::FastAdmm;
    scenarios.push_back(baseline);
  }
  for (SchemeChoice s : {SchemeChoice::Orm, SchemeChoice::Oim, SchemeChoice::Oaim}) {
    ScenarioConfig online = base;
    online.scheme = s;
    scenarios.push_back(online);
  }
  for (const auto& s : scenarios) validate(s);
  return scenarios;
}

namespace {

SuiteEntry run_entry(const ScenarioConfig& config, const ProblemInstance& instance) {
  SuiteEntry entry{config, {}};
  try {
    entry.result = run_scenario(config, instance);
  } catch (const std::exception& e) {
    entry.result.summary.label = scenario_label(config);
    entry.result.error = e.what();
  }
  return entry;
}

std::string suite_name(const ProblemSpec& problem, AlgorithmKind family) {
  return to_string(problem.kind) + "_" + to_string(family);
}

}  // namespace

SuiteResult compare_suite(const ProblemSpec& problem, AlgorithmKind family, std::size_t budget,
                          double epsilon, int workers) {
  const auto scenarios = suite_scenarios(problem, family, budget, epsilon);
  const ProblemInstance instance = build_problem(problem);
  SuiteResult suite{suite_name(problem, family), std::vector<SuiteEntry>(scenarios.size())};
  const auto count = static_cast<std::ptrdiff_t>(scenarios.size());
  if (workers > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      suite.entries[static_cast<std::size_t>(i)] =
          run_entry(scenarios[static_cast<std::size_t>(i)], instance);
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      suite.entries[static_cast<std::size_t>(i)] =
          run_entry(scenarios[static_cast<std::size_t>(i)], instance);
    }
  }
  return suite;
}

SuiteResult compare_suite_serial(const ProblemSpec& problem, AlgorithmKind family,
                                 std::size_t budget, double epsilon) {
  const auto scenarios = suite_scenarios(problem, family, budget, epsilon);
  const ProblemInstance instance = build_problem(problem);
  SuiteResult suite{suite_name(problem, family), {}};
  for (const auto& config : scenarios) suite.entries.push_back(run_entry(config, instance));
  return suite;
}

void write_suite_csv(std::ostream& out, const SuiteResult& suite) {
  out << "iter";
  std::size_t rows = 0;
  for (const auto& entry : suite.entries) {
    const auto& label = entry.result.summary.label;
    out << ',' << label << "_error," << label << "_parameter";
    rows = std::max(rows, entry.result.rows.size());
  }
  out << '\n';
  for (std::size_t j = 0; j < rows; ++j) {
    out << j + 1;
    for (const auto& entry : suite.entries) {
      const auto& r = entry.result.rows;
      if (j < r.size()) {
        out << ',' << format_number(r[j].objective_error) << ',' << format_number(r[j].parameter);
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
}

void write_suite_files(const std::filesystem::path& dir, const SuiteResult& suite) {
  for (const auto& entry : suite.entries) {
    write_trace_files(dir / (suite.name + "_" + entry.result.summary.label + ".csv"),
                      entry.result);
  }
  std::ostringstream combined;
  write_suite_csv(combined, suite);
  write_file_atomic(dir / (suite.name + ".csv"), combined.str());
}

// ---------------------------------------------------------------- sweep

namespace {

std::vector<std::pair<int, int>> sweep_grid(int resolution) {
  if (resolution < 8) throw ConfigError("sweep resolution must be at least 8");
  std::vector<std::pair<int, int>> grid;
  for (int i = 0; i < resolution; ++i) {
    for (int j = i; j < resolution; ++j) grid.emplace_back(i, j);
  }
  return grid;
}

SweepCell sweep_cell(int i, int j, int resolution) {
  const double lo = static_cast<double>(i) / resolution;
  const double hi = static_cast<double>(j) / resolution;
  const BestScheme best = best_scheme(lo, hi);
  return SweepCell{lo, hi, best.scheme, best.parameter, best.rate};
}

}  // namespace

std::vector<SweepCell> sweep_spectrum(int resolution, int workers) {
  const auto grid = sweep_grid(resolution);
  std::vector<SweepCell> cells(grid.size());
  const auto count = static_cast<std::ptrdiff_t>(grid.size());
  if (workers > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
      const auto [i, j] = grid[static_cast<std::size_t>(c)];
      cells[static_cast<std::size_t>(c)] = sweep_cell(i, j, resolution);
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < count; ++c) {
      const auto [i, j] = grid[static_cast<std::size_t>(c)];
      cells[static_cast<std::size_t>(c)] = sweep_cell(i, j, resolution);
    }
  }
  return cells;
}

std::vector<SweepCell> sweep_spectrum_serial(int resolution) {
  std::vector<SweepCell> cells;
  for (const auto& [i, j] : sweep_grid(resolution)) cells.push_back(sweep_cell(i, j, resolution));
  return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "lambda_min,lambda_max,scheme,parameter,rate\n";
  for (const auto& c : cells) {
    out << format_number(c.lambda_min) << ',' << format_number(c.lambda_max) << ','
        << to_string(c.scheme) << ',' << format_number(c.parameter) << ','
        << format_number(c.rate) << '\n';
  }
}

}  // namespace accel
