// accel: run, compare and sweep fixed-point acceleration scenarios.
//
// Exit codes: 0 success, 2 configuration or input error, 3 divergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "accel/harness.hpp"
#include "accel/problems.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kDiverged = 3;

struct Overrides {
  std::string config;
  std::string problem, algo, scheme, data, out;
  double param = 0.0, eps = 0.0, lambda = 0.0, rho = 0.0, tau = 0.0, sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  bool sublinear = false;
};

void add_problem_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--problem", o.problem, "lasso | logistic_l1 | logistic_l2");
  cmd.add_option("--seed", o.seed, "lasso generator seed");
  cmd.add_option("--data", o.data, "logistic dataset CSV (default: bundled ionosphere)");
  cmd.add_option("--lambda", o.lambda, "regularization weight");
}

accel::ScenarioConfig apply(const CLI::App& cmd, const Overrides& o) {
  accel::ScenarioConfig c = o.config.empty() ? accel::ScenarioConfig{} : accel::load_config(o.config);
  const auto given = [&](const char* name) {
    const auto* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--problem")) c.problem.kind = accel::parse_problem_kind(o.problem);
  if (given("--seed")) c.problem.seed = o.seed;
  if (given("--data")) c.problem.data = o.data;
  if (given("--lambda")) c.problem.lambda = o.lambda;
  if (given("--algo")) c.algorithm = accel::parse_algorithm_kind(o.algo);
  if (given("--scheme")) c.scheme = accel::parse_scheme_choice(o.scheme);
  if (given("--param")) c.parameter = o.param;
  if (given("--eps")) c.epsilon = o.eps;
  if (given("--sublinear")) c.sublinear_epsilon = o.sublinear;
  if (given("--budget")) c.budget = o.budget;
  if (given("--rho")) c.rho = o.rho;
  if (given("--tau")) c.tau = o.tau;
  if (given("--sigma")) c.sigma = o.sigma;
  if (given("--out")) c.output = o.out;
  return c;
}

int run_command(const CLI::App& cmd, const Overrides& o) {
  const accel::ScenarioConfig config = apply(cmd, o);
  accel::validate(config);
  const accel::ScenarioResult result = accel::run_scenario(config);
  if (config.output) {
    accel::write_trace_files(*config.output, result);
    std::cout << accel::format_summary(result.summary) << '\n';
  } else {
    accel::write_trace_csv(std::cout, result);
    std::cerr << accel::format_summary(result.summary) << '\n';
  }
  if (result.summary.diverged) {
    std::cerr << "error: " << result.error.value_or("diverged") << '\n';
    return kDiverged;
  }
  return 0;
}

int compare_command(const CLI::App& cmd, const Overrides& o, int workers) {
  const accel::ScenarioConfig defaults = apply(cmd, o);
  const std::string dir = o.out.empty() ? "results" : o.out;
  const accel::SuiteResult suite = accel::compare_suite(defaults.problem, defaults.algorithm,
                                                        defaults.budget, defaults.epsilon, workers);
  accel::write_suite_files(dir, suite);
  int status = 0;
  for (const auto& entry : suite.entries) {
    std::cout << accel::format_summary(entry.result.summary) << '\n';
    if (entry.result.error) std::cerr << "error: " << *entry.result.error << '\n';
    if (entry.result.summary.diverged) status = kDiverged;
  }
  std::cout << "wrote " << (std::filesystem::path(dir) / (suite.name + ".csv")).string() << '\n';
  return status;
}

int sweep_command(int resolution, const std::string& out, int workers) {
  const auto cells = accel::sweep_spectrum(resolution, workers);
  if (out.empty()) {
    accel::write_sweep_csv(std::cout, cells);
  } else {
    std::ostringstream csv;
    accel::write_sweep_csv(csv, cells);
    accel::write_file_atomic(out, csv.str());
  }
  return 0;
}

int gen_data_command(const accel::LassoOptions& options, const std::string& prefix) {
  const accel::LassoProblem problem = accel::gen_lasso(options);
  accel::write_lasso(problem, prefix);
  std::cout << "wrote " << prefix << ".A.mtx, " << prefix << ".b.mtx, " << prefix
            << ".p.mtx (lambda=" << problem.lambda() << ", L=" << problem.lipschitz() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Averaged-operator acceleration harness"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "run one scenario and emit its trace CSV");
  run->add_option("--config", run_opts.config, "INI config file");
  add_problem_options(*run, run_opts);
  run->add_option("--algo", run_opts.algo, "prox_grad | admm | condat | fista | fast_admm");
  run->add_option("--scheme", run_opts.scheme,
                  "plain | relaxation | inertia | alt_inertia | orm | oim | oaim");
  run->add_option("--param", run_opts.param, "eta or gamma of a static scheme");
  run->add_option("--budget", run_opts.budget, "operator applications");
  run->add_option("--eps", run_opts.eps, "online safeguard epsilon");
  run->add_flag("--sublinear", run_opts.sublinear, "use epsilon / sqrt(l) for OIM/OAIM");
  run->add_option("--rho", run_opts.rho, "ADMM penalty");
  run->add_option("--tau", run_opts.tau, "Condat primal step");
  run->add_option("--sigma", run_opts.sigma, "Condat dual step");
  run->add_option("--out", run_opts.out, "trace CSV path (stdout if omitted)");

  Overrides cmp_opts;
  int cmp_workers = 0;
  auto* compare = app.add_subcommand("compare", "run the comparison suite of one algorithm family");
  compare->add_option("--config", cmp_opts.config, "INI config file (problem, budget, epsilon)");
  add_problem_options(*compare, cmp_opts);
  compare->add_option("--algo", cmp_opts.algo, "prox_grad | admm | condat");
  compare->add_option("--budget", cmp_opts.budget, "operator applications per scenario");
  compare->add_option("--eps", cmp_opts.eps, "online safeguard epsilon");
  compare->add_option("--out", cmp_opts.out, "output directory (default: results)");
  compare->add_option("--workers", cmp_workers, "concurrent scenarios (0: all cores)");

  int resolution = 16;
  int sweep_workers = 0;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "best static scheme over a spectrum grid");
  sweep->add_option("--resolution", resolution, "grid points per axis (>= 8)");
  sweep->add_option("--out", sweep_out, "CSV path (stdout if omitted)");
  sweep->add_option("--workers", sweep_workers, "concurrent cells (0: all cores)");

  accel::LassoOptions lasso;
  std::string prefix;
  double lasso_lambda = 0.0;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic lasso instance as matrix market");
  gen->add_option("--seed", lasso.seed, "generator seed");
  gen->add_option("--rows", lasso.rows, "samples m");
  gen->add_option("--cols", lasso.cols, "features n");
  gen->add_option("--nnz", lasso.nonzeros, "nonzeros of the planted vector");
  gen->add_option("--noise", lasso.noise, "noise standard deviation");
  gen->add_option("--lambda", lasso_lambda, "regularization weight (default 0.1 ||A^T b||_inf)");
  gen->add_option("--out", prefix, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return run_command(*run, run_opts);
    if (*compare) return compare_command(*compare, cmp_opts, cmp_workers);
    if (*sweep) return sweep_command(resolution, sweep_out, sweep_workers);
    if (*gen) {
      if (gen->get_option("--lambda")->count()) lasso.lambda = lasso_lambda;
      return gen_data_command(lasso, prefix);
    }
  } catch (const accel::DivergedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const accel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
