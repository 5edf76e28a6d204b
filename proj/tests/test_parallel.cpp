#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "accel/algorithms.hpp"
#include "accel/harness.hpp"
#include "support.hpp"

using namespace accel;

namespace {

std::string suite_csv(const SuiteResult& suite) {
  std::ostringstream out;
  write_suite_csv(out, suite);
  return out.str();
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  write_sweep_csv(out, cells);
  return out.str();
}

}  // namespace

TEST(Parallel, SweepMatchesSerial) {
  const auto serial = sweep_csv(sweep_spectrum_serial(12));
  EXPECT_EQ(sweep_csv(sweep_spectrum(12)), serial);
  EXPECT_EQ(sweep_csv(sweep_spectrum(12, 3)), serial);
}

TEST(Parallel, SuiteMatchesSerial) {
  ProblemSpec spec;
  spec.seed = 4;
  for (auto family : {AlgorithmKind::ProxGrad, AlgorithmKind::Admm, AlgorithmKind::Condat}) {
    const auto serial = compare_suite_serial(spec, family, 150);
    const auto parallel = compare_suite(spec, family, 150, 1e-4, 2);
    ASSERT_EQ(parallel.entries.size(), serial.entries.size());
    EXPECT_EQ(suite_csv(parallel), suite_csv(serial)) << to_string(family);
    for (std::size_t i = 0; i < serial.entries.size(); ++i) {
      EXPECT_EQ(parallel.entries[i].result.summary.label, serial.entries[i].result.summary.label);
      EXPECT_EQ(parallel.entries[i].result.summary.restarts,
                serial.entries[i].result.summary.restarts);
    }
  }
}

TEST(Parallel, AveragednessMatchesSerial) {
  const auto T = accel::testing::random_averaged_affine(15, 0.5, 21).as_operator();
  const auto parallel = check_averagedness(T, 300, 5);
  const auto serial = check_averagedness_serial(T, 300, 5);
  EXPECT_EQ(parallel.passed, serial.passed);
  EXPECT_EQ(parallel.worst_violation, serial.worst_violation);

  const LassoProblem lasso = gen_lasso(accel::testing::small_lasso());
  const CondatSplit split(lasso);
  const auto condat = make_condat_operator(split);
  const auto p = check_averagedness(condat, 80, 9);
  const auto s = check_averagedness_serial(condat, 80, 9);
  EXPECT_TRUE(p.passed);
  EXPECT_EQ(p.worst_violation, s.worst_violation);
}
