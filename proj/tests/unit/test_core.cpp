#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "nkmart/errors.hpp"
#include "nkmart/estimate.hpp"
#include "nkmart/json_io.hpp"
#include "nkmart/random.hpp"
#include "nkmart/time_grid.hpp"
#include "oracles.hpp"

using namespace nkmart;

TEST(TimeGrid, RejectsBadGrids) {
  EXPECT_THROW(TimeGrid({}), InvalidArgument);
  EXPECT_THROW(TimeGrid({0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(TimeGrid({0.0}), InvalidArgument);
  EXPECT_THROW(make_uniform_grid(1.0, 0), InvalidArgument);
  EXPECT_THROW(make_uniform_grid(-1.0, 4), InvalidArgument);
}

TEST(TimeGrid, UniformGridHitsHorizonExactly) {
  const auto g = make_uniform_grid(0.3, 7);
  EXPECT_EQ(g.size(), 8u);
  EXPECT_EQ(g.horizon(), 0.3);
  EXPECT_NEAR(g.max_step(), 0.3 / 7, 1e-15);
  EXPECT_EQ(g.index_of(0.3), std::optional<std::size_t>(7));
  EXPECT_EQ(g.index_of(0.3 / 7 * 2), std::optional<std::size_t>(2));
  EXPECT_FALSE(g.index_of(0.05).has_value());
  EXPECT_EQ(g.index_at_or_before(0.05), 1u);
  EXPECT_EQ(g.index_at_or_before(10.0), 7u);
}

TEST(Random, DerivedStreamsAreDeterministicAndDistinct) {
  const RandomStreamSpec s{42, 0};
  EXPECT_EQ(s.derive(3), s.derive(3));
  EXPECT_NE(s.derive(3).engine_seed(), s.derive(4).engine_seed());
  EXPECT_NE(s.engine_seed(), (RandomStreamSpec{43, 0}).engine_seed());
  NormalStream a(s.derive(1)), b(s.derive(1));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Random, WorkerCountHonoursEnvironment) {
  setenv("NKMART_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  unsetenv("NKMART_WORKERS");
  EXPECT_GE(worker_count(), 1u);
}

TEST(Estimate, MeanReportMatchesTextbookFormulas) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const auto r = summarize_mean(x, {1, 0});
  EXPECT_DOUBLE_EQ(r.value, 2.5);
  EXPECT_NEAR(r.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-14);
  EXPECT_EQ(r.n_samples, 4u);
  EXPECT_NEAR(r.ci95.hi - r.ci95.lo, 2 * 1.96 * r.std_error, 1e-3);
  EXPECT_EQ(r.seed, (RandomStreamSpec{1, 0}));
}

TEST(Estimate, ProportionReport) {
  const auto r = summarize_proportion(25, 100, {});
  EXPECT_DOUBLE_EQ(r.value, 0.25);
  EXPECT_NEAR(r.std_error, std::sqrt(0.25 * 0.75 / 100), 1e-15);
}

TEST(Estimate, NormalCdfMatchesReferenceValues) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-13);
  EXPECT_NEAR(normal_cdf(-1.959963984540054), 0.025, 1e-13);
}

TEST(Estimate, HillRecoversParetoIndex) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double alpha : {0.8, 1.5, 3.0}) {
    std::vector<double> x(200000);
    for (auto& v : x) v = std::pow(1.0 - u(g), -1.0 / alpha);
    EXPECT_NEAR(hill_tail_index(x, 2000), alpha, 0.1 * alpha) << alpha;
  }
}

TEST(Estimate, DivergenceFlagSeparatesHeavyFromLightTails) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> heavy(80000), light(80000);
  for (auto& v : heavy) v = std::pow(1.0 - u(g), -1.0 / 0.9);
  for (auto& v : light) v = std::exp(n(g));
  EXPECT_TRUE(summarize_mean(heavy, {}).diverging);
  EXPECT_FALSE(summarize_mean(light, {}).diverging);
}

TEST(Estimate, MannWhitneyDetectsShiftOnly) {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(4000), b(4000), c(4000);
  for (auto& v : a) v = n(g);
  for (auto& v : b) v = n(g);
  for (auto& v : c) v = n(g) + 0.2;
  EXPECT_GT(mann_whitney_p_value(a, b), 0.01);
  EXPECT_LT(mann_whitney_p_value(a, c), 1e-6);
  const std::vector<double> tied{1, 1, 1, 2, 2};
  EXPECT_NEAR(mann_whitney_p_value(tied, tied), 1.0, 1e-12);
}

TEST(JsonIo, FifteenSignificantDigitsAndNonFiniteStrings) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333333");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(json_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_TRUE(json_number(std::nan("")).is_string());
  EXPECT_DOUBLE_EQ(json_number(0.1).get<double>(), 0.1);
}

TEST(Oracles, GaussianQuadratureSelfCheck) {
  using nkmart::testing::gaussian_expectation;
  EXPECT_NEAR(gaussian_expectation([](double x) { return x * x; }, 2.0), 2.0, 1e-10);
  EXPECT_NEAR(gaussian_expectation([](double x) { return std::exp(x); }, 1.0), std::exp(0.5), 1e-10);
}
