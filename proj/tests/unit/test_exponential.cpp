#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nkmart/errors.hpp"
#include "nkmart/exponential.hpp"
#include "nkmart/time_grid.hpp"

using namespace nkmart;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RandomPath {
  std::vector<double> l, qv;
};

// L = int h dB with a random piecewise-constant integrand, exact <L>.
RandomPath random_path(std::mt19937_64& g, std::size_t n, double dt) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.2, 2.0);
  RandomPath p{{0.0}, {0.0}};
  double h = ud(g);
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 16 == 0) h = ud(g);
    p.l.push_back(p.l.back() + h * std::sqrt(dt) * nd(g));
    p.qv.push_back(p.qv.back() + h * h * dt);
  }
  return p;
}

double roundtrip_rms(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto grid = make_uniform_grid(1.0, n);
  const double dt = 1.0 / static_cast<double>(n);
  double s = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> l{0.0}, qv{0.0};
    for (std::size_t k = 0; k < n; ++k) {
      l.push_back(l.back() + std::sqrt(dt) * nd(g));
      qv.push_back(qv.back() + dt);
    }
    const auto z = expo::stochastic_exponential(l, qv).z;
    const auto back = expo::stochastic_logarithm(z, grid, expo::LogForm::kRatio);
    s += std::pow(back.l.back() - l.back(), 2) + std::pow(back.qv.back() - qv.back(), 2);
  }
  return std::sqrt(s / reps);
}

}  // namespace

TEST(Exponential, DeterministicInputs) {
  const std::vector<double> l{0.0, 1.0, 2.0}, qv{0.0, 1.0, 2.0};
  const auto e = expo::stochastic_exponential(l, qv);
  EXPECT_DOUBLE_EQ(e.z[0], 1.0);
  EXPECT_NEAR(e.z[1], std::exp(0.5), 1e-15);
  EXPECT_NEAR(e.z[2], std::exp(1.0), 1e-15);
  EXPECT_FALSE(e.zero_index.has_value());
  EXPECT_DOUBLE_EQ(e.terminal_value, e.z[2]);
}

TEST(Exponential, ExtendedByZeroAfterExplosion) {
  const std::vector<double> l{0.0, 0.5, 0.7, 0.7}, qv{0.0, 0.5, kInf, kInf};
  const auto e = expo::stochastic_exponential(l, qv);
  EXPECT_EQ(e.zero_index, std::optional<std::size_t>(2));
  EXPECT_EQ(e.z[2], 0.0);
  EXPECT_EQ(e.z[3], 0.0);
  EXPECT_TRUE(e.absorbed_at_zero);
  const std::vector<double> big{0.0, 0.5, 2e6, 3e6};
  EXPECT_EQ(expo::stochastic_exponential(l, big).zero_index, std::optional<std::size_t>(2));
  const auto killed = expo::stochastic_exponential(l, std::vector<double>{0.0, 0.5, 0.6, 0.7},
                                                   PathStatus::exploded_at(1));
  EXPECT_EQ(killed.z[1], 0.0);
}

TEST(Exponential, AbsorbedPathKeepsItsValue) {
  const std::vector<double> l{0.0, 0.3, 9.0}, qv{0.0, 0.2, 5.0};
  const auto e = expo::stochastic_exponential(l, qv, PathStatus::absorbed_at(1));
  EXPECT_DOUBLE_EQ(e.z[2], e.z[1]);
}

TEST(Exponential, RejectsMalformedInput) {
  const std::vector<double> l{0.0, 0.1, 0.2};
  EXPECT_THROW(expo::stochastic_exponential(l, std::vector<double>{0.0, 0.2, 0.1}), InvariantViolation);
  EXPECT_THROW(expo::stochastic_exponential(l, std::vector<double>{0.1, 0.2, 0.3}), InvalidArgument);
  EXPECT_THROW(expo::stochastic_exponential(l, std::vector<double>{0.0, 0.2}), InvalidArgument);
  const auto grid = make_uniform_grid(1.0, 2);
  EXPECT_THROW(expo::stochastic_logarithm(std::vector<double>{0.0, 1.0, 1.0}, grid), InvalidArgument);
  EXPECT_THROW(expo::stochastic_logarithm(std::vector<double>{1.0, -1.0, 1.0}, grid), InvalidArgument);
}

TEST(ExponentialProperty, LogIncrementFormInvertsExactly) {
  std::mt19937_64 g(101);
  const std::size_t n = 256;
  const auto grid = make_uniform_grid(1.0, n);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_path(g, n, 1.0 / n);
    const auto z = expo::stochastic_exponential(p.l, p.qv).z;
    const auto back = expo::stochastic_logarithm(z, grid, expo::LogForm::kLogIncrement);
    const auto z2 = expo::stochastic_exponential(back.l, back.qv).z;
    for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(z2[k] / z[k], 1.0, 1e-10);
  }
}

TEST(ExponentialProperty, QuadraticVariationOfLogarithmIsMonotone) {
  std::mt19937_64 g(102);
  const auto grid = make_uniform_grid(1.0, 64);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_path(g, 64, 1.0 / 64);
    const std::size_t cut = 1 + trial % 63;
    for (std::size_t k = cut; k <= 64; ++k) p.qv[k] = kInf;
    const auto z = expo::stochastic_exponential(p.l, p.qv).z;
    for (auto form : {expo::LogForm::kRatio, expo::LogForm::kLogIncrement}) {
      const auto back = expo::stochastic_logarithm(z, grid, form);
      EXPECT_EQ(back.zero_index, std::optional<std::size_t>(cut));
      for (std::size_t k = 1; k <= 64; ++k) EXPECT_GE(back.qv[k], back.qv[k - 1]);
    }
  }
}

TEST(ExponentialProperty, RatioFormRoundTripConvergesAtOrderOneHalf) {
  const double e1 = roundtrip_rms(256, 7);
  const double e3 = roundtrip_rms(1024, 8);
  EXPECT_NEAR(e3 / e1, 0.5, 0.1);
}
