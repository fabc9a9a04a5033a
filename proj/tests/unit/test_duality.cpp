#include <gtest/gtest.h>

#include <cmath>

#include "nkmart/errors.hpp"
#include "nkmart/follmer_duality.hpp"
#include "nkmart/scenarios.hpp"
#include "nkmart/sde_engine.hpp"
#include "oracles.hpp"

using namespace nkmart;
using nkmart::testing::phi_cdf;

namespace {

sde::SimulationParams params(std::size_t n, std::uint64_t seed) {
  sde::SimulationParams p;
  p.n_paths = n;
  p.record_steps = 10;
  p.rng = {seed, 0};
  return p;
}

}  // namespace

TEST(DualPairs, EveryCataloguedPairIsAnHTransform) {
  for (const auto& s : scenarios::catalog()) {
    for (const auto& side : s.sides) {
      ASSERT_TRUE(side.dual.has_value()) << s.name << "/" << side.name;
      EXPECT_NO_THROW(duality::validate_dual_pair(*side.dual, s.probe_points)) << side.dual->label;
      EXPECT_EQ(side.model.dual, std::optional<std::string>(side.dual->q_side.name));
      EXPECT_EQ(side.dual->q_side.dual, std::optional<std::string>(side.model.name));
    }
  }
}

TEST(DualPairs, MismatchedPairIsRejected) {
  const auto bad = scenarios::make_dual_pair(scenarios::bes3_true(), scenarios::bm_absorbed());
  EXPECT_THROW(duality::validate_dual_pair(bad, {StateVec{0.5}, StateVec{2.0}}), StructuralError);
}

TEST(Defect, MissingDualIsUnsupported) {
  EXPECT_THROW(duality::defect_via_dual(std::nullopt, 1.0, params(10, 1)), UnsupportedModel);
}

TEST(Defect, DualOfReciprocalBesselIsAbsorbedBrownianMotion) {
  const auto pair = scenarios::make_scenario("bessel3_pair").side("reciprocal").dual;
  const auto r = duality::defect_via_dual(pair, 1.0, params(20000, 2));
  EXPECT_NEAR(r.value, 2.0 * (1.0 - phi_cdf(1.0)), 0.015);
  EXPECT_EQ(r.n_samples, 20000u);
  EXPECT_EQ(r.seed, (RandomStreamSpec{2, 0}));
}

TEST(Defect, GridTimeRequired) {
  const auto b = sde::simulate(scenarios::bm_absorbed(), params(10, 1));
  EXPECT_THROW(duality::defect_direct(b, 0.55), InvalidArgument);
}

TEST(Ely, GridValidation) {
  const auto b = sde::simulate(scenarios::bm_absorbed(), params(10, 1));
  EXPECT_THROW(duality::defect_via_ely(b, 1.0, duality::log_spaced(1.0, 50.0, 10)), InvalidArgument);
  EXPECT_THROW(duality::defect_via_ely(b, 1.0, {1.0, 0.5, 200.0}), InvalidArgument);
  EXPECT_THROW(duality::log_spaced(0.0, 1.0, 4), InvalidArgument);
  const auto g = duality::log_spaced(0.5, 50.0, 21);
  EXPECT_EQ(g.front(), 0.5);
  EXPECT_EQ(g.back(), 50.0);
  EXPECT_NEAR(g[10], 5.0, 1e-12);
}

TEST(Ely, BoundedQuadraticVariationHasVanishingTail) {
  // Stopped Brownian motion has <Z>_1 <= 1, so nothing reaches the top decade.
  const auto b = sde::simulate(scenarios::bm_absorbed(), params(5000, 3));
  const auto r = duality::defect_via_ely(b, 1.0, duality::default_y_grid());
  EXPECT_EQ(r.verdict, duality::TailVerdict::kVanishingTail);
  EXPECT_EQ(r.estimate.value, 0.0);
}

TEST(EngineProperty, RealizedQuadraticVariationOfZMatchesIntegralIdentity) {
  // <Z> = int Z^2 d<L>; for Brownian L with h = 1 the mean is E int exp(2B - s) ds = e - 1.
  auto p = params(4000, 4);
  const auto b = sde::simulate(scenarios::brownian_motion(0.0, 1.0), p);
  double m = 0.0;
  for (std::size_t q = 0; q < b.n_paths(); ++q) m += b.zqv(q)[10];
  m /= static_cast<double>(b.n_paths());
  EXPECT_NEAR(m, std::exp(1.0) - 1.0, 0.1);
}

TEST(Consistency, ReportSerialisesWithSeeds) {
  const auto pair = scenarios::make_scenario("stopped_bm").default_side().dual;
  const auto r = duality::consistency_report(*pair, 1.0, params(3000, 5));
  EXPECT_TRUE(r.consistent);
  const auto j = duality::to_json(r);
  EXPECT_EQ(j["direct"]["seed"]["master_seed"], 5);
  EXPECT_EQ(j["direct"]["seed"]["stream_index"], j["ely"]["estimate"]["seed"]["stream_index"]);
  EXPECT_NE(j["direct"]["seed"]["stream_index"], j["dual"]["seed"]["stream_index"]);
}
