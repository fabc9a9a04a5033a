#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "nkmart/estimate.hpp"
#include "nkmart/model.hpp"
#include "nkmart/path_bundle.hpp"
#include "nkmart/sde_engine.hpp"

namespace nkmart::duality {

// Checks q drift = p drift + diffusion * h and q integrand = -h at the probe points.
// Throws StructuralError on a mismatch.
void validate_dual_pair(const DualPair& pair, const std::vector<StateVec>& probes,
                        double tolerance = 1e-12);

// 1 - E[Z_t]; t must be a grid time.
EstimateReport defect_direct(const PathBundle& bundle, double t);

// Probability that the dual process explodes by t. Throws UnsupportedModel without a dual.
EstimateReport defect_via_dual(const std::optional<DualPair>& pair, double t,
                               const sde::SimulationParams& params);
EstimateReport defect_via_dual(const PathBundle& dual_bundle, double t);

enum class TailVerdict {
  kPlateau,        // y P(sqrt(<Z>_t) >= y) settles over the top decade of y
  kVanishingTail,  // no path reaches the top decade: the defect estimate is 0
  kInconclusive,
};

const char* to_string(TailVerdict v);

struct ElyPoint {
  double y = 0.0;
  std::size_t exceed_count = 0;
  double y_times_p = 0.0;
  double std_error = 0.0;
};

struct ElyResult {
  EstimateReport estimate;
  TailVerdict verdict = TailVerdict::kInconclusive;
  std::vector<ElyPoint> curve;
};

struct ElyConfig {
  std::size_t min_nonzero_points = 4;
  std::size_t min_top_decade_count = 20;
};

// Log-spaced grid from y_min to y_max (inclusive).
std::vector<double> log_spaced(double y_min, double y_max, std::size_t n);
std::vector<double> default_y_grid();

// sqrt(pi/2) times the plateau of y P(sqrt(<Z>_t) >= y), taken as the median over the top
// decade of the grid. The standard error includes half the spread over that decade. y_grid must be increasing and span at least two decades.
ElyResult defect_via_ely(const PathBundle& bundle, double t, const std::vector<double>& y_grid,
                         const ElyConfig& config = {});

struct DefectReport {
  EstimateReport direct;
  EstimateReport dual;
  ElyResult ely;
  bool consistent = false;
  // Whether the tail estimate took part in the consistency check.
  bool ely_compared = false;
};

// Direct and tail estimates from one P-side bundle, the dual estimate from one Q-side bundle.
// consistent iff every pairwise difference is within 3 combined standard errors; an
// inconclusive tail estimate is left out of the comparison.
DefectReport consistency_report(const DualPair& pair, double t, const sde::SimulationParams& params,
                                const std::vector<double>& y_grid = default_y_grid());

DefectReport consistency_report(const PathBundle& p_bundle, const PathBundle& q_bundle, double t,
                                const std::vector<double>& y_grid = default_y_grid());

nlohmann::json to_json(const ElyResult& ely);
nlohmann::json to_json(const DefectReport& report);

}  // namespace nkmart::duality
