#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nkmart/model.hpp"

namespace nkmart::scenarios {

enum class Provenance { kPaper, kDerivedOracle };

const char* to_string(Provenance p);

struct Oracle {
  std::string quantity;
  double value = 0.0;
  Provenance provenance = Provenance::kDerivedOracle;
  std::string note;
};

// One local martingale Z = E(L) of a scenario together with its Föllmer dual.
struct ScenarioSide {
  std::string name;
  ModelSpec model;
  std::optional<DualPair> dual;
  std::string description;
};

using ScenarioParams = std::map<std::string, double>;

struct Scenario {
  std::string name;
  std::string anchor;
  ScenarioParams params;
  std::vector<ScenarioSide> sides;
  std::vector<Oracle> oracles;
  std::vector<StateVec> probe_points;

  [[nodiscard]] const ScenarioSide& side(const std::string& side_name) const;
  [[nodiscard]] const ScenarioSide& default_side() const { return sides.front(); }
  [[nodiscard]] const Oracle& oracle(const std::string& quantity) const;
};

std::vector<std::string> scenario_names();

// Builds a scenario; params override the defaults (c for ou_exponent, a for nk_order_ou).
// Throws LookupError listing valid names for an unknown scenario.
Scenario make_scenario(const std::string& name, const ScenarioParams& params = {});

std::vector<Scenario> catalog();

Oracle oracle_value(const std::string& scenario, const std::string& quantity);

nlohmann::json catalog_manifest();

// Models. Each catalogued model names its dual; dual(dual(m)) is m.
ModelSpec bm_absorbed();
ModelSpec bes3_reciprocal();
ModelSpec bes3_true();
ModelSpec bes5_dual();
ModelSpec bes2_minus();
ModelSpec bes3_half();
ModelSpec bes2_plus();
ModelSpec bm_half();
ModelSpec ou_exponent_model(double c);
ModelSpec ou_exponent_dual(double c);
ModelSpec nk_order_ou_model(double a);
ModelSpec nk_order_ou_dual(double a);

// Brownian motion from 0 with L = B, stopped when B first reaches c + 2 d t.
ModelSpec line_stopped_bm(double c, double d);
// Brownian motion from x0 with a constant integrand h and no boundary.
ModelSpec brownian_motion(double x0, double h);

DualPair make_dual_pair(const ModelSpec& p_side, const ModelSpec& q_side);

// Analytic value of E[S^{L,b,0}_t] for the Ornstein-Uhlenbeck order model with parameter a:
// (1 - theta t)^{-1/2} exp(-theta t / 2), theta = (b-1)/(a-1), infinite once theta t >= 1.
double nk_order_analytic(double a, double b, double t);

// E[exp(L_1 / 2)] for L = c * int B dB: (1 - c/2)^{-1/2} exp(-c/4), infinite for c >= 2.
double kazamaki_expectation(double c);

}  // namespace nkmart::scenarios

namespace nkmart::scenarios {

// E[exp(alpha I_1 - beta <I>_1)] for I = int B dB = (B^2 - t)/2 and beta >= 0:
// exp(-alpha/2) (cosh g - alpha sinh(g) / g)^{-1/2} with g = sqrt(2 beta); infinite when
// the bracket is not positive.
double ito_exponential_moment(double alpha, double beta);

}  // namespace nkmart::scenarios
