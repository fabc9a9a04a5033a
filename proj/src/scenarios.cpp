#include "nkmart/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "nkmart/errors.hpp"
#include "nkmart/estimate.hpp"
#include "nkmart/json_io.hpp"

namespace nkmart::scenarios {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelSpec scalar_model(std::string name, std::function<double(double)> drift,
                       std::function<double(double)> h, double x0,
                       std::optional<AbsorbingBoundary> absorbing, std::string dual) {
  ModelSpec m;
  m.name = std::move(name);
  m.state_dim = 1;
  m.noise_dim = 1;
  m.drift = [drift](const StateVec& x, double) { return StateVec{drift(x[0])}; };
  m.diffusion = [](const StateVec&, double) { return StateMat(1, 1, 1.0); };
  m.l_integrand = [h](const StateVec& x, double) { return StateVec{h(x[0])}; };
  m.x0 = StateVec{x0};
  m.absorbing = absorbing;
  m.dual = std::move(dual);
  return m;
}

AbsorbingBoundary killed_at_zero() { return {0.0, BoundaryEffect::kExplode}; }
AbsorbingBoundary unattainable_zero() { return {0.0, BoundaryEffect::kExplode, false}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double hitting_probability_bm_from_one() { return 2.0 * (1.0 - normal_cdf(1.0)); }

std::string list_names() {
  std::string s;
  for (const auto& n : scenario_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

double param_or(const ScenarioParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& scenario, const ScenarioParams& params,
                    const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw InvalidArgument("scenario '" + scenario + "' has no parameter '" + key + "'");
  }
}

std::vector<StateVec> positive_probes() { return {StateVec{0.25}, StateVec{1.0}, StateVec{4.0}}; }
std::vector<StateVec> real_probes() { return {StateVec{-1.0}, StateVec{0.0}, StateVec{1.0}}; }

Scenario stopped_bm_scenario() {
  Scenario s;
  s.name = "stopped_bm";
  s.anchor = "Example: Brownian motion stopped at zero";
  s.sides.push_back({"default", bm_absorbed(), make_dual_pair(bm_absorbed(), bes3_reciprocal()),
                     "Z = B started at 1 and stopped at its first zero; L = int dB / B"});
  s.oracles = {
      {"defect_T1", 0.0, Provenance::kPaper, "stopped Brownian motion is a true martingale"},
      {"absorbed_fraction_T1", hitting_probability_bm_from_one(), Provenance::kDerivedOracle,
       "reflection principle: P(T0 <= 1) = 2(1 - Phi(1))"},
  };
  s.probe_points = positive_probes();
  return s;
}

Scenario bessel3_scenario() {
  Scenario s;
  s.name = "bessel3_pair";
  s.anchor = "Example: three-dimensional Bessel process";
  s.sides.push_back({"reciprocal", bes3_reciprocal(),
                     make_dual_pair(bes3_reciprocal(), bm_absorbed()),
                     "Z = 1/R, L = -int dB / R; strict local martingale"});
  s.sides.push_back({"true", bes3_true(), make_dual_pair(bes3_true(), bes5_dual()),
                     "Z = R exp(-int R^-2 dt), L = int dB / R; true martingale, dual is BES(5)"});
  const double p = hitting_probability_bm_from_one();
  s.oracles = {
      {"E[R1^2]", 4.0, Provenance::kDerivedOracle, "R0^2 + 3t for BES(3) from 1"},
      {"E[1/R1]", 1.0 - p, Provenance::kDerivedOracle,
       "1 - P(Brownian motion from 1 hits 0 by 1) = 2 Phi(1) - 1"},
      {"defect_reciprocal_T1", p, Provenance::kDerivedOracle,
       "Föllmer dual is Brownian motion from 1 absorbed at 0"},
      {"defect_true_T1", 0.0, Provenance::kPaper, "R exp(-int R^-2 dt) is a true martingale"},
  };
  s.probe_points = positive_probes();
  return s;
}

Scenario bessel2_scenario() {
  Scenario s;
  s.name = "bessel2_pair";
  s.anchor = "Example: two-dimensional Bessel process";
  s.sides.push_back({"minus", bes2_minus(), make_dual_pair(bes2_minus(), bes3_half()),
                     "Z = R^{1/2} exp(-int R^-2 dt / 8) for L = int dB / (2R); true martingale"});
  s.sides.push_back({"plus", bes2_plus(), make_dual_pair(bes2_plus(), bm_half()),
                     "Z = R^{-1/2} exp(-int R^-2 dt / 8) for L = -int dB / (2R); strict"});
  s.oracles = {
      {"Y_drift_coefficient", 1.0 / 32.0, Provenance::kPaper,
       "Y = R^{-1/4} has drift Y^9 / 32"},
      {"Y_diffusion_coefficient", -0.25, Provenance::kPaper, "Y = R^{-1/4} has diffusion -Y^5 / 4"},
      {"defect_minus_T1", 0.0, Provenance::kPaper, "true martingale"},
      {"defect_plus_T1", hitting_probability_bm_from_one(), Provenance::kDerivedOracle,
       "Föllmer dual is Brownian motion from 1 killed at 0"},
  };
  s.probe_points = positive_probes();
  return s;
}

Scenario ou_exponent_scenario(double c) {
  Scenario s;
  s.name = "ou_exponent";
  s.anchor = "Example: exponent of c int B dB";
  s.params = {{"c", c}};
  s.sides.push_back({"default", ou_exponent_model(c),
                     make_dual_pair(ou_exponent_model(c), ou_exponent_dual(c)),
                     "L = c int B dB = c (B^2 - t) / 2; under the new measure B is an OU process"});
  s.oracles = {
      {"E[exp(L1/2)] c=1", kazamaki_expectation(1.0), Provenance::kDerivedOracle,
       "(1 - c/2)^{-1/2} exp(-c/4) from the chi-square moment generating function"},
      {"E[exp(L1/2)] c=2", kInf, Provenance::kPaper, "Kazamaki's expectation is infinite at c = 2"},
      {"E[exp(L1/2)]", kazamaki_expectation(c), Provenance::kDerivedOracle,
       "(1 - c/2)^{-1/2} exp(-c/4) at the configured c"},
      {"E[<L>_1]", 0.5 * c * c, Provenance::kDerivedOracle, "c^2 int_0^1 t dt"},
  };
  s.probe_points = real_probes();
  return s;
}

Scenario nk_order_scenario(double a) {
  if (a == 1.0) throw InvalidArgument("nk_order_ou requires a != 1");
  Scenario s;
  s.name = "nk_order_ou";
  s.anchor = "Example: order of Novikov-Kazamaki exponents";
  s.params = {{"a", a}};
  s.sides.push_back({"default", nk_order_ou_model(a),
                     make_dual_pair(nk_order_ou_model(a), nk_order_ou_dual(a)),
                     "dB~ = -B~/(a-1) dt + dB with L = int B~/(a-1) dB; dual B~ is Brownian"});
  for (double theta : {0.0, 0.5, 1.0}) {
    const double b = 1.0 + theta * (a - 1.0);
    const bool paper = theta != 0.5;
    s.oracles.push_back({"E[S^b_1] b=" + fmt(b), nk_order_analytic(a, b, 1.0),
                         paper ? Provenance::kPaper : Provenance::kDerivedOracle,
                         "(1 - theta)^{-1/2} exp(-theta/2) with theta = " + fmt(theta)});
  }
  s.probe_points = real_probes();
  return s;
}

}  // namespace

const char* to_string(Provenance p) { return p == Provenance::kPaper ? "paper" : "derived_oracle"; }

const ScenarioSide& Scenario::side(const std::string& side_name) const {
  for (const auto& s : sides) {
    if (s.name == side_name) return s;
  }
  std::string valid;
  for (const auto& s : sides) valid += (valid.empty() ? "" : ", ") + s.name;
  throw LookupError("scenario '" + name + "' has no side '" + side_name + "' (valid: " + valid + ")");
}

const Oracle& Scenario::oracle(const std::string& quantity) const {
  for (const auto& o : oracles) {
    if (o.quantity == quantity) return o;
  }
  std::string valid;
  for (const auto& o : oracles) valid += (valid.empty() ? "" : ", ") + o.quantity;
  throw LookupError("scenario '" + name + "' has no oracle '" + quantity + "' (valid: " + valid + ")");
}

std::vector<std::string> scenario_names() {
  return {"stopped_bm", "ou_exponent", "nk_order_ou", "bessel2_pair", "bessel3_pair"};
}

Scenario make_scenario(const std::string& name, const ScenarioParams& params) {
  if (name == "stopped_bm") {
    reject_unknown(name, params, {});
    return stopped_bm_scenario();
  }
  if (name == "bessel3_pair") {
    reject_unknown(name, params, {});
    return bessel3_scenario();
  }
  if (name == "bessel2_pair") {
    reject_unknown(name, params, {});
    return bessel2_scenario();
  }
  if (name == "ou_exponent") {
    reject_unknown(name, params, {"c"});
    return ou_exponent_scenario(param_or(params, "c", 1.0));
  }
  if (name == "nk_order_ou") {
    reject_unknown(name, params, {"a"});
    return nk_order_scenario(param_or(params, "a", 2.0));
  }
  throw LookupError("unknown scenario '" + name + "' (valid: " + list_names() + ")");
}

std::vector<Scenario> catalog() {
  std::vector<Scenario> out;
  for (const auto& n : scenario_names()) out.push_back(make_scenario(n));
  return out;
}

Oracle oracle_value(const std::string& scenario, const std::string& quantity) {
  return make_scenario(scenario).oracle(quantity);
}

nlohmann::json catalog_manifest() {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : catalog()) {
    nlohmann::json sides = nlohmann::json::array();
    for (const auto& side : s.sides) {
      nlohmann::json j = {{"name", side.name},
                          {"model", side.model.name},
                          {"description", side.description}};
      j["dual_model"] = side.dual ? nlohmann::json(side.dual->q_side.name) : nlohmann::json();
      sides.push_back(j);
    }
    nlohmann::json oracles = nlohmann::json::array();
    for (const auto& o : s.oracles) {
      oracles.push_back({{"quantity", o.quantity},
                         {"value", json_number(o.value)},
                         {"provenance", to_string(o.provenance)},
                         {"note", o.note}});
    }
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : s.params) params[k] = json_number(v);
    scenarios.push_back({{"name", s.name},
                         {"anchor", s.anchor},
                         {"params", params},
                         {"sides", sides},
                         {"oracles", oracles}});
  }
  return {{"format", "nkmart-scenarios"}, {"version", 1}, {"scenarios", scenarios}};
}

ModelSpec bm_absorbed() {
  return scalar_model("bm_absorbed", [](double) { return 0.0; }, [](double x) { return 1.0 / x; },
                      1.0, killed_at_zero(), "bes3_reciprocal");
}

ModelSpec bes3_reciprocal() {
  return scalar_model("bes3_reciprocal", [](double x) { return 1.0 / x; },
                      [](double x) { return -1.0 / x; }, 1.0, unattainable_zero(), "bm_absorbed");
}

ModelSpec bes3_true() {
  return scalar_model("bes3_true", [](double x) { return 1.0 / x; },
                      [](double x) { return 1.0 / x; }, 1.0, unattainable_zero(), "bes5_dual");
}

ModelSpec bes5_dual() {
  return scalar_model("bes5_dual", [](double x) { return 2.0 / x; },
                      [](double x) { return -1.0 / x; }, 1.0, unattainable_zero(), "bes3_true");
}

ModelSpec bes2_minus() {
  return scalar_model("bes2_minus", [](double x) { return 0.5 / x; },
                      [](double x) { return 0.5 / x; }, 1.0, unattainable_zero(), "bes3_half");
}

ModelSpec bes3_half() {
  return scalar_model("bes3_half", [](double x) { return 1.0 / x; },
                      [](double x) { return -0.5 / x; }, 1.0, unattainable_zero(), "bes2_minus");
}

ModelSpec bes2_plus() {
  return scalar_model("bes2_plus", [](double x) { return 0.5 / x; },
                      [](double x) { return -0.5 / x; }, 1.0, unattainable_zero(), "bm_half");
}

ModelSpec bm_half() {
  return scalar_model("bm_half", [](double) { return 0.0; }, [](double x) { return 0.5 / x; },
                      1.0, killed_at_zero(), "bes2_plus");
}

ModelSpec ou_exponent_model(double c) {
  return scalar_model("ou_exponent", [](double) { return 0.0; }, [c](double x) { return c * x; },
                      0.0, std::nullopt, "ou_exponent_dual");
}

ModelSpec ou_exponent_dual(double c) {
  return scalar_model("ou_exponent_dual", [c](double x) { return c * x; },
                      [c](double x) { return -c * x; }, 0.0, std::nullopt, "ou_exponent");
}

ModelSpec nk_order_ou_model(double a) {
  const double k = 1.0 / (a - 1.0);
  return scalar_model("nk_order_ou", [k](double x) { return -k * x; },
                      [k](double x) { return k * x; }, 0.0, std::nullopt, "nk_order_ou_dual");
}

ModelSpec nk_order_ou_dual(double a) {
  const double k = 1.0 / (a - 1.0);
  return scalar_model("nk_order_ou_dual", [](double) { return 0.0; },
                      [k](double x) { return -k * x; }, 0.0, std::nullopt, "nk_order_ou");
}

ModelSpec line_stopped_bm(double c, double d) {
  if (!(c > 0.0)) throw InvalidArgument("line_stopped_bm needs c > 0");
  // State is B - 2 d t so that the moving line becomes the fixed level c.
  ModelSpec m = scalar_model("line_stopped_bm", [d](double) { return -2.0 * d; },
                             [](double) { return 1.0; }, 0.0,
                             AbsorbingBoundary{c, BoundaryEffect::kFreeze}, "");
  m.dual.reset();
  return m;
}

ModelSpec brownian_motion(double x0, double h) {
  ModelSpec m = scalar_model("brownian_motion", [](double) { return 0.0; },
                             [h](double) { return h; }, x0, std::nullopt, "");
  m.dual.reset();
  return m;
}

DualPair make_dual_pair(const ModelSpec& p_side, const ModelSpec& q_side) {
  return {p_side, q_side, p_side.name + " <-> " + q_side.name};
}

double nk_order_analytic(double a, double b, double t) {
  if (a == 1.0) throw InvalidArgument("a = 1 has no order model");
  const double theta = (b - 1.0) / (a - 1.0);
  if (theta * t >= 1.0) return kInf;
  return std::exp(-0.5 * theta * t) / std::sqrt(1.0 - theta * t);
}

double kazamaki_expectation(double c) {
  if (c >= 2.0) return kInf;
  return std::exp(-0.25 * c) / std::sqrt(1.0 - 0.5 * c);
}

double ito_exponential_moment(double alpha, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be non-negative");
  double bracket = 1.0 - alpha;
  if (beta > 0.0) {
    const double g = std::sqrt(2.0 * beta);
    bracket = std::cosh(g) - alpha * std::sinh(g) / g;
  }
  if (!(bracket > 0.0)) return kInf;
  return std::exp(-0.5 * alpha) / std::sqrt(bracket);
}

}  // namespace nkmart::scenarios
