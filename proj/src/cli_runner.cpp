#include "nkmart/cli_runner.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nkmart/errors.hpp"
#include "nkmart/follmer_duality.hpp"
#include "nkmart/json_io.hpp"
#include "nkmart/lower_functions.hpp"
#include "nkmart/nk_diagnostics.hpp"
#include "nkmart/random.hpp"
#include "nkmart/scenarios.hpp"
#include "nkmart/sde_engine.hpp"
#include "nkmart/version.hpp"

namespace nkmart::cli {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& e : v) s += (s.empty() ? "" : ", ") + e;
  return s;
}

// Typed access to the params object; every key must be consumed by the experiment.
class Params {
 public:
  Params(const json& j, std::string experiment) : j_(j), experiment_(std::move(experiment)) {
    if (!j_.is_object()) throw InvalidArgument("params must be a JSON object");
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_number()) throw InvalidArgument("param '" + key + "' must be a number");
    return j_[key].get<double>();
  }

  std::optional<double> optional_number(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return number(key, 0.0);
  }

  std::string string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_string()) throw InvalidArgument("param '" + key + "' must be a string");
    return j_[key].get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_[key].is_array()) throw InvalidArgument("param '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : j_[key]) {
      if (!e.is_number()) throw InvalidArgument("param '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) {
        throw InvalidArgument("experiment '" + experiment_ + "' has no param '" + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string experiment_;
  std::set<std::string> used_;
};

struct Output {
  json report;
  std::string csv;
  bool inconclusive = false;
};

RandomStreamSpec seed_of(const ExperimentConfig& c) { return {c.seed, 0}; }

sde::IntegratorConfig integrator_of(const ExperimentConfig& c) {
  sde::IntegratorConfig cfg;
  cfg.dt_max = c.dt.value_or(1e-3);
  return cfg;
}

scenarios::Scenario scenario_of(const ExperimentConfig& c, Params& params,
                                const scenarios::ScenarioParams& extra = {}) {
  if (!c.scenario) throw InvalidArgument("experiment '" + c.experiment + "' needs a scenario");
  scenarios::ScenarioParams sp = extra;
  if (*c.scenario == "ou_exponent") {
    if (auto v = params.optional_number("c")) sp["c"] = *v;
  }
  if (*c.scenario == "nk_order_ou") {
    if (auto v = params.optional_number("model_a")) sp["a"] = *v;
  }
  return scenarios::make_scenario(*c.scenario, sp);
}

const scenarios::ScenarioSide& side_of(const scenarios::Scenario& s, Params& params) {
  return s.side(params.string("side", s.default_side().name));
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + '\n';
}

std::string num(double v) { return format_number(v); }

bool non_negative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

Output run_defect(const ExperimentConfig& c, Params& params) {
  const auto scenario = scenario_of(c, params);
  const auto& side = side_of(scenario, params);
  const double t = params.number("t", 1.0);
  const auto steps = static_cast<std::size_t>(params.number("record_steps", 10));
  params.finish();
  sde::SimulationParams sim{c.n_paths.value_or(100000), t, steps, integrator_of(c), seed_of(c)};
  const PathBundle bundle = sde::simulate(side.model, sim);
  const auto direct = duality::defect_direct(bundle, t);

  Output out;
  out.csv = "t,mean_z,std_error,defect\n";
  for (double tk : bundle.grid().times()) {
    const auto d = duality::defect_direct(bundle, tk);
    out.csv += csv_row({num(tk), num(1.0 - d.value), num(d.std_error), num(d.value)});
  }
  out.report = {{"scenario", scenario.name},
                {"side", side.name},
                {"model", side.model.name},
                {"t", json_number(t)},
                {"direct_defect", to_json(direct)},
                {"diagnostics",
                 {{"nonfinite_events", bundle.diagnostics().nonfinite_events},
                  {"boundary_floor_events", bundle.diagnostics().boundary_floor_events},
                  {"explosion_cap_events", bundle.diagnostics().explosion_cap_events}}}};
  return out;
}

Output run_consistency(const ExperimentConfig& c, Params& params) {
  const auto scenario = scenario_of(c, params);
  const auto& side = side_of(scenario, params);
  const double t = params.number("t", 1.0);
  const double y_min = params.number("y_min", 0.5);
  const double y_max = params.number("y_max", 50.0);
  const auto y_points = static_cast<std::size_t>(params.number("y_points", 21));
  params.finish();
  if (!side.dual) throw UnsupportedModel("side '" + side.name + "' has no catalogued dual");
  sde::SimulationParams sim{c.n_paths.value_or(100000), t, 10, integrator_of(c), seed_of(c)};
  const auto report = duality::consistency_report(*side.dual, t, sim,
                                                  duality::log_spaced(y_min, y_max, y_points));
  Output out;
  out.csv = "y,exceed_count,y_times_p,std_error\n";
  for (const auto& pt : report.ely.curve) {
    out.csv += csv_row({num(pt.y), std::to_string(pt.exceed_count), num(pt.y_times_p), num(pt.std_error)});
  }
  out.report = duality::to_json(report);
  out.report["scenario"] = scenario.name;
  out.report["side"] = side.name;
  out.report["pair"] = side.dual->label;
  out.inconclusive = report.ely.verdict == duality::TailVerdict::kInconclusive;
  return out;
}

Output run_nk_sup(const ExperimentConfig& c, Params& params) {
  const auto scenario = scenario_of(c, params);
  const auto& side = side_of(scenario, params);
  const double a = params.number("a", 2.0);
  const double d = params.number("phi_slope", 0.0);
  const auto times = params.numbers("times", {0.25, 0.5, 0.75, 0.99});
  const auto levels = params.numbers("l_levels", {});
  const auto thresholds = params.numbers("thresholds", {});
  const double horizon = params.number("horizon", 1.0);
  const double cap = params.number("cap", 0.99 * horizon);
  params.finish();

  nk::StoppingFamily family;
  for (double t : times) family.rules.push_back(nk::Deterministic{t});
  for (double lv : levels) {
    family.rules.push_back(nk::LevelHit{[lv](double) { return lv; }, sde::Direction::kAbove,
                                        sde::Channel::kL, cap, 0});
  }
  for (double i : thresholds) family.rules.push_back(nk::FunctionalThreshold{i, cap});
  const nk::NKSpec spec = d == 0.0 ? nk::NKSpec::zero(a) : nk::NKSpec::linear(a, d);
  sde::SimulationParams sim{c.n_paths.value_or(20000), horizon, 100, integrator_of(c), seed_of(c)};
  const PathBundle bundle = sde::simulate(side.model, sim);
  const auto sup = nk::estimate_sup_over_family(bundle, spec, family);

  Output out;
  out.csv = "rule,estimate,std_error,diverging\n";
  json rules = json::array();
  for (std::size_t i = 0; i < family.rules.size(); ++i) {
    const auto& r = sup.per_rule[i];
    const std::string label = nk::describe(family.rules[i]);
    out.csv += csv_row({"\"" + label + "\"", num(r.value), num(r.std_error), r.diverging ? "true" : "false"});
    rules.push_back({{"rule", label}, {"estimate", to_json(r)}});
  }
  out.report = {{"scenario", scenario.name},
                {"side", side.name},
                {"a", json_number(a)},
                {"phi_slope", json_number(d)},
                {"sup", to_json(sup.report)},
                {"best_rule", nk::describe(family.rules[sup.best_rule])},
                {"lower_bound", sup.lower_bound},
                {"rules", rules}};
  return out;
}

Output run_nk_orders(const ExperimentConfig& c, Params& params) {
  const double a = params.number("a", 2.0);
  const auto b_grid = params.numbers("b_grid", {1.0, 1.25, 1.5, 1.75, 2.0});
  const double t = params.number("t", 1.0);
  params.finish();
  nk::ExpectationConfig cfg;
  cfg.n_direct = c.n_paths.value_or(80000);
  cfg.n_dual = c.n_paths.value_or(100000);
  cfg.integrator = integrator_of(c);
  cfg.rng = seed_of(c);
  const auto rows = nk::classify_nk_order(a, b_grid, t, cfg);
  Output out;
  out.csv = "a,b,theta,estimate,std_error,diverging,verdict,analytic,direct_estimate,direct_std_error,direct_diverging\n";
  json table = json::array();
  for (const auto& r : rows) {
    out.csv += csv_row({num(r.a), num(r.b), num(r.theta), num(r.estimate.value),
                        num(r.estimate.std_error), r.estimate.diverging ? "true" : "false",
                        nk::to_string(r.verdict), num(r.analytic), num(r.direct.value),
                        num(r.direct.std_error), r.direct.diverging ? "true" : "false"});
    table.push_back({{"a", json_number(r.a)},
                     {"b", json_number(r.b)},
                     {"theta", json_number(r.theta)},
                     {"analytic", json_number(r.analytic)},
                     {"estimate", to_json(r.estimate)},
                     {"direct", to_json(r.direct)},
                     {"verdict", nk::to_string(r.verdict)}});
  }
  out.report = {{"t", json_number(t)}, {"rows", table}};
  return out;
}

Output run_iterative_kazamaki(const ExperimentConfig& c, Params& params) {
  const double cc = params.number("c", 1.0);
  const auto max_iter = static_cast<std::size_t>(params.number("max_iter", 10));
  params.finish();
  nk::KazamakiConfig cfg;
  cfg.n_paths = c.n_paths.value_or(50000);
  cfg.integrator = integrator_of(c);
  cfg.rng = seed_of(c);
  const auto trace = nk::iterative_kazamaki_check(cc, max_iter, cfg);
  Output out;
  out.csv = "step,c,kazamaki_holds,gate_estimate,gate_std_error,gate_diverging,gate_closed_form\n";
  json steps = json::array();
  json cs = json::array();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const std::string est = s.gate ? num(s.gate->value) : "";
    const std::string se = s.gate ? num(s.gate->std_error) : "";
    const std::string dv = s.gate ? (s.gate->diverging ? "true" : "false") : "";
    out.csv += csv_row({std::to_string(i), num(s.c), s.kazamaki_holds ? "true" : "false", est, se,
                        dv, num(s.gate_closed_form)});
    json j = {{"c", json_number(s.c)},
              {"kazamaki_holds", s.kazamaki_holds},
              {"gate_closed_form", json_number(s.gate_closed_form)}};
    j["gate"] = s.gate ? to_json(*s.gate) : json();
    steps.push_back(j);
    cs.push_back(json_number(s.c));
  }
  out.report = {{"c", json_number(cc)},
                {"trace", cs},
                {"steps", steps},
                {"iterations", trace.iterations},
                {"verdict", nk::to_string(trace.verdict)},
                {"reason", trace.reason}};
  out.inconclusive = trace.verdict == nk::Verdict::kInconclusive;
  return out;
}

Output run_lower_functions(const ExperimentConfig&, Params& params) {
  const std::string corpus = params.string("corpus", "paper");
  const auto subintervals = static_cast<std::size_t>(params.number("subintervals", 64));
  params.finish();
  if (corpus != "paper") throw InvalidArgument("unknown corpus '" + corpus + "' (valid: paper)");
  lower::QuadratureConfig quad;
  quad.subintervals = subintervals;
  Output out;
  out.csv = "name,verdict";
  for (std::size_t i = 1; i < quad.n_windows; ++i) out.csv += ",ratio_" + std::to_string(i);
  out.csv += '\n';
  json rows = json::array();
  for (const auto& f : lower::reference_corpus()) {
    const auto r = lower::kolmogorov_classify(f, quad);
    out.csv += "\"" + f.name + "\"," + lower::to_string(r.verdict);
    json ratios = json::array();
    for (std::size_t i = 1; i < quad.n_windows; ++i) {
      const double v = i - 1 < r.ratios.size() ? r.ratios[i - 1] : std::nan("");
      out.csv += "," + num(v);
      ratios.push_back(json_number(v));
    }
    out.csv += '\n';
    rows.push_back({{"name", f.name},
                    {"verdict", lower::to_string(r.verdict)},
                    {"ratios", ratios},
                    {"note", r.note}});
    out.inconclusive = out.inconclusive || r.verdict == lower::Classification::kInconclusive;
  }
  out.report = {{"corpus", corpus}, {"subintervals", subintervals}, {"functions", rows}};
  return out;
}

Output run_mean_monotonicity(const ExperimentConfig& c, Params& params) {
  const auto scenario = scenario_of(c, params);
  const auto& side = side_of(scenario, params);
  const double a = params.number("a", 1.0);
  const auto t_grid = params.numbers("t_grid", {0.25, 0.5, 0.75, 1.0});
  params.finish();
  const auto result = nk::mean_monotonicity_check(side.model, nk::NKSpec::zero(a), t_grid,
                                                  c.n_paths.value_or(50000), integrator_of(c),
                                                  seed_of(c));
  Output out;
  out.csv = "t,mean,std_error\n";
  json means = json::array();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    out.csv += csv_row({num(t_grid[i]), num(result.means[i].value), num(result.means[i].std_error)});
    means.push_back({{"t", json_number(t_grid[i])}, {"mean", to_json(result.means[i])}});
  }
  out.report = {{"scenario", scenario.name},
                {"side", side.name},
                {"a", json_number(a)},
                {"verdict", nk::to_string(result.verdict)},
                {"means", means}};
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"defect",          "nk_sup",
                                              "nk_orders",       "iterative_kazamaki",
                                              "lower_functions", "mean_monotonicity",
                                              "consistency"};
  return names;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  static const std::set<std::string> allowed{"experiment", "scenario", "params", "n_paths",
                                             "dt",         "seed",     "output_dir"};
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw InvalidArgument("unknown config key '" + key +
                            "' (valid: experiment, scenario, params, n_paths, dt, seed, output_dir)");
    }
  }
  ExperimentConfig c;
  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    throw InvalidArgument("config needs a string 'experiment' (valid: " + join(experiment_names()) + ")");
  }
  c.experiment = j["experiment"].get<std::string>();
  if (!j.contains("seed")) throw InvalidArgument("config needs an explicit 'seed'");
  if (!non_negative_integer(j["seed"])) throw InvalidArgument("seed must be a non-negative integer");
  c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("scenario")) {
    if (!j["scenario"].is_string()) throw InvalidArgument("scenario must be a string");
    c.scenario = j["scenario"].get<std::string>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw InvalidArgument("params must be an object");
    c.params = j["params"];
  }
  if (j.contains("n_paths")) {
    if (!non_negative_integer(j["n_paths"]) || j["n_paths"].get<std::size_t>() == 0) {
      throw InvalidArgument("n_paths must be a positive integer");
    }
    c.n_paths = j["n_paths"].get<std::size_t>();
  }
  if (j.contains("dt")) {
    if (!j["dt"].is_number() || !(j["dt"].get<double>() > 0.0)) {
      throw InvalidArgument("dt must be a positive number");
    }
    c.dt = j["dt"].get<double>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw InvalidArgument("output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j = {{"experiment", c.experiment}, {"params", c.params}, {"seed", c.seed},
            {"output_dir", c.output_dir.string()}};
  j["scenario"] = c.scenario ? json(*c.scenario) : json();
  j["n_paths"] = c.n_paths ? json(*c.n_paths) : json();
  j["dt"] = c.dt ? json_number(*c.dt) : json();
  return j;
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  try {
    Params params(config.params, config.experiment);
    Output out;
    const std::string& e = config.experiment;
    if (e == "defect") {
      out = run_defect(config, params);
    } else if (e == "consistency") {
      out = run_consistency(config, params);
    } else if (e == "nk_sup") {
      out = run_nk_sup(config, params);
    } else if (e == "nk_orders") {
      out = run_nk_orders(config, params);
    } else if (e == "iterative_kazamaki") {
      out = run_iterative_kazamaki(config, params);
    } else if (e == "lower_functions") {
      out = run_lower_functions(config, params);
    } else if (e == "mean_monotonicity") {
      out = run_mean_monotonicity(config, params);
    } else {
      throw InvalidArgument("unknown experiment '" + e + "' (valid: " + join(experiment_names()) + ")");
    }
    out.report["experiment"] = e;
    out.report["seed"] = config.seed;
    out.report["n_paths"] = config.n_paths ? json(*config.n_paths) : json();

    std::filesystem::create_directories(config.output_dir);
    write_file(config.output_dir / "report.json", out.report.dump(2) + "\n");
    write_file(config.output_dir / "data.csv", out.csv);
    const json manifest = {{"tool", "nkmart"},
                           {"version", kVersion},
                           {"config", to_json(config)},
                           {"files", {"report.json", "data.csv"}},
                           {"workers", worker_count()}};
    write_file(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
    result.report = out.report;
    result.exit_code = out.inconclusive ? kExitInconclusive : kExitOk;
    result.message = out.inconclusive ? "completed with an inconclusive verdict" : "completed";
  } catch (const std::exception& ex) {
    result.exit_code = kExitError;
    result.message = ex.what();
  }
  return result;
}

std::string scenario_table() {
  std::ostringstream os;
  for (const auto& s : scenarios::catalog()) {
    std::vector<std::string> names;
    for (const auto& o : s.oracles) names.push_back(o.quantity);
    os << s.name << " | " << s.anchor << " | " << join(names) << '\n';
  }
  return os.str();
}

}  // namespace nkmart::cli
