#include "nkmart/follmer_duality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nkmart/errors.hpp"
#include "nkmart/json_io.hpp"

namespace nkmart::duality {
namespace {

std::size_t grid_index(const PathBundle& bundle, double t) {
  const auto k = bundle.grid().index_of(t);
  if (!k) throw InvalidArgument("t = " + format_number(t) + " is not a grid time");
  return *k;
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// lim y P(sqrt(<Z>_t) >= y) = sqrt(2 / pi) (Z_0 - E[Z_t]).
const double kElyScale = std::sqrt(std::numbers::pi / 2.0);

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void validate_dual_pair(const DualPair& pair, const std::vector<StateVec>& probes, double tolerance) {
  const ModelSpec& p = pair.p_side;
  const ModelSpec& q = pair.q_side;
  if (p.state_dim != q.state_dim || p.noise_dim != q.noise_dim) {
    throw StructuralError("dual pair '" + pair.label + "' has mismatched dimensions");
  }
  validate_model(p, probes);
  validate_model(q, probes);
  for (const StateVec& x : probes) {
    const StateVec mp = p.drift(x, 0.0);
    const StateVec mq = q.drift(x, 0.0);
    const StateMat s = p.diffusion(x, 0.0);
    const StateVec hp = p.l_integrand(x, 0.0);
    const StateVec hq = q.l_integrand(x, 0.0);
    for (std::size_t i = 0; i < p.state_dim; ++i) {
      double expected = mp[i];
      for (std::size_t j = 0; j < p.noise_dim; ++j) expected += s(i, j) * hp[j];
      if (!close(mq[i], expected, tolerance)) {
        throw StructuralError("dual pair '" + pair.label + "': dual drift is not drift + sigma h");
      }
    }
    for (std::size_t j = 0; j < p.noise_dim; ++j) {
      if (!close(hq[j], -hp[j], tolerance)) {
        throw StructuralError("dual pair '" + pair.label + "': dual integrand is not -h");
      }
    }
  }
}

EstimateReport defect_direct(const PathBundle& bundle, double t) {
  const std::size_t k = grid_index(bundle, t);
  std::vector<double> z(bundle.n_paths());
  for (std::size_t p = 0; p < z.size(); ++p) z[p] = bundle.z(p)[k];
  DivergenceRule no_tail_check;
  no_tail_check.tail_index_threshold = 0.0;
  no_tail_check.rounds = 0;
  EstimateReport r = summarize_mean(z, bundle.seed(), no_tail_check);
  return make_report(1.0 - r.value, r.std_error, r.n_samples, r.seed);
}

EstimateReport defect_via_dual(const PathBundle& dual_bundle, double t) {
  const std::size_t k = grid_index(dual_bundle, t);
  std::size_t hits = 0;
  for (std::size_t p = 0; p < dual_bundle.n_paths(); ++p) {
    if (dual_bundle.status(p).exploded_by(k)) ++hits;
  }
  return summarize_proportion(hits, dual_bundle.n_paths(), dual_bundle.seed());
}

EstimateReport defect_via_dual(const std::optional<DualPair>& pair, double t,
                               const sde::SimulationParams& params) {
  if (!pair) throw UnsupportedModel("model has no catalogued Föllmer dual");
  return defect_via_dual(sde::simulate(pair->q_side, params), t);
}

const char* to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::kPlateau:
      return "Plateau";
    case TailVerdict::kVanishingTail:
      return "VanishingTail";
    case TailVerdict::kInconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

std::vector<double> log_spaced(double y_min, double y_max, std::size_t n) {
  if (!(y_min > 0.0) || !(y_max > y_min) || n < 2) throw InvalidArgument("bad log-spaced range");
  std::vector<double> out(n);
  const double step = std::log(y_max / y_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = y_min * std::exp(step * static_cast<double>(i));
  out.back() = y_max;
  return out;
}

std::vector<double> default_y_grid() { return log_spaced(0.5, 50.0, 21); }

ElyResult defect_via_ely(const PathBundle& bundle, double t, const std::vector<double>& y_grid,
                         const ElyConfig& config) {
  const std::size_t k = grid_index(bundle, t);
  if (y_grid.size() < 2) throw InvalidArgument("y_grid needs at least two points");
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    if (!(y_grid[i] > 0.0) || (i > 0 && !(y_grid[i] > y_grid[i - 1]))) {
      throw InvalidArgument("y_grid must be positive and increasing");
    }
  }
  if (y_grid.back() < 100.0 * y_grid.front() * (1.0 - 1e-12)) {
    throw InvalidArgument("y_grid must span at least two decades");
  }
  const std::size_t n = bundle.n_paths();
  std::vector<double> root_qv(n);
  for (std::size_t p = 0; p < n; ++p) root_qv[p] = std::sqrt(bundle.zqv(p)[k]);
  std::sort(root_qv.begin(), root_qv.end());

  ElyResult out;
  const double fn = static_cast<double>(n);
  std::size_t nonzero = 0;
  for (double y : y_grid) {
    const auto first = std::lower_bound(root_qv.begin(), root_qv.end(), y);
    const auto count = static_cast<std::size_t>(root_qv.end() - first);
    const double prob = static_cast<double>(count) / fn;
    out.curve.push_back({y, count, y * prob, y * std::sqrt(prob * (1.0 - prob) / fn)});
    if (count > 0) ++nonzero;
  }

  const double top_start = y_grid.back() / 10.0;
  std::vector<double> top_values;
  std::vector<double> top_se;
  std::size_t top_min_count = n;
  std::size_t top_total = 0;
  for (const auto& pt : out.curve) {
    if (pt.y >= top_start * (1.0 - 1e-12)) {
      top_values.push_back(pt.y_times_p);
      top_se.push_back(pt.std_error);
      top_min_count = std::min(top_min_count, pt.exceed_count);
      top_total += pt.exceed_count;
    }
  }
  const auto [lo, hi] = std::minmax_element(top_values.begin(), top_values.end());
  const double value = kElyScale * median(top_values);
  const double se = kElyScale * std::hypot(median(top_se), 0.5 * (*hi - *lo));
  out.estimate = make_report(value, se, n, bundle.seed());
  if (top_total == 0) {
    out.verdict = TailVerdict::kVanishingTail;
    out.estimate = make_report(0.0, 0.0, n, bundle.seed());
  } else if (nonzero < config.min_nonzero_points || top_min_count < config.min_top_decade_count) {
    out.verdict = TailVerdict::kInconclusive;
  } else {
    out.verdict = TailVerdict::kPlateau;
  }
  return out;
}

DefectReport consistency_report(const PathBundle& p_bundle, const PathBundle& q_bundle, double t,
                                const std::vector<double>& y_grid) {
  DefectReport r;
  r.direct = defect_direct(p_bundle, t);
  r.dual = defect_via_dual(q_bundle, t);
  r.ely = defect_via_ely(p_bundle, t, y_grid);
  r.ely_compared = r.ely.verdict != TailVerdict::kInconclusive;
  std::vector<const EstimateReport*> est{&r.direct, &r.dual};
  if (r.ely_compared) est.push_back(&r.ely.estimate);
  r.consistent = true;
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      const double se = std::hypot(est[i]->std_error, est[j]->std_error);
      if (std::abs(est[i]->value - est[j]->value) > 3.0 * se) r.consistent = false;
    }
  }
  return r;
}

DefectReport consistency_report(const DualPair& pair, double t, const sde::SimulationParams& params,
                                const std::vector<double>& y_grid) {
  sde::SimulationParams p_params = params;
  sde::SimulationParams q_params = params;
  p_params.rng = params.rng.derive(1);
  q_params.rng = params.rng.derive(2);
  const PathBundle p_bundle = sde::simulate(pair.p_side, p_params);
  const PathBundle q_bundle = sde::simulate(pair.q_side, q_params);
  return consistency_report(p_bundle, q_bundle, t, y_grid);
}

nlohmann::json to_json(const ElyResult& ely) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& pt : ely.curve) {
    curve.push_back({{"y", json_number(pt.y)},
                     {"exceed_count", pt.exceed_count},
                     {"y_times_p", json_number(pt.y_times_p)},
                     {"std_error", json_number(pt.std_error)}});
  }
  return {{"estimate", nkmart::to_json(ely.estimate)},
          {"verdict", to_string(ely.verdict)},
          {"curve", curve}};
}

nlohmann::json to_json(const DefectReport& r) {
  return {{"direct", nkmart::to_json(r.direct)},
          {"dual", nkmart::to_json(r.dual)},
          {"ely", to_json(r.ely)},
          {"ely_compared", r.ely_compared},
          {"consistent", r.consistent}};
}

}  // namespace nkmart::duality
