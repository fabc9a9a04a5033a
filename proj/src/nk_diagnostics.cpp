#include "nkmart/nk_diagnostics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nkmart/errors.hpp"
#include "nkmart/json_io.hpp"
#include "nkmart/scenarios.hpp"

namespace nkmart::nk {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using LogField = std::function<double(std::size_t, std::size_t)>;

SupEstimate sup_over_family(const PathBundle& bundle, const LogField& log_s,
                            const LogField& log_ratio, const StoppingFamily& family,
                            const DivergenceRule& rule) {
  validate_family(family, bundle.grid().horizon());
  SupEstimate out;
  std::vector<double> samples(bundle.n_paths());
  for (const auto& r : family.rules) {
    const auto idx = stopping_indices(bundle, r, log_ratio);
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) samples[p] = std::exp(log_s(p, idx[p]));
    out.per_rule.push_back(summarize_mean(samples, bundle.seed(), rule));
  }
  bool diverging = false;
  for (std::size_t i = 0; i < out.per_rule.size(); ++i) {
    diverging = diverging || out.per_rule[i].diverging;
    if (out.per_rule[i].value > out.per_rule[out.best_rule].value) out.best_rule = i;
  }
  out.report = out.per_rule[out.best_rule];
  out.report.diverging = diverging;
  return out;
}

std::size_t cap_index(const PathBundle& bundle, double cap_t) {
  return bundle.grid().index_at_or_before(cap_t);
}

}  // namespace

const char* to_string(PhiKind kind) {
  switch (kind) {
    case PhiKind::kZero:
      return "zero";
    case PhiKind::kLower:
      return "lower";
    case PhiKind::kLinearMinusUnbounded:
      return "linear_minus_unbounded";
    case PhiKind::kCustom:
      return "custom";
  }
  return "custom";
}

NKSpec NKSpec::zero(double a) { return {a, {}, PhiKind::kZero}; }

NKSpec NKSpec::linear(double a, double d) {
  return {a, [d](double t) { return d * t; }, PhiKind::kCustom};
}

NKSpec NKSpec::from_psi(std::function<double(double)> psi, PhiKind kind) {
  return {2.0, [psi = std::move(psi)](double t) { return 0.5 * t - std::log(psi(4.0 * t)); }, kind};
}

double NKSpec::phi_at(double qv) const {
  if (!phi) return 0.0;
  const double v = phi(qv);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "phi is not finite at attained qv = " << qv;
    throw DomainError(os.str());
  }
  return v;
}

double NKSpec::log_ratio(double l, double qv) const {
  if (!std::isfinite(qv)) return kNegInf;
  const double w = std::abs(a - 1.0);
  return (a - 1.0) * (l - qv) - (w > 0.0 ? w * phi_at(qv) : 0.0);
}

double NKSpec::log_value(double l, double qv) const {
  if (!std::isfinite(qv)) return kNegInf;
  const double w = std::abs(a - 1.0);
  const double base = a * l + (0.5 - a) * qv;
  return w > 0.0 ? base - w * phi_at(qv) : base;
}

double NkProcess::value(std::size_t p, std::size_t k) const { return std::exp(log_value(p, k)); }

NkProcess nk_process(const PathBundle& bundle, const NKSpec& spec) {
  NkProcess out(bundle.n_paths(), bundle.n_times());
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    const auto l = bundle.l(p);
    const auto qv = bundle.qv(p);
    const PathStatus st = bundle.status(p);
    for (std::size_t k = 0; k < bundle.n_times(); ++k) {
      out.log_value(p, k) = st.exploded_by(k) ? kNegInf : spec.log_value(l[k], qv[k]);
    }
  }
  return out;
}

std::string describe(const StoppingRule& rule) {
  std::ostringstream os;
  if (const auto* d = std::get_if<Deterministic>(&rule)) {
    os << "t=" << format_number(d->t);
  } else if (const auto* h = std::get_if<LevelHit>(&rule)) {
    const char* ch = "L";
    if (h->channel == sde::Channel::kState) ch = "X";
    if (h->channel == sde::Channel::kQv) ch = "<L>";
    if (h->channel == sde::Channel::kZ) ch = "Z";
    os << "hit " << ch << (h->direction == sde::Direction::kAbove ? " above" : " below")
       << " level, cap " << format_number(h->cap_t);
  } else if (const auto* f = std::get_if<FunctionalThreshold>(&rule)) {
    os << "S/Z >= " << format_number(f->level) << ", cap " << format_number(f->cap_t);
  }
  return os.str();
}

void validate_family(const StoppingFamily& family, double horizon) {
  if (family.rules.empty()) throw InvalidArgument("stopping family is empty");
  auto check_cap = [&](double t, const char* what) {
    if (!(t >= 0.0) || !(t < horizon)) {
      throw InvalidArgument(std::string(what) + " must lie in [0, horizon) but is " +
                            format_number(t));
    }
  };
  for (const auto& rule : family.rules) {
    if (const auto* d = std::get_if<Deterministic>(&rule)) {
      check_cap(d->t, "deterministic time");
    } else if (const auto* h = std::get_if<LevelHit>(&rule)) {
      if (!h->level) throw InvalidArgument("level-hit rule needs a level function");
      check_cap(h->cap_t, "level-hit cap");
    } else if (const auto* f = std::get_if<FunctionalThreshold>(&rule)) {
      if (!(f->level > 0.0)) throw InvalidArgument("functional threshold must be positive");
      check_cap(f->cap_t, "functional-threshold cap");
    }
  }
}

std::vector<std::size_t> stopping_indices(const PathBundle& bundle, const StoppingRule& rule,
                                          const LogField& log_ratio) {
  std::vector<std::size_t> idx(bundle.n_paths());
  if (const auto* d = std::get_if<Deterministic>(&rule)) {
    idx.assign(bundle.n_paths(), bundle.grid().index_at_or_before(d->t));
  } else if (const auto* h = std::get_if<LevelHit>(&rule)) {
    const std::size_t cap = cap_index(bundle, h->cap_t);
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
      const auto hit =
          sde::hitting_time_index(bundle, p, h->level, h->direction, h->channel, h->coordinate);
      idx[p] = hit && *hit < cap ? *hit : cap;
    }
  } else if (const auto* f = std::get_if<FunctionalThreshold>(&rule)) {
    if (!log_ratio) throw InvalidArgument("functional threshold needs the S/Z ratio");
    const std::size_t cap = cap_index(bundle, f->cap_t);
    const double target = std::log(f->level);
    for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
      idx[p] = cap;
      for (std::size_t k = 0; k < cap; ++k) {
        if (log_ratio(p, k) >= target) {
          idx[p] = k;
          break;
        }
      }
    }
  }
  return idx;
}

SupEstimate estimate_sup_over_family(const PathBundle& bundle, const NKSpec& spec,
                                     const StoppingFamily& family, const DivergenceRule& rule) {
  const NkProcess proc = nk_process(bundle, spec);
  auto log_s = [&](std::size_t p, std::size_t k) { return proc.log_value(p, k); };
  auto log_ratio = [&](std::size_t p, std::size_t k) {
    if (bundle.status(p).exploded_by(k)) return kNegInf;
    return spec.log_ratio(bundle.l(p)[k], bundle.qv(p)[k]);
  };
  return sup_over_family(bundle, log_s, log_ratio, family, rule);
}

std::vector<double> dual_side_samples(const PathBundle& dual_bundle, const NKSpec& spec,
                                      std::size_t k) {
  if (k >= dual_bundle.n_times()) throw InvalidArgument("index beyond dual bundle grid");
  std::vector<double> out(dual_bundle.n_paths(), 0.0);
  for (std::size_t p = 0; p < dual_bundle.n_paths(); ++p) {
    if (dual_bundle.status(p).exploded_by(k)) continue;
    // Under the dual measure L - <L> = -L_q and <L> = <L_q>.
    const double qv = dual_bundle.qv(p)[k];
    const double l = qv - dual_bundle.l(p)[k];
    out[p] = std::exp(spec.log_ratio(l, qv));
  }
  return out;
}

ExpectationEstimate estimate_nk_expectation(const DualPair& pair, const NKSpec& spec, double t,
                                            const ExpectationConfig& config) {
  sde::SimulationParams direct{config.n_direct, t, 1, config.integrator, config.rng.derive(1)};
  sde::SimulationParams dual{config.n_dual, t, 1, config.integrator, config.rng.derive(2)};
  const PathBundle p_bundle = sde::simulate(pair.p_side, direct);
  const PathBundle q_bundle = sde::simulate(pair.q_side, dual);
  const NkProcess proc = nk_process(p_bundle, spec);
  std::vector<double> samples(p_bundle.n_paths());
  for (std::size_t p = 0; p < samples.size(); ++p) samples[p] = proc.value(p, 1);
  ExpectationEstimate out;
  out.direct = summarize_mean(samples, direct.rng, config.divergence);
  out.dual = summarize_mean(dual_side_samples(q_bundle, spec, 1), dual.rng, config.divergence);
  return out;
}

const char* to_string(Membership m) { return m == Membership::kMember ? "Member" : "NonMember"; }

std::vector<NkOrderRow> classify_nk_order(double a, const std::vector<double>& b_grid, double t,
                                          const ExpectationConfig& config) {
  if (a == 1.0 || !std::isfinite(a)) throw InvalidArgument("classify_nk_order requires a != 1");
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  for (double b : b_grid) {
    if (!std::isfinite(b)) throw InvalidArgument("b_grid must be finite");
  }
  const ModelSpec p_model = scenarios::nk_order_ou_model(a);
  const ModelSpec q_model = scenarios::nk_order_ou_dual(a);
  sde::SimulationParams direct{config.n_direct, t, 1, config.integrator, config.rng.derive(1)};
  sde::SimulationParams dual{config.n_dual, t, 1, config.integrator, config.rng.derive(2)};
  const PathBundle p_bundle = sde::simulate(p_model, direct);
  const PathBundle q_bundle = sde::simulate(q_model, dual);

  std::vector<NkOrderRow> rows;
  std::vector<double> samples(p_bundle.n_paths());
  for (double b : b_grid) {
    const NKSpec spec = NKSpec::zero(b);
    NkOrderRow row;
    row.a = a;
    row.b = b;
    row.theta = (b - 1.0) / (a - 1.0);
    row.analytic = scenarios::nk_order_analytic(a, b, t);
    for (std::size_t p = 0; p < samples.size(); ++p) {
      samples[p] = std::exp(spec.log_value(p_bundle.l(p)[1], p_bundle.qv(p)[1]));
    }
    row.direct = summarize_mean(samples, direct.rng, config.divergence);
    row.estimate = summarize_mean(dual_side_samples(q_bundle, spec, 1), dual.rng, config.divergence);
    row.verdict = row.estimate.diverging ? Membership::kNonMember : Membership::kMember;
    rows.push_back(row);
  }
  return rows;
}

const char* to_string(Verdict v) { return v == Verdict::kMartingale ? "Martingale" : "Inconclusive"; }

KazamakiTrace iterative_kazamaki_check(double c, std::size_t max_iter, const KazamakiConfig& config) {
  if (!std::isfinite(c)) throw InvalidArgument("c must be finite");
  const double ag = config.gate_exponent;
  KazamakiTrace trace;
  double ck = c;
  for (std::size_t k = 0;; ++k) {
    KazamakiStep step;
    step.c = ck;
    step.kazamaki_holds = ck < 2.0;
    step.gate_closed_form = scenarios::ito_exponential_moment(ag * ck, (ag - 0.5) * ck * ck);
    if (step.kazamaki_holds) {
      trace.steps.push_back(step);
      trace.verdict = Verdict::kMartingale;
      trace.iterations = k;
      trace.reason = "Kazamaki's criterion holds at c = " + format_number(ck);
      return trace;
    }
    if (k >= max_iter) {
      trace.steps.push_back(step);
      trace.iterations = k;
      trace.reason = "max_iter reached";
      return trace;
    }
    sde::SimulationParams params{config.n_paths, 1.0, 1, config.integrator, config.rng.derive(k)};
    const PathBundle q_bundle = sde::simulate(scenarios::ou_exponent_dual(ck), params);
    step.gate = summarize_mean(dual_side_samples(q_bundle, NKSpec::zero(ag), 1), params.rng,
                               config.divergence);
    trace.steps.push_back(step);
    if (step.gate->diverging) {
      trace.iterations = k;
      trace.reason = "finiteness gate E[S^{L,a,0}_1] diverges at c = " + format_number(ck);
      return trace;
    }
    ck *= ag;
  }
}

const char* to_string(MonotonicityVerdict v) {
  return v == MonotonicityVerdict::kPassesNecessary ? "PassesNecessary" : "Fails";
}

MonotonicityResult check_mean_monotonicity(const std::vector<double>& t_grid,
                                           const std::vector<EstimateReport>& means,
                                           double tolerance_se) {
  if (t_grid.size() != means.size()) throw InvalidArgument("one estimate per grid time required");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("t_grid must be increasing");
  }
  MonotonicityResult out;
  out.t_grid = t_grid;
  out.means = means;
  for (std::size_t i = 0; i + 1 < means.size(); ++i) {
    const double se = std::hypot(means[i].std_error, means[i + 1].std_error);
    if (means[i + 1].value < means[i].value - tolerance_se * se) {
      out.verdict = MonotonicityVerdict::kFails;
      out.first_violation = i;
      break;
    }
  }
  return out;
}

MonotonicityResult mean_monotonicity_check(const ModelSpec& model, const NKSpec& spec,
                                           const std::vector<double>& t_grid, std::size_t n_paths,
                                           const sde::IntegratorConfig& integrator,
                                           RandomStreamSpec rng) {
  if (t_grid.empty()) throw InvalidArgument("t_grid is empty");
  std::vector<double> times{0.0};
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw InvalidArgument("t_grid must be non-negative");
    if (t > times.back()) {
      times.push_back(t);
    } else if (t != 0.0 || times.size() > 1) {
      throw InvalidArgument("t_grid must be increasing");
    }
  }
  const TimeGrid grid(times);
  const PathBundle bundle = sde::simulate_paths(model, grid, n_paths, integrator, rng);
  const NkProcess proc = nk_process(bundle, spec);
  std::vector<EstimateReport> means;
  std::vector<double> samples(n_paths);
  for (double t : t_grid) {
    const std::size_t k = *grid.index_of(t);
    for (std::size_t p = 0; p < n_paths; ++p) samples[p] = proc.value(p, k);
    means.push_back(summarize_mean(samples, rng));
  }
  return check_mean_monotonicity(t_grid, means);
}

SupEstimate modified_criterion_check(const PathBundle& bundle, double d,
                                     const StoppingFamily& family, const DivergenceRule& rule) {
  if (!(d >= 0.0 && d < 0.25)) throw InvalidArgument("d must lie in [0, 1/4)");
  auto log_s = [&](std::size_t p, std::size_t k) {
    if (bundle.status(p).exploded_by(k)) return kNegInf;
    return bundle.l(p)[k] - 2.0 * d * bundle.qv(p)[k];
  };
  auto log_ratio = [&](std::size_t p, std::size_t k) {
    if (bundle.status(p).exploded_by(k)) return kNegInf;
    return (0.5 - 2.0 * d) * bundle.qv(p)[k];
  };
  return sup_over_family(bundle, log_s, log_ratio, family, rule);
}

SupEstimate modified_criterion_check(const ModelSpec& model, double d,
                                     const StoppingFamily& family,
                                     const sde::SimulationParams& params,
                                     const DivergenceRule& rule) {
  if (!(d >= 0.0 && d < 0.25)) throw InvalidArgument("d must lie in [0, 1/4)");
  return modified_criterion_check(sde::simulate(model, params), d, family, rule);
}

}  // namespace nkmart::nk
