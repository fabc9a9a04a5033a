#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nkmart/estimate.hpp"
#include "nkmart/model.hpp"
#include "nkmart/path_bundle.hpp"
#include "nkmart/sde_engine.hpp"

namespace nkmart::nk {

enum class PhiKind { kZero, kLower, kLinearMinusUnbounded, kCustom };

const char* to_string(PhiKind kind);

// S^{L,a,phi} = exp(a L + (1/2 - a) <L> - |a - 1| phi(<L>)) 1{Z > 0}.
struct NKSpec {
  double a = 1.0;
  std::function<double(double)> phi;  // empty means phi = 0
  PhiKind phi_kind = PhiKind::kZero;

  static NKSpec zero(double a);
  // phi(t) = d t.
  static NKSpec linear(double a, double d);
  // a = 2 and phi(t) = t/2 - log psi(4t), the form used by psi-type criteria.
  static NKSpec from_psi(std::function<double(double)> psi, PhiKind kind = PhiKind::kCustom);

  // Throws DomainError if phi is not finite at qv.
  [[nodiscard]] double phi_at(double qv) const;
  // log S - log Z = (a - 1)(L - <L>) - |a - 1| phi(<L>).
  [[nodiscard]] double log_ratio(double l, double qv) const;
  [[nodiscard]] double log_value(double l, double qv) const;
};

// log S on every (path, index); -inf where Z = 0.
class NkProcess {
 public:
  NkProcess(std::size_t n_paths, std::size_t n_times)
      : n_times_(n_times), log_s_(n_paths * n_times, 0.0) {}
  [[nodiscard]] std::size_t n_paths() const { return log_s_.size() / n_times_; }
  [[nodiscard]] std::size_t n_times() const { return n_times_; }
  [[nodiscard]] double log_value(std::size_t p, std::size_t k) const { return log_s_[p * n_times_ + k]; }
  [[nodiscard]] double value(std::size_t p, std::size_t k) const;
  double& log_value(std::size_t p, std::size_t k) { return log_s_[p * n_times_ + k]; }

 private:
  std::size_t n_times_;
  std::vector<double> log_s_;
};

NkProcess nk_process(const PathBundle& bundle, const NKSpec& spec);

// Stopping rules. Each rule is capped strictly below the bundle horizon.
struct Deterministic {
  double t = 0.0;
};

struct LevelHit {
  std::function<double(double)> level;
  sde::Direction direction = sde::Direction::kAbove;
  sde::Channel channel = sde::Channel::kL;
  double cap_t = 0.0;
  std::size_t coordinate = 0;
};

// First time S/Z reaches level (the density of S with respect to Z), capped.
struct FunctionalThreshold {
  double level = 1.0;
  double cap_t = 0.0;
};

using StoppingRule = std::variant<Deterministic, LevelHit, FunctionalThreshold>;

struct StoppingFamily {
  std::vector<StoppingRule> rules;
};

std::string describe(const StoppingRule& rule);

// Throws InvalidArgument for an empty family or a rule not capped below horizon.
void validate_family(const StoppingFamily& family, double horizon);

// Grid index of the stopping time on every path. log_ratio(p, k) = log(S/Z) is needed only
// for FunctionalThreshold rules.
std::vector<std::size_t> stopping_indices(
    const PathBundle& bundle, const StoppingRule& rule,
    const std::function<double(std::size_t, std::size_t)>& log_ratio = {});

struct SupEstimate {
  EstimateReport report;  // of the rule with the largest mean; diverging if any rule diverges
  std::size_t best_rule = 0;
  std::vector<EstimateReport> per_rule;
  // A finite family only bounds the supremum over all stopping times from below.
  bool lower_bound = true;
};

SupEstimate estimate_sup_over_family(const PathBundle& bundle, const NKSpec& spec,
                                     const StoppingFamily& family,
                                     const DivergenceRule& rule = {});

// Samples of S_t / Z_t on paths of the Föllmer-dual bundle (0 where the dual exploded).
// Their mean is E_P[S_t] without assuming that Z is a true martingale.
std::vector<double> dual_side_samples(const PathBundle& dual_bundle, const NKSpec& spec,
                                      std::size_t k);

struct ExpectationEstimate {
  EstimateReport dual;    // primary estimate of E_P[S_t]
  EstimateReport direct;  // plain P-side sample mean, for comparison
};

struct ExpectationConfig {
  std::size_t n_direct = 80000;
  std::size_t n_dual = 100000;
  sde::IntegratorConfig integrator;
  RandomStreamSpec rng;
  DivergenceRule divergence;
};

ExpectationEstimate estimate_nk_expectation(const DualPair& pair, const NKSpec& spec, double t,
                                            const ExpectationConfig& config);

enum class Membership { kMember, kNonMember };
const char* to_string(Membership m);

struct NkOrderRow {
  double a = 0.0;
  double b = 0.0;
  double theta = 0.0;
  double analytic = 0.0;
  EstimateReport estimate;
  EstimateReport direct;
  Membership verdict = Membership::kMember;
};

// E[S^{L,b,0}_t] for the Ornstein-Uhlenbeck order model with parameter a, for every b.
std::vector<NkOrderRow> classify_nk_order(double a, const std::vector<double>& b_grid, double t,
                                          const ExpectationConfig& config = {});

enum class Verdict { kMartingale, kInconclusive };
const char* to_string(Verdict v);

struct KazamakiStep {
  double c = 0.0;
  bool kazamaki_holds = false;             // c < 2
  std::optional<EstimateReport> gate;      // E[S^{L^(c),3/4,0}_1] when c >= 2
  double gate_closed_form = 0.0;           // same expectation in closed form
};

struct KazamakiTrace {
  std::vector<KazamakiStep> steps;
  Verdict verdict = Verdict::kInconclusive;
  std::size_t iterations = 0;
  std::string reason;
};

struct KazamakiConfig {
  std::size_t n_paths = 50000;
  sde::IntegratorConfig integrator;
  RandomStreamSpec rng;
  DivergenceRule divergence;
  double gate_exponent = 0.75;
};

KazamakiTrace iterative_kazamaki_check(double c, std::size_t max_iter,
                                       const KazamakiConfig& config = {});

enum class MonotonicityVerdict { kPassesNecessary, kFails };
const char* to_string(MonotonicityVerdict v);

struct MonotonicityResult {
  MonotonicityVerdict verdict = MonotonicityVerdict::kPassesNecessary;
  std::vector<double> t_grid;
  std::vector<EstimateReport> means;
  std::optional<std::size_t> first_violation;  // index i with means[i+1] too far below means[i]
};

// Fails iff some consecutive decrease exceeds tolerance_se combined standard errors.
MonotonicityResult check_mean_monotonicity(const std::vector<double>& t_grid,
                                           const std::vector<EstimateReport>& means,
                                           double tolerance_se = 3.0);

MonotonicityResult mean_monotonicity_check(const ModelSpec& model, const NKSpec& spec,
                                           const std::vector<double>& t_grid, std::size_t n_paths,
                                           const sde::IntegratorConfig& integrator,
                                           RandomStreamSpec rng);

// sup over the family of E[exp(L_tau - 2 d <L>_tau) 1{Z_tau > 0}], d in [0, 1/4).
SupEstimate modified_criterion_check(const PathBundle& bundle, double d,
                                     const StoppingFamily& family,
                                     const DivergenceRule& rule = {});

SupEstimate modified_criterion_check(const ModelSpec& model, double d,
                                     const StoppingFamily& family,
                                     const sde::SimulationParams& params,
                                     const DivergenceRule& rule = {});

}  // namespace nkmart::nk
