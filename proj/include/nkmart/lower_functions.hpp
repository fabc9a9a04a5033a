#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nkmart/estimate.hpp"
#include "nkmart/random.hpp"

namespace nkmart::lower {

// A boundary t -> f(t) for Brownian motion, defined for t >= t_min.
struct BoundaryFunction {
  std::string name;
  std::function<double(double)> eval;
  double t_min = 0.0;
  // psi(s) = f(e^s) / e^{s/2}. Optional; lets the test reach times beyond double range.
  std::function<double(double)> normalized;

  [[nodiscard]] double normalized_at(double s) const;
};

BoundaryFunction zero_boundary();
BoundaryFunction constant_boundary(double k);
BoundaryFunction sqrt_boundary(double c);          // c sqrt(t)
BoundaryFunction iterated_log_boundary(double c);  // sqrt(c t log log t), t_min = 16
BoundaryFunction linear_boundary(double slope);    // slope * t

// The three boundaries of the Kolmogorov examples: sqrt(t), sqrt(2t log log t),
// sqrt(3t log log t).
std::vector<BoundaryFunction> reference_corpus();

enum class Classification { kLower, kUpper, kInconclusive };
const char* to_string(Classification c);

// Windows are dyadic in s = log t: [2^k, 2^(k+1)] for n_windows consecutive k.
struct QuadratureConfig {
  std::size_t n_windows = 16;
  std::size_t subintervals = 64;
  double decay_ratio = 0.9;
  std::size_t decay_windows = 5;
};

struct ClassifyResult {
  Classification verdict = Classification::kInconclusive;
  std::vector<double> window_start;   // s = log t at the left end of each window
  std::vector<double> contributions;  // integral of t^{-3/2} f e^{-f^2/(2t)} over the window
  std::vector<double> ratios;         // consecutive contribution ratios
  std::string note;
};

// Kolmogorov's integral test. A boundary with f/sqrt(t) eventually non-increasing is
// dominated by C sqrt(t) and classified Lower; otherwise the window contributions decide:
// Upper if the last decay_windows ratios are all below decay_ratio, Lower if all are >= 1.
ClassifyResult kolmogorov_classify(const BoundaryFunction& f, const QuadratureConfig& config = {});

struct ProbeConfig {
  std::size_t n_steps = 4096;
  RandomStreamSpec rng;
};

struct LimsupProbe {
  double horizon = 0.0;
  double k = 0.0;
  // Fraction of paths with max over [t_min, horizon] of (B - f) >= k.
  EstimateReport full;
  // Same over the late window [horizon / 4, horizon].
  EstimateReport window;
};

LimsupProbe empirical_limsup_probe(const BoundaryFunction& f, double horizon, std::size_t n_paths,
                                   double k, const ProbeConfig& config = {});

enum class GateVerdict { kAdmissible, kNotAdmissible };
const char* to_string(GateVerdict v);

struct GateConfig {
  std::size_t max_exponent = 60;  // dyadic times up to 2^max_exponent
  std::size_t skip_points = 10;   // the first decade of dyadic times is ignored
  double margin = 1e-3;
};

struct GateResult {
  GateVerdict verdict = GateVerdict::kNotAdmissible;
  double liminf_estimate = 0.0;  // running minimum of f^+(t)/t
  double bound = 0.0;            // |a - 1| / 2
};

// Admissible iff liminf f^+(t)/t < |a - 1|/2 - margin over the dyadic times probed.
GateResult corollary_martingality_gate(double a, const BoundaryFunction& f,
                                       const GateConfig& config = {});

}  // namespace nkmart::lower
