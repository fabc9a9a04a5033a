#include "nkmart/lower_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nkmart/errors.hpp"
#include "nkmart/json_io.hpp"
#include "nkmart/parallel.hpp"

namespace nkmart::lower {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Kolmogorov's test: for f with f/sqrt(t) eventually non-decreasing, f is an upper function
// of Brownian motion iff int^inf t^{-3/2} f(t) exp(-f(t)^2 / (2t)) dt < inf. Substituting
// t = e^s turns t^{-3/2} f dt into psi ds with psi = f / sqrt(t), and s = e^u turns ds into
// s du, so each window [2^k, 2^(k+1)] in s is an interval of length log 2 in u.
double window_integral(const BoundaryFunction& f, double u0, double u1, std::size_t panels) {
  auto g = [&](double u) {
    const double s = std::exp(u);
    const double psi = f.normalized_at(s);
    if (std::isnan(psi)) return kNaN;
    if (psi <= 0.0 || std::isinf(psi)) return 0.0;
    return psi * std::exp(-0.5 * psi * psi) * s;
  };
  const std::size_t n = panels % 2 == 0 ? panels : panels + 1;
  const double h = (u1 - u0) / static_cast<double>(n);
  double sum = g(u0) + g(u1);
  for (std::size_t i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * g(u0 + h * static_cast<double>(i));
  return sum * h / 3.0;
}

}  // namespace

double BoundaryFunction::normalized_at(double s) const {
  if (normalized) return normalized(s);
  if (s > 700.0) return kNaN;
  return eval(std::exp(s)) / std::exp(0.5 * s);
}

BoundaryFunction zero_boundary() {
  return {"zero", [](double) { return 0.0; }, 0.0, [](double) { return 0.0; }};
}

BoundaryFunction constant_boundary(double k) {
  return {"constant(" + format_number(k) + ")", [k](double) { return k; }, 0.0,
          [k](double s) { return k * std::exp(-0.5 * s); }};
}

BoundaryFunction sqrt_boundary(double c) {
  return {format_number(c) + "*sqrt(t)", [c](double t) { return c * std::sqrt(t); }, 0.0,
          [c](double) { return c; }};
}

BoundaryFunction iterated_log_boundary(double c) {
  return {"sqrt(" + format_number(c) + "*t*log(log(t)))",
          [c](double t) { return std::sqrt(c * t * std::log(std::log(t))); }, 16.0,
          [c](double s) { return std::sqrt(c * std::log(s)); }};
}

BoundaryFunction linear_boundary(double slope) {
  return {format_number(slope) + "*t", [slope](double t) { return slope * t; }, 0.0,
          [slope](double s) { return slope * std::exp(0.5 * s); }};
}

std::vector<BoundaryFunction> reference_corpus() {
  return {sqrt_boundary(1.0), iterated_log_boundary(2.0), iterated_log_boundary(3.0)};
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::kLower:
      return "Lower";
    case Classification::kUpper:
      return "Upper";
    case Classification::kInconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

ClassifyResult kolmogorov_classify(const BoundaryFunction& f, const QuadratureConfig& config) {
  if (!f.eval) throw InvalidArgument("boundary function has no evaluator");
  if (!(f.t_min >= 0.0) || !std::isfinite(f.t_min)) throw DomainError("t_min must be finite and >= 0");
  if (config.n_windows < config.decay_windows + 1 || config.subintervals < 2) {
    throw InvalidArgument("quadrature needs more windows than decay_windows and >= 2 panels");
  }
  const double probe_t = std::max(f.t_min, 1.0);
  if (!std::isfinite(f.eval(probe_t)) || !std::isfinite(f.eval(2.0 * probe_t))) {
    throw DomainError("boundary '" + f.name + "' is not finite above its t_min");
  }

  ClassifyResult out;
  const double s_min = std::max(1.0, std::log(std::max(f.t_min, 1.0)));
  const auto k0 = static_cast<int>(std::ceil(std::log2(s_min)));
  std::vector<double> psi;
  for (std::size_t j = 0; j <= config.n_windows; ++j) {
    const double s = std::ldexp(1.0, k0 + static_cast<int>(j));
    if (j < config.n_windows) out.window_start.push_back(s);
    psi.push_back(f.normalized_at(s));
  }
  for (double v : psi) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
      out.note = "normalized boundary is not available at large times";
      return out;
    }
  }
  bool non_increasing = true;
  bool non_decreasing = true;
  for (std::size_t j = 1; j < psi.size(); ++j) {
    non_increasing = non_increasing && psi[j] <= psi[j - 1] * (1.0 + 1e-12) + 1e-300;
    non_decreasing = non_decreasing && psi[j] >= psi[j - 1] * (1.0 - 1e-12);
  }
  if (non_increasing) {
    out.verdict = Classification::kLower;
    out.note = "f/sqrt(t) is non-increasing, so f is eventually below C sqrt(t)";
    return out;
  }
  if (!non_decreasing && !non_increasing) {
    out.note = "f/sqrt(t) is not monotone over the windows";
    return out;
  }
  const double ln2 = std::log(2.0);
  for (std::size_t j = 0; j < config.n_windows; ++j) {
    const double u0 = ln2 * (k0 + static_cast<double>(j));
    out.contributions.push_back(window_integral(f, u0, u0 + ln2, config.subintervals));
  }
  for (std::size_t j = 1; j < out.contributions.size(); ++j) {
    const double prev = out.contributions[j - 1];
    const double cur = out.contributions[j];
    out.ratios.push_back(prev > 0.0 ? cur / prev : (cur > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  const std::size_t m = out.ratios.size();
  bool decays = true;
  bool persists = true;
  for (std::size_t j = m - config.decay_windows; j < m; ++j) {
    decays = decays && out.ratios[j] < config.decay_ratio;
    persists = persists && out.ratios[j] >= 1.0;
  }
  if (decays) {
    out.verdict = Classification::kUpper;
    out.note = "window contributions decay geometrically";
  } else if (persists) {
    out.verdict = Classification::kLower;
    out.note = "window contributions do not decay";
  } else {
    out.note = "window contributions decay too slowly to decide";
  }
  return out;
}

LimsupProbe empirical_limsup_probe(const BoundaryFunction& f, double horizon, std::size_t n_paths,
                                   double k, const ProbeConfig& config) {
  if (n_paths == 0 || config.n_steps < 4) throw InvalidArgument("need paths and at least 4 steps");
  if (!(horizon > 0.0) || horizon < 4.0 * f.t_min) {
    throw InvalidArgument("horizon must be at least 4 t_min");
  }
  const double dt = horizon / static_cast<double>(config.n_steps);
  const double window_start = horizon / 4.0;
  std::vector<double> boundary(config.n_steps + 1, 0.0);
  for (std::size_t i = 0; i <= config.n_steps; ++i) {
    const double t = i == config.n_steps ? horizon : dt * static_cast<double>(i);
    boundary[i] = t >= f.t_min ? f.eval(t) : std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<char> hit_full(n_paths, 0);
  std::vector<char> hit_window(n_paths, 0);
  constexpr std::size_t block = 256;
  const std::size_t n_blocks = (n_paths + block - 1) / block;
  parallel_for(n_blocks, [&](std::size_t b) {
    NormalStream normals(config.rng.derive(b));
    const double sq = std::sqrt(dt);
    for (std::size_t p = b * block; p < std::min(n_paths, (b + 1) * block); ++p) {
      double w = 0.0;
      for (std::size_t i = 0; i <= config.n_steps; ++i) {
        if (i > 0) w += sq * normals();
        const double fb = boundary[i];
        if (std::isnan(fb)) continue;
        if (w - fb >= k) {
          hit_full[p] = 1;
          if (dt * static_cast<double>(i) >= window_start) hit_window[p] = 1;
        }
      }
    }
  });
  std::size_t full = 0;
  std::size_t win = 0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    full += static_cast<std::size_t>(hit_full[p]);
    win += static_cast<std::size_t>(hit_window[p]);
  }
  LimsupProbe out;
  out.horizon = horizon;
  out.k = k;
  out.full = summarize_proportion(full, n_paths, config.rng);
  out.window = summarize_proportion(win, n_paths, config.rng);
  return out;
}

const char* to_string(GateVerdict v) {
  return v == GateVerdict::kAdmissible ? "Admissible" : "NotAdmissible";
}

GateResult corollary_martingality_gate(double a, const BoundaryFunction& f, const GateConfig& config) {
  if (a == 1.0) throw InvalidArgument("a = 1 leaves no room for a boundary");
  if (config.max_exponent <= config.skip_points) throw InvalidArgument("max_exponent too small");
  GateResult out;
  out.bound = 0.5 * std::abs(a - 1.0);
  out.liminf_estimate = std::numeric_limits<double>::infinity();
  const auto j0 = static_cast<int>(std::ceil(std::log2(std::max(f.t_min, 1.0))));
  for (std::size_t j = config.skip_points; j <= config.max_exponent; ++j) {
    const double t = std::ldexp(1.0, j0 + static_cast<int>(j));
    const double v = f.eval(t);
    if (std::isnan(v)) throw DomainError("boundary '" + f.name + "' is NaN at t = " + format_number(t));
    out.liminf_estimate = std::min(out.liminf_estimate, std::max(v, 0.0) / t);
  }
  out.verdict = out.liminf_estimate < out.bound - config.margin ? GateVerdict::kAdmissible
                                                                : GateVerdict::kNotAdmissible;
  return out;
}

}  // namespace nkmart::lower
