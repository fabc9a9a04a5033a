#include "nkmart/exponential.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nkmart/errors.hpp"

namespace nkmart::expo {

ExtendedExponential stochastic_exponential(std::span<const double> l, std::span<const double> qv,
                                           PathStatus status, double explosion_cap) {
  if (l.size() != qv.size() || l.empty()) throw InvalidArgument("l and qv must have equal non-zero length");
  if (l[0] != 0.0 || qv[0] != 0.0) throw InvalidArgument("L and <L> must start at 0");
  for (std::size_t k = 0; k < qv.size(); ++k) {
    if (std::isnan(qv[k]) || qv[k] < 0.0 || (k > 0 && qv[k] < qv[k - 1])) {
      throw InvariantViolation("qv must be non-negative and non-decreasing (index " +
                               std::to_string(k) + ")");
    }
  }
  ExtendedExponential out;
  out.z.resize(l.size());
  for (std::size_t k = 0; k < l.size(); ++k) {
    if (status.state == PathState::kAbsorbed && k > status.index) {
      out.z[k] = out.z[status.index];
      continue;
    }
    const bool dead = status.exploded_by(k) || std::isinf(qv[k]) || qv[k] > explosion_cap;
    if (dead || out.zero_index) {
      if (!out.zero_index) out.zero_index = k;
      out.z[k] = 0.0;
      continue;
    }
    out.z[k] = std::exp(l[k] - 0.5 * qv[k]);
  }
  out.absorbed_at_zero = out.zero_index.has_value();
  out.terminal_value = out.z.back();
  return out;
}

StochasticLogarithm stochastic_logarithm(std::span<const double> z, const TimeGrid& grid,
                                         LogForm form) {
  if (z.size() != grid.size()) throw InvalidArgument("z length differs from grid size");
  if (!(z[0] > 0.0)) throw InvalidArgument("z must start positive");
  StochasticLogarithm out;
  out.l.assign(z.size(), 0.0);
  out.qv.assign(z.size(), 0.0);
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (z[k] < 0.0 || std::isnan(z[k])) throw InvalidArgument("z must be non-negative");
    if (out.zero_index || z[k] == 0.0) {
      if (!out.zero_index) out.zero_index = k;
      out.l[k] = out.l[k - 1];
      out.qv[k] = std::numeric_limits<double>::infinity();
      continue;
    }
    double dl = 0.0;
    double dqv = 0.0;
    if (form == LogForm::kRatio) {
      const double r = (z[k] - z[k - 1]) / z[k - 1];
      dl = r;
      dqv = r * r;
    } else {
      const double g = std::log(z[k]) - std::log(z[k - 1]);
      dqv = g * g;
      dl = g + 0.5 * dqv;
    }
    out.l[k] = out.l[k - 1] + dl;
    out.qv[k] = out.qv[k - 1] + dqv;
  }
  return out;
}

}  // namespace nkmart::expo
