#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nkmart/path_bundle.hpp"
#include "nkmart/time_grid.hpp"

namespace nkmart::expo {

struct ExtendedExponential {
  std::vector<double> z;
  // First index where z is 0 because <L> exploded or the path was killed.
  std::optional<std::size_t> zero_index;
  bool absorbed_at_zero = false;
  double terminal_value = 1.0;
};

// z = exp(l - qv/2), extended by 0 from the first index where qv is infinite, exceeds
// explosion_cap, or the status reports an explosion. Absorbed paths keep their value.
ExtendedExponential stochastic_exponential(std::span<const double> l, std::span<const double> qv,
                                           PathStatus status = PathStatus::alive(),
                                           double explosion_cap = 1e6);

enum class LogForm {
  kRatio,         // dL = dZ / Z, d<L> = (dZ / Z)^2
  kLogIncrement,  // dL = dlog Z + (dlog Z)^2 / 2, d<L> = (dlog Z)^2; inverts the exponential exactly
};

struct StochasticLogarithm {
  std::vector<double> l;
  std::vector<double> qv;
  std::optional<std::size_t> zero_index;
};

// Inverse of the exponential on a grid. z must start positive; once z reaches 0 the
// logarithm is frozen and qv is +inf.
StochasticLogarithm stochastic_logarithm(std::span<const double> z, const TimeGrid& grid,
                                         LogForm form = LogForm::kRatio);

}  // namespace nkmart::expo
