#include "nkmart/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nkmart/errors.hpp"

namespace nkmart {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw InvalidArgument("time grid needs at least two points");
  if (times_.front() != 0.0) throw InvalidArgument("time grid must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    const double step = times_[i] - times_[i - 1];
    if (!std::isfinite(times_[i]) || !(step > 0.0)) {
      throw InvalidArgument("time grid must be finite and strictly increasing at index " +
                            std::to_string(i));
    }
    max_step_ = std::max(max_step_, step);
  }
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
  const double tol = 1e-12 * std::max(1.0, horizon());
  auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
  if (it != times_.end() && std::abs(*it - t) <= tol) {
    return static_cast<std::size_t>(it - times_.begin());
  }
  return std::nullopt;
}

std::size_t TimeGrid::index_at_or_before(double t) const {
  if (auto exact = index_of(t)) return *exact;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) throw InvalidArgument("time before grid start");
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

TimeGrid make_uniform_grid(double horizon, std::size_t n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("horizon must be positive and finite");
  }
  if (n_steps < 1) throw InvalidArgument("n_steps must be at least 1");
  std::vector<double> times(n_steps + 1);
  for (std::size_t i = 0; i < n_steps; ++i) {
    times[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
  }
  times[n_steps] = horizon;
  return TimeGrid(std::move(times));
}

}  // namespace nkmart
