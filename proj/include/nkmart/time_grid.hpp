#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace nkmart {

// Strictly increasing times starting at 0; the last entry is the horizon.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] std::size_t size() const { return times_.size(); }
  [[nodiscard]] std::size_t n_steps() const { return times_.size() - 1; }
  [[nodiscard]] double horizon() const { return times_.back(); }
  [[nodiscard]] double max_step() const { return max_step_; }
  double operator[](std::size_t i) const { return times_[i]; }

  // Index whose time equals t up to a relative 1e-12 tolerance.
  [[nodiscard]] std::optional<std::size_t> index_of(double t) const;
  // Largest index with times[i] <= t (t must be >= 0).
  [[nodiscard]] std::size_t index_at_or_before(double t) const;

 private:
  std::vector<double> times_;
  double max_step_ = 0.0;
};

TimeGrid make_uniform_grid(double horizon, std::size_t n_steps);

}  // namespace nkmart
