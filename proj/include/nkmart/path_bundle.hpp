#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nkmart/random.hpp"
#include "nkmart/time_grid.hpp"

namespace nkmart {

enum class PathState : std::uint8_t { kAlive = 0, kAbsorbed = 1, kExploded = 2 };

// For absorbed/exploded paths, index is the first grid index at or after the event.
struct PathStatus {
  PathState state = PathState::kAlive;
  std::size_t index = 0;

  static PathStatus alive() { return {}; }
  static PathStatus absorbed_at(std::size_t i) { return {PathState::kAbsorbed, i}; }
  static PathStatus exploded_at(std::size_t i) { return {PathState::kExploded, i}; }
  [[nodiscard]] bool exploded_by(std::size_t k) const {
    return state == PathState::kExploded && index <= k;
  }
  [[nodiscard]] bool stopped_by(std::size_t k) const {
    return state != PathState::kAlive && index <= k;
  }

  friend bool operator==(const PathStatus&, const PathStatus&) = default;
};

struct BundleDiagnostics {
  std::uint64_t nonfinite_events = 0;
  std::uint64_t boundary_floor_events = 0;
  std::uint64_t explosion_cap_events = 0;
  std::uint64_t crossing_events = 0;
};

// Simulated paths on a common grid. After an explosion qv is +inf and z is 0, so
// z = exp(l - qv/2) holds at every entry.
class PathBundle {
 public:
  PathBundle(TimeGrid grid, std::size_t n_paths, std::size_t state_dim);

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t n_paths() const { return n_paths_; }
  [[nodiscard]] std::size_t n_times() const { return grid_.size(); }
  [[nodiscard]] std::size_t state_dim() const { return state_dim_; }

  [[nodiscard]] std::span<const double> l(std::size_t p) const { return row(l_, p); }
  [[nodiscard]] std::span<const double> qv(std::size_t p) const { return row(qv_, p); }
  [[nodiscard]] std::span<const double> z(std::size_t p) const { return row(z_, p); }
  // Realized quadratic variation of Z accumulated from its own fine-step increments.
  [[nodiscard]] std::span<const double> zqv(std::size_t p) const { return row(zqv_, p); }
  [[nodiscard]] double x(std::size_t p, std::size_t k, std::size_t d = 0) const {
    return x_[(p * n_times() + k) * state_dim_ + d];
  }
  [[nodiscard]] const PathStatus& status(std::size_t p) const { return status_[p]; }
  [[nodiscard]] const BundleDiagnostics& diagnostics() const { return diagnostics_; }
  // Stream the bundle was simulated from.
  [[nodiscard]] const RandomStreamSpec& seed() const { return seed_; }

  std::span<double> l(std::size_t p) { return row(l_, p); }
  std::span<double> qv(std::size_t p) { return row(qv_, p); }
  std::span<double> z(std::size_t p) { return row(z_, p); }
  std::span<double> zqv(std::size_t p) { return row(zqv_, p); }
  double& x(std::size_t p, std::size_t k, std::size_t d = 0) {
    return x_[(p * n_times() + k) * state_dim_ + d];
  }
  void set_status(std::size_t p, PathStatus s) { status_[p] = s; }
  BundleDiagnostics& diagnostics() { return diagnostics_; }
  void set_seed(RandomStreamSpec seed) { seed_ = seed; }

 private:
  [[nodiscard]] std::span<const double> row(const std::vector<double>& v, std::size_t p) const {
    return {v.data() + p * n_times(), n_times()};
  }
  std::span<double> row(std::vector<double>& v, std::size_t p) {
    return {v.data() + p * n_times(), n_times()};
  }

  TimeGrid grid_;
  std::size_t n_paths_;
  std::size_t state_dim_;
  std::vector<double> x_, l_, qv_, z_, zqv_;
  std::vector<PathStatus> status_;
  BundleDiagnostics diagnostics_;
  RandomStreamSpec seed_;
};

// Throws InvariantViolation if qv decreases, z disagrees with exp(l - qv/2), stopped paths
// move after their index, or exploded paths have non-zero z.
void check_bundle_invariants(const PathBundle& bundle, double z_rel_tol = 1e-12);

}  // namespace nkmart
