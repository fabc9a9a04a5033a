#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nkmart/model.hpp"
#include "nkmart/path_bundle.hpp"
#include "nkmart/random.hpp"
#include "nkmart/time_grid.hpp"

namespace nkmart::sde {

enum class Scheme { kEulerMaruyama, kEulerWithBoundaryRefinement };

struct IntegratorConfig {
  Scheme scheme = Scheme::kEulerWithBoundaryRefinement;
  double dt_max = 1e-3;
  // Substeps are halved while the distance to the absorbing level is below
  // refine_threshold * sqrt(substep). At dt_min the boundary counts as reached.
  double refine_threshold = 3.0;
  double dt_min = 0.0;  // 0 selects dt_max / 1024
  // <L> above this value is treated as an explosion.
  double explosion_cap = 1e6;

  [[nodiscard]] double effective_dt_min() const { return dt_min > 0.0 ? dt_min : dt_max / 1024.0; }
};

// Everything needed to reproduce one bundle: paths are recorded on a uniform grid with
// record_steps intervals while the integrator steps at most integrator.dt_max.
struct SimulationParams {
  std::size_t n_paths = 10000;
  double horizon = 1.0;
  std::size_t record_steps = 10;
  IntegratorConfig integrator;
  RandomStreamSpec rng;

  [[nodiscard]] TimeGrid grid() const { return make_uniform_grid(horizon, record_steps); }
};

inline constexpr std::size_t kBlockSize = 256;

PathBundle simulate_paths(const ModelSpec& model, const TimeGrid& grid, std::size_t n_paths,
                          const IntegratorConfig& config, RandomStreamSpec rng);

PathBundle simulate(const ModelSpec& model, const SimulationParams& params);

enum class Direction { kAbove, kBelow };
enum class Channel { kL, kState, kQv, kZ };

double channel_value(const PathBundle& bundle, std::size_t path, std::size_t k, Channel channel,
                     std::size_t coordinate = 0);

// First grid index whose channel value is >= level(t) (Above) or <= level(t) (Below).
std::optional<std::size_t> hitting_time_index(const PathBundle& bundle, std::size_t path,
                                              const std::function<double(double)>& level,
                                              Direction direction, Channel channel = Channel::kL,
                                              std::size_t coordinate = 0);

// Per-path sum of squared grid increments of L up to time t (t must be a grid time).
std::vector<double> realized_quadratic_variation(const PathBundle& bundle, double t);

// Columnar CSV: one row per (path, index).
void write_bundle_csv(const PathBundle& bundle, std::ostream& out);

inline constexpr std::uint32_t kBundleFormatVersion = 1;
void write_bundle_binary(const PathBundle& bundle, std::ostream& out);
PathBundle read_bundle_binary(std::istream& in);

}  // namespace nkmart::sde
