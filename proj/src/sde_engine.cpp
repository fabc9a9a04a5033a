#include "nkmart/sde_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "nkmart/errors.hpp"
#include "nkmart/json_io.hpp"
#include "nkmart/parallel.hpp"

namespace nkmart::sde {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Counters {
  std::uint64_t nonfinite = 0;
  std::uint64_t floor = 0;
  std::uint64_t cap = 0;
  std::uint64_t crossing = 0;
};

bool all_finite(const StateVec& v) {
  for (double e : v) {
    if (!std::isfinite(e)) return false;
  }
  return true;
}

class PathIntegrator {
 public:
  PathIntegrator(const ModelSpec& model, const TimeGrid& grid, const IntegratorConfig& cfg)
      : m_(model), grid_(grid), cfg_(cfg), dt_min_(cfg.effective_dt_min()),
        refine_(cfg.scheme == Scheme::kEulerWithBoundaryRefinement && model.absorbing.has_value()) {}

  void run(NormalStream& normals, PathBundle& out, std::size_t p, Counters& counters) {
    x_ = m_.x0;
    l_ = 0.0;
    qv_ = 0.0;
    z_ = 1.0;
    zqv_ = 0.0;
    t_ = 0.0;
    status_ = PathStatus::alive();
    record(out, p, 0);
    const auto& times = grid_.times();
    for (std::size_t k = 1; k < times.size(); ++k) {
      k_ = k;
      if (status_.state == PathState::kAlive) advance_to(times[k], normals, counters);
      record(out, p, k);
    }
    out.set_status(p, status_);
  }

 private:
  void record(PathBundle& out, std::size_t p, std::size_t k) const {
    for (std::size_t d = 0; d < m_.state_dim; ++d) out.x(p, k, d) = x_[d];
    out.l(p)[k] = l_;
    out.qv(p)[k] = qv_;
    out.z(p)[k] = z_;
    out.zqv(p)[k] = zqv_;
  }

  void explode() {
    status_ = PathStatus::exploded_at(k_);
    zqv_ += z_ * z_;
    qv_ = kInf;
    z_ = 0.0;
  }

  void apply_boundary() {
    if (m_.absorbing->effect == BoundaryEffect::kExplode) {
      explode();
    } else {
      status_ = PathStatus::absorbed_at(k_);
    }
  }

  void advance_to(double t_next, NormalStream& normals, Counters& counters) {
    const std::size_t nd = m_.noise_dim;
    const std::size_t sd = m_.state_dim;
    while (t_ < t_next) {
      double dt = cfg_.dt_max;
      if (refine_) {
        const double dist = std::abs(x_[0] - m_.absorbing->level);
        while (dt > dt_min_ && dist < cfg_.refine_threshold * std::sqrt(dt)) dt *= 0.5;
        dt = std::max(dt, dt_min_);
        if (m_.absorbing->attainable && dist < cfg_.refine_threshold * std::sqrt(dt)) {
          ++counters.floor;
          apply_boundary();
          return;
        }
      }
      const double remaining = t_next - t_;
      const bool last = dt >= remaining * (1.0 - 1e-9);
      if (last) dt = remaining;
      const double sqdt = std::sqrt(dt);

      StateVec dw(nd);
      for (std::size_t j = 0; j < nd; ++j) dw[j] = sqdt * normals();
      const StateVec mu = m_.drift(x_, t_);
      const StateMat sigma = m_.diffusion(x_, t_);
      const StateVec h = m_.l_integrand(x_, t_);
      double dl = 0.0;
      double h2 = 0.0;
      for (std::size_t j = 0; j < nd; ++j) {
        dl += h[j] * dw[j];
        h2 += h[j] * h[j];
      }
      const double dqv = h2 * dt;
      StateVec x_new(sd);
      for (std::size_t i = 0; i < sd; ++i) {
        double v = x_[i] + mu[i] * dt;
        for (std::size_t j = 0; j < nd; ++j) v += sigma(i, j) * dw[j];
        x_new[i] = v;
      }
      if (!all_finite(x_new) || !std::isfinite(dl) || !std::isfinite(dqv)) {
        ++counters.nonfinite;
        explode();
        return;
      }
      if (m_.absorbing) {
        const double d_old = x_[0] - m_.absorbing->level;
        const double d_new = x_new[0] - m_.absorbing->level;
        const bool crossed = d_new == 0.0 || std::signbit(d_new) != std::signbit(d_old);
        if (crossed && !m_.absorbing->attainable) {
          ++counters.crossing;
          x_new[0] = m_.absorbing->level - d_new;
          if (d_new == 0.0) x_new[0] = m_.absorbing->level + (d_old > 0.0 ? dt_min_ : -dt_min_);
        } else if (crossed) {
          ++counters.crossing;
          if (m_.absorbing->effect == BoundaryEffect::kExplode) {
            explode();
            return;
          }
          const double frac = d_old / (d_old - d_new);
          for (std::size_t i = 0; i < sd; ++i) x_[i] += frac * (x_new[i] - x_[i]);
          x_[0] = m_.absorbing->level;
          step_l(l_ + frac * dl, qv_ + frac * dqv);
          status_ = PathStatus::absorbed_at(k_);
          return;
        }
      }
      x_ = x_new;
      t_ = last ? t_next : t_ + dt;
      if (qv_ + dqv > cfg_.explosion_cap) {
        ++counters.cap;
        explode();
        return;
      }
      step_l(l_ + dl, qv_ + dqv);
    }
  }

  void step_l(double l_new, double qv_new) {
    const double z_new = std::exp(l_new - 0.5 * qv_new);
    zqv_ += (z_new - z_) * (z_new - z_);
    l_ = l_new;
    qv_ = qv_new;
    z_ = z_new;
  }

  const ModelSpec& m_;
  const TimeGrid& grid_;
  const IntegratorConfig& cfg_;
  double dt_min_;
  bool refine_;
  StateVec x_;
  double l_ = 0.0, qv_ = 0.0, z_ = 1.0, zqv_ = 0.0, t_ = 0.0;
  std::size_t k_ = 0;
  PathStatus status_;
};

}  // namespace

PathBundle simulate_paths(const ModelSpec& model, const TimeGrid& grid, std::size_t n_paths,
                          const IntegratorConfig& config, RandomStreamSpec rng) {
  if (n_paths == 0) throw InvalidArgument("n_paths must be positive");
  if (!(config.dt_max > 0.0) || !std::isfinite(config.dt_max)) {
    throw InvalidArgument("dt_max must be positive and finite");
  }
  if (config.effective_dt_min() > config.dt_max) throw InvalidArgument("dt_min exceeds dt_max");
  if (!(config.refine_threshold >= 0.0)) throw InvalidArgument("refine_threshold must be >= 0");
  if (!(config.explosion_cap > 0.0)) throw InvalidArgument("explosion_cap must be positive");
  validate_model(model, {model.x0});

  PathBundle bundle(grid, n_paths, model.state_dim);
  bundle.set_seed(rng);
  const std::size_t n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
  std::vector<Counters> counters(n_blocks);
  parallel_for(n_blocks, [&](std::size_t b) {
    NormalStream normals(rng.derive(b));
    PathIntegrator integrator(model, grid, config);
    const std::size_t end = std::min(n_paths, (b + 1) * kBlockSize);
    for (std::size_t p = b * kBlockSize; p < end; ++p) integrator.run(normals, bundle, p, counters[b]);
  });
  auto& diag = bundle.diagnostics();
  for (const auto& c : counters) {
    diag.nonfinite_events += c.nonfinite;
    diag.boundary_floor_events += c.floor;
    diag.explosion_cap_events += c.cap;
    diag.crossing_events += c.crossing;
  }
  return bundle;
}

PathBundle simulate(const ModelSpec& model, const SimulationParams& params) {
  return simulate_paths(model, params.grid(), params.n_paths, params.integrator, params.rng);
}

double channel_value(const PathBundle& b, std::size_t p, std::size_t k, Channel channel,
                     std::size_t coordinate) {
  switch (channel) {
    case Channel::kL:
      return b.l(p)[k];
    case Channel::kState:
      return b.x(p, k, coordinate);
    case Channel::kQv:
      return b.qv(p)[k];
    case Channel::kZ:
      return b.z(p)[k];
  }
  return 0.0;
}

std::optional<std::size_t> hitting_time_index(const PathBundle& bundle, std::size_t path,
                                              const std::function<double(double)>& level,
                                              Direction direction, Channel channel,
                                              std::size_t coordinate) {
  if (path >= bundle.n_paths()) throw InvalidArgument("path index out of range");
  if (channel == Channel::kState && coordinate >= bundle.state_dim()) {
    throw InvalidArgument("state coordinate out of range");
  }
  const auto& times = bundle.grid().times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double v = channel_value(bundle, path, k, channel, coordinate);
    const double c = level(times[k]);
    if (direction == Direction::kAbove ? v >= c : v <= c) return k;
  }
  return std::nullopt;
}

std::vector<double> realized_quadratic_variation(const PathBundle& bundle, double t) {
  const auto idx = bundle.grid().index_of(t);
  if (!idx) throw InvalidArgument("t is not a grid time");
  std::vector<double> out(bundle.n_paths(), 0.0);
  for (std::size_t p = 0; p < bundle.n_paths(); ++p) {
    const auto l = bundle.l(p);
    double s = 0.0;
    for (std::size_t k = 1; k <= *idx; ++k) s += (l[k] - l[k - 1]) * (l[k] - l[k - 1]);
    out[p] = s;
  }
  return out;
}

void write_bundle_csv(const PathBundle& b, std::ostream& out) {
  out << "path,index,t";
  for (std::size_t d = 0; d < b.state_dim(); ++d) out << ",x" << d;
  out << ",l,qv,z,zqv,status\n";
  const auto& times = b.grid().times();
  for (std::size_t p = 0; p < b.n_paths(); ++p) {
    const PathStatus st = b.status(p);
    for (std::size_t k = 0; k < times.size(); ++k) {
      out << p << ',' << k << ',' << format_number(times[k]);
      for (std::size_t d = 0; d < b.state_dim(); ++d) out << ',' << format_number(b.x(p, k, d));
      const char* state = "alive";
      if (st.stopped_by(k)) state = st.state == PathState::kAbsorbed ? "absorbed" : "exploded";
      out << ',' << format_number(b.l(p)[k]) << ',' << format_number(b.qv(p)[k]) << ','
          << format_number(b.z(p)[k]) << ',' << format_number(b.zqv(p)[k]) << ',' << state
          << '\n';
    }
  }
}

namespace {

constexpr char kMagic[8] = {'N', 'K', 'M', 'B', 'N', 'D', 'L', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InvalidArgument("truncated bundle dump");
  return v;
}

}  // namespace

void write_bundle_binary(const PathBundle& b, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kBundleFormatVersion);
  put<std::uint64_t>(out, b.n_paths());
  put<std::uint64_t>(out, b.n_times());
  put<std::uint64_t>(out, b.state_dim());
  put<std::uint64_t>(out, b.seed().master_seed);
  put<std::uint64_t>(out, b.seed().stream_index);
  for (double t : b.grid().times()) put(out, t);
  for (std::size_t p = 0; p < b.n_paths(); ++p) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(b.status(p).state));
    put<std::uint64_t>(out, b.status(p).index);
    for (std::size_t k = 0; k < b.n_times(); ++k) {
      for (std::size_t d = 0; d < b.state_dim(); ++d) put(out, b.x(p, k, d));
      put(out, b.l(p)[k]);
      put(out, b.qv(p)[k]);
      put(out, b.z(p)[k]);
      put(out, b.zqv(p)[k]);
    }
  }
  const auto& diag = b.diagnostics();
  put(out, diag.nonfinite_events);
  put(out, diag.boundary_floor_events);
  put(out, diag.explosion_cap_events);
  put(out, diag.crossing_events);
}

PathBundle read_bundle_binary(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InvalidArgument("not a path bundle dump");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kBundleFormatVersion) {
    throw InvalidArgument("unsupported bundle dump version " + std::to_string(version));
  }
  const auto n_paths = get<std::uint64_t>(in);
  const auto n_times = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  RandomStreamSpec seed;
  seed.master_seed = get<std::uint64_t>(in);
  seed.stream_index = get<std::uint64_t>(in);
  std::vector<double> times(n_times);
  for (auto& t : times) t = get<double>(in);
  PathBundle b(TimeGrid(std::move(times)), n_paths, dim);
  b.set_seed(seed);
  for (std::size_t p = 0; p < n_paths; ++p) {
    const auto state = get<std::uint8_t>(in);
    const auto index = get<std::uint64_t>(in);
    if (state > 2) throw InvalidArgument("corrupt path status");
    b.set_status(p, {static_cast<PathState>(state), index});
    for (std::size_t k = 0; k < n_times; ++k) {
      for (std::size_t d = 0; d < dim; ++d) b.x(p, k, d) = get<double>(in);
      b.l(p)[k] = get<double>(in);
      b.qv(p)[k] = get<double>(in);
      b.z(p)[k] = get<double>(in);
      b.zqv(p)[k] = get<double>(in);
    }
  }
  auto& diag = b.diagnostics();
  diag.nonfinite_events = get<std::uint64_t>(in);
  diag.boundary_floor_events = get<std::uint64_t>(in);
  diag.explosion_cap_events = get<std::uint64_t>(in);
  diag.crossing_events = get<std::uint64_t>(in);
  return b;
}

}  // namespace nkmart::sde
