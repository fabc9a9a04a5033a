#include "nkmart/path_bundle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nkmart/errors.hpp"

namespace nkmart {

PathBundle::PathBundle(TimeGrid grid, std::size_t n_paths, std::size_t state_dim)
    : grid_(std::move(grid)), n_paths_(n_paths), state_dim_(state_dim) {
  if (n_paths == 0) throw InvalidArgument("bundle needs at least one path");
  if (state_dim == 0) throw InvalidArgument("state dimension must be positive");
  const std::size_t cells = n_paths * grid_.size();
  x_.assign(cells * state_dim, 0.0);
  l_.assign(cells, 0.0);
  qv_.assign(cells, 0.0);
  z_.assign(cells, 1.0);
  zqv_.assign(cells, 0.0);
  status_.assign(n_paths, PathStatus::alive());
}

void check_bundle_invariants(const PathBundle& b, double z_rel_tol) {
  const std::size_t n = b.n_times();
  for (std::size_t p = 0; p < b.n_paths(); ++p) {
    const auto l = b.l(p);
    const auto qv = b.qv(p);
    const auto z = b.z(p);
    const auto zqv = b.zqv(p);
    const PathStatus st = b.status(p);
    auto fail = [&](const std::string& what, std::size_t k) {
      throw InvariantViolation("path " + std::to_string(p) + " index " + std::to_string(k) +
                               ": " + what);
    };
    if (qv[0] != 0.0 || l[0] != 0.0 || z[0] != 1.0) fail("path does not start at L=0, Z=1", 0);
    if (st.state != PathState::kAlive && (st.index == 0 || st.index >= n)) {
      fail("status index out of range", st.index);
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && qv[k] < qv[k - 1]) fail("qv decreases", k);
      if (k > 0 && zqv[k] < zqv[k - 1]) fail("realized <Z> decreases", k);
      if (z[k] < 0.0) fail("negative z", k);
      if (st.exploded_by(k)) {
        if (z[k] != 0.0) fail("exploded path has non-zero z", k);
        if (!std::isinf(qv[k])) fail("exploded path has finite qv", k);
      } else {
        const double expected = std::exp(l[k] - 0.5 * qv[k]);
        if (std::abs(z[k] - expected) > z_rel_tol * std::max(1.0, expected)) {
          fail("z differs from exp(l - qv/2)", k);
        }
      }
      if (st.stopped_by(k) && k > st.index) {
        if (l[k] != l[st.index]) fail("l moves after stop", k);
        for (std::size_t d = 0; d < b.state_dim(); ++d) {
          if (b.x(p, k, d) != b.x(p, st.index, d)) fail("state moves after stop", k);
        }
        if (st.state == PathState::kAbsorbed && qv[k] != qv[st.index]) fail("qv moves after stop", k);
      }
    }
  }
}

}  // namespace nkmart
