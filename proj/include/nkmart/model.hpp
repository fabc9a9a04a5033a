#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nkmart/small_vec.hpp"

namespace nkmart {

using VectorField = std::function<StateVec(const StateVec& x, double t)>;
using MatrixField = std::function<StateMat(const StateVec& x, double t)>;

// What happens when the first state coordinate reaches the absorbing level.
enum class BoundaryEffect {
  kFreeze,   // the path is stopped: state, L, <L> and Z stay at their hitting values
  kExplode,  // <L> blows up there: the extended exponential jumps to 0
};

struct AbsorbingBoundary {
  double level = 0.0;
  BoundaryEffect effect = BoundaryEffect::kFreeze;
  // An unattainable level is never applied: steps are refined near it and reflected across it.
  bool attainable = true;
};

// dX = drift dt + diffusion dW,  dL = l_integrand . dW.
struct ModelSpec {
  std::string name;
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  VectorField drift;
  MatrixField diffusion;
  VectorField l_integrand;
  StateVec x0;
  std::optional<AbsorbingBoundary> absorbing;
  // Name of the Föllmer-dual model (drift + diffusion * h, integrand -h), if catalogued.
  std::optional<std::string> dual;
};

struct ValidationReport {
  std::size_t probes_checked = 0;
  std::vector<std::string> notes;
};

// Evaluates every callback at each probe point (time t). Throws StructuralError on a
// dimension mismatch and NumericError on a non-finite value.
ValidationReport validate_model(const ModelSpec& model, const std::vector<StateVec>& probes,
                                double t = 0.0);

}  // namespace nkmart

namespace nkmart {

// p_side generates the measure P with density process Z = E(L); q_side is the model of
// the Föllmer measure Q, under which 1/Z is the density process of -L~ = -(L - <L>).
struct DualPair {
  ModelSpec p_side;
  ModelSpec q_side;
  std::string label;
};

}  // namespace nkmart
