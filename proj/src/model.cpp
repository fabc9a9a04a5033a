#include "nkmart/model.hpp"

#include <cmath>
#include <sstream>

#include "nkmart/errors.hpp"

namespace nkmart {
namespace {

std::string where(const ModelSpec& m, const StateVec& x, double t) {
  std::ostringstream os;
  os << "model '" << m.name << "' at x=(";
  for (std::size_t i = 0; i < x.size() && i < kMaxDim; ++i) os << (i ? "," : "") << x[i];
  os << "), t=" << t;
  return os.str();
}

void require_finite(const ModelSpec& m, const char* what, const StateVec& v, const StateVec& x,
                    double t) {
  for (double e : v) {
    if (!std::isfinite(e)) throw NumericError(std::string(what) + " is not finite for " + where(m, x, t));
  }
}

}  // namespace

ValidationReport validate_model(const ModelSpec& model, const std::vector<StateVec>& probes,
                                double t) {
  if (model.state_dim == 0 || model.state_dim > kMaxDim || model.noise_dim == 0 ||
      model.noise_dim > kMaxDim) {
    throw StructuralError("model '" + model.name + "' dimensions must lie in [1, 4]");
  }
  if (!model.drift || !model.diffusion || !model.l_integrand) {
    throw StructuralError("model '" + model.name + "' is missing a coefficient function");
  }
  if (model.x0.size() != model.state_dim) {
    throw StructuralError("model '" + model.name + "' initial state has wrong dimension");
  }
  for (double v : model.x0) {
    if (!std::isfinite(v)) throw NumericError("model '" + model.name + "' initial state is not finite");
  }
  if (model.absorbing && model.x0[0] == model.absorbing->level) {
    throw InvalidArgument("model '" + model.name + "' starts on its absorbing level");
  }

  ValidationReport report;
  for (const StateVec& x : probes) {
    if (x.size() != model.state_dim) {
      throw StructuralError("probe point dimension differs from state_dim for model '" +
                            model.name + "'");
    }
    const StateVec mu = model.drift(x, t);
    const StateMat sigma = model.diffusion(x, t);
    const StateVec h = model.l_integrand(x, t);
    if (mu.size() != model.state_dim) {
      throw StructuralError("drift dimension mismatch for " + where(model, x, t));
    }
    if (sigma.rows() != model.state_dim || sigma.cols() != model.noise_dim) {
      throw StructuralError("diffusion is " + std::to_string(sigma.rows()) + "x" +
                            std::to_string(sigma.cols()) + ", expected " +
                            std::to_string(model.state_dim) + "x" +
                            std::to_string(model.noise_dim) + " for " + where(model, x, t));
    }
    if (h.size() != model.noise_dim) {
      throw StructuralError("L integrand dimension mismatch for " + where(model, x, t));
    }
    require_finite(model, "drift", mu, x, t);
    require_finite(model, "L integrand", h, x, t);
    for (std::size_t r = 0; r < sigma.rows(); ++r) {
      for (std::size_t c = 0; c < sigma.cols(); ++c) {
        if (!std::isfinite(sigma(r, c))) {
          throw NumericError("diffusion is not finite for " + where(model, x, t));
        }
      }
    }
    ++report.probes_checked;
  }
  return report;
}

}  // namespace nkmart
