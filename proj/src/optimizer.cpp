#include "tbench/optimizer.hpp"

#include <cmath>

#include "tbench/error.hpp"

namespace tbench {

void OptimizerSpec::validate() const {
  if (kind == Kind::sgd) {
    if (momentum < 0.0 || momentum >= 1.0)
      throw ConfigError("sgd: momentum must be in [0,1)");
  } else if (kind == Kind::adam) {
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
      throw ConfigError("adam: betas must be in [0,1)");
    if (eps <= 0.0) throw ConfigError("adam: eps must be > 0");
  } else {
    if (rho < 0.0 || rho >= 1.0) throw ConfigError("adadelta: rho must be in [0,1)");
    if (ada_eps <= 0.0) throw ConfigError("adadelta: eps must be > 0");
  }
}

std::string OptimizerSpec::describe() const {
  switch (kind) {
    case Kind::sgd:
      return momentum == 0.0 ? "sgd" : "sgd(momentum=" + std::to_string(momentum) + ")";
    case Kind::adam: return "adam";
    case Kind::adadelta: return "adadelta";
  }
  return "?";
}

void optimizer_step(OptimizerState& state, ModelParams& params,
                    const Gradients& grads, double lr, const OptimizerSpec& spec) {
  spec.validate();
  if (lr <= 0.0) throw ConfigError("optimizer_step: lr must be > 0");
  if (!state.initialized) {
    state.buf1 = zero_gradients(params.arch);
    state.buf2 = zero_gradients(params.arch);
    state.t = 0;
    state.initialized = true;
  }
  state.t++;

  for (LayerName name : kLayerOrder) {
    const LayerParams& g = grads.layer(name);
    LayerParams& p = params.layer(name);
    LayerParams& b1 = state.buf1.layer(name);
    LayerParams& b2 = state.buf2.layer(name);

    auto update = [&](std::vector<double>& pv, const std::vector<double>& gv,
                      std::vector<double>& m1, std::vector<double>& m2) {
      if (pv.size() != gv.size())
        throw ShapeError(std::string("optimizer_step: gradient shape mismatch in ") +
                         to_string(name));
      for (std::size_t i = 0; i < pv.size(); ++i) {
        double g_i = gv[i];
        if (!std::isfinite(g_i))
          throw NumericError(std::string("non-finite gradient in layer ") +
                             to_string(name) + " at step " + std::to_string(state.t));
        switch (spec.kind) {
          case OptimizerSpec::Kind::sgd: {
            m1[i] = spec.momentum * m1[i] + g_i;
            pv[i] -= lr * m1[i];
            break;
          }
          case OptimizerSpec::Kind::adam: {
            m1[i] = spec.beta1 * m1[i] + (1.0 - spec.beta1) * g_i;
            m2[i] = spec.beta2 * m2[i] + (1.0 - spec.beta2) * g_i * g_i;
            double alpha = lr *
                           std::sqrt(1.0 - std::pow(spec.beta2, static_cast<double>(state.t))) /
                           (1.0 - std::pow(spec.beta1, static_cast<double>(state.t)));
            pv[i] -= alpha * m1[i] / (std::sqrt(m2[i]) + spec.eps);
            break;
          }
          case OptimizerSpec::Kind::adadelta: {
            m1[i] = spec.rho * m1[i] + (1.0 - spec.rho) * g_i * g_i;
            double dx = std::sqrt((m2[i] + spec.ada_eps) / (m1[i] + spec.ada_eps)) * g_i;
            m2[i] = spec.rho * m2[i] + (1.0 - spec.rho) * dx * dx;
            pv[i] -= lr * dx;
            break;
          }
        }
      }
    };
    update(p.weight, g.weight, b1.weight, b2.weight);
    update(p.bias, g.bias, b1.bias, b2.bias);
  }
}

}  // namespace tbench
