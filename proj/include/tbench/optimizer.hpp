#pragma once

#include <string>

#include "tbench/model.hpp"

namespace tbench {

struct OptimizerSpec {
  enum class Kind { sgd, adam, adadelta };
  Kind kind = Kind::adam;
  // sgd
  double momentum = 0.0;
  // adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // adadelta
  double rho = 0.95;
  double ada_eps = 1e-6;

  void validate() const;
  std::string describe() const;  // e.g. "adam", "sgd(momentum=0.9)"
  bool operator==(const OptimizerSpec&) const = default;
};

/// Moment/velocity buffers mirroring the parameter layout. Lazily sized on
/// the first step.
struct OptimizerState {
  Gradients buf1;  // sgd velocity / adam m / adadelta E[g^2]
  Gradients buf2;  // adam v / adadelta E[dx^2]
  long t = 0;
  bool initialized = false;
};

/// In-place parameter update.
///   sgd:      v = mu*v + g;              p -= lr*v
///   adam:     m,v EMAs; p -= lr*sqrt(1-b2^t)/(1-b1^t) * m/(sqrt(v)+eps)
///             (epsilon applied to the uncorrected second moment, so the
///             t=1 step magnitude has the closed form lr/(1+eps/sqrt(1-b2))
///             for unit gradients)
///   adadelta: E[g^2], E[dx^2] EMAs; p -= lr * rms(dx)/rms(g) * g
/// Throws NumericError on a non-finite gradient, naming the layer.
void optimizer_step(OptimizerState& state, ModelParams& params,
                    const Gradients& grads, double lr, const OptimizerSpec& spec);

}  // namespace tbench
