#pragma once

#include <vector>

#include "gmp/nn/layers.hpp"

namespace gmp::nn {

// Adam with bias correction and optional global-norm clipping.
class Adam {
 public:
  explicit Adam(ParameterStore& store, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // Applies one update from the accumulated gradients; returns the
  // pre-clipping gradient norm. `weight_decay` is decoupled (AdamW) and
  // skips row-vector parameters (biases, layer-norm gains).
  double step(double lr, double clip_norm = 0.0, double weight_decay = 0.0);
  long long steps() const { return t_; }

 private:
  ParameterStore& store_;
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace gmp::nn
