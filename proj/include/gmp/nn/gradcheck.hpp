#pragma once

#include <functional>
#include <string>

#include "gmp/nn/layers.hpp"

namespace gmp::nn {

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t over_tolerance = 0;
};

// Builds a scalar (1 x 1) loss on the given tape from the current parameter values.
using LossFn = std::function<Var(Tape&)>;

// Fourth-order central differences (f(x±h), f(x±2h)) against reverse-mode
// gradients for every scalar of every parameter in `params`. The relative
// error of one entry is |a - n| / max(|a|, |n|, abs_floor).
GradcheckResult gradcheck(const LossFn& loss_fn, ParameterStore& params, double eps = 1e-4,
                          double tolerance = 1e-4, double abs_floor = 1e-6);

}  // namespace gmp::nn
