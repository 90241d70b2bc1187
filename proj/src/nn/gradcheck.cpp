#include "gmp/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace gmp::nn {

GradcheckResult gradcheck(const LossFn& loss_fn, ParameterStore& params, double eps,
                          double tolerance, double abs_floor) {
  params.zero_grad();
  {
    Tape tape(true);
    Var loss = loss_fn(tape);
    tape.backward(loss);
  }
  auto evaluate = [&] {
    Tape tape(false);
    return scalar(loss_fn(tape));
  };

  GradcheckResult result;
  for (auto& p : params.all()) {
    const Matrix analytic = p.grad;
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      auto at = [&](double offset) {
        x = saved + offset;
        return evaluate();
      };
      // Fourth-order central difference.
      const double numeric =
          (8.0 * (at(eps) - at(-eps)) - (at(2.0 * eps) - at(-2.0 * eps))) / (12.0 * eps);
      x = saved;
      const double a = analytic.data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > tolerance) ++result.over_tolerance;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace gmp::nn
