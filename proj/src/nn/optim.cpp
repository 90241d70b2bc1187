#include "gmp/nn/optim.hpp"

#include <cmath>

namespace gmp::nn {

Adam::Adam(ParameterStore& store, double beta1, double beta2, double eps)
    : store_(store), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : store_.all()) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

double Adam::step(double lr, double clip_norm, double weight_decay) {
  const double norm = store_.grad_norm();
  const double clip = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t i = 0;
  for (auto& p : store_.all()) {
    Matrix& m = m_[i];
    Matrix& v = v_[i];
    ++i;
    const double decay = p.value.rows() > 1 ? 1.0 - lr * weight_decay : 1.0;
    for (Eigen::Index j = 0; j < p.value.size(); ++j) {
      const double g = p.grad.data()[j] * clip;
      double& mj = m.data()[j];
      double& vj = v.data()[j];
      mj = beta1_ * mj + (1.0 - beta1_) * g;
      vj = beta2_ * vj + (1.0 - beta2_) * g * g;
      if (decay != 1.0) p.value.data()[j] *= decay;
      p.value.data()[j] -= lr * (mj / c1) / (std::sqrt(vj / c2) + eps_);
    }
  }
  return norm;
}

}  // namespace gmp::nn
