#pragma once

#include <cmath>
#include <string>

#include "eeg2shape/tensor.hpp"

namespace e2s {

template <typename T>
struct AdamStateT {
  long long step = 0;
  TensorT<T> first_moment;
  TensorT<T> second_moment;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamStateT() = default;
  AdamStateT(const std::vector<int>& param_dims, double lr, double b1, double b2,
             double eps = 1e-8)
      : first_moment(param_dims),
        second_moment(param_dims),
        learning_rate(lr),
        beta1(b1),
        beta2(b2),
        epsilon(eps) {}
};

using AdamState = AdamStateT<float>;

// Standard Adam update with bias correction. Rejects non-finite gradients,
// naming the parameter in the diagnostic.
template <typename T>
void adam_step(TensorT<T>& param, const TensorT<T>& grad, AdamStateT<T>& state,
               const std::string& param_name = "param") {
  if (!param.same_shape(grad) || !param.same_shape(state.first_moment) ||
      !param.same_shape(state.second_moment)) {
    throw shape_error("adam_step shape mismatch for " + param_name);
  }
  if (!grad.all_finite()) {
    throw numeric_error("adam_step: non-finite gradient for parameter '" + param_name +
                        "' at step " + std::to_string(state.step + 1));
  }
  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (long long i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad[i]);
    const double m = b1 * static_cast<double>(state.first_moment[i]) + (1.0 - b1) * g;
    const double v = b2 * static_cast<double>(state.second_moment[i]) + (1.0 - b2) * g * g;
    state.first_moment[i] = static_cast<T>(m);
    state.second_moment[i] = static_cast<T>(v);
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    param[i] = static_cast<T>(static_cast<double>(param[i]) -
                              state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon));
  }
}

}  // namespace e2s
