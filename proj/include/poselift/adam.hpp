#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "poselift/tensor.hpp"

namespace poselift {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

inline AdamState make_adam_state(const std::vector<Tensor*>& params) {
  AdamState state;
  state.m.reserve(params.size());
  state.v.reserve(params.size());
  for (const Tensor* p : params) {
    state.m.emplace_back(p->shape());
    state.v.emplace_back(p->shape());
  }
  return state;
}

// Bias-corrected Adam update, epsilon added outside the square root.
inline void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
                      AdamState& state, const AdamHyper& hp) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw TensorError("adam_step: parameter/gradient/state counts differ");
  }
  state.step += 1;
  const double m_corr = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double v_corr = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    if (!p.same_shape(g) || !p.same_shape(state.m[i])) {
      throw TensorError("adam_step: shape mismatch at parameter " + std::to_string(i) + ": param " +
                        p.shape_str() + ", grad " + g.shape_str());
    }
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t j = 0; j < p.numel(); ++j) {
      m[j] = hp.beta1 * m[j] + (1.0 - hp.beta1) * g[j];
      v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * g[j] * g[j];
      const double m_hat = m[j] / m_corr;
      const double v_hat = v[j] / v_corr;
      p[j] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
    }
  }
}

}  // namespace poselift
