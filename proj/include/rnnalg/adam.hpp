#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rnnalg/tensor.hpp"

namespace rnnalg {

struct AdamConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Bias-corrected adaptive-moment state for a fixed list of parameters.
class AdamState {
 public:
  AdamState() = default;

  AdamState(const std::vector<Tensor*>& params, AdamConfig cfg) : cfg_(cfg) {
    for (const Tensor* p : params) {
      m_.emplace_back(p->rows, p->cols);
      v_.emplace_back(p->rows, p->cols);
    }
  }

  const AdamConfig& config() const { return cfg_; }
  int64_t steps() const { return step_; }

  void step(const std::vector<Tensor*>& params,
            const std::vector<const Tensor*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw ShapeError("adam: parameter count changed since construction");
    }
    ++step_;
    const float c1 = 1.0f - float(std::pow(double(cfg_.beta1), double(step_)));
    const float c2 = 1.0f - float(std::pow(double(cfg_.beta2), double(step_)));
    for (size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      const Tensor& g = *grads[i];
      if (!p.same_shape(m_[i]) || !g.same_shape(m_[i])) {
        throw ShapeError("adam: gradient shape mismatch at parameter " +
                         std::to_string(i));
      }
      Tensor& m = m_[i];
      Tensor& v = v_[i];
      for (size_t j = 0; j < p.size(); ++j) {
        float gj = g.v[j];
        m.v[j] = cfg_.beta1 * m.v[j] + (1.0f - cfg_.beta1) * gj;
        v.v[j] = cfg_.beta2 * v.v[j] + (1.0f - cfg_.beta2) * gj * gj;
        float mhat = m.v[j] / c1;
        float vhat = v.v[j] / c2;
        p.v[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  int64_t step_ = 0;
};

inline void adam_step(AdamState& state, const std::vector<Tensor*>& params,
                      const std::vector<const Tensor*>& grads) {
  state.step(params, grads);
}

}  // namespace rnnalg
