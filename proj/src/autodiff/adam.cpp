#include "rlab/autodiff/adam.hpp"

#include <cmath>

#include "rlab/common/error.hpp"

namespace rlab::ad {

AdamState::AdamState(const ParameterStore& params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.value(i).shape());
    v_.emplace_back(params.value(i).shape());
  }
}

void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m_.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " + std::to_string(state.m_.size()) +
                     " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape& s = params.value(i).shape();
    if (grads[i].shape() != s || state.m_[i].shape() != s) {
      throw ShapeError("adam_step: parameter '" + params.name(i) + "' " + shape_string(s) +
                       " vs gradient " + shape_string(grads[i].shape()));
    }
  }
  const AdamConfig& c = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.value(i);
    Tensor& m = state.m_[i];
    Tensor& v = state.v_[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double mhat = m[j] / bias1;
      const double vhat = v[j] / bias2;
      p[j] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

double clip_gradients(Gradients& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g.values()) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g.values()) x *= f;
    }
  }
  return norm;
}

}  // namespace rlab::ad
