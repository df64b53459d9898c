#pragma once

#include <cstdint>
#include <vector>

#include "rlab/autodiff/tape.hpp"

namespace rlab::ad {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParameterStore& params, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }
  std::uint64_t step() const { return step_; }
  const std::vector<Tensor>& first_moment() const { return m_; }
  const std::vector<Tensor>& second_moment() const { return v_; }

  bool operator==(const AdamState&) const = default;

 private:
  friend void adam_step(ParameterStore&, const Gradients&, AdamState&);
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t step_ = 0;
};

// One bias-corrected Adam update in place. Throws ShapeError when the
// parameters, gradients and moments disagree.
void adam_step(ParameterStore& params, const Gradients& grads, AdamState& state);

// Rescales the gradients so their global L2 norm is at most max_norm (no-op
// for max_norm <= 0). Returns the norm before clipping.
double clip_gradients(Gradients& grads, double max_norm);

}  // namespace rlab::ad
