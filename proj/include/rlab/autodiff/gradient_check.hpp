#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "rlab/autodiff/tape.hpp"

namespace rlab::ad {

struct GradientCheckOptions {
  double tolerance = 1e-4;
  std::size_t coordinates = 200;  // sampled without replacement; all if fewer exist
  double step = 1e-5;             // central difference half-width
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double absolute_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
  bool passed = true;
};

// Builds the loss on a fresh tape from the current parameter values. Must be
// deterministic (no dropout).
using LossFunction = std::function<Var(Tape&, const ParameterStore&)>;

// Compares backward() against central finite differences on a seeded sample of
// parameter coordinates. Parameters are restored before returning.
GradientCheckReport gradient_check(const LossFunction& loss, ParameterStore& params,
                                   const GradientCheckOptions& options = {});

}  // namespace rlab::ad
