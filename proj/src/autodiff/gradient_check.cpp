#include "rlab/autodiff/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "rlab/common/rng.hpp"

namespace rlab::ad {

namespace {

double evaluate(const LossFunction& loss, const ParameterStore& params) {
  Tape tape;
  return tape.value(loss(tape, params)).item();
}

}  // namespace

GradientCheckReport gradient_check(const LossFunction& loss, ParameterStore& params,
                                   const GradientCheckOptions& options) {
  Gradients analytic;
  {
    Tape tape;
    const Var l = loss(tape, params);
    analytic = tape.backward(l, params);
  }

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t j = 0; j < params.value(p).size(); ++j) coords.emplace_back(p, j);
  }
  Rng rng(options.seed);
  rng.shuffle(coords);
  if (coords.size() > options.coordinates) coords.resize(options.coordinates);

  GradientCheckReport report;
  for (const auto& [p, j] : coords) {
    double& x = params.value(p)[j];
    const double original = x;
    x = original + options.step;
    const double up = evaluate(loss, params);
    x = original - options.step;
    const double down = evaluate(loss, params);
    x = original;

    const double numeric = (up - down) / (2.0 * options.step);
    const double a = analytic[p][j];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.absolute_floor});
    const double rel = std::abs(a - numeric) / denom;
    if (rel > report.max_relative_error || report.coordinates_checked == 0) {
      report.max_relative_error = rel;
      report.worst_parameter = params.name(p);
      report.worst_index = j;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
    ++report.coordinates_checked;
  }
  report.passed = !(report.max_relative_error >= options.tolerance);
  return report;
}

}  // namespace rlab::ad
