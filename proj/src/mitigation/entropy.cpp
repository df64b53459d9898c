#include "rlab/mitigation/entropy.hpp"

#include <cmath>

#include "rlab/common/error.hpp"

namespace rlab::mitigation {

double translation_entropy(const ad::Tensor& probabilities) {
  if (probabilities.rank() != 2) {
    throw ShapeError("translation entropy expects [T, V], got " + ad::shape_string(probabilities.shape()));
  }
  const std::size_t steps = probabilities.dim(0);
  const std::size_t v = probabilities.dim(1);
  if (steps == 0 || v == 0) throw DegenerateInput("translation entropy of an empty decode");
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double h = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      const double p = probabilities[t * v + j];
      if (p > 0.0) h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(steps);
}

double translation_entropy(const model::GenerationRecord& record) {
  return translation_entropy(record.probabilities);
}

std::vector<double> answer_distribution(std::span<const AnswerCandidate> candidates) {
  if (candidates.empty()) throw EmptyInput("no answer candidates");
  std::vector<double> p;
  p.reserve(candidates.size());
  double z = 0.0;
  for (const auto& c : candidates) {
    if (!(c.start >= 0.0) || !(c.end >= 0.0) || !std::isfinite(c.start) || !std::isfinite(c.end)) {
      throw DegenerateInput("answer scores must be finite and nonnegative");
    }
    p.push_back(c.start * c.end);
    z += p.back();
  }
  if (!(z > 0.0)) throw DegenerateInput("all candidate score products are zero");
  for (double& x : p) x /= z;
  return p;
}

double answer_entropy(std::span<const AnswerCandidate> candidates) {
  double h = 0.0;
  for (double p : answer_distribution(candidates)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace rlab::mitigation
