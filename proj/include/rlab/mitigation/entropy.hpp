#pragma once

#include <span>
#include <vector>

#include "rlab/autodiff/tensor.hpp"
#include "rlab/model/generation.hpp"

namespace rlab::mitigation {

// Mean per-token entropy (natural log) of a [T, |V|] probability matrix, with
// 0 ln 0 taken as 0. Throws DegenerateInput when T = 0.
double translation_entropy(const ad::Tensor& probabilities);
double translation_entropy(const model::GenerationRecord& record);

struct AnswerCandidate {
  double start = 0.0;
  double end = 0.0;
};

// p(a) = start_a * end_a / sum of products. Throws EmptyInput for no
// candidates, DegenerateInput for negative scores or all-zero products.
std::vector<double> answer_distribution(std::span<const AnswerCandidate> candidates);

// Entropy of answer_distribution, natural log.
double answer_entropy(std::span<const AnswerCandidate> candidates);

}  // namespace rlab::mitigation
