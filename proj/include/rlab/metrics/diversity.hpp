#pragma once

#include <cstddef>
#include <vector>

#include "rlab/metrics/bleu.hpp"

namespace rlab::metrics {

struct SelfBleuResult {
  std::vector<double> scores;  // one per text
  double mean = 0.0;
};

// BLEU of each text against all other texts as its reference set (clipping by
// the maximum count over the other texts, r = closest other length, ties to the
// shorter). Throws SizeError for fewer than two texts.
SelfBleuResult self_bleu(const std::vector<Tokens>& texts, const BleuConfig& config = {});

// Number of distinct tokens over all texts.
std::size_t unique_token_count(const std::vector<Tokens>& texts);

}  // namespace rlab::metrics
