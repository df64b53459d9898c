#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/corpus/corpus.hpp"

namespace rlab::metrics {

using corpus::Tokens;

struct BleuConfig {
  std::size_t max_order = 4;
  std::vector<double> weights;  // empty means uniform 1/N

  static BleuConfig uniform(std::size_t max_order);
  // Throws ConfigError: N >= 1, N weights, nonnegative, summing to 1.
  void validate() const;
  double weight(std::size_t order) const;  // order is 1-based
};

void to_json(nlohmann::json& j, const BleuConfig& c);

struct NgramPrecision {
  std::size_t order = 1;
  std::size_t matched = 0;
  std::size_t total = 0;
  // 0 when there are no n-grams of this order.
  double value() const { return total ? static_cast<double>(matched) / static_cast<double>(total) : 0.0; }
};

struct BleuReport {
  double bleu = 0.0;
  double brevity_penalty = 0.0;
  std::vector<NgramPrecision> precisions;  // p_1..p_N
  std::size_t hypothesis_length = 0;       // c
  std::size_t reference_length = 0;        // r
  bool degenerate = false;                 // some p_n == 0, bleu forced to 0
  BleuConfig config;
};

void to_json(nlohmann::json& j, const BleuReport& r);
std::string bleu_csv_header(std::size_t max_order);
std::string bleu_csv_row(const std::string& label, const BleuReport& r);

// Corpus-level sufficient statistics: clipped n-gram matches and totals per
// order plus summed hypothesis and effective reference lengths.
class BleuStats {
 public:
  explicit BleuStats(std::size_t max_order = 4);

  // Clips against the maximum count over the references; the effective
  // reference length is the one closest to the hypothesis length, ties to the
  // shorter. Throws AlignmentError when references is empty.
  void add(const Tokens& hypothesis, const std::vector<const Tokens*>& references);
  void add(const Tokens& hypothesis, const Tokens& reference);

  BleuReport report(const BleuConfig& config) const;
  const std::vector<NgramPrecision>& precisions() const { return precisions_; }

 private:
  std::size_t max_order_;
  std::vector<NgramPrecision> precisions_;
  std::size_t hyp_len_ = 0;
  std::size_t ref_len_ = 0;
};

// BLEU from sufficient statistics: BP * exp(sum w_n log p_n), with
// BP = min(1, exp(1 - r/c)).
BleuReport bleu_from_counts(const std::vector<NgramPrecision>& precisions, std::size_t hypothesis_length,
                            std::size_t reference_length, const BleuConfig& config);

// Corpus-level clipped precision for one order. Throws ConfigError for n < 1,
// AlignmentError for mismatched or empty corpora.
NgramPrecision modified_precision(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                                  std::size_t n);

// Single reference per hypothesis, no smoothing. Throws AlignmentError.
BleuReport corpus_bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                       const BleuConfig& config = {});

BleuReport sentence_bleu(const Tokens& hypothesis, const std::vector<const Tokens*>& references,
                         const BleuConfig& config = {});

}  // namespace rlab::metrics
