#include "rlab/metrics/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <unordered_map>

#include "rlab/common/error.hpp"

namespace rlab::metrics {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

// n-grams keyed by their tokens joined with a separator that cannot occur
// inside whitespace-split tokens.
NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t closest_length(std::size_t c, const std::vector<const Tokens*>& refs) {
  std::size_t best = refs.front()->size();
  for (const auto* r : refs) {
    const std::size_t len = r->size();
    const auto d = [c](std::size_t x) { return x > c ? x - c : c - x; };
    if (d(len) < d(best) || (d(len) == d(best) && len < best)) best = len;
  }
  return best;
}

void check_aligned(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw AlignmentError(std::to_string(hyps) + " hypotheses vs " + std::to_string(refs) + " references");
  }
  if (hyps == 0) throw AlignmentError("empty corpora");
}

}  // namespace

BleuConfig BleuConfig::uniform(std::size_t max_order) {
  BleuConfig c;
  c.max_order = max_order;
  c.weights.assign(max_order, 1.0 / static_cast<double>(max_order));
  return c;
}

void BleuConfig::validate() const {
  if (max_order < 1) throw ConfigError("BLEU max order must be at least 1");
  if (weights.empty()) return;
  if (weights.size() != max_order) throw ConfigError("BLEU weights must have one entry per order");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("BLEU weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("BLEU weights must sum to 1");
}

double BleuConfig::weight(std::size_t order) const {
  return weights.empty() ? 1.0 / static_cast<double>(max_order) : weights.at(order - 1);
}

void to_json(nlohmann::json& j, const BleuConfig& c) {
  std::vector<double> w;
  for (std::size_t n = 1; n <= c.max_order; ++n) w.push_back(c.weight(n));
  j = {{"max_order", c.max_order}, {"weights", w}};
}

void to_json(nlohmann::json& j, const BleuReport& r) {
  nlohmann::json p = nlohmann::json::array();
  for (const auto& pn : r.precisions) {
    p.push_back({{"order", pn.order}, {"matched", pn.matched}, {"total", pn.total}, {"value", pn.value()}});
  }
  j = {{"bleu", r.bleu},
       {"brevity_penalty", r.brevity_penalty},
       {"precisions", p},
       {"hypothesis_length", r.hypothesis_length},
       {"reference_length", r.reference_length},
       {"degenerate", r.degenerate},
       {"config", r.config}};
}

std::string bleu_csv_header(std::size_t max_order) {
  std::string h = "label,bleu,brevity_penalty,hypothesis_length,reference_length,degenerate";
  for (std::size_t n = 1; n <= max_order; ++n) h += ",p" + std::to_string(n);
  return h;
}

std::string bleu_csv_row(const std::string& label, const BleuReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << label << ',' << r.bleu << ',' << r.brevity_penalty << ',' << r.hypothesis_length << ','
     << r.reference_length << ',' << (r.degenerate ? 1 : 0);
  for (const auto& p : r.precisions) os << ',' << p.value();
  return os.str();
}

BleuStats::BleuStats(std::size_t max_order) : max_order_(max_order) {
  if (max_order < 1) throw ConfigError("BLEU max order must be at least 1");
  for (std::size_t n = 1; n <= max_order; ++n) precisions_.push_back({n, 0, 0});
}

void BleuStats::add(const Tokens& hypothesis, const std::vector<const Tokens*>& references) {
  if (references.empty()) throw AlignmentError("hypothesis without references");
  for (std::size_t n = 1; n <= max_order_; ++n) {
    const NgramCounts hyp = count_ngrams(hypothesis, n);
    NgramCounts ref_max;
    for (const auto* r : references) {
      for (const auto& [g, c] : count_ngrams(*r, n)) {
        auto& slot = ref_max[g];
        slot = std::max(slot, c);
      }
    }
    auto& p = precisions_[n - 1];
    for (const auto& [g, c] : hyp) {
      const auto it = ref_max.find(g);
      p.matched += std::min(c, it == ref_max.end() ? std::size_t{0} : it->second);
      p.total += c;
    }
  }
  hyp_len_ += hypothesis.size();
  ref_len_ += closest_length(hypothesis.size(), references);
}

void BleuStats::add(const Tokens& hypothesis, const Tokens& reference) {
  add(hypothesis, std::vector<const Tokens*>{&reference});
}

BleuReport BleuStats::report(const BleuConfig& config) const {
  if (config.max_order > max_order_) throw ConfigError("BLEU statistics collected for a lower order");
  std::vector<NgramPrecision> p(precisions_.begin(),
                                precisions_.begin() + static_cast<std::ptrdiff_t>(config.max_order));
  return bleu_from_counts(p, hyp_len_, ref_len_, config);
}

BleuReport bleu_from_counts(const std::vector<NgramPrecision>& precisions, std::size_t hypothesis_length,
                            std::size_t reference_length, const BleuConfig& config) {
  config.validate();
  BleuReport r;
  r.config = config;
  r.precisions = precisions;
  r.hypothesis_length = hypothesis_length;
  r.reference_length = reference_length;
  const double c = static_cast<double>(hypothesis_length);
  const double ref = static_cast<double>(reference_length);
  r.brevity_penalty = hypothesis_length == 0 ? 0.0 : std::min(1.0, std::exp(1.0 - ref / c));

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= config.max_order; ++n) {
    const double pn = precisions[n - 1].value();
    const double w = config.weight(n);
    if (pn == 0.0) {
      r.degenerate = true;
      continue;
    }
    log_sum += w * std::log(pn);
  }
  r.bleu = r.degenerate ? 0.0 : r.brevity_penalty * std::exp(log_sum);
  return r;
}

NgramPrecision modified_precision(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                                  std::size_t n) {
  if (n < 1) throw ConfigError("n-gram order must be at least 1");
  check_aligned(hypotheses.size(), references.size());
  BleuStats stats(n);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) stats.add(hypotheses[i], references[i]);
  return stats.precisions()[n - 1];
}

BleuReport corpus_bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                       const BleuConfig& config) {
  config.validate();
  check_aligned(hypotheses.size(), references.size());
  BleuStats stats(config.max_order);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) stats.add(hypotheses[i], references[i]);
  return stats.report(config);
}

BleuReport sentence_bleu(const Tokens& hypothesis, const std::vector<const Tokens*>& references,
                         const BleuConfig& config) {
  config.validate();
  BleuStats stats(config.max_order);
  stats.add(hypothesis, references);
  return stats.report(config);
}

}  // namespace rlab::metrics
