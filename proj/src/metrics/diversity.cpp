#include "rlab/metrics/diversity.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "rlab/common/error.hpp"

namespace rlab::metrics {

namespace {

using NgramId = std::size_t;

// Largest and second-largest per-text count of one n-gram, with the owner of
// the largest. Enough to answer "max count over all texts except i".
struct TopTwo {
  std::size_t best = 0;
  std::size_t best_text = SIZE_MAX;
  std::size_t second = 0;

  void offer(std::size_t count, std::size_t text) {
    if (count > best) {
      second = best;
      best = count;
      best_text = text;
    } else if (count > second) {
      second = count;
    }
  }
  std::size_t excluding(std::size_t text) const { return text == best_text ? second : best; }
};

}  // namespace

SelfBleuResult self_bleu(const std::vector<Tokens>& texts, const BleuConfig& config) {
  config.validate();
  if (texts.size() < 2) throw SizeError("self-BLEU needs at least two texts");
  const std::size_t n_texts = texts.size();
  const std::size_t max_order = config.max_order;

  // intern n-grams per order
  std::vector<std::vector<std::vector<std::pair<NgramId, std::size_t>>>> per_text(
      max_order, std::vector<std::vector<std::pair<NgramId, std::size_t>>>(n_texts));
  std::vector<std::vector<TopTwo>> tops(max_order);
  for (std::size_t n = 1; n <= max_order; ++n) {
    std::unordered_map<std::string, NgramId> ids;
    for (std::size_t i = 0; i < n_texts; ++i) {
      std::unordered_map<NgramId, std::size_t> local;
      const Tokens& t = texts[i];
      for (std::size_t s = 0; t.size() >= n && s + n <= t.size(); ++s) {
        std::string key = t[s];
        for (std::size_t k = 1; k < n; ++k) {
          key.push_back('\x1f');
          key += t[s + k];
        }
        const auto [it, inserted] = ids.emplace(std::move(key), ids.size());
        if (inserted) tops[n - 1].emplace_back();
        ++local[it->second];
      }
      auto& entries = per_text[n - 1][i];
      entries.assign(local.begin(), local.end());
      std::sort(entries.begin(), entries.end());
      for (const auto& [g, c] : entries) tops[n - 1][g].offer(c, i);
    }
  }

  std::map<std::size_t, std::size_t> length_counts;
  for (const auto& t : texts) ++length_counts[t.size()];

  SelfBleuResult result;
  result.scores.resize(n_texts);
  for (std::size_t i = 0; i < n_texts; ++i) {
    std::vector<NgramPrecision> p;
    for (std::size_t n = 1; n <= max_order; ++n) {
      NgramPrecision pn{n, 0, 0};
      for (const auto& [g, c] : per_text[n - 1][i]) {
        pn.matched += std::min(c, tops[n - 1][g].excluding(i));
        pn.total += c;
      }
      p.push_back(pn);
    }
    const std::size_t c = texts[i].size();
    auto own = length_counts.find(c);
    if (--own->second == 0) length_counts.erase(own);
    // closest other length, ties to the shorter
    std::size_t r = 0;
    auto above = length_counts.lower_bound(c);
    if (above == length_counts.end()) {
      r = std::prev(above)->first;
    } else if (above->first == c || above == length_counts.begin()) {
      r = above->first;
    } else {
      const std::size_t lo = std::prev(above)->first;
      r = (c - lo <= above->first - c) ? lo : above->first;
    }
    ++length_counts[c];
    result.scores[i] = bleu_from_counts(p, c, r, config).bleu;
  }
  double total = 0.0;
  for (double s : result.scores) total += s;
  result.mean = total / static_cast<double>(n_texts);
  return result;
}

std::size_t unique_token_count(const std::vector<Tokens>& texts) {
  std::unordered_set<std::string> seen;
  for (const auto& t : texts) seen.insert(t.begin(), t.end());
  return seen.size();
}

}  // namespace rlab::metrics
