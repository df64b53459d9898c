#include "rlab/corpus/toy_language.hpp"

#include <cmath>
#include <set>

#include "rlab/common/error.hpp"

namespace rlab::corpus {

namespace {

constexpr std::size_t kNumCategories = 6;

std::string make_word(Rng& rng, const std::string& consonants, const std::string& vowels) {
  const std::size_t syllables = 2 + rng.below(2);
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w.push_back(consonants[rng.below(consonants.size())]);
    w.push_back(vowels[rng.below(vowels.size())]);
  }
  return w;
}

}  // namespace

ToyLanguage::ToyLanguage(Options options) : options_(options) {
  const std::size_t counts[kNumCategories] = {options_.determiners, options_.nouns,
                                              options_.adjectives,  options_.verbs,
                                              options_.prepositions, options_.adverbs};
  // disjoint consonant sets keep the two languages' word forms disjoint
  const std::string src_consonants = "bdgklmnprst";
  const std::string tgt_consonants = "cfhjqvwxyz";
  const std::string vowels = "aeiou";

  Rng rng(options_.lexicon_seed);
  std::set<std::string> used;
  by_category_.resize(kNumCategories);
  zipf_weights_.resize(kNumCategories);
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    if (counts[c] == 0) throw ConfigError("toy language category with zero words");
    for (std::size_t r = 0; r < counts[c]; ++r) {
      std::string s, t;
      do s = make_word(rng, src_consonants, vowels);
      while (!used.insert(s).second);
      do t = make_word(rng, tgt_consonants, vowels);
      while (!used.insert(t).second);
      by_source_.emplace(s, lexicon_.size());
      by_category_[c].push_back(lexicon_.size());
      zipf_weights_[c].push_back(1.0 / std::pow(static_cast<double>(r + 1), options_.zipf_exponent));
      lexicon_.push_back({std::move(s), std::move(t), static_cast<Category>(c), r});
    }
  }
}

const ToyLanguage::Entry& ToyLanguage::draw(Category c, Rng& rng) const {
  const auto ci = static_cast<std::size_t>(c);
  return lexicon_[by_category_[ci][rng.categorical(zipf_weights_[ci])]];
}

void ToyLanguage::append_noun_phrase(Rng& rng, Tokens& src) const {
  src.push_back(draw(Category::Det, rng).source);
  if (rng.uniform() < options_.p_adjective) src.push_back(draw(Category::Adj, rng).source);
  src.push_back(draw(Category::Noun, rng).source);
}

SentencePair ToyLanguage::sample(Rng& rng) const {
  Tokens src;
  append_noun_phrase(rng, src);
  src.push_back(draw(Category::Verb, rng).source);
  append_noun_phrase(rng, src);
  if (rng.uniform() < options_.p_prep_phrase) {
    src.push_back(draw(Category::Prep, rng).source);
    append_noun_phrase(rng, src);
  }
  if (rng.uniform() < options_.p_adverb) src.push_back(draw(Category::Adv, rng).source);
  Tokens tgt = translate(src);
  return SentencePair(std::move(src), std::move(tgt));
}

Tokens ToyLanguage::translate(const Tokens& source) const {
  Tokens out;
  out.reserve(source.size());
  std::size_t i = 0;
  while (i < source.size()) {
    const auto it = by_source_.find(source[i]);
    if (it == by_source_.end()) {
      out.push_back(source[i++]);
      continue;
    }
    const Entry& e = lexicon_[it->second];
    if (e.category == Category::Adj && i + 1 < source.size()) {
      const auto next = by_source_.find(source[i + 1]);
      if (next != by_source_.end() && lexicon_[next->second].category == Category::Noun) {
        out.push_back(lexicon_[next->second].target);
        out.push_back(e.target);
        i += 2;
        continue;
      }
    }
    out.push_back(e.target);
    ++i;
  }
  return out;
}

Corpus ToyLanguage::generate(std::size_t num_pairs, std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<SentencePair> pairs;
  pairs.reserve(num_pairs);
  for (std::size_t i = 0; i < num_pairs; ++i) pairs.push_back(sample(rng));
  return Corpus("toy-" + std::to_string(seed), std::move(pairs));
}

std::vector<std::string> ToyLanguage::target_function_words() const {
  std::vector<std::string> out;
  for (const auto& e : lexicon_) {
    if (e.category == Category::Det || e.category == Category::Prep) out.push_back(e.target);
  }
  return out;
}

std::string ToyLanguage::category_name(Category c) {
  switch (c) {
    case Category::Det: return "det";
    case Category::Noun: return "noun";
    case Category::Adj: return "adj";
    case Category::Verb: return "verb";
    case Category::Prep: return "prep";
    case Category::Adv: return "adv";
  }
  return "unknown";
}

}  // namespace rlab::corpus
