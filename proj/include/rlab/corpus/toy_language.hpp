#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rlab/common/rng.hpp"
#include "rlab/corpus/corpus.hpp"

namespace rlab::corpus {

// A synthetic language pair with a deterministic one-to-one lexicon and a
// single local reordering rule (source "DET ADJ NOUN" becomes target
// "DET NOUN ADJ"). Word choice within each category is Zipf-distributed, so a
// small training sample leaves the tail of the lexicon under-observed.
class ToyLanguage {
 public:
  enum class Category { Det, Noun, Adj, Verb, Prep, Adv };

  struct Entry {
    std::string source;
    std::string target;
    Category category;
    std::size_t rank;  // 0 = most frequent within its category
  };

  struct Options {
    std::size_t determiners = 4;
    std::size_t nouns = 40;
    std::size_t adjectives = 16;
    std::size_t verbs = 24;
    std::size_t prepositions = 6;
    std::size_t adverbs = 8;
    double zipf_exponent = 1.1;
    double p_adjective = 0.35;
    double p_prep_phrase = 0.3;
    double p_adverb = 0.25;
    std::uint64_t lexicon_seed = 20240521;
  };

  ToyLanguage() : ToyLanguage(Options{}) {}
  explicit ToyLanguage(Options options);

  const std::vector<Entry>& lexicon() const { return lexicon_; }
  const Options& options() const { return options_; }

  // Reference translation of a well-formed source sentence. Unknown words are
  // passed through unchanged.
  Tokens translate(const Tokens& source) const;

  SentencePair sample(Rng& rng) const;
  Corpus generate(std::size_t num_pairs, std::uint64_t seed) const;

  // Target-side function words (determiners and prepositions).
  std::vector<std::string> target_function_words() const;

  static std::string category_name(Category c);

 private:
  const Entry& draw(Category c, Rng& rng) const;
  void append_noun_phrase(Rng& rng, Tokens& src) const;

  Options options_;
  std::vector<Entry> lexicon_;
  std::unordered_map<std::string, std::size_t> by_source_;
  std::vector<std::vector<std::size_t>> by_category_;
  std::vector<std::vector<double>> zipf_weights_;
};

}  // namespace rlab::corpus
