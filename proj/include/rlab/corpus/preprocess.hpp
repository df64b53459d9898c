#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rlab/corpus/corpus.hpp"

namespace rlab::corpus {

// Suffix-stripping stemmer driven by a rule table. Rules are applied until no
// rule fires, so stem(stem(w)) == stem(w). The longest matching suffix wins; a
// rule whose replacement equals its suffix acts as a guard that blocks shorter
// rules (e.g. "ss" before "s").
class Stemmer {
 public:
  struct Rule {
    std::string suffix;
    std::string replacement;
  };

  Stemmer() = default;
  // Throws ConfigError for a rule that would not shorten the word.
  explicit Stemmer(std::vector<Rule> rules, std::size_t min_stem = 3);

  // "suffix<TAB>replacement" per line; replacement may be empty.
  static Stemmer load(const std::filesystem::path& path, std::size_t min_stem = 3);
  // Small English rule table bundled with the library (same as data/stemmer_rules.tsv).
  static Stemmer english();

  std::string stem(const std::string& word) const;
  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;  // sorted by descending suffix length
  std::size_t min_stem_ = 3;
};

struct PreprocessOptions {
  bool lowercase = false;
  bool strip_punctuation = false;
  bool remove_stopwords = false;
  bool stem = false;
  std::set<std::string> stopwords;
  Stemmer stemmer = Stemmer::english();

  static PreprocessOptions all(std::set<std::string> stopwords);
};

std::set<std::string> load_stopwords(const std::filesystem::path& path);

// Lowercase, punctuation removal, stopword removal, stemming, in that order.
// A token is treated as a stopword when it or its stem is listed, which keeps
// the whole pipeline idempotent. The result may be empty.
Tokens preprocess_sentence(const Tokens& text, const PreprocessOptions& opts);

std::vector<Tokens> preprocess_all(const std::vector<Tokens>& texts, const PreprocessOptions& opts);

}  // namespace rlab::corpus
