#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "rlab/corpus/corpus.hpp"

namespace rlab::corpus {

using TokenId = std::size_t;

// Joint source/target vocabulary. Special tokens occupy fixed ids 0..4.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kSep = 4;
  static constexpr std::size_t kNumSpecials = 5;

  static const std::vector<std::string>& special_tokens();

  // Specials only.
  Vocab();
  // Specials followed by the given non-special tokens; duplicates or specials
  // in the list raise ConfigError.
  explicit Vocab(const std::vector<std::string>& regular_tokens);

  std::size_t size() const { return id_to_token_.size(); }
  TokenId encode(const std::string& token) const;
  const std::string& decode(TokenId id) const;
  bool contains(const std::string& token) const { return token_to_id_.contains(token); }

  std::vector<TokenId> encode(const Tokens& tokens) const;
  Tokens decode(const std::vector<TokenId>& ids) const;

  // id_to_token order, including specials.
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  bool operator==(const Vocab& other) const { return id_to_token_ == other.id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

// Counts tokens over both sides of the corpus and keeps the most frequent ones
// (frequency descending, ties lexicographic) up to max_size entries including
// the specials. Throws ConfigError if max_size < 5, EmptyCorpus if empty.
Vocab build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq = 1);

}  // namespace rlab::corpus
