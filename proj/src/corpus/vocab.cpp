#include "rlab/corpus/vocab.hpp"

#include <algorithm>
#include <map>

#include "rlab/common/error.hpp"

namespace rlab::corpus {

const std::vector<std::string>& Vocab::special_tokens() {
  static const std::vector<std::string> specials{"<pad>", "<s>", "</s>", "<unk>", "<sep>"};
  return specials;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& regular_tokens) {
  id_to_token_ = special_tokens();
  id_to_token_.insert(id_to_token_.end(), regular_tokens.begin(), regular_tokens.end());
  for (TokenId i = 0; i < id_to_token_.size(); ++i) {
    if (!token_to_id_.emplace(id_to_token_[i], i).second) {
      throw ConfigError("duplicate vocabulary entry '" + id_to_token_[i] + "'");
    }
  }
}

TokenId Vocab::encode(const std::string& token) const {
  const auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocab::decode(TokenId id) const {
  if (id >= id_to_token_.size()) return id_to_token_[kUnk];
  return id_to_token_[id];
}

std::vector<TokenId> Vocab::encode(const Tokens& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(encode(t));
  return out;
}

Tokens Vocab::decode(const std::vector<TokenId>& ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(decode(id));
  return out;
}

Vocab build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq) {
  if (max_size < Vocab::kNumSpecials) {
    throw ConfigError("vocabulary max_size must be at least 5, got " + std::to_string(max_size));
  }
  if (corpus.empty()) throw EmptyCorpus("cannot build a vocabulary from an empty corpus");

  std::map<std::string, std::size_t> counts;
  for (const auto& p : corpus.pairs()) {
    for (const auto& t : p.source()) ++counts[t];
    for (const auto& t : p.target()) ++counts[t];
  }
  const auto& specials = Vocab::special_tokens();
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [tok, n] : counts) {
    if (n >= min_freq && std::find(specials.begin(), specials.end(), tok) == specials.end()) {
      ranked.emplace_back(tok, n);
    }
  }
  // map iteration is already lexicographic; stable sort keeps that among ties
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t budget = max_size - Vocab::kNumSpecials;
  if (ranked.size() > budget) ranked.resize(budget);

  std::vector<std::string> kept;
  kept.reserve(ranked.size());
  for (auto& [tok, n] : ranked) kept.push_back(tok);
  return Vocab(kept);
}

}  // namespace rlab::corpus
