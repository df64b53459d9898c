#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/corpus/corpus.hpp"

namespace rlab::mitigation {

// Hashed bag-of-n-grams featurizer for (source, translation) pairs.
//
// Layout: [source segment | translation segment | cross-segment pairs | lengths].
// Each segment holds hashed word n-gram counts (orders 1..word_order) and
// character n-gram counts (order char_order, over "^token$"). The two segments
// hash with different salts, so swapping source and translation changes the
// vector. Cross features count hashed (source token, translation token) pairs
// whose positions differ by at most cross_window. The four length features are
// |s|, |t|, |t|/|s| and |t|-|s|.
struct FeaturizerConfig {
  std::size_t segment_buckets = 256;
  std::size_t cross_buckets = 1024;
  std::size_t word_order = 2;
  std::size_t char_order = 3;  // 0 disables character n-grams
  std::size_t cross_window = 1;
  std::uint64_t salt = 0x5eed;

  std::size_t width() const { return 2 * segment_buckets + cross_buckets + 4; }
  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const FeaturizerConfig& c);
void from_json(const nlohmann::json& j, FeaturizerConfig& c);

struct PairFeatureVector {
  std::vector<double> values;
  std::size_t width() const { return values.size(); }
};

// Throws EmptyInput when the translation is empty.
PairFeatureVector featurize_pair(const corpus::Tokens& source, const corpus::Tokens& translation,
                                 const FeaturizerConfig& config = {});

std::vector<PairFeatureVector> featurize_corpus(const corpus::Corpus& corpus, const FeaturizerConfig& config = {});

}  // namespace rlab::mitigation
