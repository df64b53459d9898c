#include "rlab/mitigation/features.hpp"

#include <algorithm>
#include <string>

#include "rlab/common/error.hpp"
#include "rlab/common/parallel.hpp"
#include "rlab/common/rng.hpp"

namespace rlab::mitigation {

namespace {

constexpr char kJoin = '\x1f';

std::size_t bucket(const std::string& key, std::uint64_t salt, std::size_t buckets) {
  return static_cast<std::size_t>(fnv1a(key.data(), key.size(), derive_seed(0xcbf29ce484222325ULL, salt)) %
                                  buckets);
}

void add_segment(const corpus::Tokens& tokens, const FeaturizerConfig& cfg, std::uint64_t salt, double* out) {
  for (std::size_t n = 1; n <= cfg.word_order; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = "w" + std::to_string(n);
      for (std::size_t k = 0; k < n; ++k) {
        key += kJoin;
        key += tokens[i + k];
      }
      out[bucket(key, salt, cfg.segment_buckets)] += 1.0;
    }
  }
  if (cfg.char_order == 0) return;
  for (const auto& tok : tokens) {
    const std::string padded = "^" + tok + "$";
    if (padded.size() < cfg.char_order) {
      out[bucket("c" + padded, salt, cfg.segment_buckets)] += 1.0;
      continue;
    }
    for (std::size_t i = 0; i + cfg.char_order <= padded.size(); ++i) {
      out[bucket("c" + padded.substr(i, cfg.char_order), salt, cfg.segment_buckets)] += 1.0;
    }
  }
}

}  // namespace

void FeaturizerConfig::validate() const {
  if (segment_buckets == 0) throw ConfigError("segment_buckets must be positive");
  if (word_order == 0) throw ConfigError("word_order must be positive");
}

void to_json(nlohmann::json& j, const FeaturizerConfig& c) {
  j = {{"segment_buckets", c.segment_buckets}, {"cross_buckets", c.cross_buckets},
       {"word_order", c.word_order},           {"char_order", c.char_order},
       {"cross_window", c.cross_window},       {"salt", c.salt}};
}

void from_json(const nlohmann::json& j, FeaturizerConfig& c) {
  FeaturizerConfig d;
  c.segment_buckets = j.value("segment_buckets", d.segment_buckets);
  c.cross_buckets = j.value("cross_buckets", d.cross_buckets);
  c.word_order = j.value("word_order", d.word_order);
  c.char_order = j.value("char_order", d.char_order);
  c.cross_window = j.value("cross_window", d.cross_window);
  c.salt = j.value("salt", d.salt);
  c.validate();
}

PairFeatureVector featurize_pair(const corpus::Tokens& source, const corpus::Tokens& translation,
                                 const FeaturizerConfig& config) {
  config.validate();
  if (translation.empty()) throw EmptyInput("cannot featurize an empty translation");
  PairFeatureVector f;
  f.values.assign(config.width(), 0.0);
  double* p = f.values.data();
  add_segment(source, config, derive_seed(config.salt, 1), p);
  p += config.segment_buckets;
  add_segment(translation, config, derive_seed(config.salt, 2), p);
  p += config.segment_buckets;
  if (config.cross_buckets > 0) {
    const std::uint64_t salt = derive_seed(config.salt, 3);
    for (std::size_t i = 0; i < source.size(); ++i) {
      const std::size_t lo = i >= config.cross_window ? i - config.cross_window : 0;
      const std::size_t hi = std::min(translation.size(), i + config.cross_window + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        p[bucket(source[i] + kJoin + translation[j], salt, config.cross_buckets)] += 1.0;
      }
    }
    p += config.cross_buckets;
  }
  const double s = static_cast<double>(source.size());
  const double t = static_cast<double>(translation.size());
  p[0] = s;
  p[1] = t;
  p[2] = s > 0.0 ? t / s : 0.0;
  p[3] = t - s;
  return f;
}

std::vector<PairFeatureVector> featurize_corpus(const corpus::Corpus& corpus, const FeaturizerConfig& config) {
  std::vector<PairFeatureVector> out(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    out[i] = featurize_pair(corpus[i].source(), corpus[i].target(), config);
  });
  return out;
}

}  // namespace rlab::mitigation
