#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/autodiff/tensor.hpp"
#include "rlab/corpus/corpus.hpp"
#include "rlab/model/transformer.hpp"

namespace rlab::model {

enum class DecodeMode { Greedy };

// Output of one autoregressive decode. Row t of `probabilities` is the
// post-softmax distribution over the vocabulary at emitted position t.
struct GenerationRecord {
  corpus::Tokens source;
  std::vector<corpus::TokenId> token_ids;  // includes EOS when emitted
  ad::Tensor probabilities;                // [T, |V|]
  DecodeMode mode = DecodeMode::Greedy;

  std::size_t length() const { return token_ids.size(); }
  // Decoded tokens without the trailing EOS.
  corpus::Tokens translation(const corpus::Vocab& vocab) const;
};

// Greedy decode from BOS until EOS or max_len emitted tokens (0 means
// max_sequence_length - 1). Throws EmptyInput for an empty source.
GenerationRecord translate(const TransformerModel& model, const corpus::Tokens& source,
                           DecodeMode mode = DecodeMode::Greedy, std::size_t max_len = 0);

// Decodes many sources in lockstep batches; the result is identical to calling
// translate() on each source. Work fans out over worker threads by chunk.
std::vector<GenerationRecord> translate_all(const TransformerModel& model,
                                            const std::vector<corpus::Tokens>& sources,
                                            std::size_t max_len = 0, std::size_t chunk = 64);

struct SyntheticCorpus {
  corpus::Corpus corpus;
  std::vector<GenerationRecord> records;  // aligned with corpus pairs
};

// Replaces each target with the model's translation; provenance becomes
// Generated(model_id). A translation that is empty after dropping EOS is
// stored as the single UNK token so the pair stays well-formed.
SyntheticCorpus generate_synthetic_corpus(const TransformerModel& model, const corpus::Corpus& sources,
                                          const std::string& model_id);

// JSON lines: {"source", "tokens", "entropy"} plus "probabilities" when requested.
void write_generation_records(const std::filesystem::path& path, const std::vector<GenerationRecord>& records,
                              const corpus::Vocab& vocab, bool include_probabilities);

}  // namespace rlab::model
