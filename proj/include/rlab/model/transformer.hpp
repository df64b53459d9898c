#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/autodiff/adam.hpp"
#include "rlab/autodiff/tape.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/corpus/corpus.hpp"
#include "rlab/corpus/vocab.hpp"

namespace rlab::model {

struct TransformerConfig {
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  std::size_t max_sequence_length = 32;
  double dropout_rate = 0.0;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const TransformerConfig& c);
void from_json(const nlohmann::json& j, TransformerConfig& c);

// Teacher-forced batch in padded id form.
struct Batch {
  std::size_t size = 0;
  std::size_t source_length = 0;
  std::size_t target_length = 0;
  std::vector<std::size_t> source_ids;    // [size * source_length], PAD-filled
  std::vector<std::size_t> decoder_input; // BOS + target
  std::vector<std::size_t> decoder_gold;  // target + EOS
};

// Post-layer-norm encoder-decoder with sinusoidal positions, a shared token
// embedding, and a separate output projection onto the joint vocabulary.
class TransformerModel {
 public:
  // Seeded scaled-normal initialization; identical config -> identical weights.
  TransformerModel(TransformerConfig config, corpus::Vocab vocab);

  const TransformerConfig& config() const { return config_; }
  const corpus::Vocab& vocab() const { return vocab_; }
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }
  std::uint64_t training_steps() const { return training_steps_; }
  void add_training_steps(std::uint64_t n) { training_steps_ += n; }

  // Sources/targets are truncated to fit max_sequence_length.
  Batch make_batch(const std::vector<const corpus::SentencePair*>& pairs) const;

  // Mean token cross-entropy over non-PAD gold positions. Dropout is applied
  // only when dropout_rng is given and the configured rate is positive.
  ad::Var loss(ad::Tape& tape, const Batch& batch, Rng* dropout_rng = nullptr) const;

  // Encoder memory for a padded source batch, [batch * source_length, d_model].
  ad::Var encode(ad::Tape& tape, const std::vector<std::size_t>& source_ids, std::size_t batch,
                 std::size_t source_length, Rng* dropout_rng = nullptr) const;

  // Decoder hidden states [batch * target_length, d_model].
  ad::Var decode(ad::Tape& tape, ad::Var memory, const std::vector<std::size_t>& source_ids,
                 std::size_t source_length, const std::vector<std::size_t>& target_ids,
                 std::size_t batch, std::size_t target_length, Rng* dropout_rng = nullptr) const;

  ad::Var project(ad::Tape& tape, ad::Var hidden) const;

  nlohmann::json metadata() const;
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;
  static TransformerModel load(const std::filesystem::path& path);
  static TransformerModel from_bytes(const std::string& bytes);

 private:
  struct AttentionParams {
    std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct NormParams {
    std::size_t gain, bias;
  };
  struct FeedForwardParams {
    std::size_t w1, b1, w2, b2;
  };
  struct EncoderLayer {
    AttentionParams self_attn;
    NormParams norm1;
    FeedForwardParams ffn;
    NormParams norm2;
  };
  struct DecoderLayer {
    AttentionParams self_attn;
    NormParams norm1;
    AttentionParams cross_attn;
    NormParams norm2;
    FeedForwardParams ffn;
    NormParams norm3;
  };

  void register_parameters(bool initialize);
  ad::Var param(ad::Tape& tape, std::size_t id) const { return tape.parameter(params_, id); }
  ad::Var linear(ad::Tape& tape, ad::Var x, std::size_t w, std::size_t b) const;
  ad::Var norm(ad::Tape& tape, ad::Var x, const NormParams& p) const;
  ad::Var attention(ad::Tape& tape, ad::Var queries, ad::Var keys, const AttentionParams& p,
                    std::size_t batch, std::size_t query_len, std::size_t key_len,
                    const ad::Tensor& mask, Rng* dropout_rng) const;
  ad::Var feed_forward(ad::Tape& tape, ad::Var x, const FeedForwardParams& p, Rng* dropout_rng) const;
  ad::Var dropout(ad::Tape& tape, ad::Var x, Rng* rng) const;
  ad::Var embed(ad::Tape& tape, const std::vector<std::size_t>& ids, std::size_t batch,
                std::size_t length, Rng* dropout_rng) const;

  TransformerConfig config_;
  corpus::Vocab vocab_;
  ad::ParameterStore params_;
  std::size_t embedding_ = 0;
  std::size_t out_w_ = 0;
  std::size_t out_b_ = 0;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  std::uint64_t training_steps_ = 0;
};

TransformerModel build_transformer(const TransformerConfig& config, const corpus::Vocab& vocab);

struct TrainOptions {
  std::size_t batch_size = 32;
  std::size_t num_steps = 0;
  double clip_norm = 1.0;  // <= 0 disables clipping
  std::uint64_t seed = 0;  // minibatch order and dropout
};

// Teacher-forced training. Minibatches walk a seeded permutation of the corpus,
// reshuffled on every pass. Returns one loss value per step.
// Throws EmptyCorpus for an empty corpus.
std::vector<double> train_batches(TransformerModel& model, const corpus::Corpus& corpus,
                                  const TrainOptions& options, ad::AdamState& adam);

// Number of steps covering `epochs` passes over n pairs.
std::size_t steps_for_epochs(std::size_t n, std::size_t batch_size, std::size_t epochs);

}  // namespace rlab::model
