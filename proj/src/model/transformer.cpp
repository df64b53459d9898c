#include "rlab/model/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rlab/autodiff/checkpoint.hpp"
#include "rlab/common/error.hpp"

namespace rlab::model {

using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

constexpr double kMaskValue = -1e9;

Tensor sinusoidal_positions(std::size_t batch, std::size_t length, std::size_t d_model) {
  Tensor pe(Shape{batch * length, d_model});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < d_model; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
      const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      const double v = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
      for (std::size_t b = 0; b < batch; ++b) pe[(b * length + pos) * d_model + i] = v;
    }
  }
  return pe;
}

// Additive mask [batch * heads, query_len, key_len] blocking padded keys and,
// when causal, future positions.
Tensor attention_mask(const std::vector<std::size_t>& key_ids, std::size_t batch, std::size_t heads,
                      std::size_t query_len, std::size_t key_len, bool causal) {
  Tensor mask(Shape{batch * heads, query_len, key_len});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t q = 0; q < query_len; ++q) {
      for (std::size_t k = 0; k < key_len; ++k) {
        const bool blocked = key_ids[b * key_len + k] == corpus::Vocab::kPad || (causal && k > q);
        if (!blocked) continue;
        for (std::size_t h = 0; h < heads; ++h) {
          mask[((b * heads + h) * query_len + q) * key_len + k] = kMaskValue;
        }
      }
    }
  }
  return mask;
}

Tensor scaled_normal(Rng& rng, Shape shape, double stddev) {
  Tensor t(std::move(shape));
  for (double& x : t.values()) x = rng.normal() * stddev;
  return t;
}

}  // namespace

void TransformerConfig::validate() const {
  if (num_layers == 0) throw ConfigError("num_layers must be positive");
  if (num_heads == 0 || d_model == 0 || d_ff == 0) throw ConfigError("model dimensions must be positive");
  if (d_model % num_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (max_sequence_length < 2) throw ConfigError("max_sequence_length must be at least 2");
}

void to_json(nlohmann::json& j, const TransformerConfig& c) {
  j = {{"num_layers", c.num_layers},   {"num_heads", c.num_heads},
       {"d_model", c.d_model},         {"d_ff", c.d_ff},
       {"max_sequence_length", c.max_sequence_length},
       {"dropout_rate", c.dropout_rate}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TransformerConfig& c) {
  TransformerConfig d;
  c.num_layers = j.value("num_layers", d.num_layers);
  c.num_heads = j.value("num_heads", d.num_heads);
  c.d_model = j.value("d_model", d.d_model);
  c.d_ff = j.value("d_ff", d.d_ff);
  c.max_sequence_length = j.value("max_sequence_length", d.max_sequence_length);
  c.dropout_rate = j.value("dropout_rate", d.dropout_rate);
  c.seed = j.value("seed", d.seed);
}

TransformerModel::TransformerModel(TransformerConfig config, corpus::Vocab vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  register_parameters(true);
}

void TransformerModel::register_parameters(bool initialize) {
  const std::size_t d = config_.d_model, ff = config_.d_ff, v = vocab_.size();
  Rng rng(config_.seed);
  auto weight = [&](const std::string& name, std::size_t fan_in, std::size_t fan_out) {
    return params_.add(name, initialize ? scaled_normal(rng, Shape{fan_in, fan_out},
                                                        1.0 / std::sqrt(static_cast<double>(fan_in)))
                                        : Tensor(Shape{fan_in, fan_out}));
  };
  auto vec = [&](const std::string& name, std::size_t n, double fill) {
    return params_.add(name, Tensor(Shape{n}, fill));
  };
  auto attention = [&](const std::string& prefix) {
    AttentionParams p{};
    p.wq = weight(prefix + ".wq", d, d);
    p.bq = vec(prefix + ".bq", d, 0.0);
    p.wk = weight(prefix + ".wk", d, d);
    p.bk = vec(prefix + ".bk", d, 0.0);
    p.wv = weight(prefix + ".wv", d, d);
    p.bv = vec(prefix + ".bv", d, 0.0);
    p.wo = weight(prefix + ".wo", d, d);
    p.bo = vec(prefix + ".bo", d, 0.0);
    return p;
  };
  auto norm = [&](const std::string& prefix) {
    return NormParams{vec(prefix + ".gain", d, 1.0), vec(prefix + ".bias", d, 0.0)};
  };
  auto ffn = [&](const std::string& prefix) {
    FeedForwardParams p{};
    p.w1 = weight(prefix + ".w1", d, ff);
    p.b1 = vec(prefix + ".b1", ff, 0.0);
    p.w2 = weight(prefix + ".w2", ff, d);
    p.b2 = vec(prefix + ".b2", d, 0.0);
    return p;
  };

  embedding_ = params_.add("embedding", initialize ? scaled_normal(rng, Shape{v, d}, 1.0 / std::sqrt(static_cast<double>(d)))
                                                   : Tensor(Shape{v, d}));
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string pre = "encoder." + std::to_string(l);
    EncoderLayer layer;
    layer.self_attn = attention(pre + ".self_attn");
    layer.norm1 = norm(pre + ".norm1");
    layer.ffn = ffn(pre + ".ffn");
    layer.norm2 = norm(pre + ".norm2");
    encoder_.push_back(layer);
  }
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string pre = "decoder." + std::to_string(l);
    DecoderLayer layer;
    layer.self_attn = attention(pre + ".self_attn");
    layer.norm1 = norm(pre + ".norm1");
    layer.cross_attn = attention(pre + ".cross_attn");
    layer.norm2 = norm(pre + ".norm2");
    layer.ffn = ffn(pre + ".ffn");
    layer.norm3 = norm(pre + ".norm3");
    decoder_.push_back(layer);
  }
  out_w_ = weight("output.weight", d, v);
  out_b_ = vec("output.bias", v, 0.0);
}

Batch TransformerModel::make_batch(const std::vector<const corpus::SentencePair*>& pairs) const {
  const std::size_t max_len = config_.max_sequence_length;
  Batch b;
  b.size = pairs.size();
  for (const auto* p : pairs) {
    b.source_length = std::max(b.source_length, std::min(p->source().size(), max_len));
    b.target_length = std::max(b.target_length, std::min(p->target().size(), max_len - 1) + 1);
  }
  b.source_ids.assign(b.size * b.source_length, corpus::Vocab::kPad);
  b.decoder_input.assign(b.size * b.target_length, corpus::Vocab::kPad);
  b.decoder_gold.assign(b.size * b.target_length, corpus::Vocab::kPad);
  for (std::size_t i = 0; i < b.size; ++i) {
    const auto& src = pairs[i]->source();
    const std::size_t ls = std::min(src.size(), max_len);
    for (std::size_t t = 0; t < ls; ++t) b.source_ids[i * b.source_length + t] = vocab_.encode(src[t]);
    const auto& tgt = pairs[i]->target();
    const std::size_t lt = std::min(tgt.size(), max_len - 1);
    b.decoder_input[i * b.target_length] = corpus::Vocab::kBos;
    for (std::size_t t = 0; t < lt; ++t) {
      const std::size_t id = vocab_.encode(tgt[t]);
      b.decoder_input[i * b.target_length + t + 1] = id;
      b.decoder_gold[i * b.target_length + t] = id;
    }
    b.decoder_gold[i * b.target_length + lt] = corpus::Vocab::kEos;
  }
  return b;
}

Var TransformerModel::linear(Tape& tape, Var x, std::size_t w, std::size_t b) const {
  return ad::add(tape, ad::matmul(tape, x, param(tape, w)), param(tape, b));
}

Var TransformerModel::norm(Tape& tape, Var x, const NormParams& p) const {
  return ad::add(tape, ad::mul(tape, ad::layernorm(tape, x), param(tape, p.gain)), param(tape, p.bias));
}

Var TransformerModel::dropout(Tape& tape, Var x, Rng* rng) const {
  if (rng == nullptr || config_.dropout_rate <= 0.0) return x;
  const Tensor& v = tape.value(x);
  Tensor keep(v.shape());
  const double s = 1.0 / (1.0 - config_.dropout_rate);
  for (double& k : keep.values()) k = rng->uniform() < config_.dropout_rate ? 0.0 : s;
  return ad::mul(tape, x, tape.constant(std::move(keep)));
}

Var TransformerModel::attention(Tape& tape, Var queries, Var keys, const AttentionParams& p,
                                std::size_t batch, std::size_t query_len, std::size_t key_len,
                                const Tensor& mask, Rng* dropout_rng) const {
  const std::size_t h = config_.num_heads, d = config_.d_model, dh = d / h;
  Var q = linear(tape, queries, p.wq, p.bq);
  Var k = linear(tape, keys, p.wk, p.bk);
  Var v = linear(tape, keys, p.wv, p.bv);

  q = ad::reshape(tape, ad::transpose(tape, ad::reshape(tape, q, {batch, query_len, h, dh}), {0, 2, 1, 3}),
                  {batch * h, query_len, dh});
  k = ad::reshape(tape, ad::transpose(tape, ad::reshape(tape, k, {batch, key_len, h, dh}), {0, 2, 3, 1}),
                  {batch * h, dh, key_len});
  v = ad::reshape(tape, ad::transpose(tape, ad::reshape(tape, v, {batch, key_len, h, dh}), {0, 2, 1, 3}),
                  {batch * h, key_len, dh});

  Var scores = ad::scale(tape, ad::matmul(tape, q, k), 1.0 / std::sqrt(static_cast<double>(dh)));
  scores = ad::add(tape, scores, tape.constant(mask));
  Var weights = dropout(tape, ad::softmax(tape, scores), dropout_rng);
  Var context = ad::matmul(tape, weights, v);
  context = ad::reshape(tape,
                        ad::transpose(tape, ad::reshape(tape, context, {batch, h, query_len, dh}), {0, 2, 1, 3}),
                        {batch * query_len, d});
  return linear(tape, context, p.wo, p.bo);
}

Var TransformerModel::feed_forward(Tape& tape, Var x, const FeedForwardParams& p, Rng* dropout_rng) const {
  Var hidden = ad::relu(tape, linear(tape, x, p.w1, p.b1));
  return linear(tape, dropout(tape, hidden, dropout_rng), p.w2, p.b2);
}

Var TransformerModel::embed(Tape& tape, const std::vector<std::size_t>& ids, std::size_t batch,
                            std::size_t length, Rng* dropout_rng) const {
  Var x = ad::embed_lookup(tape, param(tape, embedding_), ids);
  x = ad::scale(tape, x, std::sqrt(static_cast<double>(config_.d_model)));
  x = ad::add(tape, x, tape.constant(sinusoidal_positions(batch, length, config_.d_model)));
  return dropout(tape, x, dropout_rng);
}

Var TransformerModel::encode(Tape& tape, const std::vector<std::size_t>& source_ids, std::size_t batch,
                             std::size_t source_length, Rng* dropout_rng) const {
  const Tensor mask = attention_mask(source_ids, batch, config_.num_heads, source_length, source_length, false);
  Var x = embed(tape, source_ids, batch, source_length, dropout_rng);
  for (const auto& layer : encoder_) {
    Var a = attention(tape, x, x, layer.self_attn, batch, source_length, source_length, mask, dropout_rng);
    x = norm(tape, ad::add(tape, x, dropout(tape, a, dropout_rng)), layer.norm1);
    Var f = feed_forward(tape, x, layer.ffn, dropout_rng);
    x = norm(tape, ad::add(tape, x, dropout(tape, f, dropout_rng)), layer.norm2);
  }
  return x;
}

Var TransformerModel::decode(Tape& tape, Var memory, const std::vector<std::size_t>& source_ids,
                             std::size_t source_length, const std::vector<std::size_t>& target_ids,
                             std::size_t batch, std::size_t target_length, Rng* dropout_rng) const {
  const Tensor self_mask =
      attention_mask(target_ids, batch, config_.num_heads, target_length, target_length, true);
  const Tensor cross_mask =
      attention_mask(source_ids, batch, config_.num_heads, target_length, source_length, false);
  Var y = embed(tape, target_ids, batch, target_length, dropout_rng);
  for (const auto& layer : decoder_) {
    Var a = attention(tape, y, y, layer.self_attn, batch, target_length, target_length, self_mask, dropout_rng);
    y = norm(tape, ad::add(tape, y, dropout(tape, a, dropout_rng)), layer.norm1);
    Var c = attention(tape, y, memory, layer.cross_attn, batch, target_length, source_length, cross_mask,
                      dropout_rng);
    y = norm(tape, ad::add(tape, y, dropout(tape, c, dropout_rng)), layer.norm2);
    Var f = feed_forward(tape, y, layer.ffn, dropout_rng);
    y = norm(tape, ad::add(tape, y, dropout(tape, f, dropout_rng)), layer.norm3);
  }
  return y;
}

Var TransformerModel::project(Tape& tape, Var hidden) const { return linear(tape, hidden, out_w_, out_b_); }

Var TransformerModel::loss(Tape& tape, const Batch& batch, Rng* dropout_rng) const {
  Var memory = encode(tape, batch.source_ids, batch.size, batch.source_length, dropout_rng);
  Var hidden = decode(tape, memory, batch.source_ids, batch.source_length, batch.decoder_input, batch.size,
                      batch.target_length, dropout_rng);
  Var logits = project(tape, hidden);
  return ad::cross_entropy(tape, logits, batch.decoder_gold, corpus::Vocab::kPad);
}

nlohmann::json TransformerModel::metadata() const {
  return {{"kind", "transformer"},
          {"config", config_},
          {"vocab", vocab_.tokens()},
          {"training_steps", training_steps_}};
}

std::string TransformerModel::serialize() const { return ad::serialize_checkpoint(params_, metadata()); }

void TransformerModel::save(const std::filesystem::path& path) const {
  ad::save_checkpoint(path, params_, metadata());
}

TransformerModel TransformerModel::from_bytes(const std::string& bytes) {
  ad::Checkpoint ck = ad::deserialize_checkpoint(bytes);
  const auto& meta = ck.metadata;
  if (meta.value("kind", "") != "transformer") throw FormatError("checkpoint does not hold a transformer");
  auto tokens = meta.at("vocab").get<std::vector<std::string>>();
  const auto& specials = corpus::Vocab::special_tokens();
  if (tokens.size() < specials.size() || !std::equal(specials.begin(), specials.end(), tokens.begin())) {
    throw FormatError("checkpoint vocabulary lacks the special tokens");
  }
  tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(specials.size()));
  TransformerModel model(meta.at("config").get<TransformerConfig>(), corpus::Vocab(tokens));
  if (ck.params.size() != model.params_.size()) throw FormatError("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    if (ck.params.name(i) != model.params_.name(i) ||
        ck.params.value(i).shape() != model.params_.value(i).shape()) {
      throw FormatError("checkpoint parameter '" + ck.params.name(i) + "' does not match the architecture");
    }
    model.params_.value(i) = ck.params.value(i);
  }
  model.training_steps_ = meta.value("training_steps", std::uint64_t{0});
  return model;
}

TransformerModel TransformerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_bytes(bytes);
}

TransformerModel build_transformer(const TransformerConfig& config, const corpus::Vocab& vocab) {
  return TransformerModel(config, vocab);
}

std::size_t steps_for_epochs(std::size_t n, std::size_t batch_size, std::size_t epochs) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  return epochs * ((n + batch_size - 1) / batch_size);
}

std::vector<double> train_batches(TransformerModel& model, const corpus::Corpus& corpus,
                                  const TrainOptions& options, ad::AdamState& adam) {
  if (corpus.empty()) throw EmptyCorpus("cannot train on an empty corpus");
  if (options.batch_size == 0) throw ConfigError("batch_size must be positive");
  std::vector<double> trace;
  trace.reserve(options.num_steps);
  if (options.num_steps == 0) return trace;

  Rng order_rng(derive_seed(options.seed, 1));
  Rng dropout_rng(derive_seed(options.seed, 2));
  auto order = iota_indices(corpus.size());
  order_rng.shuffle(order);
  std::size_t cursor = 0;

  for (std::size_t step = 0; step < options.num_steps; ++step) {
    std::vector<const corpus::SentencePair*> picked;
    picked.reserve(options.batch_size);
    const std::size_t take = std::min(options.batch_size, corpus.size());
    while (picked.size() < take) {
      if (cursor == order.size()) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      picked.push_back(&corpus[order[cursor++]]);
    }
    const Batch batch = model.make_batch(picked);
    Tape tape;
    const Var l = model.loss(tape, batch, &dropout_rng);
    ad::Gradients grads = tape.backward(l, model.params());
    ad::clip_gradients(grads, options.clip_norm);
    ad::adam_step(model.params(), grads, adam);
    trace.push_back(tape.value(l).item());
  }
  model.add_training_steps(options.num_steps);
  return trace;
}

}  // namespace rlab::model
