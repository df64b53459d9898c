#include "rlab/model/generation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rlab/common/error.hpp"
#include "rlab/common/parallel.hpp"

namespace rlab::model {

using ad::Shape;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

double row_entropy(const Tensor& probs, std::size_t row) {
  const std::size_t v = probs.dim(1);
  double h = 0.0;
  for (std::size_t j = 0; j < v; ++j) {
    const double p = probs[row * v + j];
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<GenerationRecord> decode_chunk(const TransformerModel& model,
                                           const std::vector<const corpus::Tokens*>& sources,
                                           std::size_t max_len) {
  const auto& cfg = model.config();
  const auto& vocab = model.vocab();
  const std::size_t batch = sources.size();
  const std::size_t vsize = vocab.size();

  std::size_t src_len = 0;
  for (const auto* s : sources) src_len = std::max(src_len, std::min(s->size(), cfg.max_sequence_length));
  std::vector<std::size_t> src_ids(batch * src_len, corpus::Vocab::kPad);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t n = std::min(sources[b]->size(), cfg.max_sequence_length);
    for (std::size_t t = 0; t < n; ++t) src_ids[b * src_len + t] = vocab.encode((*sources[b])[t]);
  }

  Tape enc_tape;
  const Var memory_var = model.encode(enc_tape, src_ids, batch, src_len);
  const Tensor memory = enc_tape.value(memory_var);

  std::vector<std::vector<std::size_t>> emitted(batch);
  std::vector<std::vector<double>> rows(batch);
  std::vector<bool> done(batch, false);
  std::vector<std::size_t> prefix{corpus::Vocab::kBos};  // per-step rebuilt

  for (std::size_t step = 0; step < max_len; ++step) {
    const std::size_t len = step + 1;
    std::vector<std::size_t> tgt_ids(batch * len, corpus::Vocab::kPad);
    for (std::size_t b = 0; b < batch; ++b) {
      tgt_ids[b * len] = corpus::Vocab::kBos;
      for (std::size_t t = 0; t < step; ++t) tgt_ids[b * len + t + 1] = emitted[b][t];
    }
    Tape tape;
    const Var mem = tape.constant(memory);
    const Var hidden = model.decode(tape, mem, src_ids, src_len, tgt_ids, batch, len);
    std::vector<std::size_t> last(batch);
    for (std::size_t b = 0; b < batch; ++b) last[b] = b * len + step;
    const Var last_hidden = ad::embed_lookup(tape, hidden, last);
    const Var probs_var = ad::softmax(tape, model.project(tape, last_hidden));
    const Tensor& probs = tape.value(probs_var);

    bool all_done = true;
    for (std::size_t b = 0; b < batch; ++b) {
      const double* row = probs.data() + b * vsize;
      std::size_t best = 0;
      for (std::size_t j = 1; j < vsize; ++j) {
        if (row[j] > row[best]) best = j;
      }
      // finished rows keep decoding in lockstep; their outputs are discarded
      emitted[b].push_back(best);
      if (!done[b]) {
        rows[b].insert(rows[b].end(), row, row + vsize);
        if (best == corpus::Vocab::kEos) done[b] = true;
      }
      all_done = all_done && done[b];
    }
    if (all_done) break;
  }

  std::vector<GenerationRecord> out(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t t = rows[b].size() / vsize;
    out[b].source = *sources[b];
    out[b].token_ids.assign(emitted[b].begin(), emitted[b].begin() + static_cast<std::ptrdiff_t>(t));
    out[b].probabilities = Tensor(Shape{t, vsize}, std::move(rows[b]));
    out[b].mode = DecodeMode::Greedy;
  }
  return out;
}

std::size_t resolve_max_len(const TransformerModel& model, std::size_t max_len) {
  const std::size_t limit = model.config().max_sequence_length - 1;
  return max_len == 0 ? limit : std::min(max_len, limit);
}

}  // namespace

corpus::Tokens GenerationRecord::translation(const corpus::Vocab& vocab) const {
  corpus::Tokens out;
  for (auto id : token_ids) {
    if (id == corpus::Vocab::kEos) break;
    out.push_back(vocab.decode(id));
  }
  return out;
}

GenerationRecord translate(const TransformerModel& model, const corpus::Tokens& source, DecodeMode mode,
                           std::size_t max_len) {
  (void)mode;  // greedy is the only mode
  if (source.empty()) throw EmptyInput("cannot translate an empty source");
  return decode_chunk(model, {&source}, resolve_max_len(model, max_len)).front();
}

std::vector<GenerationRecord> translate_all(const TransformerModel& model,
                                            const std::vector<corpus::Tokens>& sources, std::size_t max_len,
                                            std::size_t chunk) {
  for (const auto& s : sources) {
    if (s.empty()) throw EmptyInput("cannot translate an empty source");
  }
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t limit = resolve_max_len(model, max_len);
  const std::size_t num_chunks = (sources.size() + chunk - 1) / chunk;
  std::vector<std::vector<GenerationRecord>> parts(num_chunks);
  parallel_for(num_chunks, [&](std::size_t c) {
    std::vector<const corpus::Tokens*> ptrs;
    for (std::size_t i = c * chunk; i < std::min(sources.size(), (c + 1) * chunk); ++i) ptrs.push_back(&sources[i]);
    parts[c] = decode_chunk(model, ptrs, limit);
  });
  std::vector<GenerationRecord> out;
  out.reserve(sources.size());
  for (auto& p : parts) {
    for (auto& r : p) out.push_back(std::move(r));
  }
  return out;
}

SyntheticCorpus generate_synthetic_corpus(const TransformerModel& model, const corpus::Corpus& sources,
                                          const std::string& model_id) {
  if (sources.empty()) throw EmptyCorpus("no sources to translate");
  SyntheticCorpus result;
  result.records = translate_all(model, sources.sources());
  std::vector<corpus::SentencePair> pairs;
  pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    corpus::Tokens tgt = result.records[i].translation(model.vocab());
    if (tgt.empty()) tgt.push_back(corpus::Vocab::special_tokens()[corpus::Vocab::kUnk]);
    pairs.emplace_back(sources[i].source(), std::move(tgt), corpus::Provenance::generated(model_id));
  }
  result.corpus = corpus::Corpus(sources.id() + "@" + model_id, std::move(pairs));
  return result;
}

void write_generation_records(const std::filesystem::path& path, const std::vector<GenerationRecord>& records,
                              const corpus::Vocab& vocab, bool include_probabilities) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) {
    double entropy = 0.0;
    for (std::size_t t = 0; t < r.length(); ++t) entropy += row_entropy(r.probabilities, t);
    if (r.length() > 0) entropy /= static_cast<double>(r.length());
    nlohmann::json j{{"source", r.source}, {"tokens", vocab.decode(r.token_ids)}, {"entropy", entropy}};
    if (include_probabilities) {
      nlohmann::json rows = nlohmann::json::array();
      const std::size_t v = r.probabilities.dim(1);
      for (std::size_t t = 0; t < r.length(); ++t) {
        rows.push_back(std::vector<double>(r.probabilities.data() + t * v, r.probabilities.data() + (t + 1) * v));
      }
      j["probabilities"] = std::move(rows);
    }
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace rlab::model
