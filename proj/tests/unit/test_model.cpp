#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rlab/autodiff/gradient_check.hpp"
#include "rlab/common/error.hpp"
#include "rlab/corpus/toy_language.hpp"
#include "rlab/corpus/vocab.hpp"
#include "rlab/model/generation.hpp"
#include "rlab/model/transformer.hpp"

using namespace rlab;
using namespace rlab::model;
using corpus::Tokens;

namespace {

TransformerConfig small(std::uint64_t seed = 1) {
  TransformerConfig c;
  c.num_layers = 1;
  c.num_heads = 2;
  c.d_model = 16;
  c.d_ff = 32;
  c.max_sequence_length = 12;
  c.seed = seed;
  return c;
}

corpus::Corpus copy_corpus(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<corpus::SentencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    Tokens t(2 + r.below(4));
    for (auto& w : t) w = "t" + std::to_string(r.below(8));
    pairs.emplace_back(t, t);
  }
  return corpus::Corpus("copy", pairs);
}

void check_record(const GenerationRecord& rec, const corpus::Vocab& v) {
  REQUIRE(rec.length() >= 1);
  REQUIRE(rec.probabilities.dim(0) == rec.length());
  REQUIRE(rec.probabilities.dim(1) == v.size());
  for (std::size_t t = 0; t < rec.length(); ++t) {
    double s = 0, best = -1;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double p = rec.probabilities.at(t, j);
      CHECK(p >= 0);
      s += p;
      if (p > best) best = p, arg = j;
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
    CHECK(rec.token_ids[t] == arg);
  }
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("config validation") {
    auto c = small();
    c.d_model = 8;
    c.num_heads = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto d = small();
    d.dropout_rate = 1.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    auto e = small();
    e.max_sequence_length = 1;
    CHECK_THROWS_AS(e.validate(), ConfigError);
    CHECK_THROWS_AS(build_transformer(c, corpus::Vocab({"a"})), ConfigError);
  }

  TEST_CASE("same seed gives identical parameters") {
    const corpus::Vocab v({"a", "b", "x", "y"});
    const auto m1 = build_transformer(small(7), v);
    const auto m2 = build_transformer(small(7), v);
    const auto m3 = build_transformer(small(8), v);
    CHECK(m1.params() == m2.params());
    CHECK_FALSE(m1.params() == m3.params());
  }

  TEST_CASE("two-layer forward is finite and passes gradient check") {
    const auto data = corpus::ToyLanguage().generate(4, 2);
    TransformerConfig c;
    c.num_layers = 2;
    c.num_heads = 2;
    c.d_model = 16;
    c.d_ff = 32;
    auto m = build_transformer(c, corpus::build_vocab(data, 100));
    std::vector<const corpus::SentencePair*> ptrs;
    for (const auto& p : data.pairs()) ptrs.push_back(&p);
    const auto batch = m.make_batch(ptrs);
    ad::Tape t;
    CHECK(std::isfinite(t.value(m.loss(t, batch)).item()));
    const auto rep = ad::gradient_check([&](ad::Tape& tape, const ad::ParameterStore&) { return m.loss(tape, batch); },
                                        m.params());
    CHECK(rep.passed);
  }

  TEST_CASE("zero steps leave the model unchanged") {
    const auto data = copy_corpus(10, 1);
    auto m = build_transformer(small(), corpus::build_vocab(data, 100));
    const auto before = m.params();
    ad::AdamState adam(m.params(), {});
    TrainOptions o;
    o.num_steps = 0;
    CHECK(train_batches(m, data, o, adam).empty());
    CHECK(m.params() == before);
    CHECK_THROWS_AS(train_batches(m, corpus::Corpus{}, o, adam), EmptyCorpus);
  }

  TEST_CASE("copy task loss drops and traces are reproducible") {
    const auto data = copy_corpus(50, 3);
    const auto vocab = corpus::build_vocab(data, 100);
    auto run = [&] {
      auto m = build_transformer(small(4), vocab);
      ad::AdamState adam(m.params(), {.learning_rate = 3e-3});
      TrainOptions o;
      o.batch_size = 10;
      o.num_steps = 200;
      o.seed = 5;
      return train_batches(m, data, o, adam);
    };
    const auto trace = run();
    REQUIRE(trace.size() == 200);
    CHECK(trace.back() < trace.front());
    CHECK(run() == trace);
  }

  TEST_CASE("default config halves copy-task loss within 500 steps") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto data = copy_corpus(50, seed);
      TransformerConfig c;
      c.seed = seed;
      auto m = build_transformer(c, corpus::build_vocab(data, 100));
      ad::AdamState adam(m.params(), {});
      TrainOptions o;
      o.batch_size = 16;
      o.num_steps = 500;
      o.seed = seed;
      const auto trace = train_batches(m, data, o, adam);
      auto avg = [&](std::size_t from) {
        double s = 0;
        for (std::size_t i = from; i < from + 10; ++i) s += trace[i];
        return s / 10;
      };
      CHECK(avg(490) <= 0.5 * avg(0));
    }
  }

  TEST_CASE("zeroed weights give uniform output rows") {
    const corpus::Vocab v({"a", "b", "c"});
    auto m = build_transformer(small(), v);
    auto& ps = m.params();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps.name(i) == "embedding") continue;
      auto& t = ps.value(i);
      const bool gain = ps.name(i).find("gain") != std::string::npos;
      for (auto& x : t.values()) x = gain ? 1.0 : 0.0;
    }
    const auto rec = translate(m, {"a", "b"});
    for (std::size_t t = 0; t < rec.length(); ++t)
      for (std::size_t j = 0; j < v.size(); ++j) CHECK(std::abs(rec.probabilities.at(t, j) - 1.0 / v.size()) <= 1e-9);
  }

  TEST_CASE("overfit single pair decodes its target") {
    const corpus::Corpus data("one", {corpus::SentencePair({"a", "b"}, {"x", "y"})});
    auto m = build_transformer(small(2), corpus::build_vocab(data, 20));
    ad::AdamState adam(m.params(), {.learning_rate = 1e-2});
    TrainOptions o;
    o.batch_size = 1;
    o.num_steps = 150;
    train_batches(m, data, o, adam);
    const auto rec = translate(m, {"a", "b"});
    CHECK(rec.translation(m.vocab()) == Tokens{"x", "y"});
    check_record(rec, m.vocab());
    const auto syn = generate_synthetic_corpus(m, data, "fit");
    CHECK(syn.corpus[0].target() == data[0].target());
  }

  TEST_CASE("decode records are valid distributions and batched equals single") {
    const auto data = corpus::ToyLanguage().generate(40, 6);
    auto m = build_transformer(small(3), corpus::build_vocab(data, 300));
    ad::AdamState adam(m.params(), {.learning_rate = 3e-3});
    TrainOptions o;
    o.num_steps = 30;
    train_batches(m, data, o, adam);
    const auto sources = data.sources();
    const auto batched = translate_all(m, sources, 0, 7);
    REQUIRE(batched.size() == sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const auto single = translate(m, sources[i]);
      CHECK(single.token_ids == batched[i].token_ids);
      CHECK(single.probabilities == batched[i].probabilities);
      check_record(single, m.vocab());
      CHECK(single.length() <= m.config().max_sequence_length - 1);
    }
    CHECK_THROWS_AS(translate(m, {}), EmptyInput);
  }

  TEST_CASE("synthetic corpus provenance and determinism") {
    const auto data = corpus::ToyLanguage().generate(10, 8);
    const auto m = build_transformer(small(), corpus::build_vocab(data, 300));
    const auto a = generate_synthetic_corpus(m, data, "gen-a");
    const auto b = generate_synthetic_corpus(m, data, "gen-a");
    REQUIRE(a.corpus.size() == 10);
    REQUIRE(a.records.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(a.corpus[i].provenance() == corpus::Provenance::generated("gen-a"));
      CHECK(a.corpus[i].source() == data[i].source());
      CHECK_FALSE(a.corpus[i].target().empty());
    }
    CHECK(a.corpus.pairs() == b.corpus.pairs());
  }

  TEST_CASE("model save and load round trip") {
    const auto data = corpus::ToyLanguage().generate(10, 9);
    auto m = build_transformer(small(), corpus::build_vocab(data, 300));
    m.add_training_steps(12);
    const auto path = std::filesystem::temp_directory_path() / "rlab-unit-model.ckpt";
    m.save(path);
    const auto back = TransformerModel::load(path);
    CHECK(back.params() == m.params());
    CHECK(back.vocab() == m.vocab());
    CHECK(back.training_steps() == 12);
    CHECK(TransformerModel::from_bytes(m.serialize()).params() == m.params());
  }

  TEST_CASE("generation records export as json lines") {
    const auto data = corpus::ToyLanguage().generate(3, 9);
    const auto m = build_transformer(small(), corpus::build_vocab(data, 300));
    const auto recs = translate_all(m, data.sources());
    const auto path = std::filesystem::temp_directory_path() / "rlab-unit-records.jsonl";
    write_generation_records(path, recs, m.vocab(), false);
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("entropy"));
      CHECK_FALSE(j.contains("probabilities"));
      ++n;
    }
    CHECK(n == 3);
  }
}
