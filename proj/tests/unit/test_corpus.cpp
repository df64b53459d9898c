#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/corpus/corpus.hpp"
#include "rlab/corpus/preprocess.hpp"
#include "rlab/corpus/toy_language.hpp"
#include "rlab/corpus/vocab.hpp"

using namespace rlab;
using namespace rlab::corpus;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto p = std::filesystem::temp_directory_path() / ("rlab-unit-" + name);
  std::ofstream(p, std::ios::binary) << contents;
  return p;
}

Corpus corpus_of(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::vector<SentencePair> pairs;
  for (const auto& [s, t] : rows) pairs.emplace_back(tokenize(s), tokenize(t));
  return Corpus("c", pairs);
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("load two valid lines") {
    const auto p = temp_file("two.tsv", "a b\tx y\nc\tz\n");
    const auto r = load_parallel_corpus(p);
    REQUIRE(r.corpus.size() == 2);
    CHECK(r.skipped == 0);
    CHECK(r.corpus[0].source() == Tokens{"a", "b"});
    CHECK(r.corpus[0].target() == Tokens{"x", "y"});
    CHECK(r.corpus[1].target() == Tokens{"z"});
    CHECK(r.corpus[0].provenance().is_real());
  }

  TEST_CASE("malformed lines are skipped and counted") {
    const auto p = temp_file("bad.tsv", "a\tx\nno-tab-here\nb\ty\n\n");
    const auto r = load_parallel_corpus(p);
    CHECK(r.corpus.size() == 2);
    CHECK(r.skipped == 1);
    const auto q = temp_file("bad2.tsv", "a\tb\tc\n\tx\ny\t\n\xff\xfe\tz\nok\tfine\n");
    const auto r2 = load_parallel_corpus(q);
    CHECK(r2.corpus.size() == 1);
    CHECK(r2.skipped == 4);
  }

  TEST_CASE("load errors") {
    CHECK_THROWS_AS(load_parallel_corpus("/nonexistent/nowhere.tsv"), IoError);
    CHECK_THROWS_AS(load_parallel_corpus(temp_file("empty.tsv", "junk\n\n")), EmptyCorpus);
  }

  TEST_CASE("save and load round-trip 50 pairs") {
    const auto c = ToyLanguage().generate(50, 3);
    const auto p = std::filesystem::temp_directory_path() / "rlab-unit-rt.tsv";
    save_parallel_corpus(c, p);
    const auto back = load_parallel_corpus(p).corpus;
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(back[i].source() == c[i].source());
      CHECK(back[i].target() == c[i].target());
    }
  }

  TEST_CASE("sentence pair rejects empty sides") {
    CHECK_THROWS_AS(SentencePair({}, {"x"}), FormatError);
    CHECK_THROWS_AS(SentencePair({"a"}, {}), FormatError);
    const SentencePair g({"a"}, {"x"}, Provenance::generated("m1"));
    CHECK(g.provenance().label() == "generated:m1");
  }

  TEST_CASE("tokenize separates punctuation") {
    CHECK(tokenize("Tomorrow will be raining!") == Tokens{"Tomorrow", "will", "be", "raining", "!"});
    CHECK(tokenize("  a,b  c ") == Tokens{"a", ",", "b", "c"});
    CHECK(tokenize("").empty());
  }

  TEST_CASE("preprocess worked example") {
    const auto opts = PreprocessOptions::all({"will", "be"});
    CHECK(preprocess_sentence(tokenize("Tomorrow will be raining!"), opts) == Tokens{"tomorrow", "rain"});
  }

  TEST_CASE("preprocess with all flags off is the identity") {
    const PreprocessOptions off;
    const Tokens t{"Cats", ",", "DOGS", "running"};
    CHECK(preprocess_sentence(t, off) == t);
  }

  TEST_CASE("lowercase, punctuation and stem") {
    PreprocessOptions o;
    o.lowercase = o.strip_punctuation = o.stem = true;
    CHECK(preprocess_sentence(tokenize("Cats, cats; CATS"), o) == Tokens{"cat", "cat", "cat"});
  }

  TEST_CASE("preprocess is idempotent for every flag combination") {
    const std::vector<Tokens> texts{tokenize("The Runners were running quickly, happily!"),
                                    tokenize("Classes passes; buses. BE WILL"), tokenize("... !!! ,"),
                                    tokenize("caresses ponies ties cats feed agreed plastered")};
    for (int mask = 0; mask < 16; ++mask) {
      PreprocessOptions o;
      o.lowercase = mask & 1;
      o.strip_punctuation = mask & 2;
      o.remove_stopwords = mask & 4;
      o.stem = mask & 8;
      o.stopwords = {"the", "be", "will", "were", "run"};
      for (const auto& t : texts) {
        const auto once = preprocess_sentence(t, o);
        CHECK(preprocess_sentence(once, o) == once);
      }
    }
  }

  TEST_CASE("stemmer is a fixpoint and rejects lengthening rules") {
    const auto s = Stemmer::english();
    for (const std::string w : {"running", "caresses", "ponies", "happily", "relational", "cats"}) {
      CHECK(s.stem(s.stem(w)) == s.stem(w));
    }
    CHECK_THROWS_AS(Stemmer(std::vector<Stemmer::Rule>{{"s", "ss"}}), ConfigError);
  }

  TEST_CASE("stemmer rule file matches the built-in table") {
    const auto loaded = Stemmer::load(std::filesystem::path(RLAB_SOURCE_DIR) / "data" / "stemmer_rules.tsv");
    const auto builtin = Stemmer::english();
    for (const std::string w : {"running", "caresses", "ponies", "happily", "relational", "cats", "raining"}) {
      CHECK(loaded.stem(w) == builtin.stem(w));
    }
  }

  TEST_CASE("build_vocab budget, threshold and ties") {
    const auto c = corpus_of({{"a a b", "a"}});
    const auto v = build_vocab(c, 7, 1);
    CHECK(v.size() == 7);
    CHECK(v.contains("a"));
    CHECK(v.contains("b"));
    const auto v2 = build_vocab(c, 7, 2);
    CHECK(v2.contains("a"));
    CHECK_FALSE(v2.contains("b"));
    const auto tie = corpus_of({{"y x y", "x y x"}});
    const auto v3 = build_vocab(tie, 6, 1);
    CHECK(v3.contains("x"));
    CHECK_FALSE(v3.contains("y"));
    CHECK_THROWS_AS(build_vocab(c, 4, 1), ConfigError);
    CHECK_THROWS_AS(build_vocab(Corpus{}, 10, 1), EmptyCorpus);
  }

  TEST_CASE("vocab specials and round trip") {
    const auto v = build_vocab(ToyLanguage().generate(100, 1), 1000);
    CHECK(v.decode(Vocab::kPad) == Vocab::special_tokens()[0]);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.encode(v.decode(i)) == i);
    CHECK(v.encode("definitely-not-a-token") == Vocab::kUnk);
    CHECK_THROWS_AS(Vocab({"a", "a"}), ConfigError);
  }

  TEST_CASE("split_corpus sizes, disjointness, determinism") {
    const auto c = ToyLanguage().generate(10, 5);
    const auto parts = split_corpus(c, 11, {3, 4});
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].size() == 3);
    CHECK(parts[1].size() == 4);
    const auto again = split_corpus(c, 11, {3, 4});
    CHECK(again[0].pairs() == parts[0].pairs());
    CHECK(again[1].pairs() == parts[1].pairs());
    const auto whole = split_corpus(c, 11, {10});
    CHECK(whole[0].size() == 10);
    CHECK_THROWS_AS(split_corpus(c, 1, {6, 5}), SizeError);
  }

  TEST_CASE("split partitions are disjoint by position") {
    std::vector<SentencePair> pairs;
    for (int i = 0; i < 30; ++i) pairs.emplace_back(Tokens{"s" + std::to_string(i)}, Tokens{"t"});
    const Corpus c("u", pairs);
    const auto parts = split_corpus(c, 2, {10, 12});
    std::set<std::string> seen;
    for (const auto& p : parts)
      for (const auto& sp : p.pairs()) CHECK(seen.insert(sp.source()[0]).second);
  }

  TEST_CASE("different seeds give different partitions") {
    const auto c = ToyLanguage().generate(100, 2);
    std::size_t differ = 0;
    const auto ref = split_corpus(c, 0, {10})[0];
    for (std::uint64_t s = 1; s <= 100; ++s) differ += !(split_corpus(c, s, {10})[0].pairs() == ref.pairs());
    CHECK(differ >= 99);
  }

  TEST_CASE("toy language is deterministic and reorders adjectives") {
    const ToyLanguage lang;
    const auto a = lang.generate(20, 4);
    const auto b = lang.generate(20, 4);
    CHECK(a.pairs() == b.pairs());
    for (const auto& p : a.pairs()) CHECK(lang.translate(p.source()) == p.target());
    std::string det, adj, noun;
    for (const auto& e : lang.lexicon()) {
      if (e.category == ToyLanguage::Category::Det && det.empty()) det = e.source;
      if (e.category == ToyLanguage::Category::Adj && adj.empty()) adj = e.source;
      if (e.category == ToyLanguage::Category::Noun && noun.empty()) noun = e.source;
    }
    const auto t = lang.translate({det, adj, noun});
    REQUIRE(t.size() == 3);
    CHECK(t[1] == lang.translate({noun})[0]);
    CHECK(t[2] == lang.translate({adj})[0]);
    CHECK_FALSE(lang.target_function_words().empty());
  }

  TEST_CASE("toy vocabulary is about 200 tokens") {
    const auto v = build_vocab(ToyLanguage().generate(20000, 1), 1000);
    CHECK(v.size() > 150);
    CHECK(v.size() < 260);
  }
}
