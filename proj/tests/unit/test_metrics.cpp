#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/corpus/corpus.hpp"
#include "rlab/metrics/bleu.hpp"
#include "rlab/metrics/diversity.hpp"
#include "rlab/metrics/similarity.hpp"
#include "rlab/metrics/stats.hpp"

using namespace rlab;
using namespace rlab::metrics;
using corpus::tokenize;

namespace {

std::vector<Tokens> toks(const std::vector<std::string>& lines) {
  std::vector<Tokens> out;
  for (const auto& l : lines) out.push_back(tokenize(l));
  return out;
}

// Multi-reference BLEU by direct counting.
double brute_multi_bleu(const Tokens& hyp, const std::vector<Tokens>& refs, std::size_t order) {
  double log_sum = 0;
  for (std::size_t n = 1; n <= order; ++n) {
    std::map<Tokens, std::size_t> h;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++h[Tokens(hyp.begin() + i, hyp.begin() + i + n)];
    std::size_t matched = 0, total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
    for (const auto& [g, c] : h) {
      std::size_t best = 0;
      for (const auto& r : refs) {
        std::size_t rc = 0;
        for (std::size_t i = 0; i + n <= r.size(); ++i) rc += Tokens(r.begin() + i, r.begin() + i + n) == g;
        best = std::max(best, rc);
      }
      matched += std::min(c, best);
    }
    if (matched == 0) return 0;
    log_sum += std::log(double(matched) / double(total)) / double(order);
  }
  std::size_t r = refs[0].size();
  for (const auto& ref : refs) {
    const auto d = [&](std::size_t x) { return x > hyp.size() ? x - hyp.size() : hyp.size() - x; };
    if (d(ref.size()) < d(r) || (d(ref.size()) == d(r) && ref.size() < r)) r = ref.size();
  }
  const double bp = std::min(1.0, std::exp(1.0 - double(r) / double(hyp.size())));
  return bp * std::exp(log_sum);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("clipped unigram precision") {
    const auto p = modified_precision(toks({"the the the"}), toks({"the cat"}), 1);
    CHECK(p.matched == 1);
    CHECK(p.total == 3);
    CHECK(p.value() == 1.0 / 3.0);
  }

  TEST_CASE("identical and disjoint precision") {
    const auto h = toks({"a b c d", "e f g"});
    for (std::size_t n = 1; n <= 3; ++n) CHECK(modified_precision(h, h, n).value() == 1.0);
    CHECK(modified_precision(toks({"a b"}), toks({"c d"}), 1).value() == 0.0);
    CHECK_THROWS_AS(modified_precision(h, h, 0), ConfigError);
    CHECK_THROWS_AS(modified_precision(h, toks({"a"}), 1), AlignmentError);
  }

  TEST_CASE("worked corpus BLEU example") {
    const auto r = corpus_bleu(toks({"the cat sat"}), toks({"the cat sat on the mat"}), BleuConfig::uniform(2));
    CHECK(r.precisions[0].value() == 1.0);
    CHECK(r.precisions[1].value() == 1.0);
    CHECK(std::abs(r.brevity_penalty - std::exp(-1.0)) <= 1e-12);
    CHECK(std::abs(r.bleu - 0.367879441171) <= 1e-9);
    CHECK(r.hypothesis_length == 3);
    CHECK(r.reference_length == 6);
  }

  TEST_CASE("BLEU of a corpus against itself is one") {
    const auto h = toks({"a b c d e", "x y z w", "p q r s t u"});
    CHECK(corpus_bleu(h, h).bleu == 1.0);
    CHECK(corpus_bleu(h, h, BleuConfig::uniform(2)).bleu == 1.0);
  }

  TEST_CASE("longer hypothesis has no brevity penalty") {
    const std::vector<NgramPrecision> all_one{{1, 5, 5}, {2, 4, 4}};
    const auto r = bleu_from_counts(all_one, 5, 3, BleuConfig::uniform(2));
    CHECK(r.brevity_penalty == 1.0);
    CHECK(r.bleu == 1.0);
    const auto longer = corpus_bleu(toks({"a b c d"}), toks({"a b c"}), BleuConfig::uniform(1));
    CHECK(longer.brevity_penalty == 1.0);
  }

  TEST_CASE("degenerate flag when a precision is zero") {
    const auto r = corpus_bleu(toks({"a b c d"}), toks({"a x b y"}));
    CHECK(r.bleu == 0.0);
    CHECK(r.degenerate);
    CHECK_THROWS_AS(corpus_bleu(toks({"a"}), toks({"a", "b"})), AlignmentError);
  }

  TEST_CASE("decomposition identity") {
    const auto h = toks({"the cat sat on a mat", "a dog ran"});
    const auto r = toks({"the cat sat on the mat", "the dog ran away"});
    const auto rep = corpus_bleu(h, r, BleuConfig::uniform(2));
    double s = 0;
    for (const auto& p : rep.precisions) s += 0.5 * std::log(p.value());
    CHECK(std::abs(rep.bleu - rep.brevity_penalty * std::exp(s)) <= 1e-12);
  }

  TEST_CASE("BLEU is invariant under consistent permutation") {
    Rng rng(2);
    std::vector<Tokens> h, r;
    for (int i = 0; i < 20; ++i) {
      Tokens a(3 + rng.below(6)), b(3 + rng.below(6));
      for (auto& w : a) w = std::to_string(rng.below(5));
      for (auto& w : b) w = std::to_string(rng.below(5));
      h.push_back(a);
      r.push_back(b);
    }
    const double base = corpus_bleu(h, r).bleu;
    auto idx = iota_indices(20);
    rng.shuffle(idx);
    std::vector<Tokens> hp, rp;
    for (auto i : idx) hp.push_back(h[i]), rp.push_back(r[i]);
    CHECK(corpus_bleu(hp, rp).bleu == base);
  }

  TEST_CASE("config validation and weights") {
    BleuConfig c;
    c.max_order = 2;
    c.weights = {0.7, 0.2};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.weights = {0.75, 0.25};
    CHECK_NOTHROW(c.validate());
    c.weights = {1.5, -0.5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(BleuConfig{}.weight(3) == 0.25);
  }

  TEST_CASE("report exports json and csv") {
    const auto rep = corpus_bleu(toks({"a b c"}), toks({"a b d"}), BleuConfig::uniform(2));
    const nlohmann::json j = rep;
    CHECK(j.contains("bleu"));
    CHECK(j["precisions"].size() == 2);
    CHECK(bleu_csv_header(2).find("p2") != std::string::npos);
    CHECK(bleu_csv_row("x", rep).rfind("x,", 0) == 0);
  }

  TEST_CASE("sentence BLEU with multiple references") {
    const Tokens h = tokenize("a b c d");
    const Tokens r1 = tokenize("a b x d e"), r2 = tokenize("a b c");
    const auto rep = sentence_bleu(h, {&r1, &r2}, BleuConfig::uniform(2));
    CHECK(std::abs(rep.bleu - brute_multi_bleu(h, {r1, r2}, 2)) <= 1e-12);
    CHECK_THROWS_AS(sentence_bleu(h, {}), AlignmentError);
  }

  TEST_CASE("self-BLEU identical and disjoint corpora") {
    const auto same = toks({"a b c d e", "a b c d e", "a b c d e", "a b c d e", "a b c d e"});
    const auto r = self_bleu(same);
    CHECK(r.mean == 1.0);
    for (double s : r.scores) CHECK(s == 1.0);
    CHECK(self_bleu(toks({"a b c d", "e f g h", "i j k l"})).mean == 0.0);
    CHECK_THROWS_AS(self_bleu(toks({"a"})), SizeError);
  }

  TEST_CASE("self-BLEU matches a multi-reference oracle") {
    const auto c = toks({"the cat sat on the mat", "the cat ran", "a cat sat on a mat today"});
    for (std::size_t order : {1, 2, 3}) {
      const auto r = self_bleu(c, BleuConfig::uniform(order));
      for (std::size_t i = 0; i < c.size(); ++i) {
        std::vector<Tokens> others;
        for (std::size_t j = 0; j < c.size(); ++j)
          if (j != i) others.push_back(c[j]);
        CHECK(std::abs(r.scores[i] - brute_multi_bleu(c[i], others, order)) <= 1e-12);
      }
    }
  }

  TEST_CASE("self-BLEU mean is permutation invariant") {
    auto c = toks({"the cat sat on the mat", "the cat ran", "a cat sat on a mat", "the dog sat on the mat"});
    const double m = self_bleu(c, BleuConfig::uniform(2)).mean;
    std::reverse(c.begin(), c.end());
    CHECK(std::abs(self_bleu(c, BleuConfig::uniform(2)).mean - m) <= 1e-12);
  }

  TEST_CASE("unique token counts") {
    CHECK(unique_token_count(toks({"a b", "b c"})) == 3);
    CHECK(unique_token_count({}) == 0);
    Rng rng(4);
    std::vector<Tokens> c;
    std::set<std::string> oracle;
    for (int i = 0; i < 100; ++i) {
      Tokens t(1 + rng.below(8));
      for (auto& w : t) oracle.insert(w = "w" + std::to_string(rng.below(300)));
      c.push_back(t);
    }
    CHECK(unique_token_count(c) == oracle.size());
  }

  TEST_CASE("tfidf single document and duplicates") {
    const auto m = tfidf_embed(toks({"a a b"}));
    REQUIRE(m.vectors.size() == 1);
    CHECK(std::abs(m.vectors[0].norm() - 1.0) <= 1e-12);
    CHECK(m.idf[0] == m.idf[1]);
    const auto d = m.vectors[0].dense(m.dimension());
    CHECK(std::abs(d[0] / d[1] - 2.0) <= 1e-12);
    const auto two = tfidf_embed(toks({"x y", "x y"}));
    CHECK(two.vectors[0].values == two.vectors[1].values);
    CHECK_THROWS_AS(tfidf_embed({Tokens{}, Tokens{}}), DegenerateInput);
  }

  TEST_CASE("tfidf hand computation") {
    const auto m = tfidf_embed(toks({"a b", "a c", "a a"}));
    REQUIRE(m.terms == std::vector<std::string>{"a", "b", "c"});
    const double idf_a = std::log(4.0 / 4.0) + 1.0;
    const double idf_b = std::log(4.0 / 2.0) + 1.0;
    CHECK(std::abs(m.idf[0] - idf_a) <= 1e-12);
    CHECK(std::abs(m.idf[1] - idf_b) <= 1e-12);
    const auto v0 = m.vectors[0].dense(3);
    const double n0 = std::sqrt(idf_a * idf_a + idf_b * idf_b);
    CHECK(std::abs(v0[0] - idf_a / n0) <= 1e-12);
    CHECK(std::abs(v0[1] - idf_b / n0) <= 1e-12);
    const auto v2 = m.vectors[2].dense(3);
    CHECK(std::abs(v2[0] - 1.0) <= 1e-12);
  }

  TEST_CASE("cosine similarity") {
    const std::vector<double> a{1, 1}, b{1, 0}, c{0, 1}, z{0, 0};
    CHECK(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-12);
    CHECK(cosine_similarity(b, c) == 0.0);
    CHECK(std::abs(cosine_similarity(a, b) - 1.0 / std::sqrt(2.0)) <= 1e-12);
    CHECK_THROWS_AS(cosine_similarity(a, z), DegenerateInput);
    CHECK_THROWS_AS(cosine_similarity(a, std::vector<double>{1, 2, 3}), ShapeError);
    const auto pc = mean_pairwise_cosine(toks({"a b", "c d"}), toks({"a b", "e f"}));
    CHECK(std::abs(pc.mean - 0.5) <= 1e-12);
    CHECK(pc.scored == 2);
    CHECK_THROWS_AS(mean_pairwise_cosine(toks({"a"}), toks({"a", "b"})), AlignmentError);
  }

  TEST_CASE("non-synonymous deviations") {
    SynonymTable t;
    t.add("rain", "shower");
    CHECK(t.are_synonyms("shower", "rain"));
    CHECK(t.are_synonyms("x", "x"));
    CHECK(non_synonymous_deviations(tokenize("tomorrow rain"), tokenize("tomorrow rain"), t) == 0);
    CHECK(non_synonymous_deviations(tokenize("tomorrow rain"), tokenize("tomorrow shower"), t) == 0);
    CHECK(non_synonymous_deviations(tokenize("tomorrow rain"), tokenize("tomorrow sun"), SynonymTable{}) == 1);
    CHECK(non_synonymous_deviations(tokenize("rain rain"), tokenize("sun"), SynonymTable{}) == 2);
    CHECK(non_synonymous_deviations(toks({"a b", "c"}), toks({"a", "d"}), SynonymTable{}) == 2);
    CHECK_THROWS_AS(non_synonymous_deviations(toks({"a"}), toks({"a", "b"}), t), AlignmentError);
  }

  TEST_CASE("growing the synonym table never increases deviations") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      Tokens ref(5), hyp(5);
      for (auto& w : ref) w = "w" + std::to_string(rng.below(8));
      for (auto& w : hyp) w = "w" + std::to_string(rng.below(8));
      SynonymTable t;
      std::size_t prev = non_synonymous_deviations(ref, hyp, t);
      for (int k = 0; k < 5; ++k) {
        t.add("w" + std::to_string(rng.below(8)), "w" + std::to_string(rng.below(8)));
        const std::size_t now = non_synonymous_deviations(ref, hyp, t);
        CHECK(now <= prev);
        prev = now;
      }
    }
  }

  TEST_CASE("synonym file load applies symmetric closure") {
    const auto p = std::filesystem::temp_directory_path() / "rlab-unit-syn.tsv";
    std::ofstream(p) << "rain\tshower,drizzle\n";
    const auto t = SynonymTable::load(p);
    CHECK(t.are_synonyms("drizzle", "rain"));
    CHECK(t.synonyms("shower").count("rain") == 1);
    const auto shipped = SynonymTable::load(std::filesystem::path(RLAB_SOURCE_DIR) / "data" / "synonyms_en.tsv");
    CHECK(shipped.size() > 0);
  }

  TEST_CASE("remove deviations deletes tokens") {
    SynonymTable t;
    t.add("rain", "shower");
    CHECK(remove_deviations(tokenize("tomorrow shower sun"), tokenize("tomorrow rain"), t) == tokenize("tomorrow shower"));
  }

  TEST_CASE("ranks, spearman and auc") {
    const std::vector<double> v{3, 1, 3, 2};
    CHECK(average_ranks(v) == std::vector<double>{3.5, 1, 3.5, 2});
    const std::vector<double> x{1, 2, 3, 4}, y{10, 20, 30, 40}, yr{4, 3, 2, 1}, c{5, 5, 5, 5};
    CHECK(std::abs(spearman_correlation(x, y) - 1.0) <= 1e-12);
    CHECK(std::abs(spearman_correlation(x, yr) + 1.0) <= 1e-12);
    CHECK(spearman_correlation(x, c) == 0.0);
    CHECK_THROWS_AS(spearman_correlation(x, std::vector<double>{1}), AlignmentError);
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> l{0, 0, 1, 1};
    CHECK(std::abs(roc_auc(s, l) - 0.75) <= 1e-12);
    std::vector<double> cubed;
    for (double q : s) cubed.push_back(q * q * q + 7);
    CHECK(roc_auc(cubed, l) == roc_auc(s, l));
    CHECK(roc_auc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}) == 0.5);
    CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 1, 1, 1}), EmptyClass);
  }
}
