#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rlab/corpus/corpus.hpp"

namespace rlab::metrics {

using corpus::Tokens;

struct SparseVector {
  std::vector<std::size_t> indices;  // ascending
  std::vector<double> values;

  std::vector<double> dense(std::size_t dimension) const;
  double norm() const;
};

// TF-IDF over a fixed corpus: raw term counts times smoothed
// idf = ln((1 + D) / (1 + df)) + 1, rows L2-normalized. Terms are indexed in
// lexicographic order.
struct TfidfModel {
  std::vector<std::string> terms;
  std::vector<double> idf;
  std::vector<SparseVector> vectors;  // one per input text; empty texts give zero rows

  std::size_t dimension() const { return terms.size(); }
};

// Throws DegenerateInput when every text is empty.
TfidfModel tfidf_embed(const std::vector<Tokens>& texts);

// dot(a, b) / (|a| |b|). Throws ShapeError on dimension mismatch and
// DegenerateInput on a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const SparseVector& a, const SparseVector& b);

struct PairwiseCosine {
  double mean = 0.0;
  std::size_t scored = 0;
  std::size_t skipped = 0;  // pairs with a zero vector on either side
};

// Fits TF-IDF on hypotheses and references together and averages the cosine
// of each aligned pair. Throws AlignmentError for mismatched sizes.
PairwiseCosine mean_pairwise_cosine(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references);

// Symmetric synonym relation; every token is its own synonym.
class SynonymTable {
 public:
  SynonymTable() = default;

  // "token<TAB>syn1,syn2,..." per line; symmetric closure applied.
  static SynonymTable load(const std::filesystem::path& path);

  void add(const std::string& a, const std::string& b);
  bool are_synonyms(const std::string& a, const std::string& b) const;
  // Includes the token itself.
  std::set<std::string> synonyms(const std::string& token) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::set<std::string>> table_;
};

// Reference tokens (per occurrence) such that neither the token nor any of its
// synonyms occurs in the hypothesis.
std::size_t non_synonymous_deviations(const Tokens& reference, const Tokens& hypothesis, const SynonymTable& table);

// Sum over aligned pairs. Throws AlignmentError.
std::size_t non_synonymous_deviations(const std::vector<Tokens>& references, const std::vector<Tokens>& hypotheses,
                                      const SynonymTable& table);

// Hypothesis with its deviating tokens deleted: tokens that neither occur in
// the reference nor have a synonym there.
Tokens remove_deviations(const Tokens& hypothesis, const Tokens& reference, const SynonymTable& table);

}  // namespace rlab::metrics
