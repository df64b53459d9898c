#include "rlab/metrics/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "rlab/common/error.hpp"

namespace rlab::metrics {

std::vector<double> SparseVector::dense(std::size_t dimension) const {
  std::vector<double> out(dimension, 0.0);
  for (std::size_t k = 0; k < indices.size(); ++k) out.at(indices[k]) = values[k];
  return out;
}

double SparseVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

TfidfModel tfidf_embed(const std::vector<Tokens>& texts) {
  std::map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    std::set<std::string> seen(t.begin(), t.end());
    for (const auto& term : seen) ++df[term];
  }
  if (df.empty()) throw DegenerateInput("TF-IDF over texts that are all empty");

  TfidfModel model;
  std::map<std::string, std::size_t> index;
  const double docs = static_cast<double>(texts.size());
  for (const auto& [term, count] : df) {
    index.emplace(term, model.terms.size());
    model.terms.push_back(term);
    model.idf.push_back(std::log((1.0 + docs) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  for (const auto& t : texts) {
    std::map<std::size_t, double> tf;
    for (const auto& term : t) tf[index.at(term)] += 1.0;
    SparseVector v;
    for (const auto& [i, c] : tf) {
      v.indices.push_back(i);
      v.values.push_back(c * model.idf[i]);
    }
    const double n = v.norm();
    if (n > 0.0) {
      for (double& x : v.values) x /= n;
    }
    model.vectors.push_back(std::move(v));
  }
  return model;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DegenerateInput("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateInput("cosine similarity of a zero vector");
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] == b.indices[j]) {
      dot += a.values[i++] * b.values[j++];
    } else if (a.indices[i] < b.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

PairwiseCosine mean_pairwise_cosine(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references) {
  if (hypotheses.size() != references.size()) {
    throw AlignmentError(std::to_string(hypotheses.size()) + " hypotheses vs " + std::to_string(references.size()) +
                         " references");
  }
  std::vector<Tokens> all = hypotheses;
  all.insert(all.end(), references.begin(), references.end());
  const TfidfModel model = tfidf_embed(all);
  PairwiseCosine out;
  double total = 0.0;
  const std::size_t n = hypotheses.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = model.vectors[i];
    const auto& b = model.vectors[n + i];
    if (a.indices.empty() || b.indices.empty()) {
      ++out.skipped;
      continue;
    }
    total += cosine_similarity(a, b);
    ++out.scored;
  }
  out.mean = out.scored ? total / static_cast<double>(out.scored) : 0.0;
  return out;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synonym table " + path.string());
  SynonymTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("synonym line without a tab: " + line);
    const std::string head = line.substr(0, tab);
    std::stringstream rest(line.substr(tab + 1));
    std::string syn;
    while (std::getline(rest, syn, ',')) {
      if (!syn.empty()) table.add(head, syn);
    }
  }
  return table;
}

void SynonymTable::add(const std::string& a, const std::string& b) {
  table_[a].insert(b);
  table_[b].insert(a);
}

bool SynonymTable::are_synonyms(const std::string& a, const std::string& b) const {
  if (a == b) return true;
  const auto it = table_.find(a);
  return it != table_.end() && it->second.contains(b);
}

std::set<std::string> SynonymTable::synonyms(const std::string& token) const {
  std::set<std::string> out{token};
  if (const auto it = table_.find(token); it != table_.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

std::size_t non_synonymous_deviations(const Tokens& reference, const Tokens& hypothesis, const SynonymTable& table) {
  const std::unordered_set<std::string> hyp(hypothesis.begin(), hypothesis.end());
  std::size_t count = 0;
  for (const auto& t : reference) {
    bool covered = false;
    for (const auto& s : table.synonyms(t)) {
      if (hyp.contains(s)) {
        covered = true;
        break;
      }
    }
    if (!covered) ++count;
  }
  return count;
}

std::size_t non_synonymous_deviations(const std::vector<Tokens>& references, const std::vector<Tokens>& hypotheses,
                                      const SynonymTable& table) {
  if (references.size() != hypotheses.size()) {
    throw AlignmentError(std::to_string(references.size()) + " references vs " + std::to_string(hypotheses.size()) +
                         " hypotheses");
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    total += non_synonymous_deviations(references[i], hypotheses[i], table);
  }
  return total;
}

Tokens remove_deviations(const Tokens& hypothesis, const Tokens& reference, const SynonymTable& table) {
  const std::unordered_set<std::string> ref(reference.begin(), reference.end());
  Tokens out;
  for (const auto& t : hypothesis) {
    bool keep = false;
    for (const auto& s : table.synonyms(t)) {
      if (ref.contains(s)) {
        keep = true;
        break;
      }
    }
    if (keep) out.push_back(t);
  }
  return out;
}

}  // namespace rlab::metrics
