#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rlab::corpus {

using Tokens = std::vector<std::string>;

// Where a target sentence came from: a human translation or a named model.
class Provenance {
 public:
  static Provenance real() { return Provenance{""}; }
  static Provenance generated(std::string model_id) { return Provenance{std::move(model_id)}; }

  bool is_real() const { return model_id_.empty(); }
  // Empty for real data.
  const std::string& model_id() const { return model_id_; }
  std::string label() const { return is_real() ? "real" : "generated:" + model_id_; }

  bool operator==(const Provenance&) const = default;

 private:
  explicit Provenance(std::string id) : model_id_(std::move(id)) {}
  std::string model_id_;
};

class SentencePair {
 public:
  // Throws FormatError if either side is empty.
  SentencePair(Tokens source, Tokens target, Provenance provenance = Provenance::real());

  const Tokens& source() const { return source_; }
  const Tokens& target() const { return target_; }
  const Provenance& provenance() const { return provenance_; }

  bool operator==(const SentencePair&) const = default;

 private:
  Tokens source_;
  Tokens target_;
  Provenance provenance_;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string id, std::vector<SentencePair> pairs)
      : id_(std::move(id)), pairs_(std::move(pairs)) {}

  const std::string& id() const { return id_; }
  const std::vector<SentencePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const SentencePair& operator[](std::size_t i) const { return pairs_[i]; }

  std::vector<Tokens> sources() const;
  std::vector<Tokens> targets() const;

  // New corpus holding pairs at the given indices, in that order.
  Corpus subset(std::string id, const std::vector<std::size_t>& indices) const;

 private:
  std::string id_;
  std::vector<SentencePair> pairs_;
};

struct LoadResult {
  Corpus corpus;
  std::size_t skipped = 0;
};

enum class CorpusFormat { Tsv };

// One pair per "source<TAB>target" line. Blank lines are ignored; lines with a
// tab count other than one, invalid UTF-8, or an empty side are skipped and
// counted. Throws IoError when unreadable and EmptyCorpus with zero valid lines.
LoadResult load_parallel_corpus(const std::filesystem::path& path,
                                CorpusFormat format = CorpusFormat::Tsv);

// Writes tokens joined by single spaces. Throws IoError.
void save_parallel_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Splits punctuation into standalone tokens, then splits on whitespace.
Tokens tokenize(std::string_view text);
std::string join(const Tokens& tokens, std::string_view sep = " ");

bool is_valid_utf8(std::string_view text);

// Disjoint partitions with the requested sizes, drawn from one seeded
// permutation. Throws SizeError if the sizes exceed the corpus.
std::vector<Corpus> split_corpus(const Corpus& corpus, std::uint64_t seed,
                                 const std::vector<std::size_t>& sizes);

}  // namespace rlab::corpus
