#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rlab::mitigation {

enum class ScoreKind { TranslationEntropy, AnswerEntropy, PredictedBleu, DetectorProbClass1 };

std::string score_kind_name(ScoreKind kind);
ScoreKind parse_score_kind(const std::string& name);

class ScoredInstance {
 public:
  // Throws NumericError for a non-finite score.
  ScoredInstance(std::size_t index, double score, ScoreKind kind);

  std::size_t index() const { return index_; }
  double score() const { return score_; }
  ScoreKind kind() const { return kind_; }

 private:
  std::size_t index_;
  double score_;
  ScoreKind kind_;
};

// Instances i = 0..n-1 carrying scores[i].
std::vector<ScoredInstance> scored_instances(const std::vector<double>& scores, ScoreKind kind);

// Ordered batches of pair indices. Only the last batch may be short.
struct Schedule {
  std::vector<std::vector<std::size_t>> batches;
  std::size_t batch_size = 0;
  std::string rationale;

  std::size_t size() const { return batches.size(); }
  std::vector<std::size_t> flattened() const;
  // Throws SizeError when an index is out of range, repeated, or a batch
  // other than the last has the wrong size.
  void validate(std::size_t universe) const;

  nlohmann::json to_json() const;
  static Schedule from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Schedule load(const std::filesystem::path& path);
};

enum class Direction { Ascending, Descending };

Direction parse_direction(const std::string& name);  // "asc" or "desc"

// Chunks indices into consecutive batches of batch_size.
Schedule chunk_schedule(const std::vector<std::size_t>& order, std::size_t batch_size, std::string rationale);

// Stable sort by score, ties by original position, then chunked. Throws
// EmptyInput for no scores, ConfigError for batch_size 0.
Schedule build_schedule(const std::vector<ScoredInstance>& scores, Direction direction, std::size_t batch_size);

enum class GroupPolicy { Min, Mean };

struct GroupRanking {
  std::vector<double> keys;
  std::vector<std::size_t> order;  // groups ascending by key, ties by position
};

// Throws EmptyInput when there are no groups or a group is empty.
GroupRanking aggregate_group_scores(const std::vector<std::vector<double>>& groups, GroupPolicy policy);

enum class MixMode { HalfHalf, Union };

MixMode parse_mix_mode(const std::string& name);  // "half-half" or "union"

// Schedule over the concatenation [a..., b...]: index i < a_size refers to a,
// index a_size + j to b. HalfHalf puts batch_size/2 seeded draws from each
// corpus in every batch, Union puts batch_size from each. No index repeats.
// num_batches = 0 takes as many full batches as both corpora allow.
// Throws SizeError when the corpora cannot fill the requested batches.
Schedule mix_corpora(std::size_t a_size, std::size_t b_size, MixMode mode, std::size_t batch_size,
                     std::size_t num_batches, std::uint64_t seed);

// Seeded real-only batches drawn without replacement. Index space as in
// proportion_mix, so real indices are 0..real_size-1.
Schedule real_only_schedule(std::size_t real_size, std::size_t batch_size, std::size_t num_batches,
                            std::uint64_t seed);

// Schedule over [real..., synthetic...]: each batch holds round(p * batch_size)
// synthetic draws (index real_size + j) and the remainder real draws. Real and
// synthetic draws come from separate seeded streams; with p = 0 the batches
// equal real_only_schedule under the same seed. Throws SizeError or
// ConfigError for p outside [0, 1].
Schedule proportion_mix(std::size_t synthetic_size, std::size_t real_size, double p, std::size_t batch_size,
                        std::size_t num_batches, std::uint64_t seed);

}  // namespace rlab::mitigation
