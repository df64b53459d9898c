#include "rlab/mitigation/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"

namespace rlab::mitigation {

namespace {

constexpr std::uint64_t kRealStream = 1;
constexpr std::uint64_t kSyntheticStream = 2;

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  auto order = iota_indices(n);
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

}  // namespace

std::string score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::TranslationEntropy: return "translation_entropy";
    case ScoreKind::AnswerEntropy: return "answer_entropy";
    case ScoreKind::PredictedBleu: return "predicted_bleu";
    case ScoreKind::DetectorProbClass1: return "detector_prob_class1";
  }
  return "unknown";
}

ScoreKind parse_score_kind(const std::string& name) {
  for (auto k : {ScoreKind::TranslationEntropy, ScoreKind::AnswerEntropy, ScoreKind::PredictedBleu,
                 ScoreKind::DetectorProbClass1}) {
    if (score_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown score kind '" + name + "'");
}

ScoredInstance::ScoredInstance(std::size_t index, double score, ScoreKind kind)
    : index_(index), score_(score), kind_(kind) {
  if (!std::isfinite(score)) throw NumericError("score for instance " + std::to_string(index) + " is not finite");
}

std::vector<ScoredInstance> scored_instances(const std::vector<double>& scores, ScoreKind kind) {
  std::vector<ScoredInstance> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out.emplace_back(i, scores[i], kind);
  return out;
}

std::vector<std::size_t> Schedule::flattened() const {
  std::vector<std::size_t> out;
  for (const auto& b : batches) out.insert(out.end(), b.begin(), b.end());
  return out;
}

void Schedule::validate(std::size_t universe) const {
  std::vector<bool> seen(universe, false);
  for (std::size_t k = 0; k < batches.size(); ++k) {
    const auto& b = batches[k];
    if (b.empty()) throw SizeError("schedule batch " + std::to_string(k) + " is empty");
    if (k + 1 < batches.size() && batch_size != 0 && b.size() != batch_size) {
      throw SizeError("schedule batch " + std::to_string(k) + " has size " + std::to_string(b.size()) +
                      ", expected " + std::to_string(batch_size));
    }
    for (auto i : b) {
      if (i >= universe) throw SizeError("schedule index " + std::to_string(i) + " is out of range");
      if (seen[i]) throw SizeError("schedule index " + std::to_string(i) + " appears twice");
      seen[i] = true;
    }
  }
}

nlohmann::json Schedule::to_json() const {
  return {{"rationale", rationale}, {"batch_size", batch_size}, {"batches", batches}};
}

Schedule Schedule::from_json(const nlohmann::json& j) {
  Schedule s;
  try {
    s.rationale = j.value("rationale", "");
    s.batches = j.at("batches").get<std::vector<std::vector<std::size_t>>>();
    s.batch_size = j.value("batch_size", s.batches.empty() ? std::size_t{0} : s.batches.front().size());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed schedule: ") + e.what());
  }
  return s;
}

void Schedule::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

Schedule Schedule::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

Direction parse_direction(const std::string& name) {
  if (name == "asc" || name == "ascending") return Direction::Ascending;
  if (name == "desc" || name == "descending") return Direction::Descending;
  throw ConfigError("unknown direction '" + name + "' (expected asc or desc)");
}

Schedule chunk_schedule(const std::vector<std::size_t>& order, std::size_t batch_size, std::string rationale) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  Schedule s;
  s.batch_size = batch_size;
  s.rationale = std::move(rationale);
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    s.batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                           order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return s;
}

Schedule build_schedule(const std::vector<ScoredInstance>& scores, Direction direction, std::size_t batch_size) {
  if (scores.empty()) throw EmptyInput("no scores to rank");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> pos(scores.size());
  std::iota(pos.begin(), pos.end(), 0);
  std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
    return direction == Direction::Ascending ? scores[a].score() < scores[b].score()
                                             : scores[a].score() > scores[b].score();
  });
  std::vector<std::size_t> order;
  order.reserve(pos.size());
  for (auto p : pos) order.push_back(scores[p].index());
  const std::string dir = direction == Direction::Ascending ? "ascending" : "descending";
  return chunk_schedule(order, batch_size, score_kind_name(scores.front().kind()) + " " + dir);
}

GroupRanking aggregate_group_scores(const std::vector<std::vector<double>>& groups, GroupPolicy policy) {
  if (groups.empty()) throw EmptyInput("no groups to rank");
  GroupRanking r;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& s = groups[g];
    if (s.empty()) throw EmptyInput("group " + std::to_string(g) + " is empty");
    if (policy == GroupPolicy::Min) {
      r.keys.push_back(*std::min_element(s.begin(), s.end()));
    } else {
      double sum = 0.0;
      for (double x : s) sum += x;
      r.keys.push_back(sum / static_cast<double>(s.size()));
    }
  }
  r.order = iota_indices(groups.size());
  std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) { return r.keys[a] < r.keys[b]; });
  return r;
}

MixMode parse_mix_mode(const std::string& name) {
  if (name == "half-half" || name == "halfhalf") return MixMode::HalfHalf;
  if (name == "union") return MixMode::Union;
  throw ConfigError("unknown mixture mode '" + name + "' (expected half-half or union)");
}

Schedule mix_corpora(std::size_t a_size, std::size_t b_size, MixMode mode, std::size_t batch_size,
                     std::size_t num_batches, std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::size_t per_side = batch_size;
  if (mode == MixMode::HalfHalf) {
    if (batch_size % 2 != 0) throw SizeError("half-half mixing needs an even batch size");
    per_side = batch_size / 2;
  }
  const std::size_t available = std::min(a_size, b_size) / per_side;
  if (num_batches == 0) num_batches = available;
  if (num_batches == 0 || num_batches > available) {
    throw SizeError("corpora of sizes " + std::to_string(a_size) + " and " + std::to_string(b_size) +
                    " cannot fill " + std::to_string(std::max<std::size_t>(num_batches, 1)) + " batches of " +
                    std::to_string(per_side) + " per side");
  }
  const auto a = permutation(a_size, derive_seed(seed, kRealStream));
  const auto b = permutation(b_size, derive_seed(seed, kSyntheticStream));
  Schedule s;
  s.batch_size = 2 * per_side;
  s.rationale = mode == MixMode::HalfHalf ? "mixture half-half" : "mixture union";
  for (std::size_t k = 0; k < num_batches; ++k) {
    std::vector<std::size_t> batch;
    batch.reserve(2 * per_side);
    for (std::size_t i = 0; i < per_side; ++i) batch.push_back(a[k * per_side + i]);
    for (std::size_t i = 0; i < per_side; ++i) batch.push_back(a_size + b[k * per_side + i]);
    s.batches.push_back(std::move(batch));
  }
  return s;
}

Schedule real_only_schedule(std::size_t real_size, std::size_t batch_size, std::size_t num_batches,
                            std::uint64_t seed) {
  Schedule s = proportion_mix(0, real_size, 0.0, batch_size, num_batches, seed);
  s.rationale = "real";
  return s;
}

Schedule proportion_mix(std::size_t synthetic_size, std::size_t real_size, double p, std::size_t batch_size,
                        std::size_t num_batches, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synthetic proportion must lie in [0, 1]");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  const auto n_syn = static_cast<std::size_t>(std::llround(p * static_cast<double>(batch_size)));
  const std::size_t n_real = batch_size - n_syn;
  if (num_batches == 0) throw ConfigError("number of batches must be positive");
  if (n_syn * num_batches > synthetic_size || n_real * num_batches > real_size) {
    throw SizeError("need " + std::to_string(n_syn * num_batches) + " synthetic and " +
                    std::to_string(n_real * num_batches) + " real instances, have " +
                    std::to_string(synthetic_size) + " and " + std::to_string(real_size));
  }
  const auto real = permutation(real_size, derive_seed(seed, kRealStream));
  const auto syn = permutation(synthetic_size, derive_seed(seed, kSyntheticStream));
  Schedule s;
  s.batch_size = batch_size;
  s.rationale = "proportion " + std::to_string(p);
  for (std::size_t k = 0; k < num_batches; ++k) {
    std::vector<std::size_t> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < n_real; ++i) batch.push_back(real[k * n_real + i]);
    for (std::size_t i = 0; i < n_syn; ++i) batch.push_back(real_size + syn[k * n_syn + i]);
    s.batches.push_back(std::move(batch));
  }
  return s;
}

}  // namespace rlab::mitigation
