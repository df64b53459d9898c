#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/autodiff/adam.hpp"
#include "rlab/metrics/bleu.hpp"
#include "rlab/mitigation/detector.hpp"
#include "rlab/mitigation/features.hpp"
#include "rlab/mitigation/schedule.hpp"
#include "rlab/model/transformer.hpp"

namespace rlab::experiment {

enum class DataSource { Toy, Tsv };

struct DataConfig {
  DataSource source = DataSource::Toy;
  std::size_t toy_pairs = 20000;
  std::uint64_t lexicon_seed = 20240521;
  std::filesystem::path train_path;  // TSV: baseline, pool and scoring pairs
  std::filesystem::path eval_path;   // TSV: optional fixed eval corpus
  std::size_t eval_size = 200;       // drawn from the data when eval_path is empty
  std::size_t scoring_size = 1000;   // labeled pairs for detectors and regressors
};

struct TrainingConfig {
  std::size_t minibatch = 32;
  double learning_rate = 2e-3;
  std::size_t passes = 1;  // epochs over each newly added batch
  double clip_norm = 1.0;
  bool reset_optimizer = false;  // fresh Adam moments at every batch
};

struct BaselineConfig {
  std::size_t batch_size = 2000;
  std::size_t num_batches = 1;
  std::size_t passes = 3;
  std::size_t low_batch = 1;   // 1-based checkpoint indices
  std::size_t high_batch = 1;
};

enum class ArmKind { Real, SelfGenerated, OtherModel, Mixture, Proportion, Scheduled };

std::string arm_kind_name(ArmKind kind);
ArmKind parse_arm_kind(const std::string& name);

enum class Ranking { TranslationEntropy, Detector, PredictedBleu, File };

std::string ranking_name(Ranking r);
Ranking parse_ranking(const std::string& name);

// Generators are "low", "high", or a checkpoint path.
struct ArmConfig {
  std::string label;
  ArmKind kind = ArmKind::Real;
  std::string generator;                  // other, proportion, scheduled
  std::vector<std::string> generators;    // mixture: exactly two
  mitigation::MixMode mix_mode = mitigation::MixMode::HalfHalf;
  double proportion = 1.0;
  Ranking ranking = Ranking::TranslationEntropy;
  std::optional<mitigation::Direction> direction;  // default per ranking
  std::filesystem::path schedule_path;
  mitigation::DetectorKind detector = mitigation::DetectorKind::LogisticRegression;
};

struct RegurgitativeConfig {
  std::string start = "low";
  std::size_t batch_size = 1000;
  std::optional<double> batch_fraction;  // overrides batch_size: ceil(f * baseline size)
  std::size_t num_batches = 10;
  std::vector<ArmConfig> arms;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  DataConfig data;
  std::size_t vocab_max_size = 1000;
  std::size_t vocab_min_freq = 1;
  model::TransformerConfig model;
  TrainingConfig training;
  BaselineConfig baseline;
  RegurgitativeConfig regurgitative;
  metrics::BleuConfig metric;
  mitigation::FeaturizerConfig features;
  std::vector<double> ridge_grid{0.1, 1.0, 10.0, 100.0};
  double time_limit_seconds = 1800.0;
  bool record_wall_clock = false;  // seconds column is 0 unless set, keeping reports byte-stable

  // Number of real pairs the start checkpoint was trained on.
  std::size_t start_training_size() const;
  // Regurgitative batch size after applying batch_fraction.
  std::size_t resolved_batch_size() const;
  std::size_t start_batch() const;

  // Structural checks plus existence of referenced files. Throws ConfigError.
  void validate() const;
};

// Unknown keys are rejected. Relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace rlab::experiment
