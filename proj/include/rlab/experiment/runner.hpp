#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlab/corpus/corpus.hpp"
#include "rlab/corpus/vocab.hpp"
#include "rlab/experiment/config.hpp"
#include "rlab/metrics/bleu.hpp"
#include "rlab/model/generation.hpp"
#include "rlab/model/transformer.hpp"

namespace rlab::experiment {

using Progress = std::function<void(const std::string&)>;

// Disjoint real partitions of one experiment.
struct ExperimentData {
  std::vector<corpus::Corpus> baseline_batches;
  corpus::Corpus pool;     // real pairs for regurgitative batches; synthetic pools translate its sources
  corpus::Corpus scoring;  // labeled pairs for detector and regressor fitting
  corpus::Corpus eval;
  corpus::Vocab vocab;
  std::size_t skipped_lines = 0;
};

// Throws ConfigError when the data cannot cover the plan.
ExperimentData prepare_experiment_data(const ExperimentConfig& config);

struct CurvePoint {
  std::size_t batch = 0;
  double bleu = 0.0;
  double seconds = 0.0;
  metrics::BleuReport report;
};

struct BaselineResult {
  std::vector<std::string> checkpoints;  // serialized model after batch k + 1
  std::vector<CurvePoint> curve;         // batches 1..K
  std::size_t low_batch = 1;
  std::size_t high_batch = 1;

  const std::string& checkpoint(std::size_t batch) const { return checkpoints.at(batch - 1); }
};

// Trains from scratch, adding one real batch at a time and evaluating after
// each. Deterministic given the config.
BaselineResult run_baseline_curve(const ExperimentConfig& config, const ExperimentData& data,
                                  const Progress& progress = {});

// Translations of the pool sources by one frozen generator, produced on
// demand and cached by index.
class SyntheticPool {
 public:
  SyntheticPool(std::shared_ptr<const model::TransformerModel> generator, const corpus::Corpus& sources,
                std::string model_id);

  std::size_t size() const { return sources_->size(); }
  const std::string& model_id() const { return model_id_; }
  const model::TransformerModel& generator() const { return *generator_; }

  void ensure(const std::vector<std::size_t>& indices);
  void ensure_all();
  const corpus::SentencePair& pair(std::size_t i);
  const model::GenerationRecord& record(std::size_t i);
  std::size_t generated_count() const;

 private:
  std::shared_ptr<const model::TransformerModel> generator_;
  const corpus::Corpus* sources_;
  std::string model_id_;
  std::vector<std::optional<corpus::SentencePair>> pairs_;
  std::vector<std::optional<model::GenerationRecord>> records_;
};

// Frozen generators keyed by name ("low", "high", or a checkpoint path).
class GeneratorSet {
 public:
  GeneratorSet(const ExperimentConfig& config, const ExperimentData& data, const BaselineResult& baseline);

  SyntheticPool& pool(const std::string& name);
  // Translations of the scoring sources, used to fit detectors and regressors.
  SyntheticPool& scoring_pool(const std::string& name);

 private:
  std::shared_ptr<const model::TransformerModel> load(const std::string& name);

  const ExperimentData* data_;
  const BaselineResult* baseline_;
  std::map<std::string, std::shared_ptr<const model::TransformerModel>> models_;
  std::map<std::string, std::unique_ptr<SyntheticPool>> pools_;
  std::map<std::string, std::unique_ptr<SyntheticPool>> scoring_pools_;
};

struct ArmCurve {
  std::string label;
  std::string kind;
  std::vector<CurvePoint> points;  // batch 0 is the start checkpoint
  std::string rationale;
};

struct RunReport {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version;
  std::size_t resolved_batch_size = 0;
  std::string baseline_checksum;
  std::string eval_checksum;
  std::vector<CurvePoint> baseline_curve;
  std::vector<ArmCurve> arms;
  bool partial = false;
  std::string failure;

  const ArmCurve& arm(const std::string& label) const;
};

nlohmann::json to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

// Continues every configured arm from the same start checkpoint and evaluates
// after each batch on the fixed eval corpus. An arm failure or the wall-clock
// limit stops the run and returns a report flagged partial.
RunReport run_regurgitative_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                       const BaselineResult& baseline, GeneratorSet& generators,
                                       const Progress& progress = {});

// Data preparation, baseline curve and all arms.
RunReport run_experiment(const ExperimentConfig& config, const Progress& progress = {});

// Corpus BLEU of the model's greedy translations of the eval sources.
metrics::BleuReport evaluate_model(const model::TransformerModel& model, const corpus::Corpus& eval,
                                   const metrics::BleuConfig& config);

std::string checksum_hex(const std::string& bytes);
std::string corpus_checksum(const corpus::Corpus& corpus);

extern const char* const kVersion;

}  // namespace rlab::experiment
