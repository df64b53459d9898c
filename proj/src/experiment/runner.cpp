#include "rlab/experiment/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "rlab/common/error.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/corpus/toy_language.hpp"
#include "rlab/mitigation/detector.hpp"
#include "rlab/mitigation/entropy.hpp"
#include "rlab/mitigation/features.hpp"
#include "rlab/mitigation/regressor.hpp"
#include "rlab/mitigation/schedule.hpp"

namespace rlab::experiment {

const char* const kVersion = "regurgelab 0.1.0";

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

enum Stream : std::uint64_t {
  kData = 101,
  kSplit = 102,
  kModelInit = 103,
  kBaselineTrain = 104,
  kArmTrain = 105,
  kSchedule = 106,
  kScoring = 107,
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void say(const Progress& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

corpus::Corpus concat(std::string id, const std::vector<const corpus::Corpus*>& parts) {
  std::vector<corpus::SentencePair> pairs;
  for (const auto* p : parts) pairs.insert(pairs.end(), p->pairs().begin(), p->pairs().end());
  return corpus::Corpus(std::move(id), std::move(pairs));
}

model::TrainOptions train_options(const ExperimentConfig& c, std::size_t n, std::uint64_t seed, std::size_t passes) {
  model::TrainOptions o;
  o.batch_size = c.training.minibatch;
  o.num_steps = model::steps_for_epochs(n, c.training.minibatch, passes);
  o.clip_norm = c.training.clip_norm;
  o.seed = seed;
  return o;
}

ad::AdamConfig adam_config(const ExperimentConfig& c) {
  ad::AdamConfig a;
  a.learning_rate = c.training.learning_rate;
  return a;
}

json point_to_json(const CurvePoint& p) {
  return {{"batch", p.batch}, {"bleu", p.bleu}, {"seconds", p.seconds}, {"report", p.report}};
}

CurvePoint point_from_json(const json& j) {
  CurvePoint p;
  p.batch = j.at("batch").get<std::size_t>();
  p.bleu = j.at("bleu").get<double>();
  p.seconds = j.at("seconds").get<double>();
  if (j.contains("report")) {
    const json& r = j.at("report");
    p.report.bleu = r.at("bleu").get<double>();
    p.report.brevity_penalty = r.at("brevity_penalty").get<double>();
    p.report.hypothesis_length = r.at("hypothesis_length").get<std::size_t>();
    p.report.reference_length = r.at("reference_length").get<std::size_t>();
    p.report.degenerate = r.at("degenerate").get<bool>();
    for (const auto& pn : r.at("precisions")) {
      p.report.precisions.push_back(
          {pn.at("order").get<std::size_t>(), pn.at("matched").get<std::size_t>(), pn.at("total").get<std::size_t>()});
    }
    p.report.config.max_order = r.at("config").at("max_order").get<std::size_t>();
    p.report.config.weights = r.at("config").at("weights").get<std::vector<double>>();
  }
  return p;
}

// Batches of one arm, materialized on demand.
struct ArmPlan {
  std::string rationale;
  std::function<corpus::Corpus(std::size_t)> batch;  // 0-based batch index
};

corpus::Corpus pool_subset(SyntheticPool& pool, const std::vector<std::size_t>& indices, const std::string& id) {
  pool.ensure(indices);
  std::vector<corpus::SentencePair> pairs;
  pairs.reserve(indices.size());
  for (auto i : indices) pairs.push_back(pool.pair(i));
  return corpus::Corpus(id, std::move(pairs));
}

std::vector<double> score_pool(const ExperimentConfig& config, const ExperimentData& data, GeneratorSet& generators,
                               const ArmConfig& arm, SyntheticPool& pool) {
  pool.ensure_all();
  std::vector<double> scores(pool.size());
  const std::uint64_t seed = derive_seed(config.seed, kScoring);
  if (arm.ranking == Ranking::TranslationEntropy) {
    for (std::size_t i = 0; i < pool.size(); ++i) scores[i] = mitigation::translation_entropy(pool.record(i));
    return scores;
  }
  if (data.scoring.empty()) throw ConfigError("arm '" + arm.label + "' needs a non-empty scoring split");
  SyntheticPool& scoring = generators.scoring_pool(arm.generator);
  scoring.ensure_all();
  std::vector<std::size_t> all(scoring.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const corpus::Corpus synthetic = pool_subset(scoring, all, "scoring@" + scoring.model_id());
  if (arm.ranking == Ranking::Detector) {
    mitigation::DetectorOptions opts;
    opts.seed = seed;
    const auto fit = mitigation::train_detector(data.scoring, synthetic, arm.detector, opts, config.features);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto& p = pool.pair(i);
      scores[i] = fit.model.probability(mitigation::featurize_pair(p.source(), p.target(), config.features));
    }
    return scores;
  }
  // predicted BLEU
  const auto features = mitigation::featurize_corpus(synthetic, config.features);
  std::vector<double> labels(synthetic.size());
  for (std::size_t i = 0; i < synthetic.size(); ++i) {
    labels[i] = metrics::sentence_bleu(synthetic[i].target(), {&data.scoring[i].target()}, config.metric).bleu;
  }
  const double lambda = mitigation::select_ridge_lambda(features, labels, config.ridge_grid, seed);
  const auto fit = mitigation::train_bleu_regressor(features, labels, lambda, seed, config.features);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& p = pool.pair(i);
    scores[i] = fit.model.predict(mitigation::featurize_pair(p.source(), p.target(), config.features));
  }
  return scores;
}

ArmPlan plan_arm(const ExperimentConfig& config, const ExperimentData& data, GeneratorSet& generators,
                 const ArmConfig& arm) {
  const std::size_t bs = config.resolved_batch_size();
  const std::size_t nb = config.regurgitative.num_batches;
  const std::uint64_t sched_seed = derive_seed(config.seed, kSchedule);
  const std::string label = arm.label;
  ArmPlan plan;
  switch (arm.kind) {
    case ArmKind::Real: {
      auto s = mitigation::real_only_schedule(data.pool.size(), bs, nb, sched_seed);
      plan.rationale = s.rationale;
      plan.batch = [&data, s, label](std::size_t k) {
        return data.pool.subset(label + "/" + std::to_string(k + 1), s.batches[k]);
      };
      break;
    }
    case ArmKind::SelfGenerated:
    case ArmKind::OtherModel: {
      const std::string gen = arm.kind == ArmKind::SelfGenerated ? config.regurgitative.start : arm.generator;
      SyntheticPool* pool = &generators.pool(gen);
      if (pool->size() < bs * nb) throw SizeError("synthetic pool too small for arm '" + label + "'");
      plan.rationale = "natural order from " + pool->model_id();
      plan.batch = [pool, bs, label](std::size_t k) {
        std::vector<std::size_t> idx(bs);
        for (std::size_t i = 0; i < bs; ++i) idx[i] = k * bs + i;
        return pool_subset(*pool, idx, label + "/" + std::to_string(k + 1));
      };
      break;
    }
    case ArmKind::Mixture: {
      SyntheticPool* a = &generators.pool(arm.generators[0]);
      SyntheticPool* b = &generators.pool(arm.generators[1]);
      auto s = mitigation::mix_corpora(a->size(), b->size(), arm.mix_mode, bs, nb, sched_seed);
      plan.rationale = s.rationale + " of " + a->model_id() + " and " + b->model_id();
      plan.batch = [a, b, s, label](std::size_t k) {
        std::vector<std::size_t> ia, ib;
        for (auto i : s.batches[k]) (i < a->size() ? ia.push_back(i) : ib.push_back(i - a->size()));
        corpus::Corpus ca = pool_subset(*a, ia, "a");
        corpus::Corpus cb = pool_subset(*b, ib, "b");
        return concat(label + "/" + std::to_string(k + 1), {&ca, &cb});
      };
      break;
    }
    case ArmKind::Proportion: {
      SyntheticPool* pool = &generators.pool(arm.generator);
      auto s = mitigation::proportion_mix(pool->size(), data.pool.size(), arm.proportion, bs, nb, sched_seed);
      plan.rationale = s.rationale + " from " + pool->model_id();
      plan.batch = [&data, pool, s, label](std::size_t k) {
        std::vector<std::size_t> ir, is;
        for (auto i : s.batches[k]) (i < data.pool.size() ? ir.push_back(i) : is.push_back(i - data.pool.size()));
        corpus::Corpus cr = data.pool.subset("r", ir);
        corpus::Corpus cs = pool_subset(*pool, is, "s");
        return concat(label + "/" + std::to_string(k + 1), {&cr, &cs});
      };
      break;
    }
    case ArmKind::Scheduled: {
      SyntheticPool* pool = &generators.pool(arm.generator);
      mitigation::Schedule s;
      if (arm.ranking == Ranking::File) {
        s = mitigation::Schedule::load(arm.schedule_path);
        s.validate(pool->size());
        if (s.rationale.empty()) s.rationale = "file " + arm.schedule_path.filename().string();
      } else {
        const auto scores = score_pool(config, data, generators, arm, *pool);
        mitigation::ScoreKind kind = mitigation::ScoreKind::TranslationEntropy;
        auto dir = mitigation::Direction::Ascending;
        if (arm.ranking == Ranking::Detector) {
          kind = mitigation::ScoreKind::DetectorProbClass1;
          dir = mitigation::Direction::Descending;
        } else if (arm.ranking == Ranking::PredictedBleu) {
          kind = mitigation::ScoreKind::PredictedBleu;
          dir = mitigation::Direction::Descending;
        }
        if (arm.direction) dir = *arm.direction;
        s = mitigation::build_schedule(mitigation::scored_instances(scores, kind), dir, bs);
      }
      if (s.size() < nb) {
        throw SizeError("schedule for arm '" + label + "' has " + std::to_string(s.size()) + " batches, need " +
                        std::to_string(nb));
      }
      plan.rationale = s.rationale + " from " + pool->model_id();
      plan.batch = [pool, s, label](std::size_t k) {
        return pool_subset(*pool, s.batches[k], label + "/" + std::to_string(k + 1));
      };
      break;
    }
  }
  return plan;
}

}  // namespace

std::string checksum_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes.data(), bytes.size())));
  return buf;
}

std::string corpus_checksum(const corpus::Corpus& corpus) {
  std::string text;
  for (const auto& p : corpus.pairs()) {
    text += corpus::join(p.source());
    text += '\t';
    text += corpus::join(p.target());
    text += '\n';
  }
  return checksum_hex(text);
}

metrics::BleuReport evaluate_model(const model::TransformerModel& model, const corpus::Corpus& eval,
                                   const metrics::BleuConfig& config) {
  const auto records = model::translate_all(model, eval.sources());
  std::vector<corpus::Tokens> hyps;
  hyps.reserve(records.size());
  for (const auto& r : records) hyps.push_back(r.translation(model.vocab()));
  return metrics::corpus_bleu(hyps, eval.targets(), config);
}

ExperimentData prepare_experiment_data(const ExperimentConfig& config) {
  config.validate();
  ExperimentData d;
  const std::size_t baseline_total = config.baseline.batch_size * config.baseline.num_batches;
  const std::size_t pool_size = config.resolved_batch_size() * config.regurgitative.num_batches;
  const std::size_t eval_n = config.data.eval_path.empty() ? config.data.eval_size : 0;
  corpus::Corpus all;
  if (config.data.source == DataSource::Toy) {
    corpus::ToyLanguage::Options opts;
    opts.lexicon_seed = config.data.lexicon_seed;
    all = corpus::ToyLanguage(opts).generate(config.data.toy_pairs, derive_seed(config.seed, kData));
  } else {
    auto loaded = corpus::load_parallel_corpus(config.data.train_path);
    d.skipped_lines = loaded.skipped;
    all = std::move(loaded.corpus);
  }
  const std::size_t need = baseline_total + pool_size + config.data.scoring_size + eval_n;
  if (need > all.size()) {
    throw ConfigError("the plan needs " + std::to_string(need) + " pairs (baseline " + std::to_string(baseline_total) +
                      ", pool " + std::to_string(pool_size) + ", scoring " + std::to_string(config.data.scoring_size) +
                      ", eval " + std::to_string(eval_n) + ") but the data has " + std::to_string(all.size()));
  }
  auto parts = corpus::split_corpus(all, derive_seed(config.seed, kSplit),
                                    {baseline_total, pool_size, config.data.scoring_size, eval_n});
  for (std::size_t k = 0; k < config.baseline.num_batches; ++k) {
    std::vector<std::size_t> idx(config.baseline.batch_size);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = k * config.baseline.batch_size + i;
    d.baseline_batches.push_back(parts[0].subset(all.id() + "/baseline" + std::to_string(k + 1), idx));
  }
  d.pool = std::move(parts[1]);
  d.scoring = std::move(parts[2]);
  if (config.data.eval_path.empty()) {
    d.eval = std::move(parts[3]);
  } else {
    d.eval = corpus::load_parallel_corpus(config.data.eval_path).corpus;
  }
  std::vector<const corpus::Corpus*> vocab_parts{&parts[0], &d.pool, &d.scoring};
  d.vocab = corpus::build_vocab(concat("vocab", vocab_parts), config.vocab_max_size, config.vocab_min_freq);
  return d;
}

BaselineResult run_baseline_curve(const ExperimentConfig& config, const ExperimentData& data,
                                  const Progress& progress) {
  config.validate();
  BaselineResult result;
  result.low_batch = config.baseline.low_batch;
  result.high_batch = config.baseline.high_batch;
  model::TransformerConfig mc = config.model;
  mc.seed = derive_seed(config.seed, kModelInit);
  model::TransformerModel m(mc, data.vocab);
  ad::AdamState adam(m.params(), adam_config(config));
  const std::uint64_t train_seed = derive_seed(config.seed, kBaselineTrain);
  for (std::size_t k = 1; k <= data.baseline_batches.size(); ++k) {
    const auto t0 = Clock::now();
    if (config.training.reset_optimizer) adam = ad::AdamState(m.params(), adam_config(config));
    const auto& batch = data.baseline_batches[k - 1];
    model::train_batches(m, batch, train_options(config, batch.size(), derive_seed(train_seed, k), config.baseline.passes),
                         adam);
    CurvePoint p;
    p.batch = k;
    p.report = evaluate_model(m, data.eval, config.metric);
    p.bleu = p.report.bleu;
    p.seconds = config.record_wall_clock ? seconds_since(t0) : 0.0;
    result.curve.push_back(p);
    result.checkpoints.push_back(m.serialize());
    say(progress, "baseline batch " + std::to_string(k) + " bleu " + fixed4(p.bleu) + " (" +
                      fixed4(seconds_since(t0)) + " s)");
  }
  return result;
}

SyntheticPool::SyntheticPool(std::shared_ptr<const model::TransformerModel> generator, const corpus::Corpus& sources,
                             std::string model_id)
    : generator_(std::move(generator)),
      sources_(&sources),
      model_id_(std::move(model_id)),
      pairs_(sources.size()),
      records_(sources.size()) {}

void SyntheticPool::ensure(const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> missing;
  for (auto i : indices) {
    if (i >= size()) throw SizeError("synthetic pool index " + std::to_string(i) + " out of range");
    if (!records_[i]) missing.push_back(i);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (missing.empty()) return;
  std::vector<corpus::Tokens> src;
  src.reserve(missing.size());
  for (auto i : missing) src.push_back((*sources_)[i].source());
  auto records = model::translate_all(*generator_, src);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    const std::size_t i = missing[k];
    corpus::Tokens target = records[k].translation(generator_->vocab());
    if (target.empty()) target.push_back(corpus::Vocab::special_tokens()[corpus::Vocab::kUnk]);
    pairs_[i].emplace(src[k], std::move(target), corpus::Provenance::generated(model_id_));
    records_[i] = std::move(records[k]);
  }
}

void SyntheticPool::ensure_all() {
  std::vector<std::size_t> all(size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  ensure(all);
}

const corpus::SentencePair& SyntheticPool::pair(std::size_t i) {
  ensure({i});
  return *pairs_[i];
}

const model::GenerationRecord& SyntheticPool::record(std::size_t i) {
  ensure({i});
  return *records_[i];
}

std::size_t SyntheticPool::generated_count() const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.has_value(); }));
}

GeneratorSet::GeneratorSet(const ExperimentConfig& config, const ExperimentData& data, const BaselineResult& baseline)
    : data_(&data), baseline_(&baseline) {
  (void)config;
}

std::shared_ptr<const model::TransformerModel> GeneratorSet::load(const std::string& name) {
  auto it = models_.find(name);
  if (it != models_.end()) return it->second;
  std::shared_ptr<const model::TransformerModel> m;
  if (name == "low") {
    m = std::make_shared<const model::TransformerModel>(
        model::TransformerModel::from_bytes(baseline_->checkpoint(baseline_->low_batch)));
  } else if (name == "high") {
    m = std::make_shared<const model::TransformerModel>(
        model::TransformerModel::from_bytes(baseline_->checkpoint(baseline_->high_batch)));
  } else {
    m = std::make_shared<const model::TransformerModel>(model::TransformerModel::load(name));
  }
  models_[name] = m;
  return m;
}

SyntheticPool& GeneratorSet::pool(const std::string& name) {
  auto& slot = pools_[name];
  if (!slot) {
    const std::string id = name == "low" || name == "high" ? name : std::filesystem::path(name).stem().string();
    slot = std::make_unique<SyntheticPool>(load(name), data_->pool, id);
  }
  return *slot;
}

SyntheticPool& GeneratorSet::scoring_pool(const std::string& name) {
  auto& slot = scoring_pools_[name];
  if (!slot) {
    const std::string id = name == "low" || name == "high" ? name : std::filesystem::path(name).stem().string();
    slot = std::make_unique<SyntheticPool>(load(name), data_->scoring, id);
  }
  return *slot;
}

const ArmCurve& RunReport::arm(const std::string& label) const {
  for (const auto& a : arms) {
    if (a.label == label) return a;
  }
  throw ConfigError("report has no arm '" + label + "'");
}

json to_json(const RunReport& r) {
  json baseline = json::array();
  for (const auto& p : r.baseline_curve) baseline.push_back(point_to_json(p));
  json arms = json::array();
  for (const auto& a : r.arms) {
    json pts = json::array();
    for (const auto& p : a.points) pts.push_back(point_to_json(p));
    arms.push_back({{"label", a.label}, {"kind", a.kind}, {"rationale", a.rationale}, {"points", pts}});
  }
  return {{"version", r.version},
          {"seed", r.seed},
          {"config", r.config},
          {"resolved_batch_size", r.resolved_batch_size},
          {"checksums", {{"baseline", r.baseline_checksum}, {"eval", r.eval_checksum}}},
          {"baseline_curve", baseline},
          {"arms", arms},
          {"partial", r.partial},
          {"failure", r.failure}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    r.version = j.at("version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = j.at("config");
    r.resolved_batch_size = j.at("resolved_batch_size").get<std::size_t>();
    r.baseline_checksum = j.at("checksums").at("baseline").get<std::string>();
    r.eval_checksum = j.at("checksums").at("eval").get<std::string>();
    for (const auto& p : j.at("baseline_curve")) r.baseline_curve.push_back(point_from_json(p));
    for (const auto& a : j.at("arms")) {
      ArmCurve c;
      c.label = a.at("label").get<std::string>();
      c.kind = a.at("kind").get<std::string>();
      c.rationale = a.value("rationale", "");
      for (const auto& p : a.at("points")) c.points.push_back(point_from_json(p));
      r.arms.push_back(std::move(c));
    }
    r.partial = j.at("partial").get<bool>();
    r.failure = j.value("failure", "");
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed run report: ") + e.what());
  }
  return r;
}

RunReport run_regurgitative_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                       const BaselineResult& baseline, GeneratorSet& generators,
                                       const Progress& progress) {
  config.validate();
  const auto started = Clock::now();
  RunReport report;
  report.config = to_json(config);
  report.seed = config.seed;
  report.version = kVersion;
  report.resolved_batch_size = config.resolved_batch_size();
  report.baseline_curve = baseline.curve;
  const std::string& start_bytes = baseline.checkpoint(config.start_batch());
  report.baseline_checksum = checksum_hex(start_bytes);
  report.eval_checksum = corpus_checksum(data.eval);

  CurvePoint start_point;
  {
    const auto t0 = Clock::now();
    const auto start_model = model::TransformerModel::from_bytes(start_bytes);
    start_point.report = evaluate_model(start_model, data.eval, config.metric);
    start_point.bleu = start_point.report.bleu;
    start_point.seconds = config.record_wall_clock ? seconds_since(t0) : 0.0;
  }
  const std::uint64_t train_seed = derive_seed(config.seed, kArmTrain);

  for (const auto& arm : config.regurgitative.arms) {
    ArmCurve curve;
    curve.label = arm.label;
    curve.kind = arm_kind_name(arm.kind);
    curve.points.push_back(start_point);
    try {
      const ArmPlan plan = plan_arm(config, data, generators, arm);
      curve.rationale = plan.rationale;
      auto m = model::TransformerModel::from_bytes(start_bytes);
      ad::AdamState adam(m.params(), adam_config(config));
      for (std::size_t k = 1; k <= config.regurgitative.num_batches; ++k) {
        if (seconds_since(started) > config.time_limit_seconds) {
          throw Error("TimeLimit", "wall-clock limit of " + fixed4(config.time_limit_seconds) + " s reached");
        }
        const auto t0 = Clock::now();
        const corpus::Corpus batch = plan.batch(k - 1);
        if (config.training.reset_optimizer) adam = ad::AdamState(m.params(), adam_config(config));
        model::train_batches(m, batch,
                             train_options(config, batch.size(), derive_seed(train_seed, k), config.training.passes),
                             adam);
        CurvePoint p;
        p.batch = k;
        p.report = evaluate_model(m, data.eval, config.metric);
        p.bleu = p.report.bleu;
        p.seconds = config.record_wall_clock ? seconds_since(t0) : 0.0;
        curve.points.push_back(p);
        say(progress, arm.label + " batch " + std::to_string(k) + " bleu " + fixed4(p.bleu) + " (" +
                          fixed4(seconds_since(t0)) + " s)");
      }
    } catch (const std::exception& e) {
      report.partial = true;
      report.failure = arm.label + ": " + e.what();
      report.arms.push_back(std::move(curve));
      say(progress, "aborting: " + report.failure);
      return report;
    }
    report.arms.push_back(std::move(curve));
  }
  return report;
}

RunReport run_experiment(const ExperimentConfig& config, const Progress& progress) {
  const ExperimentData data = prepare_experiment_data(config);
  say(progress, "data: " + std::to_string(data.baseline_batches.size()) + " baseline batches, pool " +
                    std::to_string(data.pool.size()) + ", scoring " + std::to_string(data.scoring.size()) +
                    ", eval " + std::to_string(data.eval.size()) + ", vocab " + std::to_string(data.vocab.size()));
  const BaselineResult baseline = run_baseline_curve(config, data, progress);
  GeneratorSet generators(config, data, baseline);
  return run_regurgitative_experiment(config, data, baseline, generators, progress);
}

}  // namespace rlab::experiment
