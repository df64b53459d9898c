#include "rlab/experiment/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rlab/common/error.hpp"

namespace rlab::experiment {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

bool is_named_generator(const std::string& g) { return g == "low" || g == "high"; }

void check_generator(const std::string& g, const std::string& arm) {
  if (g.empty()) throw ConfigError("arm '" + arm + "' needs a generator");
  if (!is_named_generator(g) && !std::filesystem::exists(g)) {
    throw ConfigError("arm '" + arm + "': generator checkpoint '" + g + "' does not exist");
  }
}

ArmConfig parse_arm(const json& j, const std::filesystem::path& base) {
  check_keys(j, {"label", "kind", "generator", "generators", "mode", "p", "ranking", "direction", "schedule", "detector"},
             "arm");
  ArmConfig a;
  a.kind = parse_arm_kind(get_or<std::string>(j, "kind", "real", "arm"));
  a.label = get_or<std::string>(j, "label", arm_kind_name(a.kind), "arm");
  auto generator = get_or<std::string>(j, "generator", "", "arm");
  if (!generator.empty() && !is_named_generator(generator)) generator = resolve(base, generator).string();
  a.generator = generator;
  for (const auto& g : get_or<std::vector<std::string>>(j, "generators", {}, "arm")) {
    a.generators.push_back(is_named_generator(g) ? g : resolve(base, g).string());
  }
  a.mix_mode = mitigation::parse_mix_mode(get_or<std::string>(j, "mode", "half-half", "arm"));
  a.proportion = get_or<double>(j, "p", 1.0, "arm");
  a.ranking = parse_ranking(get_or<std::string>(j, "ranking", "translation_entropy", "arm"));
  if (j.contains("direction")) a.direction = mitigation::parse_direction(get_or<std::string>(j, "direction", "", "arm"));
  a.schedule_path = resolve(base, get_or<std::string>(j, "schedule", "", "arm"));
  a.detector = mitigation::parse_detector_kind(get_or<std::string>(j, "detector", "logistic", "arm"));
  return a;
}

json arm_to_json(const ArmConfig& a) {
  json j = {{"label", a.label}, {"kind", arm_kind_name(a.kind)}};
  switch (a.kind) {
    case ArmKind::Real:
      break;
    case ArmKind::SelfGenerated:
      if (!a.generator.empty()) j["generator"] = a.generator;
      break;
    case ArmKind::OtherModel:
      j["generator"] = a.generator;
      break;
    case ArmKind::Mixture:
      j["generators"] = a.generators;
      j["mode"] = a.mix_mode == mitigation::MixMode::HalfHalf ? "half-half" : "union";
      break;
    case ArmKind::Proportion:
      j["generator"] = a.generator;
      j["p"] = a.proportion;
      break;
    case ArmKind::Scheduled:
      j["generator"] = a.generator;
      j["ranking"] = ranking_name(a.ranking);
      if (a.direction) j["direction"] = *a.direction == mitigation::Direction::Ascending ? "asc" : "desc";
      if (a.ranking == Ranking::File) j["schedule"] = a.schedule_path.string();
      if (a.ranking == Ranking::Detector) j["detector"] = mitigation::detector_kind_name(a.detector);
      break;
  }
  return j;
}

}  // namespace

std::string arm_kind_name(ArmKind kind) {
  switch (kind) {
    case ArmKind::Real: return "real";
    case ArmKind::SelfGenerated: return "self";
    case ArmKind::OtherModel: return "other";
    case ArmKind::Mixture: return "mixture";
    case ArmKind::Proportion: return "proportion";
    case ArmKind::Scheduled: return "scheduled";
  }
  return "unknown";
}

ArmKind parse_arm_kind(const std::string& name) {
  for (auto k : {ArmKind::Real, ArmKind::SelfGenerated, ArmKind::OtherModel, ArmKind::Mixture, ArmKind::Proportion,
                 ArmKind::Scheduled}) {
    if (arm_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown arm kind '" + name + "'");
}

std::string ranking_name(Ranking r) {
  switch (r) {
    case Ranking::TranslationEntropy: return "translation_entropy";
    case Ranking::Detector: return "detector";
    case Ranking::PredictedBleu: return "predicted_bleu";
    case Ranking::File: return "file";
  }
  return "unknown";
}

Ranking parse_ranking(const std::string& name) {
  for (auto r : {Ranking::TranslationEntropy, Ranking::Detector, Ranking::PredictedBleu, Ranking::File}) {
    if (ranking_name(r) == name) return r;
  }
  throw ConfigError("unknown ranking '" + name + "'");
}

std::size_t ExperimentConfig::start_batch() const {
  return regurgitative.start == "high" ? baseline.high_batch : baseline.low_batch;
}

std::size_t ExperimentConfig::start_training_size() const { return start_batch() * baseline.batch_size; }

std::size_t ExperimentConfig::resolved_batch_size() const {
  if (!regurgitative.batch_fraction) return regurgitative.batch_size;
  return static_cast<std::size_t>(
      std::ceil(*regurgitative.batch_fraction * static_cast<double>(start_training_size())));
}

void ExperimentConfig::validate() const {
  model.validate();
  metric.validate();
  features.validate();
  if (data.source == DataSource::Tsv) {
    if (data.train_path.empty()) throw ConfigError("data.train is required for TSV data");
    if (!std::filesystem::exists(data.train_path)) {
      throw ConfigError("data.train '" + data.train_path.string() + "' does not exist");
    }
    if (!data.eval_path.empty() && !std::filesystem::exists(data.eval_path)) {
      throw ConfigError("data.eval '" + data.eval_path.string() + "' does not exist");
    }
  }
  if (data.eval_path.empty() && data.eval_size == 0) throw ConfigError("data.eval_size must be positive");
  if (vocab_max_size < 5) throw ConfigError("vocab.max_size must be at least 5");
  if (training.minibatch == 0 || training.passes == 0) throw ConfigError("training minibatch and passes must be positive");
  if (!(training.learning_rate > 0.0)) throw ConfigError("training.learning_rate must be positive");
  if (baseline.batch_size == 0 || baseline.num_batches == 0 || baseline.passes == 0) {
    throw ConfigError("baseline plan must be non-empty");
  }
  for (auto b : {baseline.low_batch, baseline.high_batch}) {
    if (b < 1 || b > baseline.num_batches) throw ConfigError("baseline low/high batch must lie in 1..num_batches");
  }
  if (regurgitative.start != "low" && regurgitative.start != "high") {
    throw ConfigError("regurgitative.start must be low or high");
  }
  if (regurgitative.batch_fraction && !(*regurgitative.batch_fraction > 0.0)) {
    throw ConfigError("regurgitative.batch_fraction must be positive");
  }
  if (regurgitative.num_batches == 0 || resolved_batch_size() == 0) {
    throw ConfigError("regurgitative plan must be non-empty");
  }
  if (!(time_limit_seconds > 0.0)) throw ConfigError("time_limit_seconds must be positive");
  std::set<std::string> labels;
  bool needs_scoring = false;
  for (const auto& a : regurgitative.arms) {
    if (a.label.empty() || a.label.find_first_of(",\n\"") != std::string::npos) {
      throw ConfigError("arm label '" + a.label + "' is empty or contains a comma, quote or newline");
    }
    if (!labels.insert(a.label).second) throw ConfigError("duplicate arm label '" + a.label + "'");
    switch (a.kind) {
      case ArmKind::Real:
        break;
      case ArmKind::SelfGenerated:
        break;
      case ArmKind::OtherModel:
      case ArmKind::Proportion:
        check_generator(a.generator, a.label);
        if (a.kind == ArmKind::Proportion && !(a.proportion >= 0.0 && a.proportion <= 1.0)) {
          throw ConfigError("arm '" + a.label + "': p must lie in [0, 1]");
        }
        break;
      case ArmKind::Mixture:
        if (a.generators.size() != 2) throw ConfigError("arm '" + a.label + "': a mixture needs two generators");
        for (const auto& g : a.generators) check_generator(g, a.label);
        if (a.mix_mode == mitigation::MixMode::HalfHalf && resolved_batch_size() % 2 != 0) {
          throw ConfigError("arm '" + a.label + "': half-half mixing needs an even batch size");
        }
        break;
      case ArmKind::Scheduled:
        check_generator(a.generator, a.label);
        if (a.ranking == Ranking::File && !std::filesystem::exists(a.schedule_path)) {
          throw ConfigError("arm '" + a.label + "': schedule file '" + a.schedule_path.string() + "' does not exist");
        }
        if (a.ranking == Ranking::Detector || a.ranking == Ranking::PredictedBleu) needs_scoring = true;
        break;
    }
  }
  if (regurgitative.arms.empty()) throw ConfigError("regurgitative.arms must list at least one arm");
  if (needs_scoring && data.scoring_size < 10) throw ConfigError("data.scoring_size must be at least 10");
  for (double l : ridge_grid) {
    if (!(l >= 0.0)) throw ConfigError("ridge_grid values must be nonnegative");
  }
  if (ridge_grid.empty()) throw ConfigError("ridge_grid must not be empty");
}

ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"seed", "data", "vocab", "model", "training", "baseline", "regurgitative", "metric", "features",
                 "ridge_grid", "time_limit_seconds", "record_wall_clock"},
             "config");
  ExperimentConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");

  const json data = j.value("data", json::object());
  check_keys(data, {"source", "pairs", "lexicon_seed", "train", "eval", "eval_size", "scoring_size"}, "data");
  const auto source = get_or<std::string>(data, "source", "toy", "data");
  if (source == "toy") {
    c.data.source = DataSource::Toy;
  } else if (source == "tsv") {
    c.data.source = DataSource::Tsv;
  } else {
    throw ConfigError("data.source must be toy or tsv");
  }
  c.data.toy_pairs = get_or(data, "pairs", c.data.toy_pairs, "data");
  c.data.lexicon_seed = get_or(data, "lexicon_seed", c.data.lexicon_seed, "data");
  c.data.train_path = resolve(base_dir, get_or<std::string>(data, "train", "", "data"));
  c.data.eval_path = resolve(base_dir, get_or<std::string>(data, "eval", "", "data"));
  c.data.eval_size = get_or(data, "eval_size", c.data.eval_size, "data");
  c.data.scoring_size = get_or(data, "scoring_size", c.data.scoring_size, "data");

  const json vocab = j.value("vocab", json::object());
  check_keys(vocab, {"max_size", "min_freq"}, "vocab");
  c.vocab_max_size = get_or(vocab, "max_size", c.vocab_max_size, "vocab");
  c.vocab_min_freq = get_or(vocab, "min_freq", c.vocab_min_freq, "vocab");

  const json model = j.value("model", json::object());
  check_keys(model, {"num_layers", "num_heads", "d_model", "d_ff", "max_sequence_length", "dropout_rate"}, "model");
  try {
    c.model = model.get<model::TransformerConfig>();
  } catch (const json::exception&) {
    throw ConfigError("model has a field of the wrong type");
  }

  const json tr = j.value("training", json::object());
  check_keys(tr, {"minibatch", "learning_rate", "passes", "clip_norm", "reset_optimizer"}, "training");
  c.training.minibatch = get_or(tr, "minibatch", c.training.minibatch, "training");
  c.training.learning_rate = get_or(tr, "learning_rate", c.training.learning_rate, "training");
  c.training.passes = get_or(tr, "passes", c.training.passes, "training");
  c.training.clip_norm = get_or(tr, "clip_norm", c.training.clip_norm, "training");
  c.training.reset_optimizer = get_or(tr, "reset_optimizer", c.training.reset_optimizer, "training");

  const json bl = j.value("baseline", json::object());
  check_keys(bl, {"batch_size", "num_batches", "passes", "low_batch", "high_batch"}, "baseline");
  c.baseline.batch_size = get_or(bl, "batch_size", c.baseline.batch_size, "baseline");
  c.baseline.num_batches = get_or(bl, "num_batches", c.baseline.num_batches, "baseline");
  c.baseline.passes = get_or(bl, "passes", c.baseline.passes, "baseline");
  c.baseline.low_batch = get_or(bl, "low_batch", c.baseline.low_batch, "baseline");
  c.baseline.high_batch = get_or(bl, "high_batch", c.baseline.num_batches, "baseline");

  const json rg = j.value("regurgitative", json::object());
  check_keys(rg, {"start", "batch_size", "batch_fraction", "num_batches", "arms"}, "regurgitative");
  c.regurgitative.start = get_or<std::string>(rg, "start", c.regurgitative.start, "regurgitative");
  c.regurgitative.batch_size = get_or(rg, "batch_size", c.regurgitative.batch_size, "regurgitative");
  if (rg.contains("batch_fraction")) {
    c.regurgitative.batch_fraction = get_or<double>(rg, "batch_fraction", 0.0, "regurgitative");
  }
  c.regurgitative.num_batches = get_or(rg, "num_batches", c.regurgitative.num_batches, "regurgitative");
  if (rg.contains("arms")) {
    if (!rg.at("arms").is_array()) throw ConfigError("regurgitative.arms must be an array");
    for (const auto& a : rg.at("arms")) c.regurgitative.arms.push_back(parse_arm(a, base_dir));
  }

  const json metric = j.value("metric", json::object());
  check_keys(metric, {"max_order", "weights"}, "metric");
  c.metric.max_order = get_or(metric, "max_order", c.metric.max_order, "metric");
  c.metric.weights = get_or(metric, "weights", c.metric.weights, "metric");

  if (j.contains("features")) {
    check_keys(j.at("features"),
               {"segment_buckets", "cross_buckets", "word_order", "char_order", "cross_window", "salt"}, "features");
    try {
      c.features = j.at("features").get<mitigation::FeaturizerConfig>();
    } catch (const json::exception&) {
      throw ConfigError("features has a field of the wrong type");
    }
  }
  c.ridge_grid = get_or(j, "ridge_grid", c.ridge_grid, "config");
  c.time_limit_seconds = get_or(j, "time_limit_seconds", c.time_limit_seconds, "config");
  c.record_wall_clock = get_or(j, "record_wall_clock", c.record_wall_clock, "config");
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json data = {{"source", c.data.source == DataSource::Toy ? "toy" : "tsv"},
               {"eval_size", c.data.eval_size},
               {"scoring_size", c.data.scoring_size}};
  if (c.data.source == DataSource::Toy) {
    data["pairs"] = c.data.toy_pairs;
    data["lexicon_seed"] = c.data.lexicon_seed;
  } else {
    data["train"] = c.data.train_path.string();
  }
  if (!c.data.eval_path.empty()) data["eval"] = c.data.eval_path.string();
  json model = c.model;
  model.erase("seed");
  json arms = json::array();
  for (const auto& a : c.regurgitative.arms) arms.push_back(arm_to_json(a));
  json rg = {{"start", c.regurgitative.start},
             {"batch_size", c.regurgitative.batch_size},
             {"num_batches", c.regurgitative.num_batches},
             {"arms", arms}};
  if (c.regurgitative.batch_fraction) rg["batch_fraction"] = *c.regurgitative.batch_fraction;
  json metric = {{"max_order", c.metric.max_order}};
  if (!c.metric.weights.empty()) metric["weights"] = c.metric.weights;
  return {{"seed", c.seed},
          {"data", data},
          {"vocab", {{"max_size", c.vocab_max_size}, {"min_freq", c.vocab_min_freq}}},
          {"model", model},
          {"training",
           {{"minibatch", c.training.minibatch},
            {"learning_rate", c.training.learning_rate},
            {"passes", c.training.passes},
            {"clip_norm", c.training.clip_norm},
            {"reset_optimizer", c.training.reset_optimizer}}},
          {"baseline",
           {{"batch_size", c.baseline.batch_size},
            {"num_batches", c.baseline.num_batches},
            {"passes", c.baseline.passes},
            {"low_batch", c.baseline.low_batch},
            {"high_batch", c.baseline.high_batch}}},
          {"regurgitative", rg},
          {"metric", metric},
          {"features", c.features},
          {"ridge_grid", c.ridge_grid},
          {"time_limit_seconds", c.time_limit_seconds},
          {"record_wall_clock", c.record_wall_clock}};
}

}  // namespace rlab::experiment
