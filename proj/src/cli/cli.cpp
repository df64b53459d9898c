#include "rlab/cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rlab/common/error.hpp"
#include "rlab/corpus/corpus.hpp"
#include "rlab/corpus/preprocess.hpp"
#include "rlab/corpus/toy_language.hpp"
#include "rlab/corpus/vocab.hpp"
#include "rlab/experiment/report.hpp"
#include "rlab/experiment/runner.hpp"
#include "rlab/metrics/bleu.hpp"
#include "rlab/metrics/diversity.hpp"
#include "rlab/metrics/similarity.hpp"
#include "rlab/mitigation/detector.hpp"
#include "rlab/mitigation/entropy.hpp"
#include "rlab/mitigation/regressor.hpp"
#include "rlab/mitigation/schedule.hpp"
#include "rlab/model/generation.hpp"
#include "rlab/model/transformer.hpp"

namespace rlab::cli {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

corpus::Corpus load_tsv(const std::string& path, std::ostream& err) {
  auto r = corpus::load_parallel_corpus(path);
  if (r.skipped) err << path << ": skipped " << r.skipped << " malformed line(s)\n";
  return std::move(r.corpus);
}

std::vector<double> load_scores(const std::string& path) {
  const json j = read_json(path);
  try {
    if (j.is_array()) return j.get<std::vector<double>>();
    return j.at("scores").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(path + ": expected an array of numbers or {\"scores\": [...]}");
  }
}

mitigation::ScoreKind scores_kind(const std::string& path) {
  const json j = read_json(path);
  if (j.is_object() && j.contains("kind")) return mitigation::parse_score_kind(j.at("kind").get<std::string>());
  return mitigation::ScoreKind::TranslationEntropy;
}

struct Options {
  std::uint64_t seed = kDefaultSeed;

  // toy-corpus
  std::size_t pairs = 1000;
  std::uint64_t lexicon_seed = corpus::ToyLanguage::Options{}.lexicon_seed;

  // shared paths
  std::string train, eval, out, model, input, records, hyp, ref, config, in, real, synthetic, load_model,
      save_model, scores, stopwords, synonyms, json_out, model_id;

  // train-baseline
  std::size_t passes = 3, minibatch = 32, layers = 2, heads = 4, d_model = 64, d_ff = 128, max_len = 32,
              vocab_size = 1000, min_freq = 1;
  double lr = 2e-3, dropout = 0.0;

  // generate
  bool probabilities = false;

  // evaluate
  std::size_t order = 4;
  bool preprocess = false;

  // score
  std::string kind = "entropy";
  std::string detector = "logistic";
  double lambda = -1.0;

  // schedule
  std::string direction = "asc";
  std::size_t batch = 1;
  std::string mix;
  double proportion = -1.0;
  std::size_t a_size = 0, b_size = 0, batches = 0;

  // run / report
  std::string formats = "csv,json,svg";
  bool quiet = false;
};

std::set<experiment::ReportFormat> parse_formats(const std::string& list) {
  std::set<experiment::ReportFormat> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(experiment::parse_report_format(item));
  }
  if (out.empty()) throw ConfigError("no report formats requested");
  return out;
}

int cmd_toy_corpus(const Options& o, std::ostream& out) {
  corpus::ToyLanguage::Options lo;
  lo.lexicon_seed = o.lexicon_seed;
  const corpus::ToyLanguage lang(lo);
  const auto c = lang.generate(o.pairs, o.seed);
  corpus::save_parallel_corpus(c, o.out);
  out << "wrote " << c.size() << " pairs to " << o.out << "\n";
  return 0;
}

int cmd_train_baseline(const Options& o, std::ostream& out, std::ostream& err) {
  const auto train = load_tsv(o.train, err);
  model::TransformerConfig cfg;
  cfg.num_layers = o.layers;
  cfg.num_heads = o.heads;
  cfg.d_model = o.d_model;
  cfg.d_ff = o.d_ff;
  cfg.max_sequence_length = o.max_len;
  cfg.dropout_rate = o.dropout;
  cfg.seed = o.seed;
  auto m = model::build_transformer(cfg, corpus::build_vocab(train, o.vocab_size, o.min_freq));
  ad::AdamConfig ac;
  ac.learning_rate = o.lr;
  ad::AdamState adam(m.params(), ac);
  model::TrainOptions to;
  to.batch_size = o.minibatch;
  to.num_steps = model::steps_for_epochs(train.size(), o.minibatch, o.passes);
  to.seed = o.seed;
  const auto trace = model::train_batches(m, train, to, adam);
  m.save(o.out);
  out << "steps " << trace.size() << "\n";
  if (!trace.empty()) out << "loss " << fmt(trace.front()) << " -> " << fmt(trace.back()) << "\n";
  if (!o.eval.empty()) {
    const auto eval = load_tsv(o.eval, err);
    out << "eval BLEU " << fmt(experiment::evaluate_model(m, eval, {}).bleu) << "\n";
  }
  out << "saved " << o.out << "\n";
  return 0;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto m = model::TransformerModel::load(o.model);
  const auto input = load_tsv(o.input, err);
  const std::string id = o.model_id.empty() ? std::filesystem::path(o.model).stem().string() : o.model_id;
  const auto syn = model::generate_synthetic_corpus(m, input, id);
  corpus::save_parallel_corpus(syn.corpus, o.out);
  if (!o.records.empty()) model::write_generation_records(o.records, syn.records, m.vocab(), o.probabilities);
  out << "generated " << syn.corpus.size() << " translations with " << id << " into " << o.out << "\n";
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto hyp_c = load_tsv(o.hyp, err);
  const auto ref_c = load_tsv(o.ref, err);
  auto hyps = hyp_c.targets();
  auto refs = ref_c.targets();
  const auto bleu = metrics::corpus_bleu(hyps, refs, metrics::BleuConfig::uniform(o.order));
  json report = {{"bleu", bleu}};
  out << "BLEU " << fmt(bleu.bleu) << (bleu.degenerate ? " (degenerate)" : "") << "\n";
  out << "brevity penalty " << fmt(bleu.brevity_penalty) << ", c " << bleu.hypothesis_length << ", r "
      << bleu.reference_length << "\n";
  for (const auto& p : bleu.precisions) {
    out << "p" << p.order << " " << fmt(p.value()) << " (" << p.matched << "/" << p.total << ")\n";
  }

  if (o.preprocess) {
    auto opts = corpus::PreprocessOptions::all(o.stopwords.empty() ? std::set<std::string>{}
                                                                   : corpus::load_stopwords(o.stopwords));
    hyps = corpus::preprocess_all(hyps, opts);
    refs = corpus::preprocess_all(refs, opts);
  }
  const std::size_t uh = metrics::unique_token_count(hyps);
  const std::size_t ur = metrics::unique_token_count(refs);
  out << "unique tokens hyp " << uh << ", ref " << ur << "\n";
  report["unique_tokens"] = {{"hypotheses", uh}, {"references", ur}};
  const metrics::SynonymTable table =
      o.synonyms.empty() ? metrics::SynonymTable{} : metrics::SynonymTable::load(o.synonyms);
  const std::size_t dev = metrics::non_synonymous_deviations(refs, hyps, table);
  out << "non-synonymous deviations " << dev << "\n";
  report["non_synonymous_deviations"] = dev;
  try {
    const auto cos = metrics::mean_pairwise_cosine(hyps, refs);
    out << "mean cosine " << fmt(cos.mean) << " over " << cos.scored << " pairs (" << cos.skipped << " skipped)\n";
    report["cosine"] = {{"mean", cos.mean}, {"scored", cos.scored}, {"skipped", cos.skipped}};
  } catch (const DegenerateInput& e) {
    err << "cosine similarity skipped: " << e.what() << "\n";
  }
  if (hyps.size() >= 2) {
    std::vector<corpus::Tokens> cleaned(hyps.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) cleaned[i] = metrics::remove_deviations(hyps[i], refs[i], table);
    const auto sb_hyp = metrics::self_bleu(cleaned, metrics::BleuConfig::uniform(o.order));
    const auto sb_ref = metrics::self_bleu(refs, metrics::BleuConfig::uniform(o.order));
    out << "self-BLEU hyp " << fmt(sb_hyp.mean) << ", ref " << fmt(sb_ref.mean) << "\n";
    report["self_bleu"] = {{"hypotheses", sb_hyp.mean}, {"references", sb_ref.mean}};
  }
  if (!o.json_out.empty()) write_json(o.json_out, report);
  return 0;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream& err) {
  json doc;
  std::vector<double> scores;
  if (o.kind == "entropy") {
    const auto m = model::TransformerModel::load(o.model);
    const auto input = load_tsv(o.input, err);
    for (const auto& r : model::translate_all(m, input.sources())) scores.push_back(mitigation::translation_entropy(r));
    doc["kind"] = mitigation::score_kind_name(mitigation::ScoreKind::TranslationEntropy);
  } else if (o.kind == "detector") {
    mitigation::DetectorModel det;
    const std::string target = o.input.empty() ? o.synthetic : o.input;
    if (target.empty()) throw ConfigError("score --kind detector needs --input or --synthetic");
    if (!o.load_model.empty()) {
      det = mitigation::DetectorModel::from_json(read_json(o.load_model));
    } else {
      if (o.real.empty() || o.synthetic.empty()) throw ConfigError("detector training needs --real and --synthetic");
      mitigation::DetectorOptions opts;
      opts.seed = o.seed;
      const auto fit = mitigation::train_detector(load_tsv(o.real, err), load_tsv(o.synthetic, err),
                                                  mitigation::parse_detector_kind(o.detector), opts);
      out << "held-out accuracy " << fmt(fit.holdout.accuracy) << ", AUC " << fmt(fit.holdout.auc) << ", recall "
          << fmt(fit.holdout.recall) << ", precision " << fmt(fit.holdout.precision) << "\n";
      doc["holdout"] = {{"accuracy", fit.holdout.accuracy}, {"auc", fit.holdout.auc}, {"recall", fit.holdout.recall},
                        {"precision", fit.holdout.precision}};
      det = fit.model;
      if (!o.save_model.empty()) write_json(o.save_model, det.to_json());
    }
    for (const auto& f : mitigation::featurize_corpus(load_tsv(target, err), det.featurizer())) {
      scores.push_back(det.probability(f));
    }
    doc["kind"] = mitigation::score_kind_name(mitigation::ScoreKind::DetectorProbClass1);
  } else if (o.kind == "regressor") {
    mitigation::BleuRegressor reg;
    const auto input = load_tsv(o.input, err);
    if (!o.load_model.empty()) {
      reg = mitigation::BleuRegressor::from_json(read_json(o.load_model));
    } else {
      if (o.ref.empty()) throw ConfigError("regressor training needs --ref with aligned references");
      const auto ref = load_tsv(o.ref, err);
      if (ref.size() != input.size()) throw AlignmentError("--input and --ref differ in length");
      const auto features = mitigation::featurize_corpus(input);
      std::vector<double> labels;
      for (std::size_t i = 0; i < input.size(); ++i) {
        labels.push_back(metrics::sentence_bleu(input[i].target(), {&ref[i].target()}).bleu);
      }
      const std::vector<double> grid{0.1, 1.0, 10.0, 100.0};
      const double lambda = o.lambda >= 0.0 ? o.lambda : mitigation::select_ridge_lambda(features, labels, grid, o.seed);
      const auto fit = mitigation::train_bleu_regressor(features, labels, lambda, o.seed);
      out << "lambda " << lambda << ", held-out MSE " << fmt(fit.holdout.mse) << ", RMSE " << fmt(fit.holdout.rmse)
          << ", MAE " << fmt(fit.holdout.mae) << "\n";
      doc["holdout"] = {{"mse", fit.holdout.mse}, {"rmse", fit.holdout.rmse}, {"mae", fit.holdout.mae}};
      reg = fit.model;
      if (!o.save_model.empty()) write_json(o.save_model, reg.to_json());
    }
    for (const auto& f : mitigation::featurize_corpus(input, reg.featurizer())) scores.push_back(reg.predict(f));
    doc["kind"] = mitigation::score_kind_name(mitigation::ScoreKind::PredictedBleu);
  } else {
    throw ConfigError("unknown score kind '" + o.kind + "' (expected entropy, detector or regressor)");
  }
  doc["scores"] = scores;
  write_json(o.out, doc);
  out << "wrote " << scores.size() << " scores to " << o.out << "\n";
  return 0;
}

int cmd_schedule(const Options& o, std::ostream& out) {
  mitigation::Schedule s;
  if (!o.mix.empty()) {
    s = mitigation::mix_corpora(o.a_size, o.b_size, mitigation::parse_mix_mode(o.mix), o.batch, o.batches, o.seed);
  } else if (o.proportion >= 0.0) {
    s = mitigation::proportion_mix(o.b_size, o.a_size, o.proportion, o.batch, o.batches, o.seed);
  } else {
    if (o.scores.empty()) throw ConfigError("schedule needs --scores, --mix or --proportion");
    s = mitigation::build_schedule(mitigation::scored_instances(load_scores(o.scores), scores_kind(o.scores)),
                                   mitigation::parse_direction(o.direction), o.batch);
  }
  out << "batches " << s.size() << " sizes ";
  for (std::size_t k = 0; k < s.size(); ++k) out << (k ? "," : "") << s.batches[k].size();
  out << "\n";
  if (!o.out.empty()) {
    s.save(o.out);
    out << "wrote " << o.out << "\n";
  }
  return 0;
}

int cmd_run(const Options& o, bool seed_given, std::ostream& out, std::ostream& err) {
  auto config = experiment::load_experiment_config(o.config);
  if (seed_given) config.seed = o.seed;
  experiment::Progress progress;
  if (!o.quiet) progress = [&err](const std::string& msg) { err << msg << "\n"; };
  const auto report = experiment::run_experiment(config, progress);
  const std::string dir = o.out.empty() ? "out" : o.out;
  for (const auto& p : experiment::emit_report(report, dir, parse_formats(o.formats))) out << "wrote " << p.string() << "\n";
  for (const auto& arm : report.arms) {
    out << arm.label << " final BLEU " << fmt(arm.points.back().bleu) << " after batch " << arm.points.back().batch << "\n";
  }
  if (report.partial) {
    err << "run incomplete: " << report.failure << "\n";
    return 1;
  }
  return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto report = experiment::load_report(o.in);
  const std::string dir = o.out.empty() ? "out" : o.out;
  for (const auto& p : experiment::emit_report(report, dir, parse_formats(o.formats))) out << "wrote " << p.string() << "\n";
  return report.partial ? 1 : 0;
}

}  // namespace

std::vector<std::string> subcommand_names() {
  return {"toy-corpus", "train-baseline", "generate", "evaluate", "score", "schedule", "run", "report"};
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regurgitative-training laboratory: train small translation models, regenerate their data, and "
               "measure and mitigate the damage.",
               "regurgelab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Options o;

  auto add_seed = [&](CLI::App* sub) {
    return sub->add_option("--seed", o.seed, "Random seed (fixed default, never time-based)")->capture_default_str();
  };

  auto* toy = app.add_subcommand("toy-corpus", "Write a synthetic toy-language parallel corpus as TSV");
  toy->add_option("--pairs", o.pairs, "Number of sentence pairs")->capture_default_str();
  toy->add_option("--lexicon-seed", o.lexicon_seed, "Seed of the toy lexicon")->capture_default_str();
  toy->add_option("--out", o.out, "Output TSV path")->required();
  add_seed(toy);

  auto* tb = app.add_subcommand("train-baseline", "Train a transformer from scratch on a TSV corpus");
  tb->add_option("--train", o.train, "Training TSV")->required()->check(CLI::ExistingFile);
  tb->add_option("--out", o.out, "Checkpoint path")->required();
  tb->add_option("--eval", o.eval, "Optional eval TSV")->check(CLI::ExistingFile);
  tb->add_option("--passes", o.passes, "Epochs over the training data")->capture_default_str();
  tb->add_option("--minibatch", o.minibatch, "Sentence pairs per step")->capture_default_str();
  tb->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  tb->add_option("--layers", o.layers, "Encoder and decoder layers")->capture_default_str();
  tb->add_option("--heads", o.heads, "Attention heads")->capture_default_str();
  tb->add_option("--d-model", o.d_model, "Model width")->capture_default_str();
  tb->add_option("--d-ff", o.d_ff, "Feed-forward width")->capture_default_str();
  tb->add_option("--max-len", o.max_len, "Maximum sequence length")->capture_default_str();
  tb->add_option("--dropout", o.dropout, "Dropout rate")->capture_default_str();
  tb->add_option("--vocab-size", o.vocab_size, "Vocabulary budget including specials")->capture_default_str();
  tb->add_option("--min-freq", o.min_freq, "Minimum token frequency")->capture_default_str();
  add_seed(tb);

  auto* gen = app.add_subcommand("generate", "Translate the sources of a TSV corpus with a checkpoint");
  gen->add_option("--model", o.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  gen->add_option("--input", o.input, "Input TSV (targets are replaced)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", o.out, "Output TSV")->required();
  gen->add_option("--records", o.records, "Optional JSON-lines decode records");
  gen->add_flag("--probabilities", o.probabilities, "Include full probability rows in the records");
  gen->add_option("--model-id", o.model_id, "Generator label (default: checkpoint file stem)");
  add_seed(gen);

  auto* ev = app.add_subcommand("evaluate", "BLEU, self-BLEU and diversity metrics of hypothesis targets");
  ev->add_option("--hyp", o.hyp, "Hypothesis TSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--ref", o.ref, "Reference TSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--order", o.order, "Maximum n-gram order")->capture_default_str();
  ev->add_flag("--preprocess", o.preprocess, "Lowercase, strip punctuation, drop stopwords and stem before the "
                                             "diversity metrics");
  ev->add_option("--stopwords", o.stopwords, "Stopword list for --preprocess")->check(CLI::ExistingFile);
  ev->add_option("--synonyms", o.synonyms, "Synonym table (token<TAB>syn1,syn2)")->check(CLI::ExistingFile);
  ev->add_option("--json", o.json_out, "Optional JSON report path");
  add_seed(ev);

  auto* sc = app.add_subcommand("score", "Quality scores: translation entropy, detector or BLEU regressor");
  sc->add_option("--kind", o.kind, "entropy, detector or regressor")->capture_default_str();
  sc->add_option("--out", o.out, "Scores JSON")->required();
  sc->add_option("--model", o.model, "Checkpoint (entropy)")->check(CLI::ExistingFile);
  sc->add_option("--input", o.input, "Pairs to score")->check(CLI::ExistingFile);
  sc->add_option("--real", o.real, "Real pairs (detector training)")->check(CLI::ExistingFile);
  sc->add_option("--synthetic", o.synthetic, "Generated pairs (detector training)")->check(CLI::ExistingFile);
  sc->add_option("--ref", o.ref, "References aligned with --input (regressor labels)")->check(CLI::ExistingFile);
  sc->add_option("--detector", o.detector, "logistic or lda")->capture_default_str();
  sc->add_option("--lambda", o.lambda, "Ridge penalty; negative selects from a grid")->capture_default_str();
  sc->add_option("--load-model", o.load_model, "Score with a saved detector or regressor")->check(CLI::ExistingFile);
  sc->add_option("--save-model", o.save_model, "Save the fitted detector or regressor");
  add_seed(sc);

  auto* sch = app.add_subcommand("schedule", "Build a ranked, mixed or proportional batch schedule");
  sch->add_option("--scores", o.scores, "Scores JSON (ranking mode)")->check(CLI::ExistingFile);
  sch->add_option("--direction", o.direction, "asc or desc")->capture_default_str();
  sch->add_option("--batch", o.batch, "Batch size")->capture_default_str();
  sch->add_option("--mix", o.mix, "half-half or union (mixture mode)");
  sch->add_option("--proportion", o.proportion, "Synthetic share p in [0, 1] (proportion mode)")->capture_default_str();
  sch->add_option("--a-size", o.a_size, "First corpus size (mixture) or real size (proportion)")->capture_default_str();
  sch->add_option("--b-size", o.b_size, "Second corpus size (mixture) or synthetic size (proportion)")
      ->capture_default_str();
  sch->add_option("--batches", o.batches, "Number of batches (0: as many as fit, mixture only)")->capture_default_str();
  sch->add_option("--out", o.out, "Optional schedule JSON path");
  add_seed(sch);

  auto* run = app.add_subcommand("run", "Run a full experiment from a JSON config");
  run->add_option("--config", o.config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", o.out, "Output directory")->default_str("out");
  run->add_option("--formats", o.formats, "Comma-separated report formats")->capture_default_str();
  run->add_flag("--quiet", o.quiet, "No progress on standard error");
  auto* run_seed = run->add_option("--seed", o.seed, "Random seed (default: the config's seed, itself 7 when unset)");

  auto* rep = app.add_subcommand("report", "Re-emit report formats from a saved JSON run report");
  rep->add_option("--in", o.in, "report.json")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", o.out, "Output directory")->default_str("out");
  rep->add_option("--formats", o.formats, "Comma-separated report formats")->capture_default_str();
  add_seed(rep);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return 2;
  }

  try {
    if (toy->parsed()) return cmd_toy_corpus(o, out);
    if (tb->parsed()) return cmd_train_baseline(o, out, err);
    if (gen->parsed()) return cmd_generate(o, out, err);
    if (ev->parsed()) return cmd_evaluate(o, out, err);
    if (sc->parsed()) return cmd_score(o, out, err);
    if (sch->parsed()) return cmd_schedule(o, out);
    if (run->parsed()) return cmd_run(o, run_seed->count() > 0, out, err);
    if (rep->parsed()) return cmd_report(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace rlab::cli
