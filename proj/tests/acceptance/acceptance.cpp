// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rlab/autodiff/gradient_check.hpp"
#include "rlab/cli/cli.hpp"
#include "rlab/common/rng.hpp"
#include "rlab/corpus/preprocess.hpp"
#include "rlab/corpus/toy_language.hpp"
#include "rlab/experiment/config.hpp"
#include "rlab/experiment/runner.hpp"
#include "rlab/metrics/bleu.hpp"
#include "rlab/metrics/diversity.hpp"
#include "rlab/metrics/similarity.hpp"
#include "rlab/metrics/stats.hpp"
#include "rlab/mitigation/detector.hpp"
#include "rlab/mitigation/entropy.hpp"
#include "rlab/mitigation/features.hpp"
#include "rlab/mitigation/schedule.hpp"
#include "rlab/model/transformer.hpp"

#ifndef RLAB_SOURCE_DIR
#define RLAB_SOURCE_DIR "."
#endif

using namespace rlab;
using corpus::Tokens;

namespace {

const std::filesystem::path kSource = RLAB_SOURCE_DIR;
constexpr std::size_t kSeeds = 10;

struct Verdict {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

int failures = 0;

void print(int id, const std::string& name, const Verdict& v, double seconds) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << v.summary << " ("
            << std::fixed << std::setprecision(1) << seconds << " s)" << std::endl;
  for (const auto& d : v.details) std::cout << "    " << d << std::endl;
  if (!v.pass) ++failures;
}

void criterion(int id, const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.summary = std::string("exception: ") + e.what();
  }
  print(id, name, v, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string num(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

// ---------------------------------------------------------------------------
// Independent BLEU oracle: n-grams as token vectors, counted by linear scans.

using Gram = std::vector<std::string>;

std::vector<Gram> grams(const Tokens& t, std::size_t n) {
  std::vector<Gram> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
  return out;
}

std::size_t occurrences(const std::vector<Gram>& list, const Gram& g) {
  std::size_t c = 0;
  for (const auto& x : list) c += (x == g);
  return c;
}

struct OracleCounts {
  std::size_t matched = 0;
  std::size_t total = 0;
};

OracleCounts oracle_precision(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, std::size_t n) {
  OracleCounts c;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto h = grams(hyps[s], n);
    const auto r = grams(refs[s], n);
    std::vector<Gram> seen;
    for (const auto& g : h) {
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      c.matched += std::min(occurrences(h, g), occurrences(r, g));
    }
    c.total += h.size();
  }
  return c;
}

double oracle_bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, std::size_t order) {
  double c = 0, r = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    c += static_cast<double>(hyps[s].size());
    r += static_cast<double>(refs[s].size());
  }
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const auto pc = oracle_precision(hyps, refs, n);
    if (pc.matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(pc.matched) / static_cast<double>(pc.total)) / static_cast<double>(order);
  }
  const double bp = c > 0 ? std::min(1.0, std::exp(1.0 - r / c)) : 0.0;
  return bp * std::exp(log_sum);
}

Verdict bleu_oracle() {
  Rng rng(20240607);
  double worst = 0.0;
  std::size_t count_mismatch = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t vocab = 2 + rng.below(19);  // 2..20
    const std::size_t sentences = 1 + rng.below(10);
    std::vector<Tokens> hyps, refs;
    auto sentence = [&] {
      Tokens t(1 + rng.below(12));
      for (auto& w : t) w = "w" + std::to_string(rng.below(vocab));
      return t;
    };
    for (std::size_t s = 0; s < sentences; ++s) {
      hyps.push_back(sentence());
      refs.push_back(sentence());
    }
    const std::size_t order = 1 + rng.below(4);
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto p = metrics::modified_precision(hyps, refs, n);
      const auto o = oracle_precision(hyps, refs, n);
      if (p.matched != o.matched || p.total != o.total) ++count_mismatch;
    }
    const double got = metrics::corpus_bleu(hyps, refs, metrics::BleuConfig::uniform(order)).bleu;
    worst = std::max(worst, std::abs(got - oracle_bleu(hyps, refs, order)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Verdict v;
  v.pass = count_mismatch == 0 && worst <= 1e-12 && secs < 10.0;
  v.summary = "200 corpora, count mismatches " + std::to_string(count_mismatch) + ", max |BLEU - oracle| " +
              (std::ostringstream() << std::scientific << std::setprecision(2) << worst).str() +
              " (tol 1e-12), runtime " + num(secs, 2) + " s (limit 10 s)";
  return v;
}

Verdict bleu_worked_example() {
  const auto rep = metrics::corpus_bleu({corpus::tokenize("the cat sat")}, {corpus::tokenize("the cat sat on the mat")},
                                        metrics::BleuConfig::uniform(2));
  const auto p1 = metrics::modified_precision({corpus::tokenize("the the the")}, {corpus::tokenize("the cat")}, 1);
  const double expected = std::exp(-1.0);
  Verdict v;
  v.pass = std::abs(rep.bleu - expected) <= 1e-9 && p1.matched == 1 && p1.total == 3 && p1.value() == 1.0 / 3.0;
  v.summary = "BLEU " + num(rep.bleu, 12) + " vs e^-1 " + num(expected, 12) + " (tol 1e-9); p1 = " +
              std::to_string(p1.matched) + "/" + std::to_string(p1.total);
  return v;
}

Verdict gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const corpus::ToyLanguage lang;
  Verdict v;
  v.pass = true;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = lang.generate(6, seed);
    model::TransformerConfig cfg;  // default: 2 layers, 4 heads, d_model 64, d_ff 128
    cfg.seed = seed;
    auto m = model::build_transformer(cfg, corpus::build_vocab(data, 1000));
    std::vector<const corpus::SentencePair*> ptrs;
    for (const auto& p : data.pairs()) ptrs.push_back(&p);
    const auto batch = m.make_batch(ptrs);
    ad::GradientCheckOptions opts;
    opts.seed = seed;
    const auto rep = ad::gradient_check([&](ad::Tape& tape, const ad::ParameterStore&) { return m.loss(tape, batch); },
                                        m.params(), opts);
    worst = std::max(worst, rep.max_relative_error);
    v.pass = v.pass && rep.passed && rep.coordinates_checked >= 200;
    v.details.push_back("seed " + std::to_string(seed) + ": max rel error " +
                        (std::ostringstream() << std::scientific << std::setprecision(2) << rep.max_relative_error).str() +
                        " over " + std::to_string(rep.coordinates_checked) + " coordinates, worst at " +
                        rep.worst_parameter + "[" + std::to_string(rep.worst_index) + "]");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = v.pass && worst < 1e-4 && secs < 120.0;
  v.summary = "default 2-layer d_model 64 transformer, 3 seeds, max rel error " +
              (std::ostringstream() << std::scientific << std::setprecision(2) << worst).str() +
              " (limit 1e-4), runtime " + num(secs, 1) + " s (limit 120 s)";
  return v;
}

Verdict entropy_identities() {
  const std::size_t vsize = 7;
  ad::Tensor uniform(ad::Shape{3, vsize}, std::vector<double>(3 * vsize, 1.0 / vsize));
  std::vector<double> onehot(3 * vsize, 0.0);
  for (std::size_t t = 0; t < 3; ++t) onehot[t * vsize + t] = 1.0;
  const double hu = mitigation::translation_entropy(uniform);
  const double h1 = mitigation::translation_entropy(ad::Tensor(ad::Shape{3, vsize}, onehot));
  const std::vector<mitigation::AnswerCandidate> two{{0.6, 0.5}, {0.3, 1.0}};
  const std::vector<mitigation::AnswerCandidate> one{{0.8, 0.4}};
  const double a2 = mitigation::answer_entropy(two);
  const double a1 = mitigation::answer_entropy(one);
  Verdict v;
  v.pass = std::abs(hu - std::log(double(vsize))) <= 1e-12 && h1 == 0.0 && std::abs(a2 - std::log(2.0)) <= 1e-12 &&
           a1 == 0.0;
  v.summary = "uniform " + num(hu, 12) + " vs ln 7 " + num(std::log(7.0), 12) + ", one-hot " + num(h1, 12) +
              ", two equal answers " + num(a2, 12) + " vs ln 2, single answer " + num(a1, 12);
  return v;
}

// ---------------------------------------------------------------------------
// Toy experiment sweep shared by the trend criteria.

struct SeedRun {
  std::uint64_t seed = 0;
  double cpu_fig4 = 0.0;  // data, baseline, real and self arms
  experiment::RunReport fig4;
  experiment::RunReport fig6;
  bool schedules_equal = false;
  double spearman = 0.0;
  double self_bleu_real = 0.0, self_bleu_gen = 0.0;
  std::size_t unique_real = 0, unique_gen = 0;
  double baseline_bleu = 0.0;
  // detector inputs
  corpus::Corpus real_pairs, generated_pairs;
};

std::vector<SeedRun> sweep;

experiment::ExperimentConfig base_config() {
  return experiment::load_experiment_config(kSource / "configs" / "toy_regurgitation.json");
}

experiment::ArmConfig arm(const std::string& label, experiment::ArmKind kind, double p = 1.0) {
  experiment::ArmConfig a;
  a.label = label;
  a.kind = kind;
  a.generator = "low";
  a.proportion = p;
  return a;
}

void run_sweep() {
  const auto stopwords = corpus::load_stopwords(kSource / "data" / "stopwords_toy.txt");
  corpus::PreprocessOptions prep = corpus::PreprocessOptions::all(stopwords);
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    SeedRun r;
    r.seed = seed;
    auto cfg = base_config();
    cfg.seed = seed;
    cfg.regurgitative.arms = {arm("real", experiment::ArmKind::Real), arm("self", experiment::ArmKind::SelfGenerated)};
    const double c0 = cpu_seconds();
    const auto data = experiment::prepare_experiment_data(cfg);
    const auto baseline = experiment::run_baseline_curve(cfg, data);
    experiment::GeneratorSet gens(cfg, data, baseline);
    r.fig4 = experiment::run_regurgitative_experiment(cfg, data, baseline, gens);
    r.cpu_fig4 = cpu_seconds() - c0;
    r.baseline_bleu = baseline.curve.front().bleu;

    auto cfg6 = cfg;
    cfg6.regurgitative.arms = {arm("p0", experiment::ArmKind::Proportion, 0.0),
                               arm("p50", experiment::ArmKind::Proportion, 0.5),
                               arm("p100", experiment::ArmKind::Proportion, 1.0)};
    r.fig6 = experiment::run_regurgitative_experiment(cfg6, data, baseline, gens);
    const std::size_t bs = cfg.resolved_batch_size(), nb = cfg.regurgitative.num_batches;
    const std::uint64_t sched_seed = derive_seed(seed, 106);
    r.schedules_equal = mitigation::real_only_schedule(data.pool.size(), bs, nb, sched_seed).batches ==
                        mitigation::proportion_mix(data.pool.size(), data.pool.size(), 0.0, bs, nb, sched_seed).batches;

    // 1k low-baseline generations with held-out references
    auto& pool = gens.pool("low");
    const std::size_t n = 1000;
    std::vector<double> neg_entropy, sbleu;
    std::vector<Tokens> gen_targets, real_targets;
    std::vector<corpus::SentencePair> gen_pairs, real_pairs;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = pool.record(i);
      const auto& gp = pool.pair(i);
      neg_entropy.push_back(-mitigation::translation_entropy(rec));
      sbleu.push_back(metrics::sentence_bleu(gp.target(), {&data.pool[i].target()}).bleu);
      gen_targets.push_back(gp.target());
      real_targets.push_back(data.pool[i].target());
      gen_pairs.push_back(gp);
      real_pairs.push_back(data.pool[i]);
    }
    r.spearman = metrics::spearman_correlation(neg_entropy, sbleu);
    r.real_pairs = corpus::Corpus("real", real_pairs);
    r.generated_pairs = corpus::Corpus("generated", gen_pairs);

    const auto real_p = corpus::preprocess_all(real_targets, prep);
    auto gen_p = corpus::preprocess_all(gen_targets, prep);
    const metrics::SynonymTable no_synonyms;
    for (std::size_t i = 0; i < n; ++i) gen_p[i] = metrics::remove_deviations(gen_p[i], real_p[i], no_synonyms);
    r.self_bleu_real = metrics::self_bleu(real_p).mean;
    r.self_bleu_gen = metrics::self_bleu(gen_p).mean;
    r.unique_real = metrics::unique_token_count(real_p);
    r.unique_gen = metrics::unique_token_count(gen_p);

    std::cerr << "seed " << seed << ": baseline " << num(r.baseline_bleu) << ", real "
              << num(r.fig4.arm("real").points.back().bleu) << ", self " << num(r.fig4.arm("self").points.back().bleu)
              << ", cpu " << num(r.cpu_fig4, 1) << " s" << std::endl;
    sweep.push_back(std::move(r));
  }
}

Verdict fig4_reproduction() {
  Verdict v;
  std::size_t wins = 0;
  double cpu = 0.0;
  for (const auto& r : sweep) {
    const double real = r.fig4.arm("real").points.back().bleu;
    const double self = r.fig4.arm("self").points.back().bleu;
    wins += real > self;
    cpu += r.cpu_fig4;
    v.details.push_back("seed " + std::to_string(r.seed) + ": baseline " + num(r.baseline_bleu) + ", final real " +
                        num(real) + ", final self " + num(self) + (real > self ? "" : "  <- no gap"));
  }
  v.pass = wins >= 8 && cpu < 900.0 && sweep.size() == kSeeds;
  v.summary = "real > self at batch 10 in " + std::to_string(wins) + "/" + std::to_string(sweep.size()) +
              " seeds (need >= 8); CPU " + num(cpu, 1) + " s (limit 900 s)";
  return v;
}

Verdict fig6_reproduction() {
  Verdict v;
  std::size_t ordered = 0;
  bool identical = true;
  for (const auto& r : sweep) {
    const double p0 = r.fig6.arm("p0").points.back().bleu;
    const double p50 = r.fig6.arm("p50").points.back().bleu;
    const double p100 = r.fig6.arm("p100").points.back().bleu;
    const bool ok = p0 >= p50 && p50 >= p100;
    ordered += ok;
    const auto& real = r.fig4.arm("real").points;
    const auto& zero = r.fig6.arm("p0").points;
    bool same = r.schedules_equal && real.size() == zero.size();
    for (std::size_t k = 0; same && k < real.size(); ++k) {
      same = real[k].bleu == zero[k].bleu && nlohmann::json(real[k].report) == nlohmann::json(zero[k].report);
    }
    identical = identical && same;
    v.details.push_back("seed " + std::to_string(r.seed) + ": p0 " + num(p0) + ", p50 " + num(p50) + ", p100 " +
                        num(p100) + (ok ? "" : "  <- out of order") + (same ? "" : "  <- p0 differs from real"));
  }
  v.pass = ordered >= 7 && identical && sweep.size() == kSeeds;
  v.summary = "p0 >= p50 >= p100 in " + std::to_string(ordered) + "/" + std::to_string(sweep.size()) +
              " seeds (need >= 7); p0 bit-identical to real: " + (identical ? "yes" : "no");
  return v;
}

Verdict confidence_signal() {
  Verdict v;
  std::size_t hits = 0;
  for (const auto& r : sweep) {
    hits += r.spearman >= 0.1;
    v.details.push_back("seed " + std::to_string(r.seed) + ": Spearman(-entropy, sentence BLEU) " + num(r.spearman));
  }
  v.pass = hits >= 8 && sweep.size() == kSeeds;
  v.summary = "rho >= 0.1 in " + std::to_string(hits) + "/" + std::to_string(sweep.size()) + " seeds (need >= 8)";
  return v;
}

Verdict detector_sanity() {
  Verdict v;
  v.pass = sweep.size() >= 5;
  double min_auc = 1.0, null_lo = 1.0, null_hi = 0.0;
  for (std::size_t s = 0; s < 5 && s < sweep.size(); ++s) {
    const auto& r = sweep[s];
    mitigation::DetectorOptions opts;
    opts.seed = r.seed;
    const auto fit =
        mitigation::train_detector(r.real_pairs, r.generated_pairs, mitigation::DetectorKind::LogisticRegression, opts);
    const auto lda =
        mitigation::train_detector(r.real_pairs, r.generated_pairs, mitigation::DetectorKind::LinearDiscriminant, opts);
    auto features = mitigation::featurize_corpus(r.real_pairs);
    auto gen = mitigation::featurize_corpus(r.generated_pairs);
    features.insert(features.end(), gen.begin(), gen.end());
    std::vector<int> labels(r.real_pairs.size(), 1);
    labels.resize(features.size(), 0);
    Rng rng(derive_seed(r.seed, 99));
    rng.shuffle(labels);
    const auto null_fit = mitigation::fit_detector(features, labels, mitigation::DetectorKind::LogisticRegression, opts);
    min_auc = std::min(min_auc, fit.holdout.auc);
    null_lo = std::min(null_lo, null_fit.holdout.auc);
    null_hi = std::max(null_hi, null_fit.holdout.auc);
    v.details.push_back("seed " + std::to_string(r.seed) + ": logistic AUC " + num(fit.holdout.auc) + " (acc " +
                        num(fit.holdout.accuracy) + ", recall " + num(fit.holdout.recall) + ", precision " +
                        num(fit.holdout.precision) + "), LDA AUC " + num(lda.holdout.auc) + ", shuffled-label AUC " +
                        num(null_fit.holdout.auc));
  }
  v.pass = v.pass && min_auc >= 0.55 && null_lo >= 0.4 && null_hi <= 0.6;
  v.summary = "min held-out AUC over 5 seeds " + num(min_auc) + " (need >= 0.55); shuffled-label AUC range [" +
              num(null_lo) + ", " + num(null_hi) + "] (need within [0.4, 0.6])";
  return v;
}

Verdict diversity_direction() {
  Verdict v;
  std::size_t hits = 0;
  for (const auto& r : sweep) {
    const bool ok = r.self_bleu_gen >= r.self_bleu_real && r.unique_gen <= r.unique_real;
    hits += ok;
    v.details.push_back("seed " + std::to_string(r.seed) + ": self-BLEU generated " + num(r.self_bleu_gen) +
                        " vs real " + num(r.self_bleu_real) + ", unique tokens generated " +
                        std::to_string(r.unique_gen) + " vs real " + std::to_string(r.unique_real));
  }
  v.pass = hits >= 7 && sweep.size() == kSeeds;
  v.summary = "direction holds in " + std::to_string(hits) + "/" + std::to_string(sweep.size()) + " seeds (need >= 7)";
  return v;
}

Verdict scheduler_exactness() {
  Verdict v;
  const auto half = mitigation::mix_corpora(3000, 3000, mitigation::MixMode::HalfHalf, 1000, 0, 5);
  bool half_ok = !half.batches.empty();
  for (const auto& b : half.batches) {
    std::size_t from_a = 0;
    for (auto i : b) from_a += i < 3000;
    half_ok = half_ok && b.size() == 1000 && from_a == 500;
  }
  const auto uni = mitigation::mix_corpora(3000, 3000, mitigation::MixMode::Union, 1000, 0, 5);
  bool union_ok = !uni.batches.empty();
  for (const auto& b : uni.batches) {
    std::size_t from_a = 0;
    for (auto i : b) from_a += i < 3000;
    union_ok = union_ok && b.size() == 2000 && from_a == 1000;
  }
  Rng rng(424242);
  std::size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<double> scores(n);
    for (auto& s : scores) s = static_cast<double>(rng.below(5)) * 0.25;  // frequent ties
    const auto dir = rng.below(2) ? mitigation::Direction::Ascending : mitigation::Direction::Descending;
    const std::size_t bs = 1 + rng.below(n + 2);
    const auto sched =
        mitigation::build_schedule(mitigation::scored_instances(scores, mitigation::ScoreKind::TranslationEntropy), dir, bs);
    auto flat = sched.flattened();
    std::sort(flat.begin(), flat.end());
    bool ok = flat == iota_indices(n);
    for (std::size_t k = 0; ok && k + 1 < sched.batches.size(); ++k) ok = sched.batches[k].size() == bs;
    bad += !ok;
  }
  v.pass = half_ok && union_ok && bad == 0;
  v.summary = std::string("half-half 500+500: ") + (half_ok ? "yes" : "no") + ", union 2000: " +
              (union_ok ? "yes" : "no") + ", non-permutation schedules " + std::to_string(bad) + "/1000";
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict cli_determinism() {
  const auto tmp = std::filesystem::temp_directory_path() / ("regurgelab-accept-" + std::to_string(::getpid()));
  std::filesystem::remove_all(tmp);
  const std::string cfg = (kSource / "configs" / "smoke.json").string();
  std::vector<std::string> outs;
  std::ostringstream sink_out, sink_err;
  int codes = 0;
  for (int i = 0; i < 2; ++i) {
    const auto dir = (tmp / ("run" + std::to_string(i))).string();
    codes |= cli::dispatch({"regurgelab", "run", "--config", cfg, "--seed", "7", "--out", dir, "--quiet"}, sink_out,
                           sink_err);
    outs.push_back(dir);
  }
  const bool csv = slurp(outs[0] + "/report.csv") == slurp(outs[1] + "/report.csv") &&
                   !slurp(outs[0] + "/report.csv").empty();
  const bool json = slurp(outs[0] + "/report.json") == slurp(outs[1] + "/report.json") &&
                    !slurp(outs[0] + "/report.json").empty();
  std::filesystem::remove_all(tmp);
  Verdict v;
  v.pass = codes == 0 && csv && json;
  v.summary = std::string("two runs of configs/smoke.json with --seed 7: exit codes ") + (codes ? "nonzero" : "0") +
              ", CSV identical " + (csv ? "yes" : "no") + ", JSON identical " + (json ? "yes" : "no");
  if (codes) v.details.push_back(sink_err.str());
  return v;
}

}  // namespace

int main() {
  criterion(1, "BLEU matches a brute-force n-gram oracle", bleu_oracle);
  criterion(2, "BLEU worked examples", bleu_worked_example);
  criterion(3, "gradient check on the default transformer", gradient_fidelity);
  criterion(4, "entropy identities", entropy_identities);
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run_sweep();
    } catch (const std::exception& e) {
      std::cout << "toy sweep aborted: " << e.what() << std::endl;
    }
    std::cout << "(toy sweep over " << sweep.size() << " seeds took "
              << num(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1) << " s)"
              << std::endl;
  }
  criterion(5, "real data beats self-generated data after 10 batches", fig4_reproduction);
  criterion(6, "more synthetic data, lower final BLEU", fig6_reproduction);
  criterion(7, "low entropy predicts high sentence BLEU", confidence_signal);
  criterion(8, "detector separates real from low-baseline pairs", detector_sanity);
  criterion(9, "generated text is less diverse", diversity_direction);
  criterion(10, "scheduler exactness", scheduler_exactness);
  criterion(11, "run is byte-deterministic", cli_determinism);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << "(" << failures << " failing criteria)" << std::endl;
  return failures ? 1 : 0;
}
