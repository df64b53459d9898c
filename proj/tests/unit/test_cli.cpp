#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rlab/cli/cli.hpp"
#include "rlab/corpus/corpus.hpp"
#include "rlab/corpus/toy_language.hpp"

using namespace rlab;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "regurgelab");
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "rlab-unit-cli";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("top-level help lists every subcommand") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    for (const auto& s : cli::subcommand_names()) CHECK(r.out.find(s) != std::string::npos);
  }

  TEST_CASE("every subcommand documents its flags and the seed default") {
    for (const auto& s : cli::subcommand_names()) {
      CAPTURE(s);
      const auto r = run({s, "--help"});
      CHECK(r.code == 0);
      CHECK(r.out.find("--seed") != std::string::npos);
      if (s != "run") CHECK(r.out.find("[7]") != std::string::npos);
    }
  }

  TEST_CASE("unknown flags and subcommands exit 2") {
    CHECK(run({"evaluate", "--bogus"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    const auto r = run({"schedule", "--direction", "sideways", "--scores", "x.json"});
    CHECK(r.code != 0);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("runtime failures exit 1 with a diagnostic") {
    const auto junk = tmp("junk.tsv");
    std::ofstream(junk) << "no tabs here\n";
    const auto r = run({"evaluate", "--hyp", junk.string(), "--ref", junk.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("EmptyCorpus") != std::string::npos);
    CHECK(run({"evaluate", "--hyp", "/nonexistent/h.tsv", "--ref", "/nonexistent/r.tsv"}).code == 2);
  }

  TEST_CASE("evaluate identical files prints BLEU 1") {
    const auto p = tmp("same.tsv");
    corpus::save_parallel_corpus(corpus::ToyLanguage().generate(20, 1), p);
    const auto r = run({"evaluate", "--hyp", p.string(), "--ref", p.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("BLEU 1.000000") != std::string::npos);
    const auto jp = tmp("eval.json");
    const auto j = run({"evaluate", "--hyp", p.string(), "--ref", p.string(), "--preprocess", "--json", jp.string()});
    CHECK(j.code == 0);
    CHECK(slurp(jp).find("\"bleu\"") != std::string::npos);
  }

  TEST_CASE("schedule chunks five scores by two") {
    const auto p = tmp("scores.json");
    std::ofstream(p) << "[0.5, 0.1, 0.4, 0.3, 0.2]";
    const auto r = run({"schedule", "--scores", p.string(), "--direction", "asc", "--batch", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("batches 3 sizes 2,2,1") != std::string::npos);
  }

  TEST_CASE("schedule mixture mode") {
    const auto r = run({"schedule", "--mix", "half-half", "--a-size", "3000", "--b-size", "3000", "--batch", "1000",
                        "--batches", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("batches 2 sizes 1000,1000") != std::string::npos);
  }

  TEST_CASE("run determinism and report re-emission") {
    const auto cfg = std::filesystem::path(RLAB_SOURCE_DIR) / "tests" / "fixtures" / "tiny_experiment.json";
    const auto a = tmp("run-a"), b = tmp("run-b"), c = tmp("run-c");
    REQUIRE(run({"run", "--config", cfg.string(), "--seed", "7", "--out", a.string(), "--quiet"}).code == 0);
    REQUIRE(run({"run", "--config", cfg.string(), "--seed", "7", "--out", b.string(), "--quiet"}).code == 0);
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "report.svg") == slurp(b / "report.svg"));
    CHECK(run({"report", "--in", (a / "report.json").string(), "--out", c.string(), "--formats", "csv"}).code == 0);
    CHECK(slurp(c / "report.csv") == slurp(a / "report.csv"));
    CHECK(run({"run", "--config", cfg.string(), "--formats", "pdf", "--out", c.string(), "--quiet"}).code != 0);
  }

  TEST_CASE("toy-corpus is seeded and reproducible") {
    const auto a = tmp("toy-a.tsv"), b = tmp("toy-b.tsv"), c = tmp("toy-c.tsv");
    CHECK(run({"toy-corpus", "--pairs", "30", "--out", a.string()}).code == 0);
    CHECK(run({"toy-corpus", "--pairs", "30", "--out", b.string(), "--seed", "7"}).code == 0);
    CHECK(run({"toy-corpus", "--pairs", "30", "--out", c.string(), "--seed", "8"}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
  }

  TEST_CASE("train, generate, score and report round trip") {
    const auto data = tmp("train.tsv");
    CHECK(run({"toy-corpus", "--pairs", "200", "--out", data.string()}).code == 0);
    const auto model = tmp("m.ckpt");
    const auto t = run({"train-baseline", "--train", data.string(), "--out", model.string(), "--layers", "1",
                        "--heads", "2", "--d-model", "16", "--d-ff", "32", "--passes", "1"});
    REQUIRE(t.code == 0);
    const auto gen = tmp("gen.tsv");
    CHECK(run({"generate", "--model", model.string(), "--input", data.string(), "--out", gen.string()}).code == 0);
    const auto scores = tmp("entropy.json");
    CHECK(run({"score", "--model", model.string(), "--input", data.string(), "--kind", "entropy", "--out",
               scores.string()})
              .code == 0);
    const auto s = run({"schedule", "--scores", scores.string(), "--direction", "asc", "--batch", "50"});
    CHECK(s.out.find("batches 4") != std::string::npos);
    const auto det = tmp("det.json");
    CHECK(run({"score", "--kind", "detector", "--real", data.string(), "--synthetic", gen.string(), "--out",
               det.string()})
              .code == 0);
    const auto reg = tmp("reg.json");
    CHECK(run({"score", "--kind", "regressor", "--input", gen.string(), "--ref", data.string(), "--out", reg.string()})
              .code == 0);
    const auto d = run({"schedule", "--scores", det.string(), "--direction", "desc", "--batch", "100"});
    CHECK(d.out.find("batches 2 sizes 100,100") != std::string::npos);
  }
}
