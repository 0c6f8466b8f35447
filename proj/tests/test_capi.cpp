#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>

#include "mixsum.h"
#include "support.hpp"

namespace {

std::string to_csv(const mixsum::Dataset& ds) {
  std::string out;
  for (const auto& ex : ds.examples) {
    out += "\"" + std::to_string(ex.label + 1) + "\",\"" + ex.text + "\"\n";
  }
  return out;
}

struct ConfigFixture {
  testsupport::TempDir dir;
  mixsum::Dataset pool;
  std::string config_path;

  explicit ConfigFixture(const std::string& extra_json = "") {
    pool = testsupport::synthetic_keyword_dataset(3, 20, 42);
    testsupport::write_file(dir.file("train.csv"), to_csv(pool));
    std::string config = R"({
      "datasets": [
        {"name": "synth", "train_csv": ")" + dir.file("train.csv") + R"(",
         "num_classes": 3, "text_columns": [1]}
      ],
      "sampling": {"n_train": 24, "n_test": 30},
      "encoder": {"vocab_buckets": 1024, "embed_dim": 16,
                  "backbone_dim": 16, "contrastive_dim": 16},
      "train": {"dataset": "synth", "mode": "mixsum", "epochs": 2,
                "batch_size": 8},
      "output": {"checkpoint": ")" + dir.file("model.ckpt") + R"(",
                 "history": ")" + dir.file("history.jsonl") + R"("},
      "experiment": {"modes": ["ce-only", "mixsum"], "seeds": [0, 1],
                     "results": ")" + dir.file("results.jsonl") + R"("}
      )" + extra_json + R"(
    })";
    config_path = dir.file("config.json");
    testsupport::write_file(config_path, config);
  }
};

struct ConfigHandle {
  mixsum_config* handle = nullptr;
  ~ConfigHandle() { mixsum_config_free(handle); }
};

}  // namespace

TEST_CASE("config loads and rejects nulls") {
  ConfigFixture fx;
  ConfigHandle cfg;
  CHECK(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) == MIXSUM_OK);
  REQUIRE(cfg.handle != nullptr);
  CHECK(mixsum_config_load(nullptr, &cfg.handle) == MIXSUM_ERR_VALIDATION);
  CHECK(std::string(mixsum_last_error()).find("path") != std::string::npos);
}

TEST_CASE("unknown config keys are named in the error") {
  ConfigFixture fx(R"(, "mystery": 1)");
  ConfigHandle cfg;
  CHECK(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) ==
        MIXSUM_ERR_VALIDATION);
  CHECK(std::string(mixsum_last_error()).find("mystery") != std::string::npos);
}

TEST_CASE("bad loss values are named in the error") {
  ConfigFixture fx(R"(, "loss": {"lambda": 1.5})");
  ConfigHandle cfg;
  CHECK(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) ==
        MIXSUM_ERR_VALIDATION);
  CHECK(std::string(mixsum_last_error()).find("lambda") != std::string::npos);
}

TEST_CASE("missing dataset files fail at load time") {
  testsupport::TempDir dir;
  std::string config_path = dir.file("config.json");
  testsupport::write_file(config_path, R"({
    "datasets": [{"name": "ghost", "train_csv": ")" +
                                           dir.file("absent.csv") + R"(",
                  "num_classes": 2}]
  })");
  ConfigHandle cfg;
  CHECK(mixsum_config_load(config_path.c_str(), &cfg.handle) ==
        MIXSUM_ERR_VALIDATION);
  CHECK(std::string(mixsum_last_error()).find("train_csv") !=
        std::string::npos);
}

TEST_CASE("setters validate their arguments") {
  ConfigFixture fx;
  ConfigHandle cfg;
  REQUIRE(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) == MIXSUM_OK);
  CHECK(mixsum_config_set_seed(cfg.handle, 7) == MIXSUM_OK);
  CHECK(mixsum_config_set_jobs(cfg.handle, 2) == MIXSUM_OK);
  CHECK(mixsum_config_set_jobs(cfg.handle, 0) == MIXSUM_ERR_VALIDATION);
  CHECK(mixsum_config_set_dataset(cfg.handle, "synth") == MIXSUM_OK);
  CHECK(mixsum_config_set_dataset(cfg.handle, "nope") ==
        MIXSUM_ERR_VALIDATION);
}

TEST_CASE("textrank through the C surface") {
  char* out = nullptr;
  CHECK(mixsum_textrank("Only this sentence.", 1, &out) == MIXSUM_OK);
  REQUIRE(out != nullptr);
  CHECK(std::string(out) == "Only this sentence.");
  mixsum_string_free(out);

  CHECK(mixsum_textrank("", 1, &out) == MIXSUM_ERR_VALIDATION);
  CHECK(mixsum_textrank(nullptr, 1, &out) == MIXSUM_ERR_VALIDATION);
}

TEST_CASE("summarize-cache builds a deterministic textrank cache") {
  ConfigFixture fx;
  ConfigHandle cfg;
  REQUIRE(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) == MIXSUM_OK);
  std::string cache_a = fx.dir.file("cache_a.tsv");
  std::string cache_b = fx.dir.file("cache_b.tsv");
  REQUIRE(mixsum_summarize_cache(cfg.handle, "synth", cache_a.c_str(),
                                 "textrank", nullptr) == MIXSUM_OK);
  REQUIRE(mixsum_summarize_cache(cfg.handle, "synth", cache_b.c_str(),
                                 "textrank", nullptr) == MIXSUM_OK);
  std::string content = testsupport::read_file(cache_a);
  CHECK(content == testsupport::read_file(cache_b));
  size_t lines = std::count(content.begin(), content.end(), '\n');
  CHECK(lines == fx.pool.examples.size());
  CHECK(content.find('\t') != std::string::npos);
}

TEST_CASE("summarize-cache import demands full row coverage") {
  ConfigFixture fx;
  ConfigHandle cfg;
  REQUIRE(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) == MIXSUM_OK);
  std::string import_path = fx.dir.file("import.tsv");
  std::string partial;
  for (size_t i = 0; i + 1 < fx.pool.examples.size(); ++i) {
    partial += std::to_string(fx.pool.examples[i].id) +
               "\tan imported summary line.\n";
  }
  testsupport::write_file(import_path, partial);
  std::string cache = fx.dir.file("cache.tsv");
  CHECK(mixsum_summarize_cache(cfg.handle, "synth", cache.c_str(), "import",
                               import_path.c_str()) == MIXSUM_ERR_VALIDATION);
  int last_id = fx.pool.examples.back().id;
  CHECK(std::string(mixsum_last_error()).find(std::to_string(last_id)) !=
        std::string::npos);

  // Complete coverage succeeds; junk rows get a fallback summary instead of
  // the junk text.
  std::string full = partial + std::to_string(last_id) + "\tjunk\n";
  testsupport::write_file(import_path, full);
  REQUIRE(mixsum_summarize_cache(cfg.handle, "synth", cache.c_str(), "import",
                                 import_path.c_str()) == MIXSUM_OK);
  std::string content = testsupport::read_file(cache);
  CHECK(content.find("an imported summary line.") != std::string::npos);
  CHECK(content.find("\tjunk\n") == std::string::npos);
}

TEST_CASE("train, checkpoint and eval round-trip") {
  ConfigFixture fx;
  ConfigHandle cfg;
  REQUIRE(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) == MIXSUM_OK);
  double trained_accuracy = -1.0;
  REQUIRE(mixsum_train(cfg.handle, &trained_accuracy) == MIXSUM_OK);
  CHECK(trained_accuracy >= 0.0);
  CHECK(trained_accuracy <= 1.0);

  double eval_accuracy = -1.0;
  REQUIRE(mixsum_eval(cfg.handle, fx.dir.file("model.ckpt").c_str(),
                      &eval_accuracy) == MIXSUM_OK);
  CHECK(eval_accuracy == trained_accuracy);
  CHECK(!testsupport::read_file(fx.dir.file("history.jsonl")).empty());

  CHECK(mixsum_eval(cfg.handle, fx.dir.file("no_such.ckpt").c_str(),
                    &eval_accuracy) == MIXSUM_ERR_VALIDATION);
}

TEST_CASE("experiment and report through the C surface") {
  ConfigFixture fx;
  ConfigHandle cfg;
  REQUIRE(mixsum_config_load(fx.config_path.c_str(), &cfg.handle) == MIXSUM_OK);
  REQUIRE(mixsum_experiment(cfg.handle) == MIXSUM_OK);
  std::string results = fx.dir.file("results.jsonl");
  std::string store = testsupport::read_file(results);
  size_t lines = std::count(store.begin(), store.end(), '\n');
  CHECK(lines == 4);  // 2 modes x 2 seeds x 1 dataset

  std::string txt = fx.dir.file("report.txt");
  std::string csv = fx.dir.file("report.csv");
  REQUIRE(mixsum_report(results.c_str(), txt.c_str(), csv.c_str()) ==
          MIXSUM_OK);
  CHECK(testsupport::read_file(txt).find("Mixsum") != std::string::npos);
  CHECK(testsupport::read_file(csv).find("method,dataset") == 0);

  // An empty store has nothing to aggregate.
  CHECK(mixsum_report(fx.dir.file("missing.jsonl").c_str(), txt.c_str(),
                      csv.c_str()) == MIXSUM_ERR_VALIDATION);
}
