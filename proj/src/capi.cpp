#include "mixsum.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "mixsum/config.hpp"
#include "mixsum/errors.hpp"
#include "mixsum/harness.hpp"
#include "mixsum/rng.hpp"
#include "mixsum/summarizer.hpp"
#include "mixsum/trainer.hpp"

struct mixsum_config {
  mixsum::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

mixsum_status fail(mixsum_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
mixsum_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MIXSUM_OK;
  } catch (const mixsum::ValidationError& e) {
    return fail(MIXSUM_ERR_VALIDATION, e.what());
  } catch (const std::exception& e) {
    return fail(MIXSUM_ERR_RUNTIME, e.what());
  }
}

mixsum_status require(bool ok, const char* what) {
  if (ok) return MIXSUM_OK;
  return fail(MIXSUM_ERR_VALIDATION, std::string("null argument: ") + what);
}

// Sampled (train, test) split for the configured dataset, mirroring the
// harness' per-cell sampling.
std::pair<mixsum::Dataset, mixsum::Dataset> sampled_split(
    const mixsum::RunConfig& config, const mixsum::DatasetSpec& spec) {
  if (spec.test_pool.examples.empty()) {
    return mixsum::subsample(spec.train_pool, config.n_train, config.n_test,
                             config.train.seed, config.stratified);
  }
  auto train = mixsum::subsample(spec.train_pool, config.n_train, 0,
                                 config.train.seed, config.stratified)
                   .first;
  auto test = mixsum::subsample(spec.test_pool, config.n_test, 0,
                                mixsum::derive_seed(config.train.seed, 0x7e57),
                                config.stratified)
                  .first;
  return {std::move(train), std::move(test)};
}

mixsum::SummaryFn cached_summary_fn(const mixsum::DatasetSpec& spec) {
  auto memo = std::make_shared<std::unordered_map<int, std::string>>();
  auto cache = std::make_shared<mixsum::SummaryCache>(
      spec.summary_cache ? *spec.summary_cache : mixsum::SummaryCache());
  return [memo, cache](const mixsum::Example& ex) {
    auto it = memo->find(ex.id);
    if (it != memo->end()) return it->second;
    std::string summary =
        mixsum::summarize_with_fallback(ex.text, *cache).summary;
    (*memo)[ex.id] = summary;
    return summary;
  };
}

}  // namespace

extern "C" {

const char* mixsum_last_error(void) { return g_last_error.c_str(); }

mixsum_status mixsum_config_load(const char* path, mixsum_config** out) {
  if (auto s = require(path, "path"); s != MIXSUM_OK) return s;
  if (auto s = require(out, "out"); s != MIXSUM_OK) return s;
  return guarded([&] {
    auto* handle = new mixsum_config{mixsum::load_run_config(path)};
    *out = handle;
  });
}

void mixsum_config_free(mixsum_config* config) { delete config; }

mixsum_status mixsum_config_set_seed(mixsum_config* config, uint64_t seed) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  config->config.train.seed = seed;
  return MIXSUM_OK;
}

mixsum_status mixsum_config_set_jobs(mixsum_config* config, int jobs) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  if (jobs < 1) return fail(MIXSUM_ERR_VALIDATION, "jobs must be >= 1");
  config->config.jobs = jobs;
  return MIXSUM_OK;
}

mixsum_status mixsum_config_set_dataset(mixsum_config* config,
                                        const char* name) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  if (auto s = require(name, "name"); s != MIXSUM_OK) return s;
  return guarded([&] {
    config->config.manifest(name);  // must resolve
    config->config.train_dataset = name;
    config->config.encoder.num_classes =
        config->config.manifest(name).num_classes;
  });
}

mixsum_status mixsum_textrank(const char* text, int k, char** out) {
  if (auto s = require(text, "text"); s != MIXSUM_OK) return s;
  if (auto s = require(out, "out"); s != MIXSUM_OK) return s;
  return guarded([&] {
    std::string summary = mixsum::textrank_summarize(text, k).summary;
    *out = new char[summary.size() + 1];
    std::memcpy(*out, summary.c_str(), summary.size() + 1);
  });
}

void mixsum_string_free(char* s) { delete[] s; }

mixsum_status mixsum_summarize_cache(const mixsum_config* config,
                                     const char* dataset_name,
                                     const char* output_path,
                                     const char* source,
                                     const char* import_file) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  if (auto s = require(dataset_name, "dataset_name"); s != MIXSUM_OK) return s;
  if (auto s = require(output_path, "output_path"); s != MIXSUM_OK) return s;
  if (auto s = require(source, "source"); s != MIXSUM_OK) return s;
  return guarded([&] {
    const auto& manifest = config->config.manifest(dataset_name);
    mixsum::Dataset pool = mixsum::load_csv_dataset(
        manifest.train_csv, manifest.num_classes, manifest.text_columns,
        manifest.name);
    mixsum::SummaryCache cache;
    std::string src(source);
    if (src == "textrank") {
      for (const auto& ex : pool.examples) {
        auto record = mixsum::textrank_summarize(ex.text);
        cache.put(record.source_hash, record.summary);
      }
    } else if (src == "import") {
      if (!import_file) {
        throw mixsum::ValidationError("import source needs an import file");
      }
      std::ifstream in(import_file, std::ios::binary);
      if (!in) {
        throw mixsum::ValidationError(std::string("cannot open import file: ") +
                                      import_file);
      }
      std::unordered_map<int, std::string> imported;
      std::string line;
      size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
          throw mixsum::ValidationError(
              std::string(import_file) + ": line " + std::to_string(line_no) +
              ": expected row_index<TAB>summary");
        }
        imported[std::stoi(line.substr(0, tab))] = line.substr(tab + 1);
      }
      std::vector<int> missing;
      for (const auto& ex : pool.examples) {
        if (!imported.count(ex.id)) missing.push_back(ex.id);
      }
      if (!missing.empty()) {
        std::ostringstream msg;
        msg << "import file does not cover rows:";
        for (int id : missing) msg << ' ' << id;
        throw mixsum::ValidationError(msg.str());
      }
      for (const auto& ex : pool.examples) {
        mixsum::SummaryCache staged;
        staged.put(mixsum::sha256_hex(ex.text), imported.at(ex.id));
        auto record = mixsum::summarize_with_fallback(ex.text, staged);
        cache.put(mixsum::sha256_hex(ex.text), record.summary);
      }
    } else {
      throw mixsum::ValidationError("summarize-cache source must be "
                                    "'textrank' or 'import'");
    }
    cache.save(output_path);
  });
}

mixsum_status mixsum_train(const mixsum_config* config, double* accuracy_out) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  return guarded([&] {
    const mixsum::RunConfig& rc = config->config;
    auto spec = mixsum::load_dataset_spec(rc.manifest(rc.train_dataset));
    auto [train_split, test_split] = sampled_split(rc, spec);
    mixsum::SummaryFn summarize = cached_summary_fn(spec);
    const mixsum::BtStore* bt = spec.bt_store ? &*spec.bt_store : nullptr;
    auto output =
        mixsum::train(train_split, rc.encoder, rc.train, &summarize, bt);
    output.params.store.save(rc.checkpoint_out);
    mixsum::write_history(rc.history_out, output.history);
    double accuracy = mixsum::evaluate(output.params, test_split);
    if (accuracy_out) *accuracy_out = accuracy;
  });
}

mixsum_status mixsum_eval(const mixsum_config* config,
                          const char* checkpoint_path, double* accuracy_out) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  if (auto s = require(checkpoint_path, "checkpoint_path"); s != MIXSUM_OK) {
    return s;
  }
  if (auto s = require(accuracy_out, "accuracy_out"); s != MIXSUM_OK) return s;
  return guarded([&] {
    const mixsum::RunConfig& rc = config->config;
    auto spec = mixsum::load_dataset_spec(rc.manifest(rc.train_dataset));
    auto [train_split, test_split] = sampled_split(rc, spec);
    (void)train_split;
    mixsum::ModelParams params;
    params.config = rc.encoder;
    params.store = mixsum::ParamStore::load(checkpoint_path);
    *accuracy_out = mixsum::evaluate(params, test_split);
  });
}

mixsum_status mixsum_experiment(const mixsum_config* config) {
  if (auto s = require(config, "config"); s != MIXSUM_OK) return s;
  return guarded([&] {
    const mixsum::RunConfig& rc = config->config;
    mixsum::ExperimentSpec spec;
    spec.modes = rc.experiment_modes;
    spec.seeds = rc.experiment_seeds;
    spec.n_train = rc.n_train;
    spec.n_test = rc.n_test;
    spec.stratified = rc.stratified;
    spec.encoder = rc.encoder;
    spec.train_template = rc.train;
    spec.results_path = rc.results_path;
    spec.jobs = rc.jobs;
    std::vector<mixsum::DatasetSpec> datasets;
    for (const auto& manifest : rc.datasets) {
      datasets.push_back(mixsum::load_dataset_spec(manifest));
    }
    mixsum::run_experiment(spec, datasets);
  });
}

mixsum_status mixsum_report(const char* results_path, const char* report_txt,
                            const char* report_csv) {
  if (auto s = require(results_path, "results_path"); s != MIXSUM_OK) return s;
  return guarded([&] {
    auto results = mixsum::load_results(results_path);
    auto aggregates = mixsum::aggregate(results);
    if (report_txt) {
      std::ofstream out(report_txt, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw mixsum::RuntimeFailure(std::string("cannot write report: ") +
                                     report_txt);
      }
      out << mixsum::render_report_text(aggregates);
    }
    if (report_csv) {
      std::ofstream out(report_csv, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw mixsum::RuntimeFailure(std::string("cannot write report: ") +
                                     report_csv);
      }
      out << mixsum::render_report_csv(aggregates);
    }
  });
}

}  // extern "C"
