#include "mixsum/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mixsum/errors.hpp"

namespace mixsum {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError("config: unknown key '" + where + it.key() + "'");
    }
  }
}

template <typename T>
T get_field(const json& obj, const std::string& where, const std::string& key,
            T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: bad value for '" + where + key + "'");
  }
}

template <typename T>
T require_field(const json& obj, const std::string& where,
                const std::string& key) {
  if (!obj.contains(key)) {
    throw ValidationError("config: missing required key '" + where + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: bad value for '" + where + key + "'");
  }
}

void require_readable(const std::string& path, const std::string& field) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("config: " + field + " points to a missing file: " +
                          path);
  }
}

DatasetManifest parse_manifest(const json& obj, size_t index) {
  std::string where = "datasets[" + std::to_string(index) + "].";
  reject_unknown_keys(obj, where,
                      {"name", "train_csv", "test_csv", "num_classes",
                       "text_columns", "summary_cache", "bt_store"});
  DatasetManifest m;
  m.name = require_field<std::string>(obj, where, "name");
  m.train_csv = require_field<std::string>(obj, where, "train_csv");
  m.num_classes = require_field<int>(obj, where, "num_classes");
  m.text_columns = get_field<std::vector<int>>(obj, where, "text_columns",
                                               std::vector<int>{1});
  if (obj.contains("test_csv")) {
    m.test_csv = require_field<std::string>(obj, where, "test_csv");
  }
  if (obj.contains("summary_cache")) {
    m.summary_cache = require_field<std::string>(obj, where, "summary_cache");
  }
  if (obj.contains("bt_store")) {
    m.bt_store = require_field<std::string>(obj, where, "bt_store");
  }
  return m;
}

}  // namespace

const DatasetManifest& RunConfig::manifest(const std::string& name) const {
  for (const auto& m : datasets) {
    if (m.name == name) return m;
  }
  throw ValidationError("config: no dataset manifest named '" + name + "'");
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ValidationError("config: document must be an object");
  reject_unknown_keys(doc, "",
                      {"datasets", "sampling", "encoder", "train", "loss",
                       "output", "experiment"});

  RunConfig config;

  const json& datasets = doc.contains("datasets") ? doc.at("datasets") : json::array();
  if (!datasets.is_array() || datasets.empty()) {
    throw ValidationError("config: 'datasets' must be a non-empty array");
  }
  for (size_t i = 0; i < datasets.size(); ++i) {
    config.datasets.push_back(parse_manifest(datasets[i], i));
  }

  if (doc.contains("sampling")) {
    const json& s = doc.at("sampling");
    reject_unknown_keys(s, "sampling.", {"n_train", "n_test", "stratified"});
    config.n_train = get_field<int>(s, "sampling.", "n_train", config.n_train);
    config.n_test = get_field<int>(s, "sampling.", "n_test", config.n_test);
    config.stratified =
        get_field<bool>(s, "sampling.", "stratified", config.stratified);
  }

  if (doc.contains("encoder")) {
    const json& e = doc.at("encoder");
    reject_unknown_keys(e, "encoder.",
                        {"vocab_buckets", "embed_dim", "backbone_dim",
                         "contrastive_dim"});
    config.encoder.vocab_buckets = get_field<int>(
        e, "encoder.", "vocab_buckets", config.encoder.vocab_buckets);
    config.encoder.embed_dim =
        get_field<int>(e, "encoder.", "embed_dim", config.encoder.embed_dim);
    config.encoder.backbone_dim = get_field<int>(
        e, "encoder.", "backbone_dim", config.encoder.backbone_dim);
    config.encoder.contrastive_dim = get_field<int>(
        e, "encoder.", "contrastive_dim", config.encoder.contrastive_dim);
  }

  if (doc.contains("loss")) {
    const json& l = doc.at("loss");
    reject_unknown_keys(l, "loss.", {"lambda", "tau", "ce_form", "epsilon"});
    config.train.loss.lambda =
        get_field<double>(l, "loss.", "lambda", config.train.loss.lambda);
    config.train.loss.tau =
        get_field<double>(l, "loss.", "tau", config.train.loss.tau);
    config.train.loss.epsilon =
        get_field<double>(l, "loss.", "epsilon", config.train.loss.epsilon);
    if (l.contains("ce_form")) {
      config.train.loss.ce_form =
          parse_ce_form(require_field<std::string>(l, "loss.", "ce_form"));
    }
    config.train.loss.validate();
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown_keys(t, "train.",
                        {"dataset", "mode", "batch_size", "max_lr",
                         "warmup_fraction", "epochs", "seed", "shuffle"});
    config.train_dataset = get_field<std::string>(t, "train.", "dataset", "");
    if (t.contains("mode")) {
      config.train.mode =
          parse_train_mode(require_field<std::string>(t, "train.", "mode"));
    }
    config.train.batch_size =
        get_field<int>(t, "train.", "batch_size", config.train.batch_size);
    config.train.max_lr =
        get_field<double>(t, "train.", "max_lr", config.train.max_lr);
    config.train.warmup_fraction = get_field<double>(
        t, "train.", "warmup_fraction", config.train.warmup_fraction);
    config.train.epochs =
        get_field<int>(t, "train.", "epochs", config.train.epochs);
    config.train.seed =
        get_field<uint64_t>(t, "train.", "seed", config.train.seed);
    config.train.shuffle =
        get_field<bool>(t, "train.", "shuffle", config.train.shuffle);
  }
  if (config.train_dataset.empty()) config.train_dataset = config.datasets[0].name;
  config.manifest(config.train_dataset);  // must resolve

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown_keys(o, "output.", {"checkpoint", "history"});
    config.checkpoint_out =
        get_field<std::string>(o, "output.", "checkpoint", config.checkpoint_out);
    config.history_out =
        get_field<std::string>(o, "output.", "history", config.history_out);
  }

  if (doc.contains("experiment")) {
    const json& x = doc.at("experiment");
    reject_unknown_keys(x, "experiment.",
                        {"modes", "seeds", "results", "report_txt",
                         "report_csv", "jobs"});
    for (const auto& name : get_field<std::vector<std::string>>(
             x, "experiment.", "modes", {})) {
      config.experiment_modes.push_back(parse_train_mode(name));
    }
    config.experiment_seeds = get_field<std::vector<uint64_t>>(
        x, "experiment.", "seeds", config.experiment_seeds);
    config.results_path =
        get_field<std::string>(x, "experiment.", "results", config.results_path);
    config.report_txt = get_field<std::string>(x, "experiment.", "report_txt",
                                               config.report_txt);
    config.report_csv = get_field<std::string>(x, "experiment.", "report_csv",
                                               config.report_csv);
    config.jobs = get_field<int>(x, "experiment.", "jobs", config.jobs);
  }
  if (config.experiment_seeds.empty()) {
    for (uint64_t s = 0; s < 10; ++s) config.experiment_seeds.push_back(s);
  }
  if (config.experiment_modes.empty()) {
    config.experiment_modes = {TrainMode::ce_only, TrainMode::mixsum};
  }

  // Resolve every referenced input path up front.
  for (const auto& m : config.datasets) {
    require_readable(m.train_csv, m.name + ".train_csv");
    if (m.test_csv) require_readable(*m.test_csv, m.name + ".test_csv");
    if (m.summary_cache) require_readable(*m.summary_cache, m.name + ".summary_cache");
    if (m.bt_store) require_readable(*m.bt_store, m.name + ".bt_store");
  }

  config.train.validate();
  config.encoder.num_classes = config.manifest(config.train_dataset).num_classes;
  return config;
}

DatasetSpec load_dataset_spec(const DatasetManifest& manifest) {
  DatasetSpec spec;
  spec.name = manifest.name;
  spec.train_pool = load_csv_dataset(manifest.train_csv, manifest.num_classes,
                                     manifest.text_columns, manifest.name);
  if (manifest.test_csv) {
    spec.test_pool = load_csv_dataset(*manifest.test_csv, manifest.num_classes,
                                      manifest.text_columns, manifest.name);
    // Ids must not collide with the training pool's row indices.
    int offset = static_cast<int>(spec.train_pool.size());
    for (auto& ex : spec.test_pool.examples) ex.id += offset;
  }
  if (manifest.summary_cache) {
    spec.summary_cache = SummaryCache::load(*manifest.summary_cache);
  }
  if (manifest.bt_store) {
    spec.bt_store = BtStore::load(*manifest.bt_store);
  }
  return spec;
}

}  // namespace mixsum
