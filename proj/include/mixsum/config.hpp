#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixsum/harness.hpp"
#include "mixsum/losses.hpp"
#include "mixsum/model.hpp"
#include "mixsum/trainer.hpp"

namespace mixsum {

struct DatasetManifest {
  std::string name;
  std::string train_csv;
  std::optional<std::string> test_csv;  // absent: test drawn from train pool
  int num_classes = 0;
  std::vector<int> text_columns;
  std::optional<std::string> summary_cache;
  std::optional<std::string> bt_store;
};

/// The one artifact of record per run: dataset manifests plus every knob.
/// Unknown keys are rejected; referenced paths are resolved up front.
struct RunConfig {
  std::vector<DatasetManifest> datasets;

  int n_train = 80;
  int n_test = 1000;
  bool stratified = false;

  EncoderConfig encoder;
  TrainConfig train;
  std::string train_dataset;  // manifest name used by the train command

  std::string checkpoint_out = "checkpoint.bin";
  std::string history_out = "history.jsonl";

  std::vector<TrainMode> experiment_modes;
  std::vector<uint64_t> experiment_seeds;
  std::string results_path = "results.jsonl";
  std::string report_txt = "report.txt";
  std::string report_csv = "report.csv";
  int jobs = 1;

  const DatasetManifest& manifest(const std::string& name) const;
};

/// Parses and validates the JSON config document. Error messages name the
/// offending field.
RunConfig load_run_config(const std::string& path);

/// Loads a manifest's pools and caches from disk.
DatasetSpec load_dataset_spec(const DatasetManifest& manifest);

}  // namespace mixsum
