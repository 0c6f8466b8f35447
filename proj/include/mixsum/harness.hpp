#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/summarizer.hpp"
#include "mixsum/trainer.hpp"

namespace mixsum {

/// One dataset cell of the grid: pools to sample from plus its caches.
struct DatasetSpec {
  std::string name;
  Dataset train_pool;
  Dataset test_pool;
  std::optional<SummaryCache> summary_cache;
  std::optional<BtStore> bt_store;
};

struct ExperimentSpec {
  std::vector<TrainMode> modes;
  std::vector<uint64_t> seeds;
  int n_train = 80;
  int n_test = 1000;
  bool stratified = false;
  EncoderConfig encoder;     // num_classes is taken per dataset
  TrainConfig train_template;
  std::string results_path;  // line-delimited JSON store; resumable
  int jobs = 1;

  void validate() const;
};

struct RunResult {
  TrainMode mode = TrainMode::ce_only;
  std::string dataset;
  uint64_t seed = 0;
  double test_accuracy = 0.0;
  double wall_time_seconds = 0.0;  // not persisted in the results store
  bool failed = false;
  std::string error;
};

struct Aggregate {
  TrainMode mode = TrainMode::ce_only;
  std::string dataset;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  int count = 0;
};

/// Runs every (mode, dataset, seed) cell not already present in the results
/// store; each cell is seeded independently. Failures are recorded and the
/// grid continues. Results are appended to the store in canonical cell
/// order regardless of worker completion order.
std::vector<RunResult> run_experiment(const ExperimentSpec& spec,
                                      const std::vector<DatasetSpec>& datasets);

std::vector<RunResult> load_results(const std::string& path);

std::vector<Aggregate> aggregate(const std::vector<RunResult>& results);

/// Plain-text table: modes as rows, datasets as columns, best column value
/// flagged. Deterministic for identical aggregates.
std::string render_report_text(const std::vector<Aggregate>& aggregates);
std::string render_report_csv(const std::vector<Aggregate>& aggregates);

}  // namespace mixsum
