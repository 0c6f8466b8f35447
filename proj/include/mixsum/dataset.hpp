#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mixsum {

/// One labeled text sample. Labels are 0-based class indices.
struct Example {
  int id = 0;
  std::string text;
  int label = 0;
};

struct Dataset {
  std::string name;
  int num_classes = 0;
  std::vector<Example> examples;

  size_t size() const { return examples.size(); }

  /// Checks id uniqueness, label range and non-empty texts. Throws
  /// ValidationError on violation.
  void validate() const;
};

/// Ordered slice of a dataset; the unit consumed by the trainer.
struct Batch {
  std::vector<Example> examples;
};

/// Loads an RFC-4180-style CSV where column 0 is a 1-based class index and
/// the given text columns are joined by a single space. Ids are assigned by
/// row position.
Dataset load_csv_dataset(const std::string& path, int num_classes,
                         const std::vector<int>& text_columns,
                         const std::string& name = "");

/// Draws n_train + n_test examples uniformly without replacement; the two
/// outputs are disjoint by id. Deterministic given the seed. With
/// stratified=true each output approximates the pool's class proportions.
std::pair<Dataset, Dataset> subsample(const Dataset& dataset, int n_train,
                                      int n_test, uint64_t seed,
                                      bool stratified = false);

/// Partitions the dataset into batches; the final batch may be short.
/// shuffle=false preserves dataset order.
std::vector<Batch> make_batches(const Dataset& dataset, int batch_size,
                                uint64_t seed, bool shuffle);

}  // namespace mixsum
