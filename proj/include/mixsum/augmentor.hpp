#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

enum class AugMode { none, sum, bt, sum_bt, mixsum };

/// Batch after augmentation. Layout is [originals | augmentations]:
/// position batch_n + i augments position i (and 2*batch_n + i for the
/// tripled sum_bt mode). labels_partner is populated only in mixsum mode.
struct AugmentedBatch {
  AugMode mode = AugMode::none;
  int batch_n = 0;  // N originals
  std::vector<std::string> texts;
  std::vector<int> ids;
  std::vector<Eigen::VectorXd> labels_primary;
  std::vector<Eigen::VectorXd> labels_partner;
  // mixsum bookkeeping: per-original summary and mixing partner, kept so the
  // feature-interpolation variant can mix at the encoder level.
  std::vector<std::string> summaries;
  std::vector<int> partner;
};

using SummaryFn = std::function<std::string(const Example&)>;

/// `row_index<TAB>text` store of offline back-translations, keyed by
/// example id.
class BtStore {
 public:
  static BtStore load(const std::string& path);
  void put(int id, const std::string& text);
  std::optional<std::string> lookup(int id) const;
  size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<int, std::string> entries_;
};

Eigen::VectorXd one_hot(int label, int num_classes);

/// [x_1..x_N, s_1..s_N] with labels duplicated.
AugmentedBatch augment_sum(const Batch& batch, const SummaryFn& summarize,
                           int num_classes);

/// Same layout with back-translations as augmentations.
AugmentedBatch augment_bt(const Batch& batch, const BtStore& store,
                          int num_classes);

/// Tripled batch [x | summaries | back-translations], labels tripled.
AugmentedBatch augment_sum_bt(const Batch& batch, const SummaryFn& summarize,
                              const BtStore& store, int num_classes);

/// Uniform shuffle of 0..n-1 with fixed points repaired by swapping with
/// the successor modulo n, so no sample pairs with itself.
std::vector<int> mix_pairing(int n, Rng& rng);

/// 0.5*y_i + 0.5*y_j over one-hot inputs.
Eigen::VectorXd mix_labels(const Eigen::VectorXd& y_i,
                           const Eigen::VectorXd& y_j);

/// Augmentation i is summary(x_i) + " " + summary(x_partner(i)).
/// labels_primary repeats the original labels; labels_partner carries the
/// partner's label on the second half.
AugmentedBatch augment_mixsum(const Batch& batch, const SummaryFn& summarize,
                              Rng& rng, int num_classes);

/// Feature-space midpoint, the interpolation alternative to concatenation.
Eigen::VectorXd lisf_mix(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace mixsum
