#include "mixsum/augmentor.hpp"

#include <fstream>
#include <numeric>

#include "mixsum/errors.hpp"

namespace mixsum {

namespace {

std::string summarize_or_throw(const SummaryFn& summarize, const Example& ex) {
  try {
    return summarize(ex);
  } catch (const std::exception& e) {
    throw RuntimeFailure("augmentation failed for example " +
                         std::to_string(ex.id) + ": " + e.what());
  }
}

}  // namespace

BtStore BtStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open back-translation store: " + path);
  BtStore store;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": expected row_index<TAB>text");
    }
    store.entries_[std::stoi(line.substr(0, tab))] = line.substr(tab + 1);
  }
  return store;
}

void BtStore::put(int id, const std::string& text) { entries_[id] = text; }

std::optional<std::string> BtStore::lookup(int id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Eigen::VectorXd one_hot(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw ValidationError("one_hot: label out of range");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_classes);
  v(label) = 1.0;
  return v;
}

AugmentedBatch augment_sum(const Batch& batch, const SummaryFn& summarize,
                           int num_classes) {
  const int n = static_cast<int>(batch.examples.size());
  if (n < 1) throw ValidationError("augment_sum: empty batch");
  AugmentedBatch out;
  out.mode = AugMode::sum;
  out.batch_n = n;
  for (const Example& ex : batch.examples) {
    out.texts.push_back(ex.text);
    out.ids.push_back(ex.id);
    out.labels_primary.push_back(one_hot(ex.label, num_classes));
  }
  for (const Example& ex : batch.examples) {
    out.texts.push_back(summarize_or_throw(summarize, ex));
    out.ids.push_back(ex.id);
    out.labels_primary.push_back(one_hot(ex.label, num_classes));
  }
  return out;
}

AugmentedBatch augment_bt(const Batch& batch, const BtStore& store,
                          int num_classes) {
  const int n = static_cast<int>(batch.examples.size());
  if (n < 1) throw ValidationError("augment_bt: empty batch");
  AugmentedBatch out;
  out.mode = AugMode::bt;
  out.batch_n = n;
  for (const Example& ex : batch.examples) {
    out.texts.push_back(ex.text);
    out.ids.push_back(ex.id);
    out.labels_primary.push_back(one_hot(ex.label, num_classes));
  }
  for (const Example& ex : batch.examples) {
    auto bt = store.lookup(ex.id);
    if (!bt) {
      throw RuntimeFailure("back-translation store has no entry for example " +
                           std::to_string(ex.id));
    }
    out.texts.push_back(*bt);
    out.ids.push_back(ex.id);
    out.labels_primary.push_back(one_hot(ex.label, num_classes));
  }
  return out;
}

AugmentedBatch augment_sum_bt(const Batch& batch, const SummaryFn& summarize,
                              const BtStore& store, int num_classes) {
  AugmentedBatch out = augment_sum(batch, summarize, num_classes);
  out.mode = AugMode::sum_bt;
  for (const Example& ex : batch.examples) {
    auto bt = store.lookup(ex.id);
    if (!bt) {
      throw RuntimeFailure("back-translation store has no entry for example " +
                           std::to_string(ex.id));
    }
    out.texts.push_back(*bt);
    out.ids.push_back(ex.id);
    out.labels_primary.push_back(one_hot(ex.label, num_classes));
  }
  return out;
}

std::vector<int> mix_pairing(int n, Rng& rng) {
  if (n < 2) {
    throw ValidationError("mix_pairing: needs at least 2 samples per batch");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  // Swapping a fixed point with its successor cannot create a new one:
  // the successor receives i != i+1, and perm[i+1] == i would contradict
  // perm[i] == i.
  for (int i = 0; i < n; ++i) {
    if (perm[i] == i) std::swap(perm[i], perm[(i + 1) % n]);
  }
  return perm;
}

Eigen::VectorXd mix_labels(const Eigen::VectorXd& y_i,
                           const Eigen::VectorXd& y_j) {
  if (y_i.size() != y_j.size()) {
    throw ValidationError("mix_labels: dimension mismatch");
  }
  return 0.5 * y_i + 0.5 * y_j;
}

AugmentedBatch augment_mixsum(const Batch& batch, const SummaryFn& summarize,
                              Rng& rng, int num_classes) {
  const int n = static_cast<int>(batch.examples.size());
  if (n < 2) {
    throw ValidationError("augment_mixsum: needs at least 2 samples per batch");
  }
  AugmentedBatch out;
  out.mode = AugMode::mixsum;
  out.batch_n = n;
  out.partner = mix_pairing(n, rng);
  for (const Example& ex : batch.examples) {
    out.summaries.push_back(summarize_or_throw(summarize, ex));
  }
  for (const Example& ex : batch.examples) {
    out.texts.push_back(ex.text);
    out.ids.push_back(ex.id);
    out.labels_primary.push_back(one_hot(ex.label, num_classes));
    out.labels_partner.push_back(one_hot(ex.label, num_classes));
  }
  for (int i = 0; i < n; ++i) {
    int j = out.partner[i];
    out.texts.push_back(out.summaries[i] + " " + out.summaries[j]);
    out.ids.push_back(batch.examples[i].id);
    out.labels_primary.push_back(one_hot(batch.examples[i].label, num_classes));
    out.labels_partner.push_back(one_hot(batch.examples[j].label, num_classes));
  }
  return out;
}

Eigen::VectorXd lisf_mix(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ValidationError("lisf_mix: dimension mismatch");
  }
  return 0.5 * a + 0.5 * b;
}

}  // namespace mixsum
