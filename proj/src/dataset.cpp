#include "mixsum/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "mixsum/errors.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// RFC-4180-style parse of a whole document: quoted fields may contain
// commas, escaped quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& content,
                                                const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  size_t i = 0;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < content.size()) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        throw ValidationError(path + ": row " + std::to_string(rows.size() + 1) +
                              ": unexpected quote inside unquoted field");
      }
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_row();
    } else {
      field.push_back(c);
    }
    ++i;
  }
  if (in_quotes) {
    throw ValidationError(path + ": row " + std::to_string(rows.size() + 1) +
                          ": unterminated quoted field");
  }
  if (!field.empty() || !row.empty()) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    end_row();
  }
  return rows;
}

}  // namespace

void Dataset::validate() const {
  if (num_classes <= 0) throw ValidationError("dataset num_classes must be positive");
  std::set<int> ids;
  for (const Example& ex : examples) {
    if (!ids.insert(ex.id).second) {
      throw ValidationError("duplicate example id " + std::to_string(ex.id));
    }
    if (ex.label < 0 || ex.label >= num_classes) {
      throw ValidationError("example " + std::to_string(ex.id) +
                            ": label out of range");
    }
    if (trim(ex.text).empty()) {
      throw ValidationError("example " + std::to_string(ex.id) + ": empty text");
    }
  }
}

Dataset load_csv_dataset(const std::string& path, int num_classes,
                         const std::vector<int>& text_columns,
                         const std::string& name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  auto rows = parse_csv(buf.str(), path);

  Dataset ds;
  ds.name = name.empty() ? path : name;
  ds.num_classes = num_classes;
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string where = path + ": row " + std::to_string(r + 1);
    if (row.empty() || (row.size() == 1 && trim(row[0]).empty())) continue;
    std::string cls = trim(row[0]);
    int label_1based = 0;
    auto [p, ec] = std::from_chars(cls.data(), cls.data() + cls.size(),
                                   label_1based);
    if (ec != std::errc() || p != cls.data() + cls.size()) {
      throw ValidationError(where + ": class column is not an integer");
    }
    if (label_1based < 1 || label_1based > num_classes) {
      throw ValidationError(where + ": class index " +
                            std::to_string(label_1based) + " outside [1, " +
                            std::to_string(num_classes) + "]");
    }
    std::string text;
    for (int col : text_columns) {
      if (col < 0 || static_cast<size_t>(col) >= row.size()) {
        throw ValidationError(where + ": missing text column " +
                              std::to_string(col));
      }
      if (!text.empty()) text += " ";
      text += row[col];
    }
    text = trim(text);
    if (text.empty()) throw ValidationError(where + ": empty text");
    ds.examples.push_back({static_cast<int>(r), std::move(text),
                           label_1based - 1});
  }
  ds.validate();
  return ds;
}

namespace {

// Shuffled index order, optionally stratified: class groups are kept
// contiguous in shuffled order and consumed round-robin so any prefix
// approximates the pool's class proportions.
std::vector<size_t> sample_order(const Dataset& dataset, uint64_t seed,
                                 bool stratified) {
  Rng rng(derive_seed(seed, 0x5a3c));
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});
  rng.shuffle(order);
  if (!stratified) return order;

  std::vector<std::vector<size_t>> by_class(dataset.num_classes);
  for (size_t idx : order) by_class[dataset.examples[idx].label].push_back(idx);
  std::vector<size_t> result;
  result.reserve(order.size());
  std::vector<size_t> cursor(by_class.size(), 0);
  // Round-robin by remaining proportion: at each pick take the class whose
  // consumed fraction is lowest.
  while (result.size() < order.size()) {
    int best = -1;
    double best_frac = 2.0;
    for (size_t c = 0; c < by_class.size(); ++c) {
      if (cursor[c] >= by_class[c].size()) continue;
      double frac = static_cast<double>(cursor[c]) /
                    static_cast<double>(by_class[c].size());
      if (frac < best_frac) {
        best_frac = frac;
        best = static_cast<int>(c);
      }
    }
    result.push_back(by_class[best][cursor[best]++]);
  }
  return result;
}

}  // namespace

std::pair<Dataset, Dataset> subsample(const Dataset& dataset, int n_train,
                                      int n_test, uint64_t seed,
                                      bool stratified) {
  if (n_train < 0 || n_test < 0) {
    throw ValidationError("subsample sizes must be non-negative");
  }
  if (static_cast<size_t>(n_train) + static_cast<size_t>(n_test) >
      dataset.size()) {
    throw ValidationError("subsample: requested " +
                          std::to_string(n_train + n_test) +
                          " examples from a pool of " +
                          std::to_string(dataset.size()));
  }
  auto order = sample_order(dataset, seed, stratified);
  Dataset train{dataset.name, dataset.num_classes, {}};
  Dataset test{dataset.name, dataset.num_classes, {}};
  for (int i = 0; i < n_train; ++i) {
    train.examples.push_back(dataset.examples[order[i]]);
  }
  for (int i = 0; i < n_test; ++i) {
    test.examples.push_back(dataset.examples[order[n_train + i]]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<Batch> make_batches(const Dataset& dataset, int batch_size,
                                uint64_t seed, bool shuffle) {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (dataset.examples.empty()) throw ValidationError("cannot batch an empty dataset");
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});
  if (shuffle) {
    Rng rng(derive_seed(seed, 0xba7c));
    rng.shuffle(order);
  }
  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size();
       start += static_cast<size_t>(batch_size)) {
    Batch b;
    size_t stop = std::min(order.size(), start + static_cast<size_t>(batch_size));
    for (size_t i = start; i < stop; ++i) {
      b.examples.push_back(dataset.examples[order[i]]);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace mixsum
