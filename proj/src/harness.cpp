#include "mixsum/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "mixsum/errors.hpp"
#include "mixsum/rng.hpp"

namespace mixsum {

void ExperimentSpec::validate() const {
  if (modes.empty()) throw ValidationError("experiment.modes must be non-empty");
  if (seeds.empty()) throw ValidationError("experiment.seeds must be non-empty");
  std::set<uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw ValidationError("experiment.seeds must be distinct");
  }
  if (n_train < 1 || n_test < 1) {
    throw ValidationError("experiment sampling sizes must be positive");
  }
  if (jobs < 1) throw ValidationError("experiment.jobs must be >= 1");
  if (results_path.empty()) {
    throw ValidationError("experiment.results_path must be set");
  }
}

namespace {

struct Cell {
  TrainMode mode;
  const DatasetSpec* dataset;
  uint64_t seed;
};

std::string cell_key(TrainMode mode, const std::string& dataset,
                     uint64_t seed) {
  return train_mode_name(mode) + "|" + dataset + "|" + std::to_string(seed);
}

nlohmann::json result_json(const RunResult& r) {
  nlohmann::json j{{"mode", train_mode_name(r.mode)},
                   {"dataset", r.dataset},
                   {"seed", r.seed}};
  if (r.failed) {
    j["failed"] = true;
    j["error"] = r.error;
  } else {
    j["test_accuracy"] = r.test_accuracy;
  }
  return j;
}

// Builds the per-run summary function: cache-backed with TextRank fallback,
// memoized by example id for the duration of the run.
SummaryFn make_summary_fn(const DatasetSpec& dataset) {
  auto memo = std::make_shared<std::unordered_map<int, std::string>>();
  const SummaryCache* cache =
      dataset.summary_cache ? &*dataset.summary_cache : nullptr;
  static const SummaryCache empty_cache;
  if (!cache) cache = &empty_cache;
  return [memo, cache](const Example& ex) {
    auto it = memo->find(ex.id);
    if (it != memo->end()) return it->second;
    std::string summary = summarize_with_fallback(ex.text, *cache).summary;
    (*memo)[ex.id] = summary;
    return summary;
  };
}

RunResult run_cell(const ExperimentSpec& spec, const Cell& cell) {
  RunResult result;
  result.mode = cell.mode;
  result.dataset = cell.dataset->name;
  result.seed = cell.seed;
  auto start = std::chrono::steady_clock::now();
  try {
    Dataset train_split, test_split;
    if (cell.dataset->test_pool.examples.empty()) {
      std::tie(train_split, test_split) =
          subsample(cell.dataset->train_pool, spec.n_train, spec.n_test,
                    cell.seed, spec.stratified);
    } else {
      train_split = subsample(cell.dataset->train_pool, spec.n_train, 0,
                              cell.seed, spec.stratified)
                        .first;
      test_split = subsample(cell.dataset->test_pool, spec.n_test, 0,
                             derive_seed(cell.seed, 0x7e57), spec.stratified)
                       .first;
    }

    TrainConfig config = spec.train_template;
    config.mode = cell.mode;
    config.seed = cell.seed;

    SummaryFn summarize = make_summary_fn(*cell.dataset);
    const BtStore* bt =
        cell.dataset->bt_store ? &*cell.dataset->bt_store : nullptr;

    TrainOutput trained =
        train(train_split, spec.encoder, config, &summarize, bt);
    result.test_accuracy = evaluate(trained.params, test_split);
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace

std::vector<RunResult> load_results(const std::string& path) {
  std::vector<RunResult> results;
  std::ifstream in(path, std::ios::binary);
  if (!in) return results;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": not a result record");
    }
    RunResult r;
    r.mode = parse_train_mode(j.at("mode").get<std::string>());
    r.dataset = j.at("dataset").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    if (j.value("failed", false)) {
      r.failed = true;
      r.error = j.value("error", "");
    } else {
      r.test_accuracy = j.at("test_accuracy").get<double>();
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<RunResult> run_experiment(const ExperimentSpec& spec,
                                      const std::vector<DatasetSpec>& datasets) {
  spec.validate();
  if (datasets.empty()) throw ValidationError("experiment: no datasets");

  std::vector<RunResult> existing = load_results(spec.results_path);
  std::set<std::string> done_keys;
  for (const RunResult& r : existing) {
    done_keys.insert(cell_key(r.mode, r.dataset, r.seed));
  }

  // Canonical cell order: dataset, then mode, then seed.
  std::vector<Cell> cells;
  for (const DatasetSpec& ds : datasets) {
    for (TrainMode mode : spec.modes) {
      for (uint64_t seed : spec.seeds) {
        if (!done_keys.count(cell_key(mode, ds.name, seed))) {
          cells.push_back({mode, &ds, seed});
        }
      }
    }
  }

  std::vector<std::optional<RunResult>> finished(cells.size());
  size_t next_flush = 0;
  std::mutex flush_mutex;
  std::ofstream store(spec.results_path, std::ios::binary | std::ios::app);
  std::ofstream timings(spec.results_path + ".timings",
                        std::ios::binary | std::ios::app);
  if (!cells.empty() && !store) {
    throw RuntimeFailure("cannot open results store: " + spec.results_path);
  }
  std::vector<RunResult> fresh(cells.size());

  // Workers may finish out of order; records are flushed to the store in
  // canonical cell order so reruns produce byte-identical files.
  auto flush_ready = [&](size_t index, RunResult result) {
    std::lock_guard<std::mutex> lock(flush_mutex);
    fresh[index] = result;
    finished[index] = std::move(result);
    while (next_flush < finished.size() && finished[next_flush]) {
      const RunResult& r = *finished[next_flush];
      store << result_json(r).dump() << '\n';
      store.flush();
      timings << train_mode_name(r.mode) << '\t' << r.dataset << '\t' << r.seed
              << '\t' << r.wall_time_seconds << '\n';
      ++next_flush;
    }
  };

  const int workers = std::min<int>(spec.jobs, std::max<size_t>(cells.size(), 1));
  std::atomic<size_t> next_cell{0};
  auto worker = [&] {
    while (true) {
      size_t index = next_cell.fetch_add(1);
      if (index >= cells.size()) break;
      flush_ready(index, run_cell(spec, cells[index]));
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<RunResult> all = std::move(existing);
  all.insert(all.end(), fresh.begin(), fresh.end());
  return all;
}

std::vector<Aggregate> aggregate(const std::vector<RunResult>& results) {
  std::map<std::pair<int, std::string>, std::vector<double>> groups;
  for (const RunResult& r : results) {
    if (r.failed) continue;
    groups[{static_cast<int>(r.mode), r.dataset}].push_back(r.test_accuracy);
  }
  if (groups.empty()) {
    throw ValidationError("aggregate: no successful results");
  }
  std::vector<Aggregate> aggregates;
  for (const auto& [key, values] : groups) {
    Aggregate agg;
    agg.mode = static_cast<TrainMode>(key.first);
    agg.dataset = key.second;
    agg.count = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    agg.mean = sum / values.size();
    double sq = 0.0;
    for (double v : values) sq += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(sq / values.size());  // population std
    aggregates.push_back(std::move(agg));
  }
  return aggregates;
}

namespace {

std::string pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * value);
  return buf;
}

struct ReportGrid {
  std::vector<TrainMode> modes;        // row order
  std::vector<std::string> datasets;   // column order
  std::map<std::pair<int, std::string>, const Aggregate*> cells;
  std::map<std::string, double> best;  // best mean per dataset column
};

ReportGrid build_grid(const std::vector<Aggregate>& aggregates) {
  ReportGrid grid;
  std::set<int> modes;
  std::set<std::string> datasets;
  for (const Aggregate& a : aggregates) {
    modes.insert(static_cast<int>(a.mode));
    datasets.insert(a.dataset);
    grid.cells[{static_cast<int>(a.mode), a.dataset}] = &a;
    auto it = grid.best.find(a.dataset);
    if (it == grid.best.end() || a.mean > it->second) {
      grid.best[a.dataset] = a.mean;
    }
  }
  for (int m : modes) grid.modes.push_back(static_cast<TrainMode>(m));
  grid.datasets.assign(datasets.begin(), datasets.end());
  return grid;
}

}  // namespace

std::string render_report_text(const std::vector<Aggregate>& aggregates) {
  ReportGrid grid = build_grid(aggregates);
  size_t label_width = 6;
  for (TrainMode m : grid.modes) {
    label_width = std::max(label_width, train_mode_label(m).size());
  }
  std::string out;
  auto pad = [](std::string s, size_t w) {
    while (s.size() < w) s.push_back(' ');
    return s;
  };
  out += pad("Method", label_width);
  for (const auto& ds : grid.datasets) out += " | " + pad(ds, 14);
  out += "\n";
  out += std::string(label_width, '-');
  for (size_t i = 0; i < grid.datasets.size(); ++i) {
    out += "-+-" + std::string(14, '-');
  }
  out += "\n";
  for (TrainMode mode : grid.modes) {
    out += pad(train_mode_label(mode), label_width);
    for (const auto& ds : grid.datasets) {
      auto it = grid.cells.find({static_cast<int>(mode), ds});
      std::string cell;
      if (it != grid.cells.end()) {
        const Aggregate& a = *it->second;
        cell = pct(a.mean) + " +/- " + pct(a.stddev);
        if (a.mean == grid.best[ds]) cell += " *";
      }
      out += " | " + pad(cell, 14);
    }
    out += "\n";
  }
  return out;
}

std::string render_report_csv(const std::vector<Aggregate>& aggregates) {
  ReportGrid grid = build_grid(aggregates);
  std::string out = "method,dataset,mean_pct,std_pct,seeds,best\n";
  for (TrainMode mode : grid.modes) {
    for (const auto& ds : grid.datasets) {
      auto it = grid.cells.find({static_cast<int>(mode), ds});
      if (it == grid.cells.end()) continue;
      const Aggregate& a = *it->second;
      out += train_mode_label(mode) + "," + ds + "," + pct(a.mean) + "," +
             pct(a.stddev) + "," + std::to_string(a.count) + "," +
             (a.mean == grid.best[ds] ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace mixsum
