// Command-line front end. Links only the C API.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "mixsum.h"

namespace {

int exit_code(mixsum_status status) {
  if (status != MIXSUM_OK) {
    std::fprintf(stderr, "error: %s\n", mixsum_last_error());
  }
  return static_cast<int>(status);
}

struct GlobalOpts {
  std::string config_path;
  long long seed = -1;
  int jobs = 0;
  std::string dataset;
};

// CLI flags beat the config file, which beats built-in defaults.
mixsum_status open_config(const GlobalOpts& opts, mixsum_config** out) {
  std::string path = opts.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("MIXSUM_CONFIG")) path = env;
  }
  if (path.empty()) {
    std::fprintf(stderr,
                 "error: no config file (use --config or MIXSUM_CONFIG)\n");
    return MIXSUM_ERR_VALIDATION;
  }
  mixsum_status status = mixsum_config_load(path.c_str(), out);
  if (status != MIXSUM_OK) return status;
  if (opts.seed >= 0) {
    status = mixsum_config_set_seed(*out, static_cast<uint64_t>(opts.seed));
    if (status != MIXSUM_OK) return status;
  }
  if (opts.jobs > 0) {
    status = mixsum_config_set_jobs(*out, opts.jobs);
    if (status != MIXSUM_OK) return status;
  }
  if (!opts.dataset.empty()) {
    status = mixsum_config_set_dataset(*out, opts.dataset.c_str());
    if (status != MIXSUM_OK) return status;
  }
  return MIXSUM_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive few-shot text classification trainer"};
  app.require_subcommand(1);

  GlobalOpts opts;
  app.add_option("--config", opts.config_path,
                 "Run config file (default: $MIXSUM_CONFIG)");
  app.add_option("--seed", opts.seed, "Override the config file's seed");
  app.add_option("--jobs", opts.jobs, "Parallel experiment cells");
  app.add_option("--dataset", opts.dataset,
                 "Override the dataset used by train/eval/summarize-cache");

  auto* cache_cmd =
      app.add_subcommand("summarize-cache", "Build a summary cache file");
  std::string cache_out, cache_source = "textrank", cache_import;
  cache_cmd->add_option("--output", cache_out, "Cache file to write")
      ->required();
  cache_cmd->add_option("--source", cache_source,
                        "Summary source: textrank or import");
  cache_cmd->add_option("--import-file", cache_import,
                        "row_index<TAB>summary file for --source import");

  auto* train_cmd =
      app.add_subcommand("train", "Train one model and print test accuracy");

  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  std::string eval_checkpoint;
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint file")
      ->required();

  auto* exp_cmd =
      app.add_subcommand("experiment", "Run the full mode x dataset x seed grid");

  auto* report_cmd =
      app.add_subcommand("report", "Aggregate a results store into tables");
  std::string report_results, report_txt = "report.txt",
              report_csv = "report.csv";
  report_cmd->add_option("--results", report_results, "Results store path")
      ->required();
  report_cmd->add_option("--report-txt", report_txt, "Text report path");
  report_cmd->add_option("--report-csv", report_csv, "CSV report path");

  // Let global options appear after the subcommand name too.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a validation failure
  }

  if (report_cmd->parsed()) {
    return exit_code(mixsum_report(report_results.c_str(), report_txt.c_str(),
                                   report_csv.c_str()));
  }

  mixsum_config* config = nullptr;
  mixsum_status status = open_config(opts, &config);
  if (status != MIXSUM_OK) return exit_code(status);

  if (cache_cmd->parsed()) {
    const char* dataset = opts.dataset.empty() ? nullptr : opts.dataset.c_str();
    if (!dataset) {
      std::fprintf(stderr, "error: summarize-cache needs --dataset\n");
      mixsum_config_free(config);
      return 1;
    }
    status = mixsum_summarize_cache(
        config, dataset, cache_out.c_str(), cache_source.c_str(),
        cache_import.empty() ? nullptr : cache_import.c_str());
  } else if (train_cmd->parsed()) {
    double accuracy = 0.0;
    status = mixsum_train(config, &accuracy);
    if (status == MIXSUM_OK) {
      std::printf("test accuracy: %.1f%%\n", 100.0 * accuracy);
    }
  } else if (eval_cmd->parsed()) {
    double accuracy = 0.0;
    status = mixsum_eval(config, eval_checkpoint.c_str(), &accuracy);
    if (status == MIXSUM_OK) {
      std::printf("test accuracy: %.1f%%\n", 100.0 * accuracy);
    }
  } else if (exp_cmd->parsed()) {
    status = mixsum_experiment(config);
  }

  mixsum_config_free(config);
  return exit_code(status);
}
