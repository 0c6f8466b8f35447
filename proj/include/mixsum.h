/* C API of the mixsum training library.
 *
 * All functions return MIXSUM_OK on success; on failure the thread-local
 * message from mixsum_last_error() describes what went wrong. Handles are
 * opaque and must be released with their matching free function.
 */
#ifndef MIXSUM_H
#define MIXSUM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mixsum_status {
  MIXSUM_OK = 0,
  MIXSUM_ERR_VALIDATION = 1,
  MIXSUM_ERR_RUNTIME = 2
} mixsum_status;

/* Message for the most recent failure on this thread; empty string if none. */
const char* mixsum_last_error(void);

/* ---- configuration ---- */

typedef struct mixsum_config mixsum_config;

mixsum_status mixsum_config_load(const char* path, mixsum_config** out);
void mixsum_config_free(mixsum_config* config);

/* Command-line overrides; applied on top of the loaded file. */
mixsum_status mixsum_config_set_seed(mixsum_config* config, uint64_t seed);
mixsum_status mixsum_config_set_jobs(mixsum_config* config, int jobs);
mixsum_status mixsum_config_set_dataset(mixsum_config* config,
                                        const char* name);

/* ---- summarization ---- */

/* TextRank summary of a single text; *out is heap-allocated, release with
 * mixsum_string_free. */
mixsum_status mixsum_textrank(const char* text, int k, char** out);
void mixsum_string_free(char* s);

/* Builds the summary cache for the named dataset's training pool.
 * source is "textrank" or "import"; import reads row_index<TAB>summary
 * lines and must cover every row (TextRank replaces junk imports). */
mixsum_status mixsum_summarize_cache(const mixsum_config* config,
                                     const char* dataset_name,
                                     const char* output_path,
                                     const char* source,
                                     const char* import_file);

/* ---- training and evaluation ---- */

/* Subsamples the configured dataset, trains with the configured mode, writes
 * the checkpoint and history, and reports test accuracy in [0,1]. */
mixsum_status mixsum_train(const mixsum_config* config, double* accuracy_out);

/* Evaluates a checkpoint on the configured dataset's sampled test split. */
mixsum_status mixsum_eval(const mixsum_config* config,
                          const char* checkpoint_path, double* accuracy_out);

/* ---- experiment grid ---- */

/* Runs every (mode, dataset, seed) cell, resuming from the results store. */
mixsum_status mixsum_experiment(const mixsum_config* config);

/* Aggregates a results store and writes the text and CSV reports. */
mixsum_status mixsum_report(const char* results_path, const char* report_txt,
                            const char* report_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MIXSUM_H */
