/* seqnas: sequence-recognition architecture search, C interface.
 *
 * Every entry point returns a seqnas_status; nonzero means failure and
 * seqnas_last_error() carries a message for the calling thread (valid until
 * the thread's next seqnas call). Strings returned through char** are
 * malloc'd; release them with seqnas_string_free().
 *
 * A seqnas_config is an opaque handle holding the full run description
 * (search space, backend, budgets, dataset recipe). Build one from defaults
 * or a config file, adjust it with key=value pairs, resolve it, then hand it
 * to the run functions. Runs that set output_dir persist their artifacts
 * (config.snapshot, score tables, result.json, checkpoints/).
 */
#ifndef SEQNAS_H
#define SEQNAS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum seqnas_status {
  SEQNAS_OK = 0,
  SEQNAS_INVALID = 1,    /* bad argument or semantic validation failure */
  SEQNAS_PARSE = 2,      /* malformed config/arch/path text */
  SEQNAS_INFEASIBLE = 3, /* no admissible solution (budget, constraints) */
  SEQNAS_DIVERGED = 4,   /* training produced non-finite values */
  SEQNAS_IO = 5,         /* file read/write failure */
  SEQNAS_INTERNAL = 6    /* unexpected failure */
} seqnas_status;

typedef struct seqnas_config seqnas_config;

/* Lifecycle ---------------------------------------------------------- */

/* Desk-scale default configuration. */
int seqnas_config_create(seqnas_config** out);
/* Defaults overlaid with a flat key=value file ('#' comments). */
int seqnas_config_load(const char* path, seqnas_config** out);
void seqnas_config_free(seqnas_config* cfg);

/* Sets one key, e.g. ("backend", "neural") or ("space.L", "8"). */
int seqnas_config_set(seqnas_config* cfg, const char* key, const char* value);
/* Materializes derived defaults (budget, regularizer pivot, per-module
 * seeds) and validates. Required before any run. */
int seqnas_config_resolve(seqnas_config* cfg);
/* Canonical sorted key=value text of a resolved config. */
int seqnas_config_snapshot(const seqnas_config* cfg, char** out);

/* Inspection --------------------------------------------------------- */

/* JSON {"paths": N, "archs": "<decimal>"} for the configured space. */
int seqnas_space_count(const seqnas_config* cfg, char** json_out);
/* Newline-separated path texts; typical_only != 0 restricts the listing to
 * the stage-aligned candidate set. */
int seqnas_space_paths(const seqnas_config* cfg, int typical_only, char** text_out);
/* Cost report JSON for an architecture in its text form
 * ("path=<stages>@<positions>;ops=<codes>"). */
int seqnas_arch_cost(const seqnas_config* cfg, const char* arch_text, char** json_out);

/* Data --------------------------------------------------------------- */

/* Generates the configured synthetic dataset and writes it to out_path;
 * returns a JSON summary of the file. */
int seqnas_gendata(const seqnas_config* cfg, const char* out_path, char** json_out);

/* Runs ---------------------------------------------------------------- */

/* Trains the given architecture on a dataset file for step1_epochs with the
 * configured batch size and returns the evaluation report JSON. */
int seqnas_eval(const seqnas_config* cfg, const char* arch_text, const char* data_path,
                char** json_out);

typedef enum seqnas_search_mode {
  SEQNAS_SEARCH_FULL = 0,  /* step 1 then step 2 */
  SEQNAS_SEARCH_STEP1 = 1, /* downsampling-path search only */
  SEQNAS_SEARCH_STEP2 = 2  /* operation search on a given path */
} seqnas_search_mode;

/* Two-step architecture search. path_text is required for STEP2 mode and
 * ignored otherwise. data_path optionally names a dataset file for the
 * neural backend; when null the dataset is generated from the config. */
int seqnas_search(const seqnas_config* cfg, int mode, const char* path_text,
                  const char* data_path, char** json_out);

/* Uniform random baseline over the same space, random.candidates samples. */
int seqnas_random(const seqnas_config* cfg, const char* data_path, char** json_out);

/* Errors -------------------------------------------------------------- */

/* Message for the calling thread's most recent failure ("" if none). */
const char* seqnas_last_error(void);
void seqnas_string_free(char* s);
const char* seqnas_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEQNAS_H */
