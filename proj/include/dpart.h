/* C API for the dpart differentially private tabular synthesis library.
 *
 * All functions return dpart_status; on failure dpart_last_error() holds a
 * message for the calling thread. Handles are opaque and freed with their
 * matching *_free function. Passing a null handle where one is required
 * yields DPART_ERR_INVALID_ARGUMENT.
 */
#ifndef DPART_H
#define DPART_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct dpart_table dpart_table;
typedef struct dpart_model dpart_model;

typedef enum dpart_status {
  DPART_OK = 0,
  DPART_ERR_INVALID_ARGUMENT = 1, /* bad flags, specs, schemas, budgets */
  DPART_ERR_IO = 2,               /* file system failure */
  DPART_ERR_PARSE = 3,            /* malformed CSV/JSON content */
  DPART_ERR_FORMAT = 4,           /* model file version/checksum problem */
  DPART_ERR_INTERNAL = 5,
} dpart_status;

const char* dpart_version(void);

/* Message for the last failure on this thread; empty string when none. */
const char* dpart_last_error(void);

/* --- tables --------------------------------------------------------------- */

/* Loads a CSV whose header matches the schema file (JSON document
 * {"columns":[{"name","type","min","max","categories"}]}; bounds fields are
 * ignored here). */
dpart_status dpart_table_read_csv(const char* csv_path, const char* schema_json_path,
                                  dpart_table** out);

dpart_status dpart_table_write_csv(const dpart_table* table, const char* csv_path);

int64_t dpart_table_rows(const dpart_table* table);
int64_t dpart_table_cols(const dpart_table* table);

void dpart_table_free(dpart_table* table);

/* --- fitting and generation ------------------------------------------------ */

/* spec_json configures the fit, e.g.
 *   {"engine":"privbayes", "epsilon":1.0, "bounds":{...}, "n_parents":2,
 *    "budget_split":{"dependency":0.5,"methods":{"age":2}},
 *    "methods":{"age":"linear_regression"}, "dependency":{...}, "n_bins":20}
 * Seeding is for tests and demos only: a known seed voids the differential
 * privacy guarantee. Pass has_seed = 0 for entropy seeding. */
dpart_status dpart_fit(const dpart_table* table, const char* spec_json,
                       uint64_t seed, int has_seed, dpart_model** out);

size_t dpart_model_warning_count(const dpart_model* model);
/* Warning message i (0-based); NULL when out of range. The string lives as
 * long as the model handle. */
const char* dpart_model_warning(const dpart_model* model, size_t i);

dpart_status dpart_model_save(const dpart_model* model, const char* path);
dpart_status dpart_model_load(const char* path, dpart_model** out);

dpart_status dpart_generate(const dpart_model* model, int64_t rows, uint64_t seed,
                            int has_seed, dpart_table** out);

void dpart_model_free(dpart_model* model);

/* --- evaluation ------------------------------------------------------------ */

/* Marginal similarity between the tables plus the accuracy of a decision
 * tree trained on `synth` and evaluated on `real`. Writes a JSON object
 * {"similarity":...,"accuracy":...} allocated with the library; release it
 * with dpart_string_free. */
dpart_status dpart_evaluate(const dpart_table* real, const dpart_table* synth,
                            const char* target_column, char** metrics_json_out);

/* Runs the sweep described by the config file and writes report.csv and
 * summary.json under out_dir. */
dpart_status dpart_experiment_run(const char* config_json_path, const char* out_dir);

void dpart_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DPART_H */
