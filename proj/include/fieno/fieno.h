/* fieno.h - C API for libfieno.
 *
 * libfieno learns solutions of data-driven boundary value problems on
 * irregular star-shaped 2-D domains. A trained operator maps sampled
 * boundary data (Dirichlet values or Neumann normal derivatives) to
 * solution values at interior query points. The library also generates
 * the ground-truth datasets (analytic, manufactured, or via a fundamental-
 * solutions boundary collocation solver), runs experiment grids, and emits
 * result tables and plots.
 *
 * All functions are thread-compatible: handles may be used concurrently
 * for read-only operations, but a handle must not be mutated from two
 * threads at once. Error messages for the most recent failure on the
 * calling thread are available through fieno_last_error().
 */

#ifndef FIENO_H
#define FIENO_H

#include <stdint.h>
#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible function. The numeric values of
 * FIENO_ERR_VALIDATION and FIENO_ERR_NUMERIC match the CLI exit codes. */
typedef enum fieno_status {
    FIENO_OK = 0,
    FIENO_ERR_VALIDATION = 2, /* malformed config/arguments, schema violation */
    FIENO_ERR_NUMERIC = 3,    /* solver residual too large, training divergence */
    FIENO_ERR_IO = 4,         /* file not found, unwritable path */
    FIENO_ERR_VERSION = 5,    /* checkpoint format version mismatch */
    FIENO_ERR_CORRUPT = 6,    /* checksum or parse failure on a data file */
    FIENO_ERR_INTERNAL = 7
} fieno_status;

/* Opaque handles. Create/load functions allocate; the matching _free
 * releases. Freeing NULL is a no-op. */
typedef struct fieno_dataset fieno_dataset;
typedef struct fieno_model fieno_model;

/* Library version string, e.g. "0.1.0". */
const char* fieno_version(void);

/* Message for the most recent error on this thread. Never NULL; empty
 * string when no error has occurred. The buffer is overwritten by the
 * next failing call on the same thread. */
const char* fieno_last_error(void);

/* Frees a string returned through a char** out-parameter. */
void fieno_string_free(char* s);

/* ---- configuration ------------------------------------------------- */

/* Validates an experiment config JSON document against the schema.
 * Unknown keys are rejected; the error message names the offending
 * field path. */
fieno_status fieno_config_validate(const char* config_json);

/* ---- datasets ------------------------------------------------------ */

/* Builds the dataset described by the config's pde/data sections and
 * writes it (plus a boundary-geometry CSV) under out_dir. The generated
 * file path is returned via path_out when non-NULL (free with
 * fieno_string_free). */
fieno_status fieno_gen_data(const char* config_json, const char* out_dir,
                            char** path_out);

fieno_status fieno_dataset_load(const char* path, fieno_dataset** out);
fieno_status fieno_dataset_save(const fieno_dataset* ds, const char* path);
void fieno_dataset_free(fieno_dataset* ds);

int64_t fieno_dataset_boundary_count(const fieno_dataset* ds);
int64_t fieno_dataset_interior_count(const fieno_dataset* ds);

/* Copies interior query coordinates (x0,y0,x1,y1,...) and true values into
 * caller buffers sized per fieno_dataset_interior_count. Either pointer
 * may be NULL to skip that field. */
fieno_status fieno_dataset_interior(const fieno_dataset* ds, double* xy,
                                    double* values);

/* Exports a preset boundary ("B_train", "B1".."B4", "circle") as CSV with
 * columns alpha,x,y,r,theta,nx,ny at n_points equispaced parameters. */
fieno_status fieno_boundary_export_csv(const char* boundary_id,
                                       int64_t n_points, const char* path);

/* ---- models -------------------------------------------------------- */

fieno_status fieno_model_load(const char* path, fieno_model** out);
fieno_status fieno_model_save(const fieno_model* m, const char* path);
void fieno_model_free(fieno_model* m);

/* Predicts dataset interior values from its boundary samples. preds must
 * hold fieno_dataset_interior_count(ds) doubles. */
fieno_status fieno_model_predict(const fieno_model* m, const fieno_dataset* ds,
                                 double* preds);

/* ---- pipeline commands --------------------------------------------- */

/* Trains one model on the dataset at data_path per the config's model and
 * train sections; writes checkpoint.json and loss.csv under out_dir. */
fieno_status fieno_train(const char* config_json, const char* data_path,
                         const char* out_dir);

/* Scores a checkpoint on a dataset under the given protocol ("zero-shot"
 * scores the frozen model on the dataset's interior points; "few-shot"
 * first fine-tunes on them, then scores on a fresh held-out set regenerated
 * from the dataset's own seed). The MSE is stored in *mse_out and a result
 * record is appended to results_csv (created with a header if missing). */
fieno_status fieno_eval(const char* checkpoint_path, const char* data_path,
                        const char* protocol, const char* results_csv,
                        double* mse_out);

/* Runs the experiment grid from the config's grid/seeds sections with up
 * to `workers` concurrent cells; writes results.csv under out_dir. */
fieno_status fieno_run_grid(const char* config_json, const char* out_dir,
                            int workers);

/* Renders the (boundary x interior-count) table for one equation and
 * boundary-condition kind from a results CSV. text_out receives the
 * aligned text table and csv_out the CSV form; either may be NULL.
 * Free both with fieno_string_free. */
fieno_status fieno_emit_table(const char* results_csv, const char* equation,
                              const char* bc_kind, char** text_out,
                              char** csv_out);

/* Emits prediction/truth/squared-error scatter SVGs for a checkpoint on a
 * dataset under out_dir. */
fieno_status fieno_emit_plots(const char* checkpoint_path,
                              const char* data_path, const char* out_dir);

/* Runs a verification suite: "rff", "autodiff", "oracle", or "all".
 * report_out (optional, free with fieno_string_free) receives one line per
 * check. Returns FIENO_OK only if every check passed. */
fieno_status fieno_verify(const char* suite, char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* FIENO_H */
