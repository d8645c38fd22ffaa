/* hrcount — heatmap-regulated one-look counting, C API.
 *
 * Opaque handles, integer status codes. All functions returning
 * hrc_status leave a human-readable message retrievable through
 * hrc_last_error() on failure. Handles are single-owner; the last error
 * is thread-local.
 */
#ifndef HRCOUNT_H
#define HRCOUNT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hrc_status {
  HRC_OK = 0,
  HRC_ERR_IO = 1,      /* missing/corrupt files, write failures */
  HRC_ERR_CONFIG = 2,  /* unknown keys, malformed or out-of-range values */
  HRC_ERR_RUNTIME = 3, /* divergence, shape errors, internal failures */
  HRC_ERR_ARG = 4      /* null pointers, bad handles */
} hrc_status;

/* Message for the most recent failure on this thread; empty string if none. */
const char* hrc_last_error(void);

/* ---- run configuration -------------------------------------------------- */

typedef struct hrc_options hrc_options;

hrc_options* hrc_options_create(void);
void hrc_options_destroy(hrc_options* opts);

/* `key = value` lines, '#' comments. Unknown keys are errors. */
hrc_status hrc_options_load_file(hrc_options* opts, const char* path);
/* Overrides a single key; wins over values from files. */
hrc_status hrc_options_set(hrc_options* opts, const char* key,
                           const char* value);

/* ---- commands ----------------------------------------------------------- */

/* Writes images/, annotations.jsonl and manifest.json into out_dir. */
hrc_status hrc_generate_dataset(const hrc_options* opts, const char* out_dir,
                                int n_samples);

/* Trains on a generated dataset; writes checkpoint.hrc, report.json and
 * curves.csv into out_dir. summary (optional, may be NULL) receives a
 * one-line human-readable result. */
hrc_status hrc_train(const hrc_options* opts, const char* dataset_dir,
                     const char* out_dir, char* summary, size_t summary_cap);

/* Evaluates a checkpoint on a dataset. csv_out receives a two-line CSV
 * (header + row: method,MAE,RMSE,%O,%U,%D,cam_mass_ratio). When
 * eval_json_path is non-NULL the same values are written there as JSON. */
hrc_status hrc_evaluate(const hrc_options* opts, const char* checkpoint,
                        const char* dataset_dir, const char* eval_json_path,
                        char* csv_out, size_t csv_cap);

/* Superimposes the model's activation map on an input image as a PNG. */
hrc_status hrc_render_cam(const hrc_options* opts, const char* checkpoint,
                          const char* image_png, const char* out_png);

/* Same overlay for the ground-truth map of one dataset sample. */
hrc_status hrc_render_gam(const hrc_options* opts, const char* dataset_dir,
                          const char* sample_id, const char* out_png);

/* ---- direct model access ------------------------------------------------ */

typedef struct hrc_model hrc_model;

hrc_model* hrc_model_load(const char* checkpoint);
void hrc_model_destroy(hrc_model* model);

/* Predicted count for one grayscale image, values in [0,1], row-major.
 * Extents must be divisible by the model's downscale stride. */
hrc_status hrc_model_count(hrc_model* model, const double* image, int h,
                           int w, double* count_out);

#ifdef __cplusplus
}
#endif

#endif /* HRCOUNT_H */
