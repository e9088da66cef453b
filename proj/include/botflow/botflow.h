/*
 * botflow C API.
 *
 * Opaque handles own their data; every handle returned through an out
 * parameter must be released with the matching *_free function. Functions
 * return BF_OK or an error status; bf_last_error() describes the most
 * recent failure on the calling thread.
 */
#ifndef BOTFLOW_BOTFLOW_H
#define BOTFLOW_BOTFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BOTFLOW_BUILDING)
#define BF_API __declspec(dllexport)
#else
#define BF_API __declspec(dllimport)
#endif
#else
#define BF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bf_status {
  BF_OK = 0,
  BF_E_INVALID_ARGUMENT = 1,
  BF_E_IO = 2,
  BF_E_MALFORMED_ROW = 3,
  BF_E_UNKNOWN_SCENARIO = 4,
  BF_E_EMPTY_INPUT = 5,
  BF_E_SCHEMA_MISMATCH = 6,
  BF_E_SHAPE_MISMATCH = 7,
  BF_E_TOO_FEW_ROWS = 8,
  BF_E_BAD_COMPONENT_COUNT = 9,
  BF_E_SINGLE_CLASS = 10,
  BF_E_DEGENERATE_SPLIT = 11,
  BF_E_DEGENERATE_ROW = 12,
  BF_E_NON_FINITE_LOSS = 13,
  BF_E_CORRUPT_MODEL = 14,
  BF_E_SCHEMA_VERSION = 15,
  BF_E_LENGTH_MISMATCH = 16,
  BF_E_BAD_BINS = 17,
  BF_E_BAD_CONFIG = 18,
  BF_E_TIME_BEFORE_ORIGIN = 19,
  BF_E_INTERNAL = 99
} bf_status;

typedef enum bf_label_class {
  BF_BACKGROUND = 0,
  BF_NORMAL = 1,
  BF_BOTNET = 2,
  BF_CNC = 3
} bf_label_class;

/* Bit masks over bf_label_class for positive-class sets. */
#define BF_CLASS_BIT(c) (1u << (unsigned)(c))
#define BF_DEFAULT_POSITIVE_MASK (BF_CLASS_BIT(BF_BOTNET) | BF_CLASS_BIT(BF_CNC))

typedef struct bf_flows bf_flows;
typedef struct bf_matrix bf_matrix;
typedef struct bf_model bf_model;

BF_API const char* bf_version(void);
BF_API const char* bf_status_name(bf_status status);
/* Message for the last failing call on this thread; "" when none. */
BF_API const char* bf_last_error(void);

/* ---- ingestion ---- */

typedef struct bf_ingest_stats {
  uint64_t total_rows;
  uint64_t skipped_rows;
  uint64_t unknown_labels;
  uint64_t src_bytes_warnings;
  uint64_t class_counts[4];
  uint64_t first_error_line; /* 0 when no row was skipped */
} bf_ingest_stats;

typedef struct bf_label_distribution {
  uint64_t total;
  uint64_t counts[4];
  double percent[4];
} bf_label_distribution;

/* abort_on_error != 0 turns the first malformed row into BF_E_MALFORMED_ROW. */
BF_API bf_status bf_flows_read(const char* path, int abort_on_error, bf_flows** out);
BF_API void bf_flows_free(bf_flows* flows);
BF_API size_t bf_flows_count(const bf_flows* flows);
BF_API bf_status bf_flows_stats(const bf_flows* flows, bf_ingest_stats* out);
BF_API bf_status bf_flows_distribution(const bf_flows* flows, bf_label_distribution* out);
/* Writes the distribution (and ingest counters) as JSON. */
BF_API bf_status bf_flows_write_stats_json(const bf_flows* flows, const char* path);
/* Same JSON as a string owned by the handle, valid until the next call. */
BF_API const char* bf_flows_stats_json(const bf_flows* flows);

/* Comma-separated class names, e.g. "botnet,cnc", into a BF_CLASS_BIT mask. */
BF_API bf_status bf_parse_class_set(const char* text, unsigned* out_mask);
BF_API bf_status bf_classify_label(const char* label, bf_label_class* out_class, int* out_fallback);

typedef struct bf_scenario_info {
  int scenario_id;
  uint64_t total_flows;
  double pct_botnet;
  double pct_normal;
  double pct_cnc;
  double pct_background;
  /* bit i: IRC, SPAM, CF, PS, DDoS, P2P, US, HTTP */
  uint8_t trait_bits;
} bf_scenario_info;

BF_API bf_status bf_scenario_info_get(int scenario_id, bf_scenario_info* out);

/* ---- features ---- */

typedef struct bf_window_config {
  int64_t width_s;
  int64_t stride_s;
  int group_by_pair; /* 0: source address, 1: (source, destination) */
} bf_window_config;

/* positive_mask: BF_CLASS_BIT set; 0 selects the default {botnet, cnc}. */
BF_API bf_status bf_matrix_build(const bf_flows* flows, const bf_window_config* cfg, unsigned positive_mask,
                                 bf_matrix** out);
BF_API bf_status bf_matrix_read_csv(const char* path, bf_matrix** out);
BF_API bf_status bf_matrix_write_csv(const bf_matrix* m, const char* path);
BF_API void bf_matrix_free(bf_matrix* m);
BF_API size_t bf_matrix_rows(const bf_matrix* m);
BF_API size_t bf_matrix_cols(const bf_matrix* m);
BF_API size_t bf_matrix_positives(const bf_matrix* m);
/* Pointer valid for the lifetime of the matrix. NULL when out of range. */
BF_API const char* bf_matrix_feature_name(const bf_matrix* m, size_t index);
BF_API bf_status bf_matrix_value(const bf_matrix* m, size_t row, size_t col, double* out);
BF_API bf_status bf_matrix_target(const bf_matrix* m, size_t row, int* out);

/* ---- feature selection ---- */

typedef struct bf_select_options {
  double corr_threshold;    /* <= 0 disables the correlation filter */
  int backward_elim;        /* non-zero enables backward elimination */
  size_t min_features;      /* elimination floor, >= 1 */
  double elim_tolerance;    /* allowed score drop per step */
  int metric;               /* 0 f1, 1 precision, 2 recall */
  size_t pca_components;    /* 0 disables PCA */
  double train_fraction;    /* chronological validation split */
  double purge_gap_s;       /* < 0 means "no purge" */
} bf_select_options;

BF_API void bf_select_options_default(bf_select_options* out);
/* Runs the enabled stages. *out receives the reduced matrix; the JSON
 * report is written when report_path is non-NULL. */
BF_API bf_status bf_select(const bf_matrix* m, const bf_select_options* opts, bf_matrix** out,
                           const char* report_path);

/* ---- model ---- */

typedef struct bf_train_options {
  double l2_lambda;
  double learning_rate;
  int max_iter;
  double tol;
  int balanced; /* 1: balanced class weights, 0: none */
  double threshold;
  uint64_t seed;
  unsigned positive_mask; /* recorded in the model metadata; 0 = default */
} bf_train_options;

typedef struct bf_train_summary {
  int iterations_run;
  int converged;
  double final_loss;
} bf_train_summary;

BF_API void bf_train_options_default(bf_train_options* out);
BF_API bf_status bf_model_fit(const bf_matrix* m, const bf_train_options* opts, bf_model** out,
                              bf_train_summary* summary);
BF_API bf_status bf_model_save(const bf_model* model, const char* path);
BF_API bf_status bf_model_load(const char* path, bf_model** out);
BF_API void bf_model_free(bf_model* model);
BF_API size_t bf_model_feature_count(const bf_model* model);
BF_API const char* bf_model_feature_name(const bf_model* model, size_t index);
BF_API bf_status bf_model_weights(const bf_model* model, double* weights, size_t len, double* bias);
/* Model columns are selected from the matrix by name. */
BF_API bf_status bf_model_predict_proba(const bf_model* model, const bf_matrix* m, double* out, size_t len);

/* ---- evaluation ---- */

typedef struct bf_metrics {
  uint64_t tp, fp, fn, tn;
  double precision, recall, f1;
  int precision_undefined;
  int recall_undefined;
} bf_metrics;

BF_API bf_status bf_metrics_from_counts(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn, bf_metrics* out);
BF_API bf_status bf_evaluate(const bf_model* model, const bf_matrix* m, bf_metrics* out);
/* Evaluates and writes the metrics report JSON with the model's config echo. */
BF_API bf_status bf_evaluate_to_file(const bf_model* model, const bf_matrix* m, const char* path);

/* Histogram of one numeric column of a sweep/repeat CSV, written as CSV. */
BF_API bf_status bf_report_histogram(const char* sweep_csv_path, const char* column, double bin_width, double lo,
                                     double hi, const char* out_path);

/* ---- experiments ---- */

typedef struct bf_run_options {
  int split_random;      /* 0 chronological, 1 stratified random */
  double train_fraction;
  double purge_gap_s;    /* < 0: one window width */
  bf_train_options train;
  unsigned jobs;         /* 0: hardware concurrency */
  int record_timing;     /* non-zero writes measured wall times */
} bf_run_options;

BF_API void bf_run_options_default(bf_run_options* out);

BF_API bf_status bf_sweep(const bf_flows* flows, const int64_t* widths, size_t n_widths, const int64_t* strides,
                          size_t n_strides, const bf_run_options* opts, uint64_t seed, const char* out_path);

/* fixed_seed != 0 reuses `seed` for every run. */
BF_API bf_status bf_repeat(const bf_flows* flows, int64_t width_s, int64_t stride_s, int runs,
                           const bf_run_options* opts, uint64_t seed, int fixed_seed, const char* out_path);

BF_API bf_status bf_scenarios(const int* scenario_ids, const char* const* paths, size_t n, int64_t width_s,
                              int64_t stride_s, const bf_run_options* opts, uint64_t seed, const char* out_path);

/* ---- synthetic data ---- */

typedef struct bf_synth_options {
  uint64_t seed;
  int hard;
  double duration_s; /* <= 0 keeps the preset duration */
} bf_synth_options;

/* preset: "scenario9" (the only preset). */
BF_API bf_status bf_synth(const char* preset, const bf_synth_options* opts, const char* out_path, uint64_t* out_flows);

#ifdef __cplusplus
}
#endif

#endif /* BOTFLOW_BOTFLOW_H */
