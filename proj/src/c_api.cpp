#include "botflow/botflow.h"

#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <string>

#include "botflow/error.hpp"
#include "botflow/features.hpp"
#include "botflow/flow.hpp"
#include "botflow/logreg.hpp"
#include "botflow/metrics.hpp"
#include "botflow/reference_tables.hpp"
#include "botflow/select.hpp"
#include "botflow/sweep.hpp"
#include "botflow/synth.hpp"
#include "util.hpp"

struct bf_flows {
  botflow::FlowSet set;
  mutable std::string json;
};

struct bf_matrix {
  botflow::FeatureMatrix m;
};

struct bf_model {
  botflow::LogRegModel model;
};

namespace {

using namespace botflow;

thread_local std::string g_last_error;

bf_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return BF_E_INVALID_ARGUMENT;
    case ErrorCode::Io: return BF_E_IO;
    case ErrorCode::MalformedRow: return BF_E_MALFORMED_ROW;
    case ErrorCode::UnknownScenario: return BF_E_UNKNOWN_SCENARIO;
    case ErrorCode::EmptyInput:
    case ErrorCode::EmptyValues: return BF_E_EMPTY_INPUT;
    case ErrorCode::TimeBeforeOrigin: return BF_E_TIME_BEFORE_ORIGIN;
    case ErrorCode::SchemaMismatch: return BF_E_SCHEMA_MISMATCH;
    case ErrorCode::ShapeMismatch: return BF_E_SHAPE_MISMATCH;
    case ErrorCode::TooFewRows: return BF_E_TOO_FEW_ROWS;
    case ErrorCode::BadComponentCount: return BF_E_BAD_COMPONENT_COUNT;
    case ErrorCode::SingleClassInput: return BF_E_SINGLE_CLASS;
    case ErrorCode::DegenerateSplit: return BF_E_DEGENERATE_SPLIT;
    case ErrorCode::DegenerateRow: return BF_E_DEGENERATE_ROW;
    case ErrorCode::NonFiniteLoss: return BF_E_NON_FINITE_LOSS;
    case ErrorCode::CorruptModel: return BF_E_CORRUPT_MODEL;
    case ErrorCode::SchemaVersionMismatch: return BF_E_SCHEMA_VERSION;
    case ErrorCode::LengthMismatch: return BF_E_LENGTH_MISMATCH;
    case ErrorCode::BadBins: return BF_E_BAD_BINS;
    case ErrorCode::BadConfig: return BF_E_BAD_CONFIG;
  }
  return BF_E_INTERNAL;
}

template <typename F>
bf_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return BF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BF_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BF_E_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, what);
}

ClassSet class_set_from_mask(unsigned mask) {
  if (mask == 0) return default_positive_classes();
  ClassSet set{};
  for (std::size_t c = 0; c < kLabelClassCount; ++c) set[c] = (mask >> c) & 1U;
  return set;
}

Hyperparams to_hyperparams(const bf_train_options& o) {
  Hyperparams hp;
  hp.l2_lambda = o.l2_lambda;
  hp.learning_rate = o.learning_rate;
  hp.max_iter = o.max_iter;
  hp.tol = o.tol;
  hp.class_weight = o.balanced ? ClassWeightMode::Balanced : ClassWeightMode::None;
  hp.threshold = o.threshold;
  return hp;
}

RunOptions to_run_options(const bf_run_options& o) {
  RunOptions r;
  r.split.mode = o.split_random ? SplitMode::StratifiedRandom : SplitMode::Chronological;
  r.split.train_fraction = o.train_fraction;
  if (o.purge_gap_s >= 0) r.split.purge_gap_s = o.purge_gap_s;
  r.split.validate();
  r.hyperparams = to_hyperparams(o.train);
  r.hyperparams.validate();
  r.positive_classes = class_set_from_mask(o.train.positive_mask);
  return r;
}

bf_metrics to_c(const MetricsReport& r) {
  bf_metrics out{};
  out.tp = r.confusion.tp;
  out.fp = r.confusion.fp;
  out.fn = r.confusion.fn;
  out.tn = r.confusion.tn;
  out.precision = r.precision;
  out.recall = r.recall;
  out.f1 = r.f1;
  out.precision_undefined = r.precision_undefined;
  out.recall_undefined = r.recall_undefined;
  return out;
}

// Model columns picked from a matrix by name.
FeatureMatrix aligned(const LogRegModel& model, const FeatureMatrix& m) {
  if (m.feature_names == model.feature_names) return m;
  return m.select_columns(model.feature_names);
}

}  // namespace

extern "C" {

const char* bf_version(void) { return "1.0.0"; }

const char* bf_status_name(bf_status status) {
  switch (status) {
    case BF_OK: return "OK";
    case BF_E_INVALID_ARGUMENT: return "InvalidArgument";
    case BF_E_IO: return "IoError";
    case BF_E_MALFORMED_ROW: return "MalformedRow";
    case BF_E_UNKNOWN_SCENARIO: return "UnknownScenario";
    case BF_E_EMPTY_INPUT: return "EmptyInput";
    case BF_E_SCHEMA_MISMATCH: return "SchemaMismatch";
    case BF_E_SHAPE_MISMATCH: return "ShapeMismatch";
    case BF_E_TOO_FEW_ROWS: return "TooFewRows";
    case BF_E_BAD_COMPONENT_COUNT: return "BadComponentCount";
    case BF_E_SINGLE_CLASS: return "SingleClassInput";
    case BF_E_DEGENERATE_SPLIT: return "DegenerateSplit";
    case BF_E_DEGENERATE_ROW: return "DegenerateRow";
    case BF_E_NON_FINITE_LOSS: return "NonFiniteLoss";
    case BF_E_CORRUPT_MODEL: return "CorruptModel";
    case BF_E_SCHEMA_VERSION: return "SchemaVersionMismatch";
    case BF_E_LENGTH_MISMATCH: return "LengthMismatch";
    case BF_E_BAD_BINS: return "BadBins";
    case BF_E_BAD_CONFIG: return "BadConfig";
    case BF_E_TIME_BEFORE_ORIGIN: return "TimeBeforeOrigin";
    case BF_E_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* bf_last_error(void) { return g_last_error.c_str(); }

// ---- ingestion ----

bf_status bf_flows_read(const char* path, int abort_on_error, bf_flows** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto h = std::make_unique<bf_flows>();
    h->set = read_flows(path, abort_on_error ? OnError::Abort : OnError::Skip);
    *out = h.release();
  });
}

void bf_flows_free(bf_flows* flows) { delete flows; }

size_t bf_flows_count(const bf_flows* flows) { return flows ? flows->set.flows.size() : 0; }

bf_status bf_flows_stats(const bf_flows* flows, bf_ingest_stats* out) {
  return guarded([&] {
    require(flows && out, "flows and out must be non-null");
    const IngestStats& s = flows->set.stats;
    *out = bf_ingest_stats{};
    out->total_rows = s.total_rows;
    out->skipped_rows = s.skipped_rows;
    out->unknown_labels = s.unknown_labels;
    out->src_bytes_warnings = s.src_bytes_warnings;
    for (std::size_t i = 0; i < kLabelClassCount; ++i) out->class_counts[i] = s.class_counts[i];
    out->first_error_line = s.first_error_line.value_or(0);
  });
}

bf_status bf_flows_distribution(const bf_flows* flows, bf_label_distribution* out) {
  return guarded([&] {
    require(flows && out, "flows and out must be non-null");
    const LabelDistribution d = label_distribution(flows->set.flows);
    out->total = d.total;
    for (std::size_t i = 0; i < kLabelClassCount; ++i) {
      out->counts[i] = d.counts[i];
      out->percent[i] = d.percent[i];
    }
  });
}

bf_status bf_flows_write_stats_json(const bf_flows* flows, const char* path) {
  return guarded([&] {
    require(flows && path, "flows and path must be non-null");
    const LabelDistribution d = label_distribution(flows->set.flows);
    detail::atomic_write(path, label_distribution_json(d, &flows->set.stats));
  });
}

const char* bf_flows_stats_json(const bf_flows* flows) {
  if (!flows) return nullptr;
  flows->json = label_distribution_json(label_distribution(flows->set.flows), &flows->set.stats);
  return flows->json.c_str();
}

bf_status bf_parse_class_set(const char* text, unsigned* out_mask) {
  return guarded([&] {
    require(text && out_mask, "text and out_mask must be non-null");
    const ClassSet set = parse_class_set(text);
    unsigned mask = 0;
    for (std::size_t c = 0; c < kLabelClassCount; ++c)
      if (set[c]) mask |= 1U << c;
    *out_mask = mask;
  });
}

bf_status bf_classify_label(const char* label, bf_label_class* out_class, int* out_fallback) {
  return guarded([&] {
    require(label && out_class, "label and out_class must be non-null");
    const Classification c = classify_label(label);
    *out_class = static_cast<bf_label_class>(c.label_class);
    if (out_fallback) *out_fallback = c.fallback ? 1 : 0;
  });
}

bf_status bf_scenario_info_get(int scenario_id, bf_scenario_info* out) {
  return guarded([&] {
    require(out != nullptr, "out must be non-null");
    const ScenarioMeta& m = scenario_info(scenario_id);
    out->scenario_id = m.scenario_id;
    out->total_flows = m.total_flows;
    out->pct_botnet = m.pct_botnet;
    out->pct_normal = m.pct_normal;
    out->pct_cnc = m.pct_cnc;
    out->pct_background = m.pct_background;
    out->trait_bits = m.trait_bits;
  });
}

// ---- features ----

bf_status bf_matrix_build(const bf_flows* flows, const bf_window_config* cfg, unsigned positive_mask,
                          bf_matrix** out) {
  return guarded([&] {
    require(flows && cfg && out, "flows, cfg and out must be non-null");
    *out = nullptr;
    WindowConfig wc;
    wc.width_s = cfg->width_s;
    wc.stride_s = cfg->stride_s;
    wc.group_key = cfg->group_by_pair ? GroupKey::SourceDestination : GroupKey::Source;
    auto h = std::make_unique<bf_matrix>();
    h->m = build_matrix(flows->set.flows, wc, class_set_from_mask(positive_mask));
    *out = h.release();
  });
}

bf_status bf_matrix_read_csv(const char* path, bf_matrix** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto h = std::make_unique<bf_matrix>();
    h->m = read_matrix_csv(path);
    *out = h.release();
  });
}

bf_status bf_matrix_write_csv(const bf_matrix* m, const char* path) {
  return guarded([&] {
    require(m && path, "matrix and path must be non-null");
    write_matrix_csv(m->m, path);
  });
}

void bf_matrix_free(bf_matrix* m) { delete m; }
size_t bf_matrix_rows(const bf_matrix* m) { return m ? m->m.rows() : 0; }
size_t bf_matrix_cols(const bf_matrix* m) { return m ? m->m.cols() : 0; }
size_t bf_matrix_positives(const bf_matrix* m) { return m ? m->m.positives() : 0; }

const char* bf_matrix_feature_name(const bf_matrix* m, size_t index) {
  if (!m || index >= m->m.cols()) return nullptr;
  return m->m.feature_names[index].c_str();
}

bf_status bf_matrix_value(const bf_matrix* m, size_t row, size_t col, double* out) {
  return guarded([&] {
    require(m && out, "matrix and out must be non-null");
    require(row < m->m.rows() && col < m->m.cols(), "index out of range");
    *out = m->m.at(row, col);
  });
}

bf_status bf_matrix_target(const bf_matrix* m, size_t row, int* out) {
  return guarded([&] {
    require(m && out, "matrix and out must be non-null");
    require(row < m->m.rows(), "row out of range");
    *out = m->m.targets[row];
  });
}

// ---- selection ----

void bf_select_options_default(bf_select_options* out) {
  if (!out) return;
  *out = bf_select_options{};
  out->corr_threshold = 0;
  out->backward_elim = 0;
  out->min_features = 1;
  out->elim_tolerance = 0;
  out->metric = 0;
  out->pca_components = 0;
  out->train_fraction = 0.7;
  out->purge_gap_s = -1;
}

bf_status bf_select(const bf_matrix* m, const bf_select_options* opts, bf_matrix** out, const char* report_path) {
  return guarded([&] {
    require(m && opts && out, "matrix, options and out must be non-null");
    *out = nullptr;
    require(opts->metric >= 0 && opts->metric <= 2, "metric must be 0 (f1), 1 (precision) or 2 (recall)");
    SelectionOptions so;
    if (opts->corr_threshold > 0) so.corr_threshold = opts->corr_threshold;
    so.backward_elimination = opts->backward_elim != 0;
    so.elimination.min_features = opts->min_features;
    so.elimination.tolerance = opts->elim_tolerance;
    so.metric = static_cast<Metric>(opts->metric);
    so.pca_components = opts->pca_components;
    so.train_fraction = opts->train_fraction;
    so.purge_gap_s = opts->purge_gap_s < 0 ? 0 : opts->purge_gap_s;
    SelectionOutcome outcome = run_selection(m->m, so);
    if (report_path) detail::atomic_write(report_path, selection_report_json(outcome.report));
    auto h = std::make_unique<bf_matrix>();
    h->m = std::move(outcome.reduced);
    *out = h.release();
  });
}

// ---- model ----

void bf_train_options_default(bf_train_options* out) {
  if (!out) return;
  const Hyperparams hp;
  *out = bf_train_options{};
  out->l2_lambda = hp.l2_lambda;
  out->learning_rate = hp.learning_rate;
  out->max_iter = hp.max_iter;
  out->tol = hp.tol;
  out->balanced = hp.class_weight == ClassWeightMode::Balanced;
  out->threshold = hp.threshold;
  out->seed = 0;
  out->positive_mask = BF_DEFAULT_POSITIVE_MASK;
}

bf_status bf_model_fit(const bf_matrix* m, const bf_train_options* opts, bf_model** out, bf_train_summary* summary) {
  return guarded([&] {
    require(m && opts && out, "matrix, options and out must be non-null");
    *out = nullptr;
    FitResult r = fit(m->m, to_hyperparams(*opts), opts->seed, class_set_from_mask(opts->positive_mask));
    if (summary) {
      summary->iterations_run = r.report.iterations_run;
      summary->converged = r.report.converged ? 1 : 0;
      summary->final_loss = r.model.training_meta.final_loss;
    }
    auto h = std::make_unique<bf_model>();
    h->model = std::move(r.model);
    *out = h.release();
  });
}

bf_status bf_model_save(const bf_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "model and path must be non-null");
    save_model(model->model, path);
  });
}

bf_status bf_model_load(const char* path, bf_model** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto h = std::make_unique<bf_model>();
    h->model = load_model(path);
    *out = h.release();
  });
}

void bf_model_free(bf_model* model) { delete model; }

size_t bf_model_feature_count(const bf_model* model) { return model ? model->model.feature_names.size() : 0; }

const char* bf_model_feature_name(const bf_model* model, size_t index) {
  if (!model || index >= model->model.feature_names.size()) return nullptr;
  return model->model.feature_names[index].c_str();
}

bf_status bf_model_weights(const bf_model* model, double* weights, size_t len, double* bias) {
  return guarded([&] {
    require(model != nullptr, "model must be non-null");
    const auto& w = model->model.weights;
    if (weights) {
      if (len != w.size()) throw Error(ErrorCode::LengthMismatch, "weights buffer length differs from model width");
      std::memcpy(weights, w.data(), w.size() * sizeof(double));
    }
    if (bias) *bias = model->model.bias;
  });
}

bf_status bf_model_predict_proba(const bf_model* model, const bf_matrix* m, double* out, size_t len) {
  return guarded([&] {
    require(model && m && out, "model, matrix and out must be non-null");
    if (len != m->m.rows()) throw Error(ErrorCode::LengthMismatch, "output length differs from matrix rows");
    const auto p = predict_proba(model->model, aligned(model->model, m->m));
    std::memcpy(out, p.data(), p.size() * sizeof(double));
  });
}

// ---- evaluation ----

bf_status bf_metrics_from_counts(uint64_t tp, uint64_t fp, uint64_t fn, uint64_t tn, bf_metrics* out) {
  return guarded([&] {
    require(out != nullptr, "out must be non-null");
    *out = to_c(metrics_from_confusion(ConfusionMatrix{tp, fp, fn, tn}));
  });
}

bf_status bf_evaluate(const bf_model* model, const bf_matrix* m, bf_metrics* out) {
  return guarded([&] {
    require(model && m && out, "model, matrix and out must be non-null");
    *out = to_c(evaluate(model->model, aligned(model->model, m->m)));
  });
}

bf_status bf_evaluate_to_file(const bf_model* model, const bf_matrix* m, const char* path) {
  return guarded([&] {
    require(model && m && path, "model, matrix and path must be non-null");
    const MetricsReport r = evaluate(model->model, aligned(model->model, m->m));
    RunConfigEcho echo;
    echo.seed = model->model.training_meta.seed;
    echo.split = "none (evaluated on the given matrix)";
    echo.positive_classes = model->model.training_meta.positive_classes;
    echo.features = model->model.feature_names;
    if (!m->m.keys.empty() && m->m.rows() > 0) {
      // Width and stride are not recoverable from a feature CSV.
      echo.width_s = 0;
      echo.stride_s = 0;
    }
    detail::atomic_write(path, metrics_report_json(r, echo));
  });
}

bf_status bf_report_histogram(const char* sweep_csv_path, const char* column, double bin_width, double lo, double hi,
                              const char* out_path) {
  return guarded([&] {
    require(sweep_csv_path && column && out_path, "paths and column must be non-null");
    histogram({}, bin_width, lo, hi);  // reject bad bins before touching files
    const auto values = read_sweep_column(detail::read_file(sweep_csv_path), column);
    detail::atomic_write(out_path, histogram_csv(histogram(values, bin_width, lo, hi)));
  });
}

// ---- experiments ----

void bf_run_options_default(bf_run_options* out) {
  if (!out) return;
  *out = bf_run_options{};
  out->split_random = 0;
  out->train_fraction = 0.7;
  out->purge_gap_s = -1;
  bf_train_options_default(&out->train);
  out->jobs = 0;
  out->record_timing = 0;
}

bf_status bf_sweep(const bf_flows* flows, const int64_t* widths, size_t n_widths, const int64_t* strides,
                   size_t n_strides, const bf_run_options* opts, uint64_t seed, const char* out_path) {
  return guarded([&] {
    require(flows && widths && strides && opts && out_path, "null argument");
    const RunOptions ro = to_run_options(*opts);
    const SweepResult r = run_grid(flows->set.flows, std::span(widths, n_widths), std::span(strides, n_strides), ro,
                                   seed, opts->jobs);
    detail::atomic_write(out_path, sweep_csv(r, opts->record_timing != 0));
  });
}

bf_status bf_repeat(const bf_flows* flows, int64_t width_s, int64_t stride_s, int runs, const bf_run_options* opts,
                    uint64_t seed, int fixed_seed, const char* out_path) {
  return guarded([&] {
    require(flows && opts && out_path, "null argument");
    const RunOptions ro = to_run_options(*opts);
    const RepeatResult r = repeat_runs(flows->set.flows, width_s, stride_s, runs, ro, seed, fixed_seed != 0);
    detail::atomic_write(out_path, repeat_csv(r, opts->record_timing != 0));
  });
}

bf_status bf_scenarios(const int* scenario_ids, const char* const* paths, size_t n, int64_t width_s,
                       int64_t stride_s, const bf_run_options* opts, uint64_t seed, const char* out_path) {
  return guarded([&] {
    require(scenario_ids && paths && opts && out_path, "null argument");
    require(n > 0, "at least one scenario file is required");
    std::map<int, std::string> files;
    for (size_t i = 0; i < n; ++i) {
      require(paths[i] != nullptr, "null scenario path");
      if (!files.emplace(scenario_ids[i], paths[i]).second)
        throw Error(ErrorCode::InvalidArgument, "duplicate scenario id " + std::to_string(scenario_ids[i]));
    }
    const RunOptions ro = to_run_options(*opts);
    const auto rows = scenario_compare(files, width_s, stride_s, ro, seed);
    detail::atomic_write(out_path, scenario_csv(rows));
  });
}

// ---- synthetic ----

bf_status bf_synth(const char* preset, const bf_synth_options* opts, const char* out_path, uint64_t* out_flows) {
  return guarded([&] {
    require(preset && opts && out_path, "null argument");
    if (std::string(preset) != "scenario9")
      throw Error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(preset) + "' (available: scenario9)");
    SynthConfig cfg = preset_scenario9(opts->seed);
    cfg.hard = opts->hard != 0;
    if (opts->duration_s > 0) cfg.duration_s = opts->duration_s;
    const SynthOutput s = generate(cfg);
    detail::atomic_write(out_path, s.csv);
    if (out_flows) *out_flows = s.flows;
  });
}

}  // extern "C"
