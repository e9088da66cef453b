#pragma once

// Train/test splitting and the experiment drivers: single runs,
// width x stride grids, repeated runs and per-scenario comparisons.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botflow/features.hpp"
#include "botflow/logreg.hpp"
#include "botflow/metrics.hpp"

namespace botflow {

enum class SplitMode : std::uint8_t { Chronological, StratifiedRandom };

struct SplitSpec {
  SplitMode mode = SplitMode::Chronological;
  double train_fraction = 0.7;
  // Chronological only. Unset means "one window width".
  std::optional<double> purge_gap_s;
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe(std::int64_t width_s) const;
};

struct SplitResult {
  FeatureMatrix train;
  FeatureMatrix test;
};

// Chronological: rows ordered by window start are cut at train_fraction;
// train keeps windows starting before the first held-out window start T,
// test keeps windows starting at or after T + purge gap.
// Stratified random: per-class seeded shuffle, ratios kept within one row.
// Throws Error(DegenerateSplit) when a side is empty or single-class.
SplitResult split(const FeatureMatrix& m, const SplitSpec& spec, std::int64_t width_s);

struct RunResult {
  std::int64_t width_s = 0;
  std::int64_t stride_s = 0;
  std::uint64_t seed = 0;
  MetricsReport train;
  MetricsReport test;
  std::size_t rows_train = 0;
  std::size_t rows_test = 0;
  double wall_time_s = 0;
  std::vector<std::string> warnings;
  std::optional<std::string> error;  // set for failed grid cells

  bool ok() const { return !error.has_value(); }
  std::string status() const;
};

struct RunOptions {
  SplitSpec split;
  Hyperparams hyperparams;
  ClassSet positive_classes = default_positive_classes();
};

// featurize -> split -> fit on train -> evaluate train and test. The run
// seed replaces split.seed.
RunResult run_single(std::span<const FlowRecord> flows, std::int64_t width_s, std::int64_t stride_s,
                     const RunOptions& opts, std::uint64_t seed);

struct SweepResult {
  std::vector<RunResult> cells;  // widths-major order
};

// Every (width, stride) pair; failures are recorded per cell. `jobs` caps
// worker threads (0 = hardware concurrency).
SweepResult run_grid(std::span<const FlowRecord> flows, std::span<const std::int64_t> widths,
                     std::span<const std::int64_t> strides, const RunOptions& opts, std::uint64_t base_seed,
                     unsigned jobs = 1);

// Explicit (width, stride) pairs, e.g. the reference sweep table.
SweepResult run_pairs(std::span<const FlowRecord> flows, std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                      const RunOptions& opts, std::uint64_t base_seed, unsigned jobs = 1);

inline constexpr std::string_view kSweepCsvHeader =
    "width_s,stride_s,seed,train_precision,train_recall,train_f1,test_precision,test_recall,test_f1,rows_train,"
    "rows_test,wall_time_s,status";

// wall_time_s is written as 0 unless `with_timing`, keeping output
// byte-stable across runs.
std::string sweep_csv(const SweepResult& r, bool with_timing);

struct Dispersion {
  double min = 0;
  double max = 0;
  double range() const { return max - min; }
};

struct RepeatResult {
  std::vector<RunResult> runs;
  // train P/R/F1 then test P/R/F1
  std::array<Dispersion, 6> dispersion{};
  const Dispersion& test_precision() const { return dispersion[3]; }
};

// n >= 2 runs with seeds base_seed..base_seed+n-1, or all base_seed when
// `fixed_seed`. Throws Error(InvalidArgument) for n < 2.
RepeatResult repeat_runs(std::span<const FlowRecord> flows, std::int64_t width_s, std::int64_t stride_s, int n,
                         const RunOptions& opts, std::uint64_t base_seed, bool fixed_seed = false);

std::string repeat_csv(const RepeatResult& r, bool with_timing);

struct ScenarioOutcome {
  int scenario_id = 0;
  std::string path;
  RunResult run;
  std::uint64_t flows = 0;
};

// One run_single per scenario file; unreadable or degenerate scenarios are
// recorded as failed rows. Throws Error(UnknownScenario) for ids outside
// 1..13 before any run starts.
std::vector<ScenarioOutcome> scenario_compare(const std::map<int, std::string>& files, std::int64_t width_s,
                                              std::int64_t stride_s, const RunOptions& opts, std::uint64_t seed);

std::string scenario_csv(std::span<const ScenarioOutcome> rows);

// Parses the sweep CSV back into per-column values (e.g. for histograms).
// Throws Error(SchemaMismatch) when the column is missing.
std::vector<double> read_sweep_column(std::string_view csv_text, std::string_view column);

}  // namespace botflow
