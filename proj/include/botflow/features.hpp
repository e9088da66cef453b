#pragma once

// Sliding-window assignment, per-(window, source) aggregation, the feature
// matrix and its z-score standardization.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botflow/flow.hpp"

namespace botflow {

enum class GroupKey : std::uint8_t { Source, SourceDestination };

struct WindowConfig {
  std::int64_t width_s = 90;
  std::int64_t stride_s = 15;
  // Start of window 0. Unset means "earliest start time in the input".
  std::optional<Timestamp> origin;
  GroupKey group_key = GroupKey::Source;

  // Throws Error(InvalidArgument) when width or stride < 1.
  void validate() const;
  // True when stride exceeds width, i.e. some instants fall in no window.
  bool has_gaps() const { return stride_s > width_s; }
};

// Indices k >= 0 with origin + k*stride <= t < origin + k*stride + width,
// ascending. Throws Error(TimeBeforeOrigin).
std::vector<std::uint64_t> window_indices(Timestamp t, const WindowConfig& cfg);

struct AggregateStats {
  double sum = 0;
  double mean = 0;
  double std = 0;  // population
  double max = 0;
  double median = 0;
};

// Throws Error(EmptyValues).
AggregateStats aggregate_stats(std::span<const double> values);

inline constexpr std::size_t kBaseAttributeCount = 4;
inline constexpr std::size_t kStatCount = 5;
inline constexpr std::size_t kFeatureCount = 1 + kBaseAttributeCount * kStatCount;

// "flow_count", then "{attr}_{stat}" attr-major over
// dur, tot_pkts, tot_bytes, src_bytes x sum, mean, std, max, median.
const std::array<std::string, kFeatureCount>& canonical_feature_names();

using ClassSet = std::array<bool, kLabelClassCount>;

ClassSet make_class_set(std::initializer_list<LabelClass> classes);
inline ClassSet default_positive_classes() {
  return make_class_set({LabelClass::Botnet, LabelClass::CnC});
}
// Parses "botnet,cnc". Throws Error(InvalidArgument).
ClassSet parse_class_set(std::string_view csv);
std::string format_class_set(const ClassSet& set);

struct FeatureRow {
  std::uint64_t window_index = 0;
  Timestamp window_start;
  std::string src_addr;  // "src->dst" under GroupKey::SourceDestination
  std::uint64_t flow_count = 0;
  std::array<AggregateStats, kBaseAttributeCount> attrs{};  // dur, tot_pkts, tot_bytes, src_bytes
  std::array<std::uint64_t, kLabelClassCount> class_counts{};
  std::uint8_t target = 0;

  // Projection onto canonical_feature_names() order.
  std::array<double, kFeatureCount> features() const;
};

struct RowKey {
  std::uint64_t window_index = 0;
  std::int64_t window_start_us = 0;
  std::string src_addr;
  friend bool operator==(const RowKey&, const RowKey&) = default;
};

// Row-major dense matrix with per-row keys and binary targets.
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<RowKey> keys;
  std::vector<double> values;  // rows() * cols()
  std::vector<std::uint8_t> targets;

  std::size_t rows() const { return keys.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

  void push_row(RowKey key, std::span<const double> features, std::uint8_t target);
  FeatureMatrix subset_rows(std::span<const std::size_t> indices) const;
  // Throws Error(SchemaMismatch) on an unknown name.
  FeatureMatrix select_columns(std::span<const std::string> names) const;
  std::size_t positives() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

struct BuildResult {
  std::vector<FeatureRow> rows;  // sorted by (window_index, src_addr)
  Timestamp origin;
  std::vector<std::string> warnings;
};

// Throws Error(EmptyInput) for no flows or an empty positive class set.
BuildResult build_rows(std::span<const FlowRecord> flows, const WindowConfig& cfg,
                       const ClassSet& positive_classes = default_positive_classes());

FeatureMatrix to_matrix(std::span<const FeatureRow> rows);

FeatureMatrix build_matrix(std::span<const FlowRecord> flows, const WindowConfig& cfg,
                           const ClassSet& positive_classes = default_positive_classes());

// CSV: "window_index,window_start_us,src_addr,<features...>,target", reals
// as %.9g.
std::string matrix_to_csv(const FeatureMatrix& m);
// Throws Error(Io) / Error(SchemaMismatch) on malformed content.
FeatureMatrix matrix_from_csv(std::string_view text);
void write_matrix_csv(const FeatureMatrix& m, const std::string& path);
FeatureMatrix read_matrix_csv(const std::string& path);

struct StandardizationParams {
  std::vector<std::string> feature_names;
  std::vector<double> means;
  std::vector<double> scales;
  std::vector<std::uint8_t> constant_flags;

  friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

// Population mean/std per column; zero-variance columns get scale 1 and
// the constant flag. Throws Error(EmptyInput).
StandardizationParams standardize_fit(const FeatureMatrix& m);
// Throws Error(SchemaMismatch).
FeatureMatrix standardize_apply(const FeatureMatrix& m, const StandardizationParams& p);

}  // namespace botflow
