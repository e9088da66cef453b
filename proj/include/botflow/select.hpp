#pragma once

// Optional dimension reduction stages: Pearson-correlation filtering,
// backward feature elimination and PCA.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "botflow/features.hpp"
#include "botflow/logreg.hpp"

namespace botflow {

struct CorrelationMatrix {
  std::vector<std::string> feature_names;
  std::vector<double> values;  // d * d, row-major
  std::vector<std::uint8_t> constant_flags;

  std::size_t dim() const { return feature_names.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * dim() + j]; }
};

// Pairs involving a zero-variance column get r = 0 (diagonal included) and
// the column is flagged. Throws Error(TooFewRows) for fewer than 2 rows.
CorrelationMatrix pearson_matrix(const FeatureMatrix& m);

struct DroppedFeature {
  std::string name;
  std::string reason;
};

struct FilterResult {
  std::vector<std::string> retained;
  std::vector<DroppedFeature> dropped;
};

// Greedy scan in matrix column order; drops constants and any column whose
// |r| with an already retained column exceeds `threshold`.
FilterResult correlation_filter(const FeatureMatrix& m, double threshold);

enum class Metric : std::uint8_t { F1, Precision, Recall };

// Fits on `train` and returns predicted labels for `validation`.
using Trainer = std::function<std::vector<std::uint8_t>(const FeatureMatrix& train, const FeatureMatrix& validation)>;

struct EliminationStep {
  std::string removed;
  double score;
};

struct EliminationResult {
  std::vector<std::string> retained;
  double baseline_score = 0;
  std::vector<EliminationStep> trace;
};

struct EliminationOptions {
  std::size_t min_features = 1;
  // Stop when the best removal would lower the score by more than this.
  double tolerance = 0.0;
};

// Throws Error(DegenerateSplit) when validation holds a single class and
// Error(InvalidArgument) when min_features exceeds the column count.
EliminationResult backward_elimination(const FeatureMatrix& train, const FeatureMatrix& validation,
                                       const Trainer& trainer, Metric metric, const EliminationOptions& opts);

struct PcaModel {
  std::vector<std::string> feature_names;
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // n_components rows of length d
  std::vector<double> explained_variance;       // population variance along each axis

  std::size_t n_components() const { return components.size(); }
};

// Eigen-decomposition of the population covariance. Components are sorted
// by non-increasing variance and signed so their largest-magnitude entry is
// positive. Throws Error(TooFewRows) / Error(BadComponentCount).
PcaModel pca_fit(const FeatureMatrix& m, std::size_t n_components);
// Projects (x - mean); output columns are "pc1".."pcK". Throws
// Error(SchemaMismatch).
FeatureMatrix pca_transform(const FeatureMatrix& m, const PcaModel& model);
// Maps projected rows back into the original feature space.
std::vector<double> pca_reconstruct(const FeatureMatrix& projected, const PcaModel& model);

struct SelectionReport {
  std::vector<std::string> retained;
  std::vector<DroppedFeature> dropped;
  std::optional<EliminationResult> elimination;
  std::optional<PcaModel> pca;
  std::string metric;
};

std::string selection_report_json(const SelectionReport& r);

struct SelectionOptions {
  std::optional<double> corr_threshold;
  bool backward_elimination = false;
  EliminationOptions elimination;
  Metric metric = Metric::F1;
  std::size_t pca_components = 0;  // 0 disables PCA
  double train_fraction = 0.7;      // chronological validation split
  double purge_gap_s = 0;
  Hyperparams hyperparams;
};

struct SelectionOutcome {
  SelectionReport report;
  FeatureMatrix reduced;
};

// Correlation filter, then backward elimination with logistic regression
// scored on a chronological hold-out, then PCA; each stage optional.
SelectionOutcome run_selection(const FeatureMatrix& m, const SelectionOptions& opts);

}  // namespace botflow
