#pragma once

// Confusion counts, precision/recall/F1, histograms and report rendering.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botflow/features.hpp"
#include "botflow/logreg.hpp"

namespace botflow {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionMatrix& merge(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Throws Error(LengthMismatch) / Error(EmptyInput).
ConfusionMatrix confusion(std::span<const std::uint8_t> y_true, std::span<const std::uint8_t> y_pred);

struct MetricsReport {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  ConfusionMatrix confusion;
  bool precision_undefined = false;  // tp + fp == 0
  bool recall_undefined = false;     // tp + fn == 0

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// 0/0 ratios become 0 with the matching flag set.
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

struct F1Check {
  std::vector<double> deviations;
  std::vector<bool> passed;
  double max_deviation = 0;
  bool all_passed() const;
};

struct PrfRow {
  double precision;
  double recall;
  double f1;
};

// |F1 - 2PR/(P+R)| per row. Throws Error(DegenerateRow) when P+R == 0.
F1Check f1_consistency_check(std::span<const PrfRow> rows, double tol);

struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 ascending edges
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::uint64_t total() const;
  // Values falling in bins whose lower edge is >= edge.
  std::uint64_t count_at_or_above(double edge) const;
  std::uint64_t count_below(double edge) const;
};

// Half-open bins [e, e + bin_width) over [lo, hi). Throws Error(BadBins).
Histogram histogram(std::span<const double> values, double bin_width, double lo = 0.0, double hi = 1.0);

std::string histogram_csv(const Histogram& h);

// Provenance echoed into report files.
struct RunConfigEcho {
  std::int64_t width_s = 0;
  std::int64_t stride_s = 0;
  std::uint64_t seed = 0;
  std::string split;
  std::string positive_classes;
  std::vector<std::string> features;
};

MetricsReport evaluate(const LogRegModel& model, const FeatureMatrix& m);

std::string metrics_report_json(const MetricsReport& r, const std::optional<RunConfigEcho>& echo);

}  // namespace botflow
