#include "botflow/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "botflow/error.hpp"
#include "util.hpp"

namespace botflow {

ConfusionMatrix confusion(std::span<const std::uint8_t> y_true, std::span<const std::uint8_t> y_pred) {
  if (y_true.size() != y_pred.size())
    throw Error(ErrorCode::LengthMismatch, "y_true and y_pred lengths differ");
  if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "confusion over zero rows");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] != 0;
    const bool p = y_pred[i] != 0;
    if (t && p) ++cm.tp;
    else if (!t && p) ++cm.fp;
    else if (t && !p) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  const auto tp = static_cast<double>(cm.tp);
  if (cm.tp + cm.fp == 0) r.precision_undefined = true;
  else r.precision = tp / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn == 0) r.recall_undefined = true;
  else r.recall = tp / static_cast<double>(cm.tp + cm.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

bool F1Check::all_passed() const {
  return std::all_of(passed.begin(), passed.end(), [](bool b) { return b; });
}

F1Check f1_consistency_check(std::span<const PrfRow> rows, double tol) {
  F1Check out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!(r.precision + r.recall > 0))
      throw Error(ErrorCode::DegenerateRow, "row " + std::to_string(i) + " has P + R = 0");
    const double dev = std::abs(r.f1 - 2 * r.precision * r.recall / (r.precision + r.recall));
    out.deviations.push_back(dev);
    out.passed.push_back(dev <= tol);
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = underflow + overflow;
  for (auto c : counts) t += c;
  return t;
}

std::uint64_t Histogram::count_at_or_above(double edge) const {
  std::uint64_t t = overflow;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (bin_edges[i] >= edge) t += counts[i];
  return t;
}

std::uint64_t Histogram::count_below(double edge) const {
  std::uint64_t t = underflow;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (bin_edges[i + 1] <= edge) t += counts[i];
  return t;
}

namespace {

// lo + i*w accumulates representation error (0.05 * 14 != 0.7); snap edges
// onto a 1e-12 grid so decimal thresholds land on the intended side.
double snap(double e) {
  if (std::abs(e) > 1e3) return e;
  return std::round(e * 1e12) / 1e12;
}

}  // namespace

Histogram histogram(std::span<const double> values, double bin_width, double lo, double hi) {
  if (!(bin_width > 0) || !std::isfinite(bin_width) || !(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::BadBins, "histogram needs bin_width > 0 and lo < hi");
  const double span = (hi - lo) / bin_width;
  auto bins = static_cast<std::size_t>(std::ceil(span - 1e-9));
  if (bins == 0) bins = 1;
  if (bins > 10'000'000) throw Error(ErrorCode::BadBins, "too many histogram bins");

  Histogram h;
  h.bin_edges.reserve(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) h.bin_edges.push_back(snap(lo + static_cast<double>(i) * bin_width));
  h.bin_edges.push_back(hi);
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (v < lo) {
      ++h.underflow;
    } else if (!(v < hi)) {
      ++h.overflow;  // also NaN
    } else {
      auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - h.bin_edges.begin()) - 1];
    }
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  out += "-inf," + detail::fmt9(h.bin_edges.front()) + "," + std::to_string(h.underflow) + "\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out += detail::fmt9(h.bin_edges[i]) + "," + detail::fmt9(h.bin_edges[i + 1]) + "," +
           std::to_string(h.counts[i]) + "\n";
  out += detail::fmt9(h.bin_edges.back()) + ",inf," + std::to_string(h.overflow) + "\n";
  return out;
}

MetricsReport evaluate(const LogRegModel& model, const FeatureMatrix& m) {
  if (m.rows() == 0) throw Error(ErrorCode::EmptyInput, "evaluation matrix is empty");
  const auto pred = predict_label(model, m);
  return metrics_from_confusion(confusion(m.targets, pred));
}

std::string metrics_report_json(const MetricsReport& r, const std::optional<RunConfigEcho>& echo) {
  using ojson = nlohmann::ordered_json;
  // Reals are emitted as %.9g numbers.
  auto num = [](double v) { return ojson::parse(detail::fmt9(v)); };
  ojson j;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
  j["precision"] = num(r.precision);
  j["recall"] = num(r.recall);
  j["f1"] = num(r.f1);
  j["degenerate"] = {{"precision_undefined", r.precision_undefined}, {"recall_undefined", r.recall_undefined}};
  if (echo) {
    j["config"] = {{"width_s", echo->width_s},
                   {"stride_s", echo->stride_s},
                   {"seed", echo->seed},
                   {"split", echo->split},
                   {"positive_classes", echo->positive_classes},
                   {"features", echo->features}};
  }
  return j.dump(2) + "\n";
}

}  // namespace botflow
