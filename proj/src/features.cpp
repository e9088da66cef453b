#include "botflow/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "botflow/error.hpp"
#include "util.hpp"

namespace botflow {

namespace {
constexpr std::int64_t kMicros = 1'000'000;
}

void WindowConfig::validate() const {
  if (width_s < 1) throw Error(ErrorCode::InvalidArgument, "window width must be >= 1 s");
  if (stride_s < 1) throw Error(ErrorCode::InvalidArgument, "window stride must be >= 1 s");
}

std::vector<std::uint64_t> window_indices(Timestamp t, const WindowConfig& cfg) {
  cfg.validate();
  const Timestamp origin = cfg.origin.value_or(t);
  if (t < origin) throw Error(ErrorCode::TimeBeforeOrigin, "timestamp precedes window origin");
  const std::int64_t offset = t.us - origin.us;
  const std::int64_t width = cfg.width_s * kMicros;
  const std::int64_t stride = cfg.stride_s * kMicros;
  const std::int64_t last = offset / stride;
  const std::int64_t first = offset < width ? 0 : (offset - width) / stride + 1;
  std::vector<std::uint64_t> out;
  if (first <= last) out.reserve(static_cast<std::size_t>(last - first + 1));
  for (std::int64_t k = first; k <= last; ++k) out.push_back(static_cast<std::uint64_t>(k));
  return out;
}

AggregateStats aggregate_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyValues, "aggregate over empty value list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();

  AggregateStats s;
  for (double v : sorted) s.sum += v;
  s.mean = s.sum / static_cast<double>(n);
  if (sorted.front() != sorted.back()) {
    double ss = 0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(n));
  }
  s.max = sorted.back();
  s.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  return s;
}

const std::array<std::string, kFeatureCount>& canonical_feature_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> out;
    const char* attrs[] = {"dur", "tot_pkts", "tot_bytes", "src_bytes"};
    const char* stats[] = {"sum", "mean", "std", "max", "median"};
    std::size_t i = 0;
    out[i++] = "flow_count";
    for (const char* a : attrs)
      for (const char* s : stats) out[i++] = std::string(a) + "_" + s;
    return out;
  }();
  return names;
}

ClassSet make_class_set(std::initializer_list<LabelClass> classes) {
  ClassSet set{};
  for (LabelClass c : classes) set[static_cast<std::size_t>(c)] = true;
  return set;
}

ClassSet parse_class_set(std::string_view csv) {
  ClassSet set{};
  for (auto tok : detail::split(csv, ',')) {
    auto c = parse_label_class(tok);
    if (!c) throw Error(ErrorCode::InvalidArgument, "unknown label class '" + std::string(tok) + "'");
    set[static_cast<std::size_t>(*c)] = true;
  }
  return set;
}

std::string format_class_set(const ClassSet& set) {
  std::string out;
  for (LabelClass c : kAllLabelClasses) {
    if (!set[static_cast<std::size_t>(c)]) continue;
    if (!out.empty()) out += ',';
    out += label_class_name(c);
  }
  return out;
}

std::array<double, kFeatureCount> FeatureRow::features() const {
  std::array<double, kFeatureCount> f{};
  std::size_t i = 0;
  f[i++] = static_cast<double>(flow_count);
  for (const auto& a : attrs) {
    f[i++] = a.sum;
    f[i++] = a.mean;
    f[i++] = a.std;
    f[i++] = a.max;
    f[i++] = a.median;
  }
  return f;
}

void FeatureMatrix::push_row(RowKey key, std::span<const double> features, std::uint8_t target) {
  if (features.size() != cols())
    throw Error(ErrorCode::ShapeMismatch, "row width differs from feature count");
  keys.push_back(std::move(key));
  values.insert(values.end(), features.begin(), features.end());
  targets.push_back(target);
}

FeatureMatrix FeatureMatrix::subset_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.keys.reserve(indices.size());
  out.values.reserve(indices.size() * cols());
  out.targets.reserve(indices.size());
  for (std::size_t i : indices) out.push_row(keys.at(i), row(i), targets.at(i));
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    auto it = std::find(feature_names.begin(), feature_names.end(), n);
    if (it == feature_names.end())
      throw Error(ErrorCode::SchemaMismatch, "feature '" + n + "' not present in matrix");
    idx.push_back(static_cast<std::size_t>(it - feature_names.begin()));
  }
  FeatureMatrix out;
  out.feature_names.assign(names.begin(), names.end());
  out.keys = keys;
  out.targets = targets;
  out.values.reserve(rows() * idx.size());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j : idx) out.values.push_back(at(i, j));
  return out;
}

std::size_t FeatureMatrix::positives() const {
  return static_cast<std::size_t>(std::count(targets.begin(), targets.end(), std::uint8_t{1}));
}

namespace {

struct GroupKeyValue {
  std::uint64_t window;
  std::string addr;
  bool operator==(const GroupKeyValue&) const = default;
};

struct GroupKeyHash {
  std::size_t operator()(const GroupKeyValue& k) const noexcept {
    return std::hash<std::string>{}(k.addr) ^ (std::hash<std::uint64_t>{}(k.window) * 0x9e3779b97f4a7c15ULL);
  }
};

struct GroupAcc {
  std::array<std::vector<double>, kBaseAttributeCount> values;
  std::array<std::uint64_t, kLabelClassCount> class_counts{};
};

}  // namespace

BuildResult build_rows(std::span<const FlowRecord> flows, const WindowConfig& cfg,
                       const ClassSet& positive_classes) {
  cfg.validate();
  if (flows.empty()) throw Error(ErrorCode::EmptyInput, "no flows to featurize");
  if (std::none_of(positive_classes.begin(), positive_classes.end(), [](bool b) { return b; }))
    throw Error(ErrorCode::EmptyInput, "positive class set is empty");

  BuildResult result;
  Timestamp origin = flows.front().start_time;
  for (const auto& f : flows) origin = std::min(origin, f.start_time);
  if (cfg.origin) {
    if (origin < *cfg.origin)
      throw Error(ErrorCode::TimeBeforeOrigin, "flow starts before configured window origin");
    origin = *cfg.origin;
  }
  result.origin = origin;
  if (cfg.has_gaps())
    result.warnings.push_back("stride " + std::to_string(cfg.stride_s) + " s exceeds width " +
                              std::to_string(cfg.width_s) + " s: gaps between windows are not covered");

  WindowConfig anchored = cfg;
  anchored.origin = origin;

  std::unordered_map<GroupKeyValue, GroupAcc, GroupKeyHash> groups;
  for (const auto& f : flows) {
    std::string addr = cfg.group_key == GroupKey::Source ? f.src_addr : f.src_addr + "->" + f.dst_addr;
    for (std::uint64_t k : window_indices(f.start_time, anchored)) {
      GroupAcc& g = groups[GroupKeyValue{k, addr}];
      g.values[0].push_back(f.dur);
      g.values[1].push_back(static_cast<double>(f.tot_pkts));
      g.values[2].push_back(static_cast<double>(f.tot_bytes));
      g.values[3].push_back(static_cast<double>(f.src_bytes));
      g.class_counts[static_cast<std::size_t>(f.label_class)]++;
    }
  }

  result.rows.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    FeatureRow row;
    row.window_index = key.window;
    row.window_start = Timestamp{origin.us + static_cast<std::int64_t>(key.window) * cfg.stride_s * kMicros};
    row.src_addr = key.addr;
    row.flow_count = acc.values[0].size();
    for (std::size_t a = 0; a < kBaseAttributeCount; ++a) row.attrs[a] = aggregate_stats(acc.values[a]);
    row.class_counts = acc.class_counts;
    for (std::size_t c = 0; c < kLabelClassCount; ++c)
      if (positive_classes[c] && acc.class_counts[c] > 0) row.target = 1;
    result.rows.push_back(std::move(row));
  }
  std::sort(result.rows.begin(), result.rows.end(), [](const FeatureRow& a, const FeatureRow& b) {
    if (a.window_index != b.window_index) return a.window_index < b.window_index;
    return a.src_addr < b.src_addr;
  });
  return result;
}

FeatureMatrix to_matrix(std::span<const FeatureRow> rows) {
  FeatureMatrix m;
  const auto& names = canonical_feature_names();
  m.feature_names.assign(names.begin(), names.end());
  m.keys.reserve(rows.size());
  m.values.reserve(rows.size() * kFeatureCount);
  m.targets.reserve(rows.size());
  for (const auto& r : rows) {
    const auto f = r.features();
    m.push_row(RowKey{r.window_index, r.window_start.us, r.src_addr}, f, r.target);
  }
  return m;
}

FeatureMatrix build_matrix(std::span<const FlowRecord> flows, const WindowConfig& cfg,
                           const ClassSet& positive_classes) {
  return to_matrix(build_rows(flows, cfg, positive_classes).rows);
}

std::string matrix_to_csv(const FeatureMatrix& m) {
  std::string out = "window_index,window_start_us,src_addr";
  for (const auto& n : m.feature_names) out += "," + n;
  out += ",target\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const RowKey& k = m.keys[i];
    out += std::to_string(k.window_index);
    out += ',';
    out += std::to_string(k.window_start_us);
    out += ',';
    out += k.src_addr;
    for (double v : m.row(i)) {
      out += ',';
      out += detail::fmt9(v);
    }
    out += ',';
    out += m.targets[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

FeatureMatrix matrix_from_csv(std::string_view text) {
  using detail::parse_number;
  FeatureMatrix m;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    auto fields = detail::split(line, ',');
    if (!header_seen) {
      if (fields.size() < 4 || fields[0] != "window_index" || fields[1] != "window_start_us" ||
          fields[2] != "src_addr" || fields.back() != "target")
        throw Error(ErrorCode::SchemaMismatch, "feature CSV header not recognized");
      for (std::size_t j = 3; j + 1 < fields.size(); ++j) m.feature_names.emplace_back(fields[j]);
      header_seen = true;
      continue;
    }
    if (fields.size() != m.cols() + 4)
      throw Error(ErrorCode::SchemaMismatch, "feature CSV line " + std::to_string(line_no) + ": wrong field count");
    auto wi = parse_number<std::uint64_t>(fields[0]);
    auto ws = parse_number<std::int64_t>(fields[1]);
    auto tg = parse_number<int>(fields.back());
    if (!wi || !ws || !tg || (*tg != 0 && *tg != 1))
      throw Error(ErrorCode::SchemaMismatch, "feature CSV line " + std::to_string(line_no) + ": bad key or target");
    std::vector<double> vals;
    vals.reserve(m.cols());
    for (std::size_t j = 3; j + 1 < fields.size(); ++j) {
      auto v = parse_number<double>(fields[j]);
      if (!v || !std::isfinite(*v))
        throw Error(ErrorCode::SchemaMismatch, "feature CSV line " + std::to_string(line_no) + ": bad value");
      vals.push_back(*v);
    }
    m.push_row(RowKey{*wi, *ws, std::string(fields[2])}, vals, static_cast<std::uint8_t>(*tg));
  }
  if (!header_seen) throw Error(ErrorCode::SchemaMismatch, "feature CSV is empty");
  return m;
}

void write_matrix_csv(const FeatureMatrix& m, const std::string& path) {
  detail::atomic_write(path, matrix_to_csv(m));
}

FeatureMatrix read_matrix_csv(const std::string& path) {
  return matrix_from_csv(detail::read_file(path));
}

StandardizationParams standardize_fit(const FeatureMatrix& m) {
  if (m.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot standardize an empty matrix");
  StandardizationParams p;
  p.feature_names = m.feature_names;
  const std::size_t d = m.cols();
  const auto n = static_cast<double>(m.rows());
  p.means.assign(d, 0.0);
  p.scales.assign(d, 1.0);
  p.constant_flags.assign(d, 0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) p.means[j] += m.at(i, j);
  for (auto& mu : p.means) mu /= n;
  std::vector<double> ss(d, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = m.at(i, j) - p.means[j];
      ss[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(ss[j] / n);
    // Relative floor guards against rounding residue on constant columns.
    if (sd == 0.0 || sd <= 1e-12 * std::abs(p.means[j])) {
      p.constant_flags[j] = 1;
    } else {
      p.scales[j] = sd;
    }
  }
  return p;
}

FeatureMatrix standardize_apply(const FeatureMatrix& m, const StandardizationParams& p) {
  if (m.feature_names != p.feature_names)
    throw Error(ErrorCode::SchemaMismatch, "standardization parameters do not match matrix features");
  FeatureMatrix out = m;
  const std::size_t d = m.cols();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < d; ++j) r[j] = (r[j] - p.means[j]) / p.scales[j];
  }
  return out;
}

}  // namespace botflow
