#include "botflow/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "botflow/error.hpp"
#include "botflow/reference_tables.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace botflow {

namespace {
constexpr std::int64_t kMicros = 1'000'000;

void require_both_classes(const FeatureMatrix& m, const char* side) {
  const std::size_t pos = m.positives();
  if (m.rows() == 0) throw Error(ErrorCode::DegenerateSplit, std::string(side) + " partition is empty");
  if (pos == 0 || pos == m.rows())
    throw Error(ErrorCode::DegenerateSplit, std::string(side) + " partition contains a single class");
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}
}  // namespace

void SplitSpec::validate() const {
  if (!(train_fraction > 0 && train_fraction < 1))
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0,1)");
  if (purge_gap_s && !(*purge_gap_s >= 0)) throw Error(ErrorCode::InvalidArgument, "purge gap must be >= 0");
}

std::string SplitSpec::describe(std::int64_t width_s) const {
  if (mode == SplitMode::StratifiedRandom)
    return "stratified_random fraction=" + detail::fmt9(train_fraction) + " seed=" + std::to_string(seed);
  const double purge = purge_gap_s.value_or(static_cast<double>(width_s));
  return "chronological fraction=" + detail::fmt9(train_fraction) + " purge_gap_s=" + detail::fmt9(purge);
}

SplitResult split(const FeatureMatrix& m, const SplitSpec& spec, std::int64_t width_s) {
  spec.validate();
  require_both_classes(m, "input");
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;

  if (spec.mode == SplitMode::Chronological) {
    std::vector<std::size_t> order(m.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return m.keys[a].window_start_us < m.keys[b].window_start_us;
    });
    const auto cut = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(m.rows())));
    if (cut == 0 || cut >= m.rows()) throw Error(ErrorCode::DegenerateSplit, "train fraction leaves a side empty");
    const std::int64_t cut_time = m.keys[order[cut]].window_start_us;
    const double purge_s = spec.purge_gap_s.value_or(static_cast<double>(width_s));
    const auto purge_us = static_cast<std::int64_t>(std::llround(purge_s * kMicros));
    for (std::size_t i : order) {
      const std::int64_t start = m.keys[i].window_start_us;
      if (start < cut_time) train_idx.push_back(i);
      else if (start >= cut_time + purge_us) test_idx.push_back(i);
    }
  } else {
    detail::Rng rng(spec.seed);
    for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < m.rows(); ++i)
        if (m.targets[i] == cls) idx.push_back(i);
      for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
      const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(idx.size())));
      train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
      test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
  }

  SplitResult out{m.subset_rows(train_idx), m.subset_rows(test_idx)};
  require_both_classes(out.train, "train");
  require_both_classes(out.test, "test");
  return out;
}

std::string RunResult::status() const {
  if (error) return "failed: " + sanitize(*error);
  if (warnings.empty()) return "ok";
  std::string s = "ok (warning: ";
  for (std::size_t i = 0; i < warnings.size(); ++i) s += (i ? "; " : "") + sanitize(warnings[i]);
  return s + ")";
}

RunResult run_single(std::span<const FlowRecord> flows, std::int64_t width_s, std::int64_t stride_s,
                     const RunOptions& opts, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  RunResult r;
  r.width_s = width_s;
  r.stride_s = stride_s;
  r.seed = seed;

  WindowConfig cfg;
  cfg.width_s = width_s;
  cfg.stride_s = stride_s;
  BuildResult built = build_rows(flows, cfg, opts.positive_classes);
  r.warnings = built.warnings;
  const FeatureMatrix m = to_matrix(built.rows);
  built.rows.clear();

  SplitSpec spec = opts.split;
  spec.seed = seed;
  const SplitResult parts = split(m, spec, width_s);
  r.rows_train = parts.train.rows();
  r.rows_test = parts.test.rows();

  const FitResult fitted = fit(parts.train, opts.hyperparams, seed, opts.positive_classes);
  r.train = evaluate(fitted.model, parts.train);
  r.test = evaluate(fitted.model, parts.test);
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

SweepResult run_pairs(std::span<const FlowRecord> flows, std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                      const RunOptions& opts, std::uint64_t base_seed, unsigned jobs) {
  SweepResult out;
  out.cells.resize(pairs.size());
  auto run_cell = [&](std::size_t i) {
    const auto [w, s] = pairs[i];
    try {
      out.cells[i] = run_single(flows, w, s, opts, base_seed);
    } catch (const std::exception& e) {
      RunResult failed;
      failed.width_s = w;
      failed.stride_s = s;
      failed.seed = base_seed;
      if (const auto* be = dynamic_cast<const Error*>(&e))
        failed.error = std::string(error_code_name(be->code())) + ": " + be->what();
      else
        failed.error = e.what();
      out.cells[i] = std::move(failed);
    }
  };

  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, pairs.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i) run_cell(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < jobs; ++t)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < pairs.size(); i = next++) run_cell(i);
    });
  for (auto& w : workers) w.join();
  return out;
}

SweepResult run_grid(std::span<const FlowRecord> flows, std::span<const std::int64_t> widths,
                     std::span<const std::int64_t> strides, const RunOptions& opts, std::uint64_t base_seed,
                     unsigned jobs) {
  if (widths.empty() || strides.empty()) throw Error(ErrorCode::InvalidArgument, "width and stride lists must be non-empty");
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (auto w : widths)
    for (auto s : strides) pairs.emplace_back(w, s);
  return run_pairs(flows, pairs, opts, base_seed, jobs);
}

namespace {

std::string metric_cells(const RunResult& r) {
  using detail::fmt9;
  return fmt9(r.train.precision) + "," + fmt9(r.train.recall) + "," + fmt9(r.train.f1) + "," + fmt9(r.test.precision) +
         "," + fmt9(r.test.recall) + "," + fmt9(r.test.f1);
}

}  // namespace

std::string sweep_csv(const SweepResult& r, bool with_timing) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& c : r.cells) {
    out += std::to_string(c.width_s) + "," + std::to_string(c.stride_s) + "," + std::to_string(c.seed) + ",";
    out += metric_cells(c) + "," + std::to_string(c.rows_train) + "," + std::to_string(c.rows_test) + ",";
    out += with_timing ? detail::fmt9(c.wall_time_s) : std::string("0");
    out += "," + c.status() + "\n";
  }
  return out;
}

RepeatResult repeat_runs(std::span<const FlowRecord> flows, std::int64_t width_s, std::int64_t stride_s, int n,
                         const RunOptions& opts, std::uint64_t base_seed, bool fixed_seed) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "repeat needs at least 2 runs");
  RepeatResult out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = fixed_seed ? base_seed : base_seed + static_cast<std::uint64_t>(i);
    out.runs.push_back(run_single(flows, width_s, stride_s, opts, seed));
  }
  for (std::size_t k = 0; k < out.dispersion.size(); ++k) {
    auto value = [k](const RunResult& r) {
      const MetricsReport& m = k < 3 ? r.train : r.test;
      const std::size_t f = k % 3;
      return f == 0 ? m.precision : f == 1 ? m.recall : m.f1;
    };
    Dispersion d{value(out.runs.front()), value(out.runs.front())};
    for (const auto& r : out.runs) {
      d.min = std::min(d.min, value(r));
      d.max = std::max(d.max, value(r));
    }
    out.dispersion[k] = d;
  }
  return out;
}

std::string repeat_csv(const RepeatResult& r, bool with_timing) {
  using detail::fmt9;
  std::string out =
      "run,seed,train_precision,train_recall,train_f1,test_precision,test_recall,test_f1,rows_train,rows_test,"
      "wall_time_s\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& c = r.runs[i];
    out += std::to_string(i + 1) + "," + std::to_string(c.seed) + "," + metric_cells(c) + "," +
           std::to_string(c.rows_train) + "," + std::to_string(c.rows_test) + "," +
           (with_timing ? fmt9(c.wall_time_s) : std::string("0")) + "\n";
  }
  const char* labels[] = {"min", "max", "range"};
  for (int row = 0; row < 3; ++row) {
    out += std::string(labels[row]) + ",";
    for (const auto& d : r.dispersion) out += "," + fmt9(row == 0 ? d.min : row == 1 ? d.max : d.range());
    out += ",,,\n";
  }
  return out;
}

std::vector<ScenarioOutcome> scenario_compare(const std::map<int, std::string>& files, std::int64_t width_s,
                                              std::int64_t stride_s, const RunOptions& opts, std::uint64_t seed) {
  for (const auto& entry : files) scenario_info(entry.first);  // unknown ids fail before any run
  std::vector<ScenarioOutcome> out;
  for (const auto& [id, path] : files) {
    ScenarioOutcome row;
    row.scenario_id = id;
    row.path = path;
    row.run.width_s = width_s;
    row.run.stride_s = stride_s;
    row.run.seed = seed;
    try {
      const FlowSet set = read_flows(path, OnError::Skip);
      row.flows = set.flows.size();
      row.run = run_single(set.flows, width_s, stride_s, opts, seed);
    } catch (const Error& e) {
      row.run.error = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string scenario_csv(std::span<const ScenarioOutcome> rows) {
  using detail::fmt9;
  std::string out =
      "scenario,flows,width_s,stride_s,precision,recall,f1,tp,fp,fn,tn,rows_train,rows_test,ref_precision,"
      "ref_recall,ref_f1,status\n";
  const auto refs = reference_scenario_results();
  for (const auto& r : rows) {
    const auto& t = r.run.test;
    out += std::to_string(r.scenario_id) + "," + std::to_string(r.flows) + "," + std::to_string(r.run.width_s) + "," +
           std::to_string(r.run.stride_s) + "," + fmt9(t.precision) + "," + fmt9(t.recall) + "," + fmt9(t.f1) + "," +
           std::to_string(t.confusion.tp) + "," + std::to_string(t.confusion.fp) + "," +
           std::to_string(t.confusion.fn) + "," + std::to_string(t.confusion.tn) + "," +
           std::to_string(r.run.rows_train) + "," + std::to_string(r.run.rows_test) + ",";
    auto ref = std::find_if(refs.begin(), refs.end(), [&](const auto& x) { return x.scenario_id == r.scenario_id; });
    if (ref != refs.end()) out += fmt9(ref->precision) + "," + fmt9(ref->recall) + "," + fmt9(ref->f1) + ",";
    else out += ",,,";
    out += r.run.status() + "\n";
  }
  return out;
}

std::vector<double> read_sweep_column(std::string_view csv_text, std::string_view column) {
  std::vector<double> out;
  std::optional<std::size_t> col;
  std::optional<std::size_t> status_col;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv_text.size()) {
    auto nl = csv_text.find('\n', pos);
    std::string_view line = csv_text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? csv_text.size() : nl + 1;
    line = detail::trim(line);
    if (line.empty()) continue;
    auto fields = detail::split(line, ',');
    if (header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == column) col = i;
        if (fields[i] == "status") status_col = i;
      }
      if (!col) throw Error(ErrorCode::SchemaMismatch, "column '" + std::string(column) + "' not found");
      header = false;
      continue;
    }
    if (*col >= fields.size()) continue;
    // Summary rows ("min", "max", "range") of repeat output.
    if (!detail::parse_number<double>(fields[0])) continue;
    if (status_col && *status_col < fields.size() && !fields[*status_col].starts_with("ok")) continue;
    if (auto v = detail::parse_number<double>(fields[*col])) out.push_back(*v);
  }
  if (header) throw Error(ErrorCode::SchemaMismatch, "empty CSV");
  return out;
}

}  // namespace botflow
