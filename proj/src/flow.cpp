#include "botflow/flow.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "botflow/error.hpp"
#include "util.hpp"

namespace botflow {

using detail::parse_number;
using detail::trim;

std::string_view label_class_name(LabelClass c) noexcept {
  switch (c) {
    case LabelClass::Background: return "background";
    case LabelClass::Normal: return "normal";
    case LabelClass::Botnet: return "botnet";
    case LabelClass::CnC: return "cnc";
  }
  return "?";
}

std::optional<LabelClass> parse_label_class(std::string_view name) {
  const std::string lowered = detail::to_lower(trim(name));
  for (LabelClass c : kAllLabelClasses)
    if (lowered == label_class_name(c)) return c;
  if (lowered == "c&c" || lowered == "cc") return LabelClass::CnC;
  return std::nullopt;
}

namespace {

std::optional<int> fixed_digits(std::string_view s) {
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return s.empty() ? std::nullopt : std::optional<int>(v);
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  // YYYY/MM/DD HH:MM:SS
  if (text.size() < 19 || text[4] != '/' || text[7] != '/' || text[10] != ' ' ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;
  auto y = fixed_digits(text.substr(0, 4));
  auto mo = fixed_digits(text.substr(5, 2));
  auto d = fixed_digits(text.substr(8, 2));
  auto h = fixed_digits(text.substr(11, 2));
  auto mi = fixed_digits(text.substr(14, 2));
  auto s = fixed_digits(text.substr(17, 2));
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  if (*h > 23 || *mi > 59 || *s > 59) return std::nullopt;

  std::int64_t frac_us = 0;
  std::string_view rest = text.substr(19);
  if (!rest.empty()) {
    if (rest.front() != '.') return std::nullopt;
    rest.remove_prefix(1);
    if (rest.size() > 6) return std::nullopt;
    if (!rest.empty()) {
      auto f = fixed_digits(rest);
      if (!f) return std::nullopt;
      frac_us = *f;
      for (std::size_t i = rest.size(); i < 6; ++i) frac_us *= 10;
    }
  }

  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t secs = std::int64_t{days_since_epoch} * 86400 + *h * 3600 + *mi * 60 + *s;
  return Timestamp{secs * 1'000'000 + frac_us};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  std::int64_t secs = t.us / 1'000'000;
  std::int64_t frac = t.us % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    --secs;
  }
  std::int64_t days = secs / 86400;
  std::int64_t sod = secs % 86400;
  if (sod < 0) {
    sod += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d/%02u/%02u %02d:%02d:%02d.%06lld", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(sod / 3600),
                int((sod / 60) % 60), int(sod % 60), static_cast<long long>(frac));
  return buf;
}

Classification classify_label(std::string_view label_raw, const LabelRules& rules) {
  using detail::icontains;
  using detail::to_lower;
  const std::string botnet = to_lower(rules.botnet_token);
  if (icontains(label_raw, botnet)) {
    if (icontains(label_raw, to_lower(rules.cnc_token))) return {LabelClass::CnC, false};
    return {LabelClass::Botnet, false};
  }
  if (icontains(label_raw, to_lower(rules.normal_token))) return {LabelClass::Normal, false};
  if (icontains(label_raw, to_lower(rules.background_token)))
    return {LabelClass::Background, false};
  return {LabelClass::Background, true};
}

namespace {

constexpr std::size_t kFieldCount = 15;

std::optional<Port> parse_port(std::string_view tok, std::size_t line_no, const char* what) {
  if (tok.empty()) return std::nullopt;
  std::optional<std::uint32_t> v;
  bool hex = false;
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
    hex = true;
    std::uint32_t out = 0;
    auto body = tok.substr(2);
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), out, 16);
    if (ec == std::errc() && ptr == body.data() + body.size()) v = out;
  } else {
    v = parse_number<std::uint32_t>(tok);
  }
  if (!v || *v > 65535)
    throw MalformedRowError(line_no, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return Port{static_cast<std::uint16_t>(*v), hex};
}

std::optional<std::uint32_t> parse_tos(std::string_view tok, std::size_t line_no,
                                       const char* what) {
  if (tok.empty()) return std::nullopt;
  if (auto v = parse_number<std::uint32_t>(tok)) return v;
  // Some exporters render ToS as "0.0".
  if (auto d = parse_number<double>(tok); d && *d >= 0 && *d <= 255 && std::floor(*d) == *d)
    return static_cast<std::uint32_t>(*d);
  throw MalformedRowError(line_no, std::string("bad ") + what + " '" + std::string(tok) + "'");
}

std::uint64_t parse_counter(std::string_view tok, std::size_t line_no, const char* what) {
  auto v = parse_number<std::uint64_t>(tok);
  if (!v)
    throw MalformedRowError(line_no,
                            std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
  return *v;
}

std::string render_port(const std::optional<Port>& p) {
  if (!p) return {};
  if (p->hex) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%04x", static_cast<unsigned>(p->value));
    return buf;
  }
  return std::to_string(p->value);
}

std::string render_opt(const std::optional<std::uint32_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace

FlowRecord parse_line(std::string_view line, std::size_t line_no, const LabelRules& rules,
                      ParseWarnings* warnings) {
  auto fields = detail::split(detail::trim(line), ',');
  if (fields.size() != kFieldCount)
    throw MalformedRowError(line_no, "expected 15 fields, got " + std::to_string(fields.size()));
  for (auto& f : fields) f = trim(f);

  FlowRecord r;
  auto ts = parse_timestamp(fields[0]);
  if (!ts) throw MalformedRowError(line_no, "unparseable timestamp '" + std::string(fields[0]) + "'");
  r.start_time = *ts;

  auto dur = parse_number<double>(fields[1]);
  if (!dur || !std::isfinite(*dur) || *dur < 0)
    throw MalformedRowError(line_no, "bad duration '" + std::string(fields[1]) + "'");
  r.dur = *dur;

  r.proto = detail::to_lower(fields[2]);
  r.src_addr = std::string(fields[3]);
  r.sport = parse_port(fields[4], line_no, "sport");
  r.dir = std::string(fields[5]);
  r.dst_addr = std::string(fields[6]);
  r.dport = parse_port(fields[7], line_no, "dport");
  r.state = std::string(fields[8]);
  r.s_tos = parse_tos(fields[9], line_no, "sTos");
  r.d_tos = parse_tos(fields[10], line_no, "dTos");
  r.tot_pkts = parse_counter(fields[11], line_no, "TotPkts");
  r.tot_bytes = parse_counter(fields[12], line_no, "TotBytes");
  r.src_bytes = parse_counter(fields[13], line_no, "SrcBytes");
  r.label_raw = std::string(fields[14]);

  const Classification cls = classify_label(r.label_raw, rules);
  r.label_class = cls.label_class;
  if (warnings) {
    warnings->unknown_label = cls.fallback;
    warnings->src_bytes_exceeds_total = r.src_bytes > r.tot_bytes;
  }
  return r;
}

std::string format_line(const FlowRecord& r) {
  char dur[64];
  std::snprintf(dur, sizeof dur, "%.6f", r.dur);
  std::string out;
  out.reserve(160);
  out += format_timestamp(r.start_time);
  out += ',';
  out += dur;
  for (const std::string& f :
       {r.proto, r.src_addr, render_port(r.sport), r.dir, r.dst_addr, render_port(r.dport),
        r.state, render_opt(r.s_tos), render_opt(r.d_tos), std::to_string(r.tot_pkts),
        std::to_string(r.tot_bytes), std::to_string(r.src_bytes), r.label_raw}) {
    out += ',';
    out += f;
  }
  return out;
}

IngestStats& IngestStats::merge(const IngestStats& other) {
  total_rows += other.total_rows;
  skipped_rows += other.skipped_rows;
  unknown_labels += other.unknown_labels;
  src_bytes_warnings += other.src_bytes_warnings;
  for (std::size_t i = 0; i < kLabelClassCount; ++i) class_counts[i] += other.class_counts[i];
  if (other.first_error_line &&
      (!first_error_line || *other.first_error_line < *first_error_line))
    first_error_line = other.first_error_line;
  return *this;
}

IngestStats read_flows(const std::string& path, OnError on_error, const FlowSink& sink,
                       const LabelRules& rules) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);

  IngestStats stats;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    if (line_no == 1 && trim(view).starts_with("StartTime")) continue;

    ++stats.total_rows;
    ParseWarnings warn;
    try {
      FlowRecord rec = parse_line(view, line_no, rules, &warn);
      stats.class_counts[static_cast<std::size_t>(rec.label_class)]++;
      if (warn.unknown_label) ++stats.unknown_labels;
      if (warn.src_bytes_exceeds_total) ++stats.src_bytes_warnings;
      sink(std::move(rec));
    } catch (const MalformedRowError&) {
      if (on_error == OnError::Abort) throw;
      ++stats.skipped_rows;
      if (!stats.first_error_line) stats.first_error_line = line_no;
    }
  }
  if (in.bad()) throw Error(ErrorCode::Io, "read error on " + path);
  return stats;
}

FlowSet read_flows(const std::string& path, OnError on_error, const LabelRules& rules) {
  FlowSet set;
  set.stats = read_flows(
      path, on_error, [&](FlowRecord&& r) { set.flows.push_back(std::move(r)); }, rules);
  return set;
}

LabelDistribution label_distribution(const std::array<std::uint64_t, kLabelClassCount>& counts) {
  LabelDistribution d;
  d.counts = counts;
  for (auto c : counts) d.total += c;
  if (d.total > 0)
    for (std::size_t i = 0; i < kLabelClassCount; ++i)
      d.percent[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(d.total);
  return d;
}

LabelDistribution label_distribution(std::span<const FlowRecord> flows) {
  std::array<std::uint64_t, kLabelClassCount> counts{};
  for (const auto& f : flows) counts[static_cast<std::size_t>(f.label_class)]++;
  return label_distribution(counts);
}

std::string label_distribution_json(const LabelDistribution& d, const IngestStats* stats) {
  nlohmann::ordered_json j;
  j["total"] = d.total;
  nlohmann::ordered_json classes;
  for (LabelClass c : kAllLabelClasses) {
    classes[std::string(label_class_name(c))] = {{"count", d.count(c)}, {"percent", d.pct(c)}};
  }
  j["classes"] = classes;
  if (stats) {
    j["ingest"] = {{"total_rows", stats->total_rows},
                   {"skipped_rows", stats->skipped_rows},
                   {"unknown_labels", stats->unknown_labels},
                   {"src_bytes_warnings", stats->src_bytes_warnings}};
  }
  return j.dump(2) + "\n";
}

}  // namespace botflow
