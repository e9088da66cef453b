#pragma once

// Binetflow CSV ingestion: record parsing, label classification, per-file
// label distributions.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botflow {

enum class LabelClass : std::uint8_t { Background = 0, Normal = 1, Botnet = 2, CnC = 3 };

inline constexpr std::size_t kLabelClassCount = 4;
inline constexpr std::array<LabelClass, kLabelClassCount> kAllLabelClasses = {
    LabelClass::Background, LabelClass::Normal, LabelClass::Botnet, LabelClass::CnC};

std::string_view label_class_name(LabelClass c) noexcept;
// Accepts "background", "normal", "botnet", "cnc" (case-insensitive).
std::optional<LabelClass> parse_label_class(std::string_view name);

// Microseconds since 1970-01-01 00:00:00 of the naive (zone-less) source
// clock. Only differences between timestamps carry meaning.
struct Timestamp {
  std::int64_t us = 0;
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// "YYYY/MM/DD HH:MM:SS[.ffffff]"; fraction may have 0-6 digits.
std::optional<Timestamp> parse_timestamp(std::string_view text);
// Always renders six fractional digits.
std::string format_timestamp(Timestamp t);

// Port column value. Hex tokens ("0x0303") are decoded; the flag lets the
// record be re-rendered in its source spelling.
struct Port {
  std::uint16_t value = 0;
  bool hex = false;
  friend bool operator==(const Port&, const Port&) = default;
};

struct FlowRecord {
  Timestamp start_time;
  double dur = 0.0;
  std::string proto;
  std::string src_addr;
  std::optional<Port> sport;
  std::string dir;
  std::string dst_addr;
  std::optional<Port> dport;
  std::string state;
  std::optional<std::uint32_t> s_tos;
  std::optional<std::uint32_t> d_tos;
  std::uint64_t tot_pkts = 0;
  std::uint64_t tot_bytes = 0;
  std::uint64_t src_bytes = 0;
  std::string label_raw;
  LabelClass label_class = LabelClass::Background;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

// Substring rule for mapping raw labels to classes. Matching is
// case-insensitive; a label is C&C when it contains both `botnet_token` and
// `cnc_token`.
struct LabelRules {
  std::string botnet_token = "botnet";
  std::string cnc_token = "cc";
  std::string normal_token = "normal";
  std::string background_token = "background";
};

struct Classification {
  LabelClass label_class;
  bool fallback;  // no rule matched; mapped to Background
};

Classification classify_label(std::string_view label_raw, const LabelRules& rules = {});

struct ParseWarnings {
  bool unknown_label = false;
  bool src_bytes_exceeds_total = false;
};

// Parses one data row. Throws MalformedRowError.
FlowRecord parse_line(std::string_view line, std::size_t line_no,
                      const LabelRules& rules = {}, ParseWarnings* warnings = nullptr);

// Re-renders a record in the binetflow row layout.
std::string format_line(const FlowRecord& r);

inline constexpr std::string_view kBinetflowHeader =
    "StartTime,Dur,Proto,SrcAddr,Sport,Dir,DstAddr,Dport,State,sTos,dTos,TotPkts,"
    "TotBytes,SrcBytes,Label";

enum class OnError : std::uint8_t { Skip, Abort };

struct IngestStats {
  std::uint64_t total_rows = 0;  // data rows seen, excluding header
  std::uint64_t skipped_rows = 0;
  std::uint64_t unknown_labels = 0;
  std::uint64_t src_bytes_warnings = 0;
  std::array<std::uint64_t, kLabelClassCount> class_counts{};
  std::optional<std::size_t> first_error_line;

  IngestStats& merge(const IngestStats& other);
  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

using FlowSink = std::function<void(FlowRecord&&)>;

// Streams records in file order. Throws Error(Io) and, under Abort,
// MalformedRowError.
IngestStats read_flows(const std::string& path, OnError on_error, const FlowSink& sink,
                       const LabelRules& rules = {});

struct FlowSet {
  std::vector<FlowRecord> flows;
  IngestStats stats;
};

FlowSet read_flows(const std::string& path, OnError on_error, const LabelRules& rules = {});

struct LabelDistribution {
  std::uint64_t total = 0;
  std::array<std::uint64_t, kLabelClassCount> counts{};
  std::array<double, kLabelClassCount> percent{};

  std::uint64_t count(LabelClass c) const { return counts[static_cast<std::size_t>(c)]; }
  double pct(LabelClass c) const { return percent[static_cast<std::size_t>(c)]; }
};

LabelDistribution label_distribution(std::span<const FlowRecord> flows);
LabelDistribution label_distribution(const std::array<std::uint64_t, kLabelClassCount>& counts);

std::string label_distribution_json(const LabelDistribution& d, const IngestStats* stats = nullptr);

}  // namespace botflow
