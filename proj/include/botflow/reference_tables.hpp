#pragma once

// Published CTU-13 scenario metadata and reference experiment results,
// embedded as fixtures for tests and reports.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace botflow {

enum class ScenarioTrait : std::uint8_t { IRC, SPAM, CF, PS, DDoS, P2P, US, HTTP };

inline constexpr std::size_t kScenarioTraitCount = 8;

std::string_view scenario_trait_name(ScenarioTrait t) noexcept;

struct ScenarioMeta {
  int scenario_id = 0;
  std::uint64_t total_flows = 0;
  double pct_botnet = 0;
  double pct_normal = 0;
  double pct_cnc = 0;
  double pct_background = 0;
  std::uint8_t trait_bits = 0;  // bit i set for ScenarioTrait(i)

  bool has(ScenarioTrait t) const { return (trait_bits >> static_cast<int>(t)) & 1U; }
  std::vector<ScenarioTrait> traits() const;
};

// Throws Error(UnknownScenario) outside 1..13.
const ScenarioMeta& scenario_info(int scenario_id);
std::span<const ScenarioMeta> all_scenarios();

// One width/stride experiment of the reference sweep.
struct ReferenceSweepRow {
  int width_s;
  int stride_s;
  double precision;
  double recall;
  double f1;
};

std::span<const ReferenceSweepRow> reference_sweep();

// Repeated 60 s / 60 s runs (train and test triples).
struct ReferenceRepeatRow {
  double train_precision, train_recall, train_f1, time_hours;
  double test_precision, test_recall, test_f1;
};

std::span<const ReferenceRepeatRow> reference_repeats();

// Per-scenario results at width 189 s / stride 129 s.
struct ReferenceScenarioRow {
  int scenario_id;
  double precision;
  double recall;
  double f1;
};

std::span<const ReferenceScenarioRow> reference_scenario_results();

inline constexpr int kScenarioWidthS = 189;
inline constexpr int kScenarioStrideS = 129;

}  // namespace botflow
