#include "botflow/reference_tables.hpp"

#include <string>

#include "botflow/error.hpp"

namespace botflow {
namespace {

constexpr std::uint8_t bit(ScenarioTrait t) { return std::uint8_t(1U << static_cast<int>(t)); }

using enum ScenarioTrait;

constexpr std::array<ScenarioMeta, 13> kScenarios = {{
    {1, 2824636, 1.41, 1.07, 0.03, 97.47, bit(IRC) | bit(SPAM) | bit(CF)},
    {2, 1808122, 1.04, 0.5, 0.11, 98.33, bit(IRC) | bit(SPAM) | bit(CF)},
    {3, 4710638, 0.56, 2.48, 0.001, 96.94, bit(IRC) | bit(PS) | bit(US)},
    {4, 1121076, 0.15, 2.25, 0.004, 97.58, bit(IRC) | bit(DDoS) | bit(US)},
    {5, 129832, 0.53, 3.6, 1.15, 95.7, bit(SPAM) | bit(PS) | bit(HTTP)},
    {6, 558919, 0.79, 1.34, 0.03, 97.83, bit(PS)},
    {7, 114077, 0.03, 1.47, 0.02, 98.47, bit(HTTP)},
    {8, 2954230, 0.17, 2.46, 2.4, 97.32, bit(PS)},
    {9, 2753884, 6.5, 1.57, 0.18, 91.7, bit(IRC) | bit(SPAM) | bit(CF) | bit(PS)},
    {10, 1309791, 8.11, 1.2, 0.002, 90.67, bit(IRC) | bit(DDoS) | bit(US)},
    {11, 107251, 7.6, 2.53, 0.002, 89.85, bit(IRC) | bit(DDoS) | bit(US)},
    {12, 325471, 0.65, 2.34, 0.007, 96.99, bit(DDoS)},
    {13, 1925149, 2.01, 1.65, 0.06, 96.26, bit(SPAM) | bit(PS) | bit(HTTP)},
}};

constexpr std::array<ReferenceSweepRow, 17> kSweep = {{
    {60, 60, 0.723, 0.914, 0.807},
    {90, 15, 0.742, 0.903, 0.815},
    {90, 75, 0.604, 0.906, 0.725},
    {90, 30, 0.632, 0.914, 0.747},
    {90, 25, 0.612, 0.914, 0.733},
    {90, 90, 0.625, 0.920, 0.744},
    {180, 30, 0.745, 0.866, 0.801},
    {180, 120, 0.739, 0.867, 0.797},
    {165, 105, 0.737, 0.864, 0.795},
    {189, 129, 0.739, 0.877, 0.801},
    {480, 180, 0.714, 0.787, 0.748},
    {600, 15, 0.743, 0.848, 0.792},
    {135, 15, 0.668, 0.924, 0.775},
    {75, 15, 0.639, 0.922, 0.755},
    {75, 15, 0.635, 0.921, 0.752},
    {150, 15, 0.660, 0.915, 0.767},
    {60, 60, 0.591, 0.908, 0.716},
}};

constexpr std::array<ReferenceRepeatRow, 4> kRepeats = {{
    {0.602, 0.925, 0.729, 7.5, 0.598, 0.921, 0.725},
    {0.573, 0.914, 0.704, 7.8, 0.571, 0.913, 0.702},
    {0.583, 0.915, 0.712, 7.4, 0.586, 0.914, 0.714},
    {0.590, 0.911, 0.716, 7.6, 0.589, 0.910, 0.714},
}};

constexpr std::array<ReferenceScenarioRow, 4> kScenarioResults = {{
    {5, 0.353, 0.640, 0.421},
    {8, 0.212, 0.174, 0.190},
    {9, 0.739, 0.877, 0.801},
    {10, 0.575, 0.607, 0.589},
}};

}  // namespace

std::string_view scenario_trait_name(ScenarioTrait t) noexcept {
  switch (t) {
    case IRC: return "IRC";
    case SPAM: return "SPAM";
    case CF: return "CF";
    case PS: return "PS";
    case DDoS: return "DDoS";
    case P2P: return "P2P";
    case US: return "US";
    case HTTP: return "HTTP";
  }
  return "?";
}

std::vector<ScenarioTrait> ScenarioMeta::traits() const {
  std::vector<ScenarioTrait> out;
  for (std::size_t i = 0; i < kScenarioTraitCount; ++i) {
    auto t = static_cast<ScenarioTrait>(i);
    if (has(t)) out.push_back(t);
  }
  return out;
}

const ScenarioMeta& scenario_info(int scenario_id) {
  if (scenario_id < 1 || scenario_id > static_cast<int>(kScenarios.size()))
    throw Error(ErrorCode::UnknownScenario,
                "unknown scenario " + std::to_string(scenario_id) + " (valid: 1-13)");
  return kScenarios[static_cast<std::size_t>(scenario_id - 1)];
}

std::span<const ScenarioMeta> all_scenarios() { return kScenarios; }
std::span<const ReferenceSweepRow> reference_sweep() { return kSweep; }
std::span<const ReferenceRepeatRow> reference_repeats() { return kRepeats; }
std::span<const ReferenceScenarioRow> reference_scenario_results() { return kScenarioResults; }

}  // namespace botflow
