#pragma once

// Deterministic binetflow generator with planted background, normal, bot
// and C&C hosts. Used as ground truth for end-to-end tests.

#include <array>
#include <cstdint>
#include <string>

#include "botflow/flow.hpp"

namespace botflow {

struct TrafficProfile {
  std::size_t sources = 0;
  double rate = 0;           // mean flows per second per source (Poisson)
  double pkts_mean = 1;      // geometric packet count mean
  double bytes_per_pkt_lo = 60;
  double bytes_per_pkt_hi = 60;
  double dur_mean = 1;       // exponential flow duration mean, seconds
};

struct SynthConfig {
  double duration_s = 3600;
  // Indexed by LabelClass.
  std::array<TrafficProfile, kLabelClassCount> profiles{};
  // Bot and C&C hosts reuse background rates and magnitudes.
  bool hard = false;
  std::uint64_t seed = 42;

  TrafficProfile& profile(LabelClass c) { return profiles[static_cast<std::size_t>(c)]; }
  const TrafficProfile& profile(LabelClass c) const { return profiles[static_cast<std::size_t>(c)]; }

  // Throws Error(BadConfig).
  void validate() const;
  // Profiles after applying `hard`.
  std::array<TrafficProfile, kLabelClassCount> effective_profiles() const;
  // Expected share of flows per class, in percent.
  std::array<double, kLabelClassCount> expected_mixture_pct() const;
  double expected_flows() const;
};

// ~50k flows over one hour with the class mixture of CTU-13 scenario 9.
SynthConfig preset_scenario9(std::uint64_t seed = 42);

struct SynthOutput {
  std::string csv;  // header + rows, time-ordered
  std::uint64_t flows = 0;
};

SynthOutput generate(const SynthConfig& cfg);
void generate_file(const SynthConfig& cfg, const std::string& path);

}  // namespace botflow
