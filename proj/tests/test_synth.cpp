#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "botflow/error.hpp"
#include "botflow/reference_tables.hpp"
#include "botflow/synth.hpp"
#include "test_support.hpp"

using namespace botflow;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

std::array<double, kLabelClassCount> mixture_oracle(const SynthConfig& cfg) {
  std::array<double, kLabelClassCount> share{};
  double total = 0;
  for (auto c : kAllLabelClasses) {
    const auto& p = cfg.effective_profiles()[static_cast<std::size_t>(c)];
    share[static_cast<std::size_t>(c)] = static_cast<double>(p.sources) * p.rate;
    total += share[static_cast<std::size_t>(c)];
  }
  for (auto& s : share) s = 100.0 * s / total;
  return share;
}

FlowSet ingest(const SynthConfig& cfg) {
  TempDir dir;
  generate_file(cfg, dir.file("g.binetflow"));
  return read_flows(dir.file("g.binetflow"), OnError::Skip);
}

}  // namespace

TEST(Synth, ByteIdenticalForSameSeed) {
  SynthConfig cfg = preset_scenario9(42);
  cfg.profile(LabelClass::Botnet).sources = 5;
  cfg.profile(LabelClass::Background).sources = 95;
  cfg.profile(LabelClass::Normal).sources = 0;
  cfg.profile(LabelClass::CnC).sources = 0;
  cfg.duration_s = 600;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_GT(a.flows, 0u);
  cfg.seed = 43;
  EXPECT_NE(generate(cfg).csv, a.csv);
}

TEST(Synth, FileMatchesInMemoryOutput) {
  SynthConfig cfg = preset_scenario9(5);
  cfg.duration_s = 120;
  TempDir dir;
  generate_file(cfg, dir.file("x"));
  EXPECT_EQ(testing_support::read_text(dir.file("x")), generate(cfg).csv);
}

TEST(Synth, IngestsWithoutMalformedRows) {
  const SynthConfig cfg = preset_scenario9(42);
  const FlowSet fs = ingest(cfg);
  EXPECT_EQ(fs.stats.skipped_rows, 0u);
  EXPECT_EQ(fs.stats.unknown_labels, 0u);
  EXPECT_EQ(fs.flows.size(), generate(cfg).flows);
  for (std::size_t i = 1; i < fs.flows.size(); ++i) ASSERT_LE(fs.flows[i - 1].start_time, fs.flows[i].start_time);
}

TEST(Synth, MixtureWithinHalfPoint) {
  for (std::uint64_t seed : {1, 42, 77}) {
    const SynthConfig cfg = preset_scenario9(seed);
    const auto d = label_distribution(ingest(cfg).flows);
    const auto want = mixture_oracle(cfg);
    for (auto c : kAllLabelClasses) EXPECT_NEAR(d.pct(c), want[static_cast<std::size_t>(c)], 0.5) << seed;
  }
}

TEST(Synth, PresetTracksReferenceScenarioMix) {
  const auto want = mixture_oracle(preset_scenario9());
  const auto& s9 = scenario_info(9);
  EXPECT_NEAR(want[static_cast<std::size_t>(LabelClass::Botnet)], s9.pct_botnet, 0.5);
  EXPECT_NEAR(want[static_cast<std::size_t>(LabelClass::Normal)], s9.pct_normal, 0.5);
  EXPECT_NEAR(want[static_cast<std::size_t>(LabelClass::CnC)], s9.pct_cnc, 0.5);
  const auto lib = preset_scenario9().expected_mixture_pct();
  for (std::size_t i = 0; i < kLabelClassCount; ++i) EXPECT_NEAR(lib[i], want[i], 1e-9);
}

TEST(Synth, MagnitudesFollowProfiles) {
  const SynthConfig cfg = preset_scenario9(9);
  const auto profiles = cfg.effective_profiles();
  for (const auto& f : ingest(cfg).flows) {
    const auto& p = profiles[static_cast<std::size_t>(f.label_class)];
    ASSERT_GE(f.tot_pkts, 1u);
    const double per_pkt = static_cast<double>(f.tot_bytes) / f.tot_pkts;
    EXPECT_GE(per_pkt, p.bytes_per_pkt_lo - 1.0);
    EXPECT_LE(per_pkt, p.bytes_per_pkt_hi + 1.0);
    EXPECT_LE(f.src_bytes, f.tot_bytes);
    EXPECT_GE(f.dur, 0.0);
    if (f.tot_pkts == 1) EXPECT_EQ(f.dur, 0.0);
  }
}

TEST(Synth, BotTrafficComesFromBotHosts) {
  std::set<std::string> bot_hosts;
  const auto flows = ingest(preset_scenario9(4)).flows;
  for (const auto& f : flows)
    if (f.label_class == LabelClass::Botnet) bot_hosts.insert(f.src_addr);
  EXPECT_EQ(bot_hosts.size(), preset_scenario9().profile(LabelClass::Botnet).sources);
  for (const auto& f : flows)
    if (f.label_class == LabelClass::CnC) EXPECT_TRUE(bot_hosts.count(f.src_addr) || f.src_addr.rfind("147.32.84.", 0) == 0);
}

TEST(Synth, HardModeOverlapsBackground) {
  SynthConfig cfg = preset_scenario9();
  cfg.hard = true;
  const auto p = cfg.effective_profiles();
  const auto& bg = p[static_cast<std::size_t>(LabelClass::Background)];
  const auto& bot = p[static_cast<std::size_t>(LabelClass::Botnet)];
  EXPECT_NEAR(bot.rate, bg.rate, 0.1 * bg.rate);
  EXPECT_EQ(bot.pkts_mean, bg.pkts_mean);
  EXPECT_EQ(bot.bytes_per_pkt_lo, bg.bytes_per_pkt_lo);
  EXPECT_EQ(bot.bytes_per_pkt_hi, bg.bytes_per_pkt_hi);
  EXPECT_EQ(bot.dur_mean, bg.dur_mean);
  const auto easy = mixture_oracle(preset_scenario9());
  const auto hard = mixture_oracle(cfg);
  for (std::size_t i = 0; i < kLabelClassCount; ++i) EXPECT_NEAR(hard[i], easy[i], 0.05);
}

TEST(Synth, BadConfig) {
  auto expect_bad = [](SynthConfig cfg) {
    try {
      cfg.validate();
      generate(cfg);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadConfig);
    }
  };
  SynthConfig cfg = preset_scenario9();
  cfg.duration_s = 0;
  expect_bad(cfg);
  cfg = preset_scenario9();
  cfg.profile(LabelClass::Botnet).rate = 0;
  expect_bad(cfg);
  cfg = preset_scenario9();
  for (auto c : kAllLabelClasses) cfg.profile(c).sources = 0;
  expect_bad(cfg);
  cfg = preset_scenario9();
  cfg.profile(LabelClass::Normal).bytes_per_pkt_lo = 500;
  cfg.profile(LabelClass::Normal).bytes_per_pkt_hi = 100;
  expect_bad(cfg);
}
