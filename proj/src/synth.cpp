#include "botflow/synth.hpp"

#include <algorithm>
#include <cmath>

#include "botflow/error.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace botflow {

namespace {

constexpr std::size_t kMaxHostsPerClass = 250 * 100;

// 2011/08/18 10:19:13 (naive), the capture day of scenario 9.
const Timestamp kCaptureStart = *parse_timestamp("2011/08/18 10:19:13.000000");

std::string host_address(LabelClass c, std::size_t i) {
  // One 147.32.x.y block per class, except that C&C channels run on the
  // infected hosts themselves.
  int block = 0;
  switch (c) {
    case LabelClass::Background: block = 100; break;
    case LabelClass::Normal: block = 85; break;
    case LabelClass::Botnet:
    case LabelClass::CnC: block = 84; break;
  }
  const std::size_t base = static_cast<std::size_t>(block) + (c == LabelClass::Background ? i / 250 : 0);
  return "147.32." + std::to_string(base) + "." + std::to_string(i % 250 + 1);
}

struct Pending {
  FlowRecord record;
  std::uint64_t order;
};

}  // namespace

void SynthConfig::validate() const {
  if (!(duration_s > 0) || !std::isfinite(duration_s)) throw Error(ErrorCode::BadConfig, "duration must be > 0");
  std::size_t total_sources = 0;
  for (LabelClass c : kAllLabelClasses) {
    const TrafficProfile& p = profile(c);
    const std::string name(label_class_name(c));
    total_sources += p.sources;
    if (p.sources > (c == LabelClass::Background ? kMaxHostsPerClass : 250))
      throw Error(ErrorCode::BadConfig, name + ": too many sources");
    if (p.sources == 0) continue;
    if (!(p.rate > 0)) throw Error(ErrorCode::BadConfig, name + ": rate must be > 0");
    if (!(p.pkts_mean >= 1)) throw Error(ErrorCode::BadConfig, name + ": packet mean must be >= 1");
    if (!(p.bytes_per_pkt_lo > 0) || p.bytes_per_pkt_hi < p.bytes_per_pkt_lo)
      throw Error(ErrorCode::BadConfig, name + ": bad bytes-per-packet range");
    if (!(p.dur_mean > 0)) throw Error(ErrorCode::BadConfig, name + ": duration mean must be > 0");
  }
  if (total_sources == 0) throw Error(ErrorCode::BadConfig, "at least one class needs sources");
}

std::array<TrafficProfile, kLabelClassCount> SynthConfig::effective_profiles() const {
  auto out = profiles;
  if (!hard) return out;
  const TrafficProfile& bg = profile(LabelClass::Background);
  for (LabelClass c : {LabelClass::Botnet, LabelClass::CnC}) {
    TrafficProfile& p = out[static_cast<std::size_t>(c)];
    if (p.sources == 0) continue;
    // Same per-host behavior as background; the host count is scaled so the
    // class mixture is unchanged.
    const double flow_rate = static_cast<double>(p.sources) * p.rate;
    const std::size_t hosts = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(flow_rate / bg.rate)));
    p = bg;
    p.sources = std::min<std::size_t>(hosts, 250);
    p.rate = flow_rate / static_cast<double>(p.sources);
  }
  return out;
}

std::array<double, kLabelClassCount> SynthConfig::expected_mixture_pct() const {
  const auto eff = effective_profiles();
  std::array<double, kLabelClassCount> out{};
  double total = 0;
  for (std::size_t c = 0; c < kLabelClassCount; ++c) total += static_cast<double>(eff[c].sources) * eff[c].rate;
  if (total <= 0) return out;
  for (std::size_t c = 0; c < kLabelClassCount; ++c)
    out[c] = 100.0 * static_cast<double>(eff[c].sources) * eff[c].rate / total;
  return out;
}

double SynthConfig::expected_flows() const {
  double total = 0;
  for (const auto& p : effective_profiles()) total += static_cast<double>(p.sources) * p.rate;
  return total * duration_s;
}

SynthConfig preset_scenario9(std::uint64_t seed) {
  // Flow shares 91.75 / 1.57 / 6.5 / 0.18 % at ~13.9 flows/s.
  SynthConfig cfg;
  cfg.duration_s = 3600;
  cfg.seed = seed;
  cfg.profile(LabelClass::Background) = {200, 0.0637, 12, 60, 1400, 4.0};
  cfg.profile(LabelClass::Normal) = {8, 0.02725, 20, 200, 1200, 8.0};
  cfg.profile(LabelClass::Botnet) = {5, 0.1806, 2, 70, 76, 0.5};
  cfg.profile(LabelClass::CnC) = {2, 0.0125, 6, 95, 105, 60.0};
  return cfg;
}

SynthOutput generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto profiles = cfg.effective_profiles();
  detail::Rng rng(cfg.seed);
  std::vector<Pending> flows;
  flows.reserve(static_cast<std::size_t>(cfg.expected_flows() * 1.1) + 16);
  std::uint64_t order = 0;

  for (LabelClass c : kAllLabelClasses) {
    const TrafficProfile& p = profiles[static_cast<std::size_t>(c)];
    for (std::size_t host = 0; host < p.sources; ++host) {
      const std::string src = host_address(c, host);
      for (double t = rng.exponential(p.rate); t < cfg.duration_s; t += rng.exponential(p.rate)) {
        FlowRecord r;
        r.start_time = Timestamp{kCaptureStart.us + std::llround(t * 1e6)};
        r.src_addr = src;
        r.tot_pkts = rng.geometric(p.pkts_mean);
        const double bpp = rng.uniform(p.bytes_per_pkt_lo, p.bytes_per_pkt_hi);
        r.tot_bytes = static_cast<std::uint64_t>(std::llround(static_cast<double>(r.tot_pkts) * bpp));
        r.src_bytes = static_cast<std::uint64_t>(std::llround(static_cast<double>(r.tot_bytes) * rng.uniform(0.3, 0.7)));
        const double dur = r.tot_pkts == 1 ? 0.0 : rng.exponential(1.0 / p.dur_mean);
        r.dur = static_cast<double>(std::llround(dur * 1e6)) / 1e6;
        r.s_tos = 0;
        r.d_tos = 0;
        const double kind = rng.uniform();
        switch (c) {
          case LabelClass::Background:
            if (kind < 0.02) {
              r.proto = "icmp";
              r.dir = "   ->";
              r.sport = Port{0x0008, true};
              r.dport = Port{static_cast<std::uint16_t>(rng.below(65536)), true};
              r.state = "ECO";
              r.label_raw = "flow=Background";
            } else if (kind < 0.55) {
              r.proto = "udp";
              r.dir = "  <->";
              r.sport = Port{static_cast<std::uint16_t>(1024 + rng.below(64512))};
              r.dport = Port{static_cast<std::uint16_t>(kind < 0.35 ? 53 : 1024 + rng.below(64512))};
              r.state = "CON";
              r.label_raw = "flow=Background-UDP-Established";
            } else {
              r.proto = "tcp";
              r.dir = "   ->";
              r.sport = Port{static_cast<std::uint16_t>(1024 + rng.below(64512))};
              r.dport = Port{static_cast<std::uint16_t>(kind < 0.85 ? 443 : 80)};
              r.state = "FSPA_FSPA";
              r.label_raw = "flow=Background-TCP-Established";
            }
            r.dst_addr = "62.168." + std::to_string(rng.below(250)) + "." + std::to_string(1 + rng.below(250));
            break;
          case LabelClass::Normal:
            r.proto = "tcp";
            r.dir = "   ->";
            r.sport = Port{static_cast<std::uint16_t>(1024 + rng.below(64512))};
            r.dport = Port{static_cast<std::uint16_t>(kind < 0.5 ? 80 : 443)};
            r.state = "FSPA_FSPA";
            r.dst_addr = "147.32.80." + std::to_string(1 + rng.below(20));
            r.label_raw = "flow=From-Normal-V42-Stribrek";
            break;
          case LabelClass::Botnet:
            if (kind < 0.5) {
              r.proto = "udp";
              r.dir = "  <->";
              r.dport = Port{53};
              r.state = "CON";
              r.label_raw = "flow=From-Botnet-V42-UDP-DNS";
            } else {
              r.proto = "tcp";
              r.dir = "   ->";
              r.dport = Port{25};
              r.state = "S_RA";
              r.label_raw = "flow=From-Botnet-V42-TCP-Attempt-SPAM";
            }
            r.sport = Port{static_cast<std::uint16_t>(1024 + rng.below(64512))};
            r.dst_addr = "74.125." + std::to_string(rng.below(250)) + "." + std::to_string(1 + rng.below(250));
            break;
          case LabelClass::CnC:
            r.proto = "tcp";
            r.dir = "   ->";
            r.sport = Port{static_cast<std::uint16_t>(1024 + rng.below(64512))};
            r.dport = Port{6667};
            r.state = "FSPA_FSPA";
            r.dst_addr = "185.20.1." + std::to_string(10 + host);
            r.label_raw = "flow=From-Botnet-V42-TCP-CC6-Plain-HTTP-Encrypted-Data";
            break;
        }
        r.label_class = c;
        flows.push_back({std::move(r), order++});
      }
    }
  }

  std::sort(flows.begin(), flows.end(), [](const Pending& a, const Pending& b) {
    if (a.record.start_time != b.record.start_time) return a.record.start_time < b.record.start_time;
    return a.order < b.order;
  });

  SynthOutput out;
  out.flows = flows.size();
  out.csv.reserve(flows.size() * 140 + 128);
  out.csv += kBinetflowHeader;
  out.csv += '\n';
  for (const auto& f : flows) {
    out.csv += format_line(f.record);
    out.csv += '\n';
  }
  return out;
}

void generate_file(const SynthConfig& cfg, const std::string& path) { detail::atomic_write(path, generate(cfg).csv); }

}  // namespace botflow
