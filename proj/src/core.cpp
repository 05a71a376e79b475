#include "agreesim/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace agreesim {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t key) : key_(key) {
  // Expand the key into full generator state; splitmix never yields an
  // all-zero xoshiro state.
  std::uint64_t x = key;
  s_[0] = splitmix64(x);
  s_[1] = splitmix64(x);
  s_[2] = splitmix64(x);
  s_[3] = splitmix64(x);
}

RngStream::RngStream(std::uint64_t seed, std::string_view stream_id)
    : RngStream([&] {
        std::uint64_t x = seed ^ fnv1a(stream_id);
        return splitmix64(x);
      }()) {}

RngStream RngStream::substream(std::uint64_t index) const {
  std::uint64_t x = key_ ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return RngStream(splitmix64(x));
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256**
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  // Lemire multiply-shift with rejection, exact and branch-cheap.
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (lo < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t RngStream::next_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(next_below(span));
}

Duration draw_exponential(RngStream& rng, Duration mean) {
  if (mean.us <= 0) {
    throw std::invalid_argument("draw_exponential: mean must be positive, got " +
                                std::to_string(mean.us) + " us");
  }
  // Inverse CDF on (0, 1] so log() never sees zero.
  const double u = 1.0 - rng.next_unit();
  const double v = -static_cast<double>(mean.us) * std::log(u);
  const auto q = static_cast<std::int64_t>(std::llround(v));
  return Duration{q < 1 ? 1 : q};
}

Duration draw_uniform(RngStream& rng, Duration lo, Duration hi) {
  if (lo > hi) {
    throw std::invalid_argument("draw_uniform: empty range");
  }
  return Duration{rng.next_int(lo.us, hi.us)};
}

Duration TimingModel::data_packet_airtime(int payload_bytes) const {
  const std::int64_t frame_bytes = payload_bytes + phy_overhead_bytes + mac_overhead_bytes;
  return Duration{frame_bytes * 8 * 1000000 / bits_per_second};
}

Duration TimingModel::packet_response_gap() const {
  return packet_rx_processing + ack_processing_plus_send;
}

TimingModel make_timing_model(const TimingOverrides& overrides) {
  TimingModel m;
  if (overrides.rssi_sample_period) m.rssi_sample_period = *overrides.rssi_sample_period;
  if (overrides.rssi_readout_latency) m.rssi_readout_latency = *overrides.rssi_readout_latency;
  if (overrides.rssi_settle_time) m.rssi_settle_time = *overrides.rssi_settle_time;
  if (overrides.ack_airtime) m.ack_airtime = *overrides.ack_airtime;
  if (overrides.ack_processing_plus_send)
    m.ack_processing_plus_send = *overrides.ack_processing_plus_send;
  if (overrides.packet_rx_processing) m.packet_rx_processing = *overrides.packet_rx_processing;
  if (overrides.cca_check_duration) m.cca_check_duration = *overrides.cca_check_duration;
  if (overrides.turnaround) m.turnaround = *overrides.turnaround;
  if (overrides.phy_overhead_bytes) m.phy_overhead_bytes = *overrides.phy_overhead_bytes;
  if (overrides.mac_overhead_bytes) m.mac_overhead_bytes = *overrides.mac_overhead_bytes;
  if (overrides.bits_per_second) m.bits_per_second = *overrides.bits_per_second;

  const auto check = [](const char* name, std::int64_t v) {
    if (v <= 0) {
      throw std::invalid_argument(std::string("timing.") + name + " must be positive, got " +
                                  std::to_string(v));
    }
  };
  check("rssi_sample_period_us", m.rssi_sample_period.us);
  check("rssi_readout_latency_us", m.rssi_readout_latency.us);
  check("rssi_settle_time_us", m.rssi_settle_time.us);
  check("ack_airtime_us", m.ack_airtime.us);
  check("ack_processing_plus_send_us", m.ack_processing_plus_send.us);
  check("packet_rx_processing_us", m.packet_rx_processing.us);
  check("cca_check_duration_us", m.cca_check_duration.us);
  check("turnaround_us", m.turnaround.us);
  check("phy_overhead_bytes", m.phy_overhead_bytes);
  check("mac_overhead_bytes", m.mac_overhead_bytes);
  check("bits_per_second", m.bits_per_second);
  return m;
}

}  // namespace agreesim
