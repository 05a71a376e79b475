#ifndef AGREESIM_CORE_HPP_
#define AGREESIM_CORE_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>

namespace agreesim {

// All simulation time lives on an integer microsecond grid. Keeping events on
// the grid makes aggregate sums exact and independent of summation order.
struct Duration {
  std::int64_t us = 0;

  constexpr auto operator<=>(const Duration&) const = default;
};

constexpr Duration us(std::int64_t v) { return Duration{v}; }
constexpr Duration ms(std::int64_t v) { return Duration{v * 1000}; }

constexpr Duration operator+(Duration a, Duration b) { return Duration{a.us + b.us}; }
// Durations stay non-negative; subtraction saturates at zero.
constexpr Duration operator-(Duration a, Duration b) {
  return Duration{a.us > b.us ? a.us - b.us : 0};
}
constexpr Duration operator*(Duration a, std::int64_t k) { return Duration{a.us * k}; }
constexpr Duration operator*(std::int64_t k, Duration a) { return Duration{a.us * k}; }
constexpr Duration& operator+=(Duration& a, Duration b) { a.us += b.us; return a; }

// Microseconds since the start of the trial's interference trace.
struct TimePoint {
  std::int64_t us = 0;

  constexpr auto operator<=>(const TimePoint&) const = default;
};

constexpr TimePoint operator+(TimePoint t, Duration d) { return TimePoint{t.us + d.us}; }
constexpr TimePoint operator-(TimePoint t, Duration d) { return TimePoint{t.us - d.us}; }
// Elapsed time between two points, saturating at zero when b precedes a.
constexpr Duration elapsed(TimePoint a, TimePoint b) {
  return Duration{b.us > a.us ? b.us - a.us : 0};
}

// Joint verdict of one agreement attempt across all participants.
enum class Outcome : std::uint8_t {
  PositiveAgreement,  // every participant deems the exchange successful
  NegativeAgreement,  // every participant deems it failed
  Disagreement,       // mixed verdicts
};

// Received signal strength / emission power in dBm.
struct PowerDbm {
  double dbm = 0.0;

  constexpr auto operator<=>(const PowerDbm&) const = default;
};

constexpr PowerDbm dbm(double v) { return PowerDbm{v}; }

// Deterministic random stream. A stream is identified by (seed, stream_id) and
// yields the same sequence on every platform; distinct ids give independent
// streams. substream() derives further independent streams (one per trial,
// node, or source) without consuming draws from the parent.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_id);
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform double in [0, 1) with 53 significant bits.
  double next_unit();
  // Uniform integer in [0, bound), unbiased. bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound);
  // Uniform integer in [lo, hi], inclusive on both ends.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi);

 private:
  explicit RngStream(std::uint64_t key);

  std::uint64_t key_;   // stream identity; stable across draws
  std::uint64_t s_[4];  // xoshiro256** state
};

// Exponential waiting time with the given mean, quantized to the microsecond
// grid with a 1 us floor. Rejects non-positive means.
Duration draw_exponential(RngStream& rng, Duration mean);
// Uniform duration in [lo, hi], inclusive, on the microsecond grid.
Duration draw_uniform(RngStream& rng, Duration lo, Duration hi);

// Radio and stack timing constants. Defaults model a 250 kbit/s 802.15.4-style
// transceiver driven over SPI by a small OS.
struct TimingModel {
  Duration rssi_sample_period{20};     // spacing of RSSI reads in a sampling loop
  Duration rssi_readout_latency{21};   // cost of one RSSI register read
  Duration rssi_settle_time{128};      // RSSI invalid for this long after RX on
  Duration ack_airtime{782};           // measured on-air time of an ACK frame
  Duration ack_processing_plus_send{2083};  // packet handoff to end of transmission
  Duration packet_rx_processing{2083};      // reception to packet available upstream
  Duration cca_check_duration{128};    // energy-detect window length
  Duration turnaround{192};            // RX/TX switch, also jam reaction time
  int phy_overhead_bytes = 6;
  int mac_overhead_bytes = 11;
  std::int64_t bits_per_second = 250000;

  // On-air time of a data frame carrying payload_bytes of application data.
  Duration data_packet_airtime(int payload_bytes) const;
  // Idle time between a received packet and its response appearing on air:
  // the receive path plus the transmit path of the responding node.
  Duration packet_response_gap() const;
};

// Partial overrides for make_timing_model. Unset fields keep their defaults.
struct TimingOverrides {
  std::optional<Duration> rssi_sample_period;
  std::optional<Duration> rssi_readout_latency;
  std::optional<Duration> rssi_settle_time;
  std::optional<Duration> ack_airtime;
  std::optional<Duration> ack_processing_plus_send;
  std::optional<Duration> packet_rx_processing;
  std::optional<Duration> cca_check_duration;
  std::optional<Duration> turnaround;
  std::optional<int> phy_overhead_bytes;
  std::optional<int> mac_overhead_bytes;
  std::optional<std::int64_t> bits_per_second;
};

// Applies overrides to the defaults and validates the result. Throws
// std::invalid_argument naming the offending field.
TimingModel make_timing_model(const TimingOverrides& overrides = {});

}  // namespace agreesim

#endif  // AGREESIM_CORE_HPP_
