#ifndef AGREESIM_CHANNEL_HPP_
#define AGREESIM_CHANNEL_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "agreesim/core.hpp"
#include "agreesim/interference.hpp"

namespace agreesim {

enum class EmissionKind : std::uint8_t { Interference, Packet, Jam };

struct Emission {
  TimePoint start;
  TimePoint end;  // exclusive
  PowerDbm power;
  EmissionKind kind = EmissionKind::Interference;
  int node = -1;  // transmitting node for Packet/Jam, -1 for interference
};

// Everything on the air during one trial. Interference intervals come from the
// trace and stay fixed; protocol emissions (packets, jams) are appended as the
// handshake unfolds. RSSI reads compose all active emissions with a noise
// floor draw and per-read power jitter.
class SignalTimeline {
 public:
  SignalTimeline(const ActivityTrace& trace, PowerDbm noise_low = PowerDbm{-100.0},
                 PowerDbm noise_high = PowerDbm{-94.0}, double jitter_db = 2.0);

  void add_emission(const Emission& e);

  Duration horizon() const { return horizon_; }
  double jitter_db() const { return jitter_db_; }

  // One noise floor draw, uniform in [noise_low, noise_high).
  PowerDbm noise_sample(RngStream& rng) const;
  // Nominal emission power perturbed by the per-read jitter.
  PowerDbm jittered(PowerDbm nominal, RngStream& rng) const;

  // Strongest interference emission overlapping [start, end), if any.
  std::optional<PowerDbm> interference_peak(TimePoint start, TimePoint end) const;
  // True if any emission above `threshold` overlaps [start, end).
  bool energy_above(PowerDbm threshold, TimePoint start, TimePoint end) const;
  // Latest end among emissions above `threshold` overlapping [start, end);
  // negative time when the window is clean.
  TimePoint latest_blocker_end(PowerDbm threshold, TimePoint start, TimePoint end) const;

  // Instantaneous RSSI at t: max of the noise draw and every active emission
  // with fresh jitter. This is what a sampling loop reads.
  PowerDbm rssi_at(TimePoint t, RngStream& rng) const;

  const std::vector<Emission>& protocol_emissions() const { return dynamic_; }

 private:
  std::vector<Emission> interference_;  // sorted, disjoint
  std::vector<Emission> dynamic_;       // protocol traffic, appended in time order
  Duration horizon_;
  PowerDbm noise_low_;
  PowerDbm noise_high_;
  double jitter_db_;
};

struct RssiSample {
  TimePoint at;
  PowerDbm value;
};

// One RSSI sampling window: floor(t_samp / rssi_sample_period) reads starting
// at `start`, spaced one sample period apart.
struct RssiSampleRun {
  TimePoint window_start;
  Duration window_length{0};
  std::vector<RssiSample> samples;
};

RssiSampleRun sample_window(const SignalTimeline& timeline, TimePoint start,
                            Duration t_samp, const TimingModel& timing, RngStream& rng);

// Packet delivery: all-or-nothing. A packet is lost if any other emission
// overlapping its airtime is stronger than rx_power minus the capture margin,
// or if the ambient Bernoulli(base_loss) event fires. rx_power must be above
// the -94 dBm receiver sensitivity.
bool packet_received(const SignalTimeline& timeline, TimePoint start, Duration airtime,
                     PowerDbm rx_power, double capture_margin_db, double base_loss,
                     RngStream& rng);

// Floor rule: jamming is detected iff every sample sits strictly above the
// noise ceiling r_noise. A single sample at or below it reads as silence.
bool detect_jam_floor(const RssiSampleRun& run, PowerDbm r_noise);

// Reference rule: samples are compared against the strength the peer's packet
// arrived with (r_s) minus a tolerance delta_r. Anything strictly below that
// threshold is marked as interference and kills detection. When the threshold
// would dip to or below r_noise the detector degrades to the floor rule.
bool detect_jam_ref(const RssiSampleRun& run, PowerDbm r_s, double delta_r_db,
                    PowerDbm r_noise);

// Earliest transmission instant t >= from + cca such that the CCA window of
// length `cca` ending at t saw no emission above `threshold`. Returns nullopt
// if no such window exists before the horizon.
std::optional<TimePoint> first_cca_idle(const SignalTimeline& timeline, TimePoint from,
                                        PowerDbm threshold, Duration cca);

}  // namespace agreesim

#endif  // AGREESIM_CHANNEL_HPP_
