#include "agreesim/channel.hpp"

#include <algorithm>
#include <stdexcept>

namespace agreesim {
namespace {

constexpr double kSensitivityDbm = -94.0;

bool overlaps(const Emission& e, TimePoint start, TimePoint end) {
  return e.start.us < end.us && start.us < e.end.us;
}

}  // namespace

SignalTimeline::SignalTimeline(const ActivityTrace& trace, PowerDbm noise_low,
                               PowerDbm noise_high, double jitter_db)
    : horizon_(trace.horizon),
      noise_low_(noise_low),
      noise_high_(noise_high),
      jitter_db_(jitter_db) {
  if (noise_high.dbm < noise_low.dbm) {
    throw std::invalid_argument("noise floor range is inverted");
  }
  interference_.reserve(trace.intervals.size());
  for (const BusyInterval& b : trace.intervals) {
    interference_.push_back({b.start, b.end, b.power, EmissionKind::Interference, -1});
  }
}

void SignalTimeline::add_emission(const Emission& e) { dynamic_.push_back(e); }

PowerDbm SignalTimeline::noise_sample(RngStream& rng) const {
  const double span = noise_high_.dbm - noise_low_.dbm;
  return PowerDbm{noise_low_.dbm + span * rng.next_unit()};
}

PowerDbm SignalTimeline::jittered(PowerDbm nominal, RngStream& rng) const {
  if (jitter_db_ <= 0.0) return nominal;
  const double j = (rng.next_unit() * 2.0 - 1.0) * jitter_db_;
  return PowerDbm{nominal.dbm + j};
}

std::optional<PowerDbm> SignalTimeline::interference_peak(TimePoint start,
                                                          TimePoint end) const {
  // Intervals are sorted and disjoint: binary search to the first candidate.
  auto it = std::lower_bound(
      interference_.begin(), interference_.end(), start,
      [](const Emission& e, TimePoint t) { return e.end.us <= t.us; });
  std::optional<PowerDbm> peak;
  for (; it != interference_.end() && it->start.us < end.us; ++it) {
    if (!peak || it->power.dbm > peak->dbm) peak = it->power;
  }
  return peak;
}

bool SignalTimeline::energy_above(PowerDbm threshold, TimePoint start, TimePoint end) const {
  if (auto peak = interference_peak(start, end); peak && peak->dbm > threshold.dbm) {
    return true;
  }
  for (const Emission& e : dynamic_) {
    if (e.power.dbm > threshold.dbm && overlaps(e, start, end)) return true;
  }
  return false;
}

PowerDbm SignalTimeline::rssi_at(TimePoint t, RngStream& rng) const {
  PowerDbm level = noise_sample(rng);
  const TimePoint next{t.us + 1};
  if (auto peak = interference_peak(t, next)) {
    const PowerDbm seen = jittered(*peak, rng);
    if (seen.dbm > level.dbm) level = seen;
  }
  for (const Emission& e : dynamic_) {
    if (overlaps(e, t, next)) {
      const PowerDbm seen = jittered(e.power, rng);
      if (seen.dbm > level.dbm) level = seen;
    }
  }
  return level;
}

RssiSampleRun sample_window(const SignalTimeline& timeline, TimePoint start,
                            Duration t_samp, const TimingModel& timing, RngStream& rng) {
  if (t_samp.us < 0) {
    throw std::invalid_argument("sample_window: negative window");
  }
  RssiSampleRun run;
  run.window_start = start;
  run.window_length = t_samp;
  const std::int64_t period = timing.rssi_sample_period.us;
  const std::int64_t count = t_samp.us / period;
  run.samples.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const TimePoint at{start.us + i * period};
    run.samples.push_back({at, timeline.rssi_at(at, rng)});
  }
  return run;
}

bool packet_received(const SignalTimeline& timeline, TimePoint start, Duration airtime,
                     PowerDbm rx_power, double capture_margin_db, double base_loss,
                     RngStream& rng) {
  if (rx_power.dbm <= kSensitivityDbm) {
    throw std::invalid_argument("packet_received: rx power at or below sensitivity");
  }
  // Ambient loss is drawn first so the stream stays aligned whether or not
  // the air was clean.
  const bool ambient_loss = base_loss > 0.0 && rng.next_unit() < base_loss;
  const PowerDbm capture_floor{rx_power.dbm - capture_margin_db};
  if (timeline.energy_above(capture_floor, start, start + airtime)) return false;
  return !ambient_loss;
}

bool detect_jam_floor(const RssiSampleRun& run, PowerDbm r_noise) {
  if (run.samples.empty()) return false;
  for (const RssiSample& s : run.samples) {
    if (s.value.dbm <= r_noise.dbm) return false;
  }
  return true;
}

bool detect_jam_ref(const RssiSampleRun& run, PowerDbm r_s, double delta_r_db,
                    PowerDbm r_noise) {
  const double threshold = r_s.dbm - delta_r_db;
  if (threshold <= r_noise.dbm) {
    // Tolerance swallows the whole dynamic range: identical to the floor rule.
    return detect_jam_floor(run, r_noise);
  }
  if (run.samples.empty()) return false;
  for (const RssiSample& s : run.samples) {
    if (s.value.dbm < threshold) return false;
  }
  return true;
}

TimePoint SignalTimeline::latest_blocker_end(PowerDbm threshold, TimePoint start,
                                             TimePoint end) const {
  TimePoint latest{-1};
  auto it = std::lower_bound(
      interference_.begin(), interference_.end(), start,
      [](const Emission& e, TimePoint t) { return e.end.us <= t.us; });
  for (; it != interference_.end() && it->start.us < end.us; ++it) {
    if (it->power.dbm > threshold.dbm && it->end.us > latest.us) latest = it->end;
  }
  for (const Emission& e : dynamic_) {
    if (e.power.dbm > threshold.dbm && overlaps(e, start, end) && e.end.us > latest.us) {
      latest = e.end;
    }
  }
  return latest;
}

std::optional<TimePoint> first_cca_idle(const SignalTimeline& timeline, TimePoint from,
                                        PowerDbm threshold, Duration cca) {
  if (cca.us <= 0) {
    throw std::invalid_argument("first_cca_idle: CCA window must be positive");
  }
  TimePoint window_start = from;
  while (window_start.us + cca.us <= timeline.horizon().us) {
    const TimePoint window_end = window_start + cca;
    const TimePoint blocker_end =
        timeline.latest_blocker_end(threshold, window_start, window_end);
    if (blocker_end.us < 0) {
      return window_end;
    }
    // Skip to the end of whatever was heard; anything earlier still sees it.
    window_start = blocker_end;
  }
  return std::nullopt;
}

}  // namespace agreesim
