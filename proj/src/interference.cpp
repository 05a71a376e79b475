#include "agreesim/interference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace agreesim {
namespace {

// 99.9th percentile of a unit exponential; used as the effective maximum of
// unbounded idle distributions for calibration purposes.
constexpr double kTailQuantile = 6.907755278982137;  // ln(1000)

}  // namespace

DurationDist DurationDist::point(Duration v) {
  DurationDist d;
  d.kind = Kind::PointMass;
  d.value = v;
  return d;
}

DurationDist DurationDist::exponential(Duration mean, Duration min_gap) {
  if (mean.us <= min_gap.us) {
    throw std::invalid_argument("exponential duration: mean must exceed min gap");
  }
  DurationDist d;
  d.kind = Kind::Exponential;
  d.value = mean;
  d.offset = min_gap;
  return d;
}

DurationDist DurationDist::uniform(Duration lo, Duration hi) {
  if (lo > hi) {
    throw std::invalid_argument("uniform duration: lo must not exceed hi");
  }
  DurationDist d;
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Duration DurationDist::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::PointMass:
      return value;
    case Kind::Exponential:
      return offset + draw_exponential(rng, value - offset);
    case Kind::Uniform:
      return draw_uniform(rng, lo, hi);
  }
  return Duration{0};
}

Duration DurationDist::mean() const {
  switch (kind) {
    case Kind::PointMass:
      return value;
    case Kind::Exponential:
      return value;
    case Kind::Uniform:
      return Duration{(lo.us + hi.us) / 2};
  }
  return Duration{0};
}

Duration DurationDist::upper_bound() const {
  switch (kind) {
    case Kind::PointMass:
      return value;
    case Kind::Exponential: {
      const double tail = static_cast<double>(value.us - offset.us) * kTailQuantile;
      return offset + Duration{std::llround(tail)};
    }
    case Kind::Uniform:
      return hi;
  }
  return Duration{0};
}

InterferenceSource preset_source(SourceKind kind, PowerDbm rx_power) {
  InterferenceSource s;
  s.kind = kind;
  s.rx_power = rx_power;
  switch (kind) {
    case SourceKind::Periodic:
      // Domestic microwave oven: half-wave magnetron duty cycle.
      s.busy = DurationDist::point(ms(10));
      s.idle = DurationDist::point(ms(10));
      break;
    case SourceKind::Bluetooth:
      // One slot of a busy piconet; the hopper only lands on the monitored
      // channel for 4 of 79 hops.
      s.busy = DurationDist::point(us(625));
      s.idle = DurationDist::exponential(us(1875), us(50));
      s.hit_probability = 4.0 / 79.0;
      break;
    case SourceKind::WifiBursty:
      // Saturated 802.11 traffic; idle gaps floored at a 2.4 GHz DIFS.
      s.busy = DurationDist::uniform(us(200), us(1500));
      s.idle = DurationDist::exponential(us(500), us(50));
      break;
    case SourceKind::Silent:
      break;
  }
  return s;
}

InterferenceSource preset_source_by_name(std::string_view name, PowerDbm rx_power) {
  if (name == "oven") return preset_source(SourceKind::Periodic, rx_power);
  if (name == "bluetooth") return preset_source(SourceKind::Bluetooth, rx_power);
  if (name == "wifi-heavy") return preset_source(SourceKind::WifiBursty, rx_power);
  if (name == "wifi-light") {
    InterferenceSource s = preset_source(SourceKind::WifiBursty, rx_power);
    s.idle = DurationDist::exponential(us(5000), us(50));
    return s;
  }
  if (name == "silent") return preset_source(SourceKind::Silent, rx_power);
  throw std::invalid_argument("unknown interference preset '" + std::string(name) +
                              "' (expected oven, bluetooth, wifi-heavy, wifi-light, silent)");
}

const std::vector<std::string>& source_preset_names() {
  static const std::vector<std::string> names = {"oven", "bluetooth", "wifi-heavy",
                                                 "wifi-light", "silent"};
  return names;
}

ActivityTrace generate_trace(const InterferenceSource& source, Duration horizon,
                             RngStream& rng) {
  if (horizon.us <= 0) {
    throw std::invalid_argument("generate_trace: horizon must be positive");
  }
  ActivityTrace trace;
  trace.horizon = horizon;
  if (source.kind == SourceKind::Silent) {
    return trace;
  }

  const auto push_busy = [&](TimePoint start, Duration len) {
    const bool on_channel =
        source.hit_probability >= 1.0 || rng.next_unit() < source.hit_probability;
    TimePoint end = start + len;
    if (end.us > horizon.us) end = TimePoint{horizon.us};
    if (on_channel && end.us > start.us) {
      trace.intervals.push_back({start, end, source.rx_power});
    }
  };

  TimePoint t{0};
  if (source.kind == SourceKind::Periodic) {
    // Random phase uniform over one idle+busy cycle, idle leading.
    const Duration idle_len = source.idle.mean();
    const Duration cycle = idle_len + source.busy.mean();
    const auto phase = static_cast<std::int64_t>(rng.next_below(cycle.us));
    if (phase < idle_len.us) {
      t = t + (idle_len - Duration{phase});
    } else {
      // Mid-busy: the remainder of the burst is already on the air.
      const Duration remainder = cycle - Duration{phase};
      push_busy(t, remainder);
      t = t + remainder + idle_len;
    }
  } else {
    t = t + source.idle.sample(rng);
  }

  while (t.us < horizon.us) {
    const Duration busy_len = source.busy.sample(rng);
    push_busy(t, busy_len);
    t = t + busy_len;
    t = t + source.idle.sample(rng);
  }
  return trace;
}

Duration max_busy(const InterferenceSource& source) {
  if (source.kind == SourceKind::Silent) return Duration{0};
  return source.busy.upper_bound();
}

Duration max_idle(const InterferenceSource& source) {
  if (source.kind == SourceKind::Silent) {
    return Duration{std::numeric_limits<std::int64_t>::max()};
  }
  return source.idle.upper_bound();
}

}  // namespace agreesim
