#ifndef AGREESIM_INTERFERENCE_HPP_
#define AGREESIM_INTERFERENCE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "agreesim/core.hpp"

namespace agreesim {

enum class SourceKind { Periodic, Bluetooth, WifiBursty, Silent };

// Distribution over durations. Exponential draws can carry a fixed offset
// (shifted exponential): gaps shorter than the RSSI sampling grid would be
// invisible to a 20 us sampler, so bursty presets floor their idle gaps at the
// inter-frame spacing of the modeled traffic while keeping the stated mean.
struct DurationDist {
  enum class Kind { PointMass, Exponential, Uniform } kind = Kind::PointMass;
  Duration value{0};   // PointMass: the value; Exponential: the mean (incl. offset)
  Duration offset{0};  // Exponential only: hard minimum
  Duration lo{0}, hi{0};  // Uniform bounds, inclusive

  static DurationDist point(Duration v);
  static DurationDist exponential(Duration mean, Duration min_gap = Duration{0});
  static DurationDist uniform(Duration lo, Duration hi);

  Duration sample(RngStream& rng) const;
  Duration mean() const;
  // Largest value the distribution effectively produces. Unbounded
  // exponentials report their 99.9th percentile.
  Duration upper_bound() const;
};

struct InterferenceSource {
  SourceKind kind = SourceKind::Silent;
  DurationDist busy;
  DurationDist idle;
  PowerDbm rx_power{-55.0};
  // Fraction of busy periods that land on the monitored channel (frequency
  // hoppers emit elsewhere the rest of the time).
  double hit_probability = 1.0;
};

// Named presets: "oven", "bluetooth", "wifi-heavy", "wifi-light", "silent".
InterferenceSource preset_source(SourceKind kind, PowerDbm rx_power = PowerDbm{-55.0});
InterferenceSource preset_source_by_name(std::string_view name,
                                         PowerDbm rx_power = PowerDbm{-55.0});
const std::vector<std::string>& source_preset_names();

struct BusyInterval {
  TimePoint start;
  TimePoint end;  // exclusive
  PowerDbm power;
};

// One realized interference timeline: disjoint, sorted busy intervals clipped
// to [0, horizon).
struct ActivityTrace {
  std::vector<BusyInterval> intervals;
  Duration horizon{0};
};

// Draws one trace: alternating idle/busy starting with an idle period of
// random phase (uniform over one full cycle for Periodic sources, a fresh
// idle draw otherwise). Off-channel busy periods of frequency hoppers advance
// time but emit nothing.
ActivityTrace generate_trace(const InterferenceSource& source, Duration horizon,
                             RngStream& rng);

// Longest busy period the source can produce (0 for Silent).
Duration max_busy(const InterferenceSource& source);
// Longest idle period, using the effective upper bound for unbounded
// distributions. Silent sources are idle forever and report INT64_MAX.
Duration max_idle(const InterferenceSource& source);

}  // namespace agreesim

#endif  // AGREESIM_INTERFERENCE_HPP_
