#ifndef AGREESIM_HARNESS_HPP_
#define AGREESIM_HARNESS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "agreesim/core.hpp"
#include "agreesim/interference.hpp"
#include "agreesim/protocols.hpp"

namespace agreesim {

// One experiment: several protocol arms measured under the same interference
// environment. Arms share per-trial random substreams (trace, start offset,
// power draw), so arm-to-arm deltas are paired rather than independently
// noisy.
struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  std::int64_t trials = 10000;
  std::string source = "silent";
  PowerDbm source_rx{-55.0};
  // Each trial simulates interference over [0, horizon); a handshake that has
  // to wait past the horizon for a clear channel is scored as all-fail.
  Duration horizon{200000};
  // Handshakes start at a uniform offset in [0, start_offset_max) so protocol
  // timing decouples from the trace origin. Zero pins every start to t=0.
  Duration start_offset_max{50000};
  LinkModel link;
  ChannelModel channel;
  TimingOverrides timing;
  std::string out_path;  // empty = stdout
  std::vector<HandshakeConfig> arms;
};

// Parses the text scenario format (see README: `key = value` lines, comments
// with '#', one `[protocol NAME]` section per arm). Throws std::runtime_error
// with a line number on malformed or unknown input.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Applies one CLI `--override key=value` to scenario-level settings.
void apply_override(Scenario& s, const std::string& key_value);

// Full validation of every field and arm; throws std::invalid_argument
// naming the offending field.
void validate_scenario(const Scenario& s);

struct AggregateRow {
  std::string protocol;
  std::string params;
  std::string source;
  std::int64_t trials = 0;
  int nodes = 0;
  double pa = 0.0;
  double na = 0.0;
  double da = 0.0;
  double false_pos = 0.0;
  double mean_duration_us = 0.0;
  double p50_duration_us = 0.0;
  double p95_duration_us = 0.0;
  double tx_us = 0.0;  // mean transmitter-on time per node per trial
  double rx_us = 0.0;  // mean receiver-on time per node per trial
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
};

// Runs every arm for `trials` trials. `parallel=false` forces the serial
// reference path; both paths produce identical results by construction
// (per-trial slots, order-independent fold).
AggregateResult run_scenario(const Scenario& s, bool parallel = true);

// Stable column order:
// protocol,params,source,trials,pa,na,da,false_pos,mean_duration_us,tx_us,rx_us
std::string to_csv(const AggregateResult& result);
// Writes to_csv() to a file; I/O failures throw std::runtime_error.
void emit_csv(const AggregateResult& result, const std::string& path);

// Outcome fractions of the plain n-message handshake per (n, source), with
// channel-access wait both on and off.
AggregateResult sweep_nway(const std::vector<int>& n_values,
                           const std::vector<std::string>& sources, std::uint64_t seed,
                           std::int64_t trials, bool parallel = true);

// Disagreement cost surface: jam2 over a t_jam grid against ack-train over
// T = 1..max_train, same source and seed.
AggregateResult energy_time_frontier(const std::string& source, std::uint64_t seed,
                                     std::int64_t trials, Duration t_jam_lo,
                                     Duration t_jam_hi, Duration t_jam_step, int max_train,
                                     bool parallel = true);
// Frontier emission: protocol,params,source,trials,mean_duration_us,
// tx_total_us,da where tx_total_us sums transmitter-on time across nodes.
std::string frontier_csv(const AggregateResult& result);

// Broadcast comparison: jamb and ackb side by side per source.
AggregateResult jamb_compare(const std::vector<std::string>& sources, int receivers,
                             std::uint64_t seed, std::int64_t trials, bool parallel = true);

}  // namespace agreesim

#endif  // AGREESIM_HARNESS_HPP_
