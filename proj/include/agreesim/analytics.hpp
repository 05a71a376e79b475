#ifndef AGREESIM_ANALYTICS_HPP_
#define AGREESIM_ANALYTICS_HPP_

#include <cstdint>

#include "agreesim/core.hpp"
#include "agreesim/interference.hpp"

namespace agreesim {

struct OutcomeProbs {
  double pa = 0.0;
  double na = 0.0;
  double da = 0.0;
};

// Closed-form outcome probabilities of an n-message handshake when each
// message independently survives with probability p: the exchange agrees
// positively iff all n messages arrive, fails symmetrically iff a loss occurs
// before the final message, and splits iff only the final message is lost.
// Requires p in [0, 1] and n >= 2.
OutcomeProbs handshake_outcome_probs(double p, int n);

// One simulated handshake on the abstract lossy channel.
Outcome abstract_channel_trial(double p, int n, RngStream& rng);

struct OutcomeCounts {
  std::int64_t pa = 0;
  std::int64_t na = 0;
  std::int64_t da = 0;

  std::int64_t total() const { return pa + na + da; }
};

// Monte Carlo batch of abstract trials. Deterministic for a given seed and
// independent of thread count; `parallel` uses every core available.
OutcomeCounts abstract_channel_batch(double p, int n, std::int64_t trials,
                                     std::uint64_t seed, bool parallel = true);

// Probability that a packet needing t_pkt on air fits inside the idle phase
// of a strictly periodic interferer with off-time t_off, under a uniformly
// random start within the idle phase.
double packet_success_periodic(Duration t_off, Duration t_pkt);

// Same for memoryless idle gaps with the given mean: exp(-t_pkt / mean).
double packet_success_exponential(Duration mean_idle, Duration t_pkt);

// Positive-agreement probability of the ACK-train exchange on the abstract
// channel: the data packet must land and at least one of the T ACK copies
// must survive, p * (1 - (1-p)^T).
double ack_train_pa(double p, int train_len);

struct CalibrationBounds {
  Duration min_t_jam{0};  // shortest jam that interference can never mimic
  Duration max_t_msg{0};  // longest message that can fit an idle gap
};

// Calibration rules for a jamming-based protocol against a given interferer:
// the jam must outlast the longest busy period by at least one RSSI sample,
// and any single message must fit strictly inside the longest idle gap.
CalibrationBounds calibration_bounds(const InterferenceSource& source,
                                     const TimingModel& timing);

}  // namespace agreesim

#endif  // AGREESIM_ANALYTICS_HPP_
