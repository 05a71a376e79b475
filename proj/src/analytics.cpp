#include "agreesim/analytics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace agreesim {

OutcomeProbs handshake_outcome_probs(double p, int n) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("handshake_outcome_probs: p must lie in [0, 1]");
  }
  if (n < 2) {
    throw std::invalid_argument("handshake_outcome_probs: n must be at least 2");
  }
  const double p_nm1 = std::pow(p, n - 1);
  OutcomeProbs out;
  out.pa = p_nm1 * p;
  out.na = 1.0 - p_nm1;
  out.da = p_nm1 * (1.0 - p);
  return out;
}

Outcome abstract_channel_trial(double p, int n, RngStream& rng) {
  for (int i = 1; i <= n; ++i) {
    if (rng.next_unit() >= p) {
      // A loss on the final message strands the sender of message n-1 in a
      // success verdict while everyone else already agreed; earlier losses
      // leave both sides empty-handed.
      return i == n ? Outcome::Disagreement : Outcome::NegativeAgreement;
    }
  }
  return Outcome::PositiveAgreement;
}

OutcomeCounts abstract_channel_batch(double p, int n, std::int64_t trials,
                                     std::uint64_t seed, bool parallel) {
  if (trials < 0) {
    throw std::invalid_argument("abstract_channel_batch: negative trial count");
  }
  const RngStream root(seed, "abstract-channel");
  OutcomeCounts counts;
  std::int64_t pa = 0, na = 0, da = 0;
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : pa, na, da) schedule(static)
    for (std::int64_t t = 0; t < trials; ++t) {
      RngStream rng = root.substream(static_cast<std::uint64_t>(t));
      switch (abstract_channel_trial(p, n, rng)) {
        case Outcome::PositiveAgreement: ++pa; break;
        case Outcome::NegativeAgreement: ++na; break;
        case Outcome::Disagreement: ++da; break;
      }
    }
    counts.pa = pa;
    counts.na = na;
    counts.da = da;
    return counts;
#endif
  }
  for (std::int64_t t = 0; t < trials; ++t) {
    RngStream rng = root.substream(static_cast<std::uint64_t>(t));
    switch (abstract_channel_trial(p, n, rng)) {
      case Outcome::PositiveAgreement: ++pa; break;
      case Outcome::NegativeAgreement: ++na; break;
      case Outcome::Disagreement: ++da; break;
    }
  }
  counts.pa = pa;
  counts.na = na;
  counts.da = da;
  return counts;
}

double packet_success_periodic(Duration t_off, Duration t_pkt) {
  if (t_off.us <= 0) {
    throw std::invalid_argument("packet_success_periodic: off time must be positive");
  }
  if (t_pkt.us < 0) {
    throw std::invalid_argument("packet_success_periodic: negative packet time");
  }
  const std::int64_t slack = t_off.us - t_pkt.us;
  if (slack <= 0) return 0.0;
  return static_cast<double>(slack) / static_cast<double>(t_off.us);
}

double packet_success_exponential(Duration mean_idle, Duration t_pkt) {
  if (mean_idle.us <= 0) {
    throw std::invalid_argument("packet_success_exponential: mean idle must be positive");
  }
  if (t_pkt.us < 0) {
    throw std::invalid_argument("packet_success_exponential: negative packet time");
  }
  return std::exp(-static_cast<double>(t_pkt.us) / static_cast<double>(mean_idle.us));
}

double ack_train_pa(double p, int train_len) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("ack_train_pa: p out of [0,1]");
  if (train_len < 1) throw std::invalid_argument("ack_train_pa: train length must be >= 1");
  return p * (1.0 - std::pow(1.0 - p, train_len));
}

CalibrationBounds calibration_bounds(const InterferenceSource& source,
                                     const TimingModel& timing) {
  CalibrationBounds b;
  b.min_t_jam = max_busy(source) + timing.rssi_sample_period;
  const Duration idle = max_idle(source);
  if (idle.us == std::numeric_limits<std::int64_t>::max()) {
    b.max_t_msg = idle;  // silence: no interference constrains the message
  } else {
    b.max_t_msg = idle - Duration{1};
  }
  return b;
}

}  // namespace agreesim
