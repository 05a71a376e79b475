#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "agreesim/analytics.hpp"

using namespace agreesim;

namespace {

// Independent derivation: condition on the index of the first lost message.
// A loss before the last message leaves both sides without a verdict; a loss
// exactly on the last message strands the peers on different verdicts.
OutcomeProbs enumerate_first_loss(double p, int n) {
  OutcomeProbs out;
  double survive_prefix = 1.0;
  for (int i = 1; i <= n; ++i) {
    const double first_loss_here = survive_prefix * (1.0 - p);
    if (i < n) {
      out.na += first_loss_here;
    } else {
      out.da += first_loss_here;
    }
    survive_prefix *= p;
  }
  out.pa = survive_prefix;
  return out;
}

// Exhaustive expansion over all data/ack delivery patterns.
double ack_train_pa_enumerated(double p, int train_len) {
  const int combos = 1 << train_len;
  double total = 0.0;
  for (int data = 0; data <= 1; ++data) {
    const double p_data = data ? p : 1.0 - p;
    for (int mask = 0; mask < combos; ++mask) {
      double p_mask = 1.0;
      for (int j = 0; j < train_len; ++j) {
        p_mask *= (mask >> j) & 1 ? p : 1.0 - p;
      }
      if (data && mask != 0) total += p_data * p_mask;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("closed-form outcome split matches a first-loss enumeration") {
  for (double p : {0.0, 0.05, 0.3, 0.5, 0.777, 0.9, 0.99, 1.0}) {
    for (int n = 2; n <= 9; ++n) {
      const OutcomeProbs fast = handshake_outcome_probs(p, n);
      const OutcomeProbs slow = enumerate_first_loss(p, n);
      CHECK(fast.pa == doctest::Approx(slow.pa).epsilon(1e-12));
      CHECK(fast.na == doctest::Approx(slow.na).epsilon(1e-12));
      CHECK(fast.da == doctest::Approx(slow.da).epsilon(1e-12));
      CHECK(fast.pa + fast.na + fast.da == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("outcome split endpoints and a hand-checked value") {
  const OutcomeProbs perfect = handshake_outcome_probs(1.0, 4);
  CHECK(perfect.pa == 1.0);
  CHECK(perfect.na == 0.0);
  CHECK(perfect.da == 0.0);

  const OutcomeProbs dead = handshake_outcome_probs(0.0, 4);
  CHECK(dead.pa == 0.0);
  CHECK(dead.na == 1.0);
  CHECK(dead.da == 0.0);

  const OutcomeProbs o = handshake_outcome_probs(0.9, 3);
  CHECK(o.pa == doctest::Approx(0.729).epsilon(1e-12));
  CHECK(o.na == doctest::Approx(0.19).epsilon(1e-12));
  CHECK(o.da == doctest::Approx(0.081).epsilon(1e-12));

  CHECK_THROWS_AS(handshake_outcome_probs(0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(handshake_outcome_probs(-0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(handshake_outcome_probs(1.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(handshake_outcome_probs(std::nan(""), 3), std::invalid_argument);
}

TEST_CASE("adding messages trades disagreement for outright failure") {
  for (double p : {0.3, 0.6, 0.9, 0.99}) {
    double prev_da = handshake_outcome_probs(p, 2).da;
    double prev_na = handshake_outcome_probs(p, 2).na;
    double prev_pa = handshake_outcome_probs(p, 2).pa;
    for (int n = 3; n <= 12; ++n) {
      const OutcomeProbs o = handshake_outcome_probs(p, n);
      CHECK(o.da < prev_da);
      CHECK(o.na > prev_na);
      CHECK(o.pa < prev_pa);
      prev_da = o.da;
      prev_na = o.na;
      prev_pa = o.pa;
    }
  }
  // Better channels agree more often.
  double prev = -1.0;
  for (double p = 0.0; p <= 1.0001; p += 0.1) {
    const double pa = handshake_outcome_probs(std::min(p, 1.0), 3).pa;
    CHECK(pa >= prev);
    prev = pa;
  }
}

TEST_CASE("abstract channel batches reproduce the closed form") {
  const std::int64_t trials = 1000000;
  for (const auto& [p, n] : {std::pair{0.9, 3}, std::pair{0.5, 2}, std::pair{0.75, 5}}) {
    const OutcomeCounts c = abstract_channel_batch(p, n, trials, 2024);
    REQUIRE(c.total() == trials);
    const OutcomeProbs exact = handshake_outcome_probs(p, n);
    const auto within = [&](std::int64_t count, double prob) {
      const double sd = std::sqrt(prob * (1.0 - prob) * static_cast<double>(trials));
      return std::abs(static_cast<double>(count) - prob * static_cast<double>(trials)) <=
             3.0 * sd + 1.0;
    };
    CHECK(within(c.pa, exact.pa));
    CHECK(within(c.na, exact.na));
    CHECK(within(c.da, exact.da));
  }
}

TEST_CASE("abstract batches are thread-count independent") {
  for (const auto& [p, n] : {std::pair{0.9, 3}, std::pair{0.42, 4}}) {
    const OutcomeCounts par = abstract_channel_batch(p, n, 200000, 7, true);
    const OutcomeCounts ser = abstract_channel_batch(p, n, 200000, 7, false);
    CHECK(par.pa == ser.pa);
    CHECK(par.na == ser.na);
    CHECK(par.da == ser.da);
  }
  CHECK_THROWS_AS(abstract_channel_batch(0.5, 2, -1, 7), std::invalid_argument);
  CHECK(abstract_channel_batch(0.5, 2, 0, 7).total() == 0);
}

TEST_CASE("ack train success matches exhaustive enumeration") {
  for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    for (int t = 1; t <= 6; ++t) {
      CHECK(ack_train_pa(p, t) ==
            doctest::Approx(ack_train_pa_enumerated(p, t)).epsilon(1e-12));
    }
  }
  CHECK(ack_train_pa(0.9, 1) == doctest::Approx(0.81).epsilon(1e-12));
  // Longer trains approach the bare data delivery probability.
  CHECK(ack_train_pa(0.9, 20) == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(ack_train_pa(0.9, 2) > ack_train_pa(0.9, 1));
  CHECK_THROWS_AS(ack_train_pa(0.9, 0), std::invalid_argument);
  CHECK_THROWS_AS(ack_train_pa(1.5, 2), std::invalid_argument);
}

TEST_CASE("periodic fit probability is the idle slack fraction") {
  CHECK(packet_success_periodic(ms(10), us(4300)) == doctest::Approx(0.57).epsilon(1e-12));
  CHECK(packet_success_periodic(ms(10), us(0)) == 1.0);
  CHECK(packet_success_periodic(ms(10), ms(10)) == 0.0);
  CHECK(packet_success_periodic(ms(10), ms(20)) == 0.0);
  CHECK_THROWS_AS(packet_success_periodic(us(0), us(100)), std::invalid_argument);
  CHECK_THROWS_AS(packet_success_periodic(ms(10), us(-1)), std::invalid_argument);
}

TEST_CASE("memoryless fit probability is exponential in the packet length") {
  CHECK(packet_success_exponential(us(2000), us(782)) ==
        doctest::Approx(std::exp(-0.391)).epsilon(1e-12));
  CHECK(packet_success_exponential(us(2000), us(0)) == 1.0);
  CHECK_THROWS_AS(packet_success_exponential(us(0), us(100)), std::invalid_argument);

  // Monte Carlo cross-check: how often does a fresh exponential gap fit the packet?
  RngStream rng(3, "fit");
  const int n = 200000;
  int fits = 0;
  for (int i = 0; i < n; ++i) {
    if (draw_exponential(rng, us(2000)).us >= 782) ++fits;
  }
  const double expected = packet_success_exponential(us(2000), us(782));
  CHECK(static_cast<double>(fits) / n == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("calibration bounds per interference preset") {
  const TimingModel timing = make_timing_model({});

  const CalibrationBounds oven =
      calibration_bounds(preset_source_by_name("oven"), timing);
  CHECK(oven.min_t_jam.us == 10020);
  CHECK(oven.max_t_msg.us == 9999);

  const CalibrationBounds bt =
      calibration_bounds(preset_source_by_name("bluetooth"), timing);
  CHECK(bt.min_t_jam.us == 645);
  CHECK(bt.max_t_msg.us == 12656);

  const CalibrationBounds wifi =
      calibration_bounds(preset_source_by_name("wifi-heavy"), timing);
  CHECK(wifi.min_t_jam.us == 1520);
  CHECK(wifi.max_t_msg.us == 3157);

  const CalibrationBounds silent =
      calibration_bounds(preset_source_by_name("silent"), timing);
  CHECK(silent.min_t_jam.us == 20);
  CHECK(silent.max_t_msg.us == std::numeric_limits<std::int64_t>::max());

  // A longer sampling period demands a longer jam.
  TimingOverrides slow;
  slow.rssi_sample_period = us(100);
  CHECK(calibration_bounds(preset_source_by_name("oven"), make_timing_model(slow))
            .min_t_jam.us == 10100);
}
