#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>

#include "agreesim/protocols.hpp"

using namespace agreesim;

namespace {

ActivityTrace silent_trace(Duration horizon = ms(200)) {
  ActivityTrace t;
  t.horizon = horizon;
  return t;
}

ActivityTrace full_busy_trace(Duration horizon = ms(200)) {
  ActivityTrace t;
  t.horizon = horizon;
  t.intervals.push_back({TimePoint{0}, TimePoint{horizon.us}, dbm(-55.0)});
  return t;
}

LinkModel clean_link() {
  LinkModel link;
  link.base_loss_points.clear();  // no ambient loss
  return link;
}

HandshakeConfig fixed_cfg(ProtocolParams p) {
  HandshakeConfig cfg;
  cfg.protocol = std::move(p);
  cfg.tx_power = FixedTxPower{dbm(0.0)};
  return cfg;
}

OutcomeRecord run_silent(const ProtocolParams& p, std::uint64_t seed = 1) {
  const HandshakeConfig cfg = fixed_cfg(p);
  const LinkModel link = clean_link();
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  SignalTimeline tl(silent_trace(), channel.noise_low, channel.noise_high,
                    channel.jitter_db);
  RngStream rng(seed, "trial");
  return run_handshake(cfg, link, channel, timing, tl, rng, TimePoint{0});
}

bool records_equal(const OutcomeRecord& a, const OutcomeRecord& b) {
  if (a.outcome != b.outcome) return false;
  if (a.false_positive != b.false_positive) return false;
  if (a.duration.us != b.duration.us) return false;
  if (a.tx_power.dbm != b.tx_power.dbm) return false;
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].verdict != b.nodes[i].verdict) return false;
    if (a.nodes[i].tx.us != b.nodes[i].tx.us) return false;
    if (a.nodes[i].rx.us != b.nodes[i].rx.us) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("classify joint verdicts") {
  CHECK(classify({true, true}) == Outcome::PositiveAgreement);
  CHECK(classify({false, false}) == Outcome::NegativeAgreement);
  CHECK(classify({true, false}) == Outcome::Disagreement);
  CHECK(classify({false, true}) == Outcome::Disagreement);
  CHECK(classify({true, true, true}) == Outcome::PositiveAgreement);
  CHECK(classify({true, true, false}) == Outcome::Disagreement);
  CHECK(classify({false, false, false}) == Outcome::NegativeAgreement);
  CHECK_THROWS_AS(classify({true}), std::invalid_argument);
  CHECK_THROWS_AS(classify({}), std::invalid_argument);
}

TEST_CASE("protocol names, parameter strings, and node counts") {
  CHECK(protocol_name(NWayParams{4}) == "nway");
  CHECK(protocol_params_string(NWayParams{4}) == "n=4");
  CHECK(protocol_name(AckTrainParams{1}) == "ack2");
  CHECK(protocol_name(AckTrainParams{4}) == "ack-train");
  CHECK(protocol_params_string(AckTrainParams{4}) == "T=4");
  CHECK(protocol_name(Jam2Params{}) == "jam2");
  CHECK(protocol_params_string(Jam2Params{}) == "t_jam=2000");
  CHECK(protocol_name(Ack3Params{}) == "ack3");
  CHECK(protocol_params_string(Ack3Params{}) == "n=3");
  CHECK(protocol_name(Jam3Params{}) == "jam3");
  CHECK(protocol_name(JamBParams{}) == "jamb");
  CHECK(protocol_params_string(JamBParams{}) == "r=6 k=16 t_slot=1000 t_jam=2000");
  CHECK(protocol_name(AckBParams{}) == "ackb");
  CHECK(protocol_params_string(AckBParams{}) == "r=6 k=16 t_slot=1000");

  for (const char* name : {"nway", "ack2", "ack-train", "jam2", "ack3", "jam3", "jamb",
                           "ackb"}) {
    CHECK(protocol_name(protocol_by_name(name)) == name);
  }
  CHECK_THROWS_AS(protocol_by_name("csma"), std::invalid_argument);

  CHECK(protocol_node_count(NWayParams{}) == 2);
  CHECK(protocol_node_count(Jam3Params{}) == 2);
  CHECK(protocol_node_count(JamBParams{}) == 7);
  CHECK(protocol_node_count(AckBParams{.receivers = 3}) == 4);
}

TEST_CASE("base loss interpolates between calibration points and clamps outside") {
  const LinkModel link;
  CHECK(link.base_loss_at(-25.0) == doctest::Approx(0.15));
  CHECK(link.base_loss_at(0.0) == doctest::Approx(0.02));
  CHECK(link.base_loss_at(-12.5) == doctest::Approx(0.085));
  CHECK(link.base_loss_at(-40.0) == doctest::Approx(0.15));
  CHECK(link.base_loss_at(10.0) == doctest::Approx(0.02));

  LinkModel reversed;
  reversed.base_loss_points = {{0.0, 0.02}, {-25.0, 0.15}};
  CHECK(reversed.base_loss_at(-12.5) == doctest::Approx(0.085));

  CHECK(clean_link().base_loss_at(-10.0) == 0.0);
  CHECK(LinkModel{}.rx_power(dbm(0.0)).dbm == -60.0);
}

TEST_CASE("bit-vector schedules cover every slot with stride-spaced exclusives") {
  for (int r = 1; r <= 32; ++r) {
    for (int k = r; k <= 32; ++k) {
      const BitVectorSchedule sched = build_bitvector_schedule(r, k);
      REQUIRE(sched.slots == k);
      REQUIRE(sched.masks.size() == static_cast<std::size_t>(r));
      std::uint32_t all = 0;
      const int per_node = k / r;
      for (int node = 0; node < r; ++node) {
        const std::uint32_t mask = sched.masks[static_cast<std::size_t>(node)];
        REQUIRE(mask != 0);
        REQUIRE(std::popcount(mask) >= per_node);
        if (k < 32) REQUIRE((mask >> k) == 0);
        all |= mask;
        // The stride slots belong to this node alone.
        for (int j = 0; j < per_node; ++j) {
          const int slot = node + j * r;
          REQUIRE(((mask >> slot) & 1u) == 1u);
          for (int other = 0; other < r; ++other) {
            if (other == node) continue;
            REQUIRE(((sched.masks[static_cast<std::size_t>(other)] >> slot) & 1u) == 0u);
          }
        }
      }
      const std::uint32_t want =
          k == 32 ? 0xffffffffu : ((1u << k) - 1u);
      REQUIRE(all == want);  // every slot has at least one owner
    }
  }
  CHECK_THROWS_AS(build_bitvector_schedule(0, 5), std::invalid_argument);
  CHECK_THROWS_AS(build_bitvector_schedule(5, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_bitvector_schedule(2, 33), std::invalid_argument);
}

TEST_CASE("silent channel runs agree positively with exact durations") {
  const auto nway2 = run_silent(NWayParams{2});
  CHECK(nway2.outcome == Outcome::PositiveAgreement);
  CHECK(nway2.duration.us == 5780);

  const auto train3 = run_silent(AckTrainParams{3});
  CHECK(train3.outcome == Outcome::PositiveAgreement);
  CHECK(train3.duration.us == 7344);

  const auto jam2 = run_silent(Jam2Params{});
  CHECK(jam2.outcome == Outcome::PositiveAgreement);
  CHECK(jam2.duration.us == 3024);
  CHECK_FALSE(jam2.false_positive);

  const auto jam3 = run_silent(Jam3Params{});
  CHECK(jam3.outcome == Outcome::PositiveAgreement);
  CHECK(jam3.duration.us == 7972);

  const auto jamb = run_silent(JamBParams{.receivers = 2});
  CHECK(jamb.outcome == Outcome::PositiveAgreement);
  CHECK(jamb.duration.us == 19216);
  CHECK_FALSE(jamb.false_positive);

  const auto ackb = run_silent(AckBParams{.receivers = 2});
  CHECK(ackb.outcome == Outcome::PositiveAgreement);
  CHECK(ackb.duration.us == 25868);
}

TEST_CASE("silent channel energy accounting is exact") {
  const auto nway2 = run_silent(NWayParams{2});
  CHECK(nway2.nodes[0].tx.us == 704);
  CHECK(nway2.nodes[0].rx.us == 910);   // pre-send CCA + ACK listen
  CHECK(nway2.nodes[1].tx.us == 782);
  CHECK(nway2.nodes[1].rx.us == 832);   // data packet + reply CCA

  const auto train3 = run_silent(AckTrainParams{3});
  CHECK(train3.nodes[0].tx.us == 704);
  CHECK(train3.nodes[0].rx.us == 2474);  // CCA + full train window
  CHECK(train3.nodes[1].tx.us == 2346);
  CHECK(train3.nodes[1].rx.us == 832);

  const auto jam2 = run_silent(Jam2Params{});
  CHECK(jam2.nodes[0].tx.us == 704);
  CHECK(jam2.nodes[0].rx.us == 2128);   // CCA + jam-length sampling
  CHECK(jam2.nodes[1].tx.us == 2000);
  CHECK(jam2.nodes[1].rx.us == 704);

  const auto jam3 = run_silent(Jam3Params{});
  CHECK(jam3.nodes[0].tx.us == 2704);   // data + confirmation jam
  CHECK(jam3.nodes[0].rx.us == 910);
  CHECK(jam3.nodes[1].tx.us == 782);
  CHECK(jam3.nodes[1].rx.us == 2832);   // data + CCA + jam sampling

  const auto jamb = run_silent(JamBParams{.receivers = 2});
  CHECK(jamb.nodes[0].tx.us == 2704);
  CHECK(jamb.nodes[0].rx.us == 16128);  // CCA + all sixteen slots
  for (int i = 1; i <= 2; ++i) {
    CHECK(jamb.nodes[static_cast<std::size_t>(i)].tx.us == 8000);  // eight slots each
    CHECK(jamb.nodes[static_cast<std::size_t>(i)].rx.us == 2704);
  }

  const auto ackb = run_silent(AckBParams{.receivers = 2});
  CHECK(ackb.nodes[0].tx.us == 1408);   // data + confirmation packet
  CHECK(ackb.nodes[0].rx.us == 16128);
  for (int i = 1; i <= 2; ++i) {
    CHECK(ackb.nodes[static_cast<std::size_t>(i)].tx.us == 782);
    CHECK(ackb.nodes[static_cast<std::size_t>(i)].rx.us == 1536);
  }
}

TEST_CASE("a surviving ack train bills the responder exactly T airtimes") {
  for (int t : {1, 2, 4, 8}) {
    const auto rec = run_silent(AckTrainParams{t});
    REQUIRE(rec.outcome == Outcome::PositiveAgreement);
    CHECK(rec.nodes[1].tx.us == 782 * t);
    CHECK(rec.duration.us == 4998 + 782 * t);
  }
}

TEST_CASE("ack3 is the three-message handshake under another name") {
  const HandshakeConfig a = fixed_cfg(Ack3Params{});
  const HandshakeConfig b = fixed_cfg(NWayParams{3});
  const LinkModel link;  // keep ambient loss so both loss paths are exercised
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SignalTimeline tla(silent_trace(), channel.noise_low, channel.noise_high,
                       channel.jitter_db);
    SignalTimeline tlb(silent_trace(), channel.noise_low, channel.noise_high,
                       channel.jitter_db);
    RngStream ra(seed, "trial");
    RngStream rb(seed, "trial");
    const auto reca = run_handshake(a, link, channel, timing, tla, ra, TimePoint{0});
    const auto recb = run_handshake(b, link, channel, timing, tlb, rb, TimePoint{0});
    CHECK(records_equal(reca, recb));
  }
}

TEST_CASE("dispatch through run_handshake matches the direct entry point") {
  const HandshakeConfig cfg = fixed_cfg(Jam2Params{us(3000)});
  const LinkModel link = clean_link();
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  SignalTimeline tla(silent_trace(), channel.noise_low, channel.noise_high,
                     channel.jitter_db);
  SignalTimeline tlb(silent_trace(), channel.noise_low, channel.noise_high,
                     channel.jitter_db);
  RngStream ra(9, "trial");
  RngStream rb(9, "trial");
  const auto via_dispatch = run_handshake(cfg, link, channel, timing, tla, ra, TimePoint{0});
  const auto direct = run_jam2(Jam2Params{us(3000)}, cfg, link, channel, timing, tlb, rb,
                               TimePoint{0});
  CHECK(records_equal(via_dispatch, direct));
}

TEST_CASE("handshakes are deterministic given the stream") {
  for (const ProtocolParams& p :
       {ProtocolParams{NWayParams{3}}, ProtocolParams{Jam3Params{}},
        ProtocolParams{JamBParams{.receivers = 3}}, ProtocolParams{AckBParams{}}}) {
    HandshakeConfig cfg;
    cfg.protocol = p;  // default swept power, default ambient loss
    const LinkModel link;
    const ChannelModel channel;
    const TimingModel timing = make_timing_model({});
    ActivityTrace trace = silent_trace();
    trace.intervals.push_back({TimePoint{40000}, TimePoint{50000}, dbm(-55.0)});
    SignalTimeline tla(trace, channel.noise_low, channel.noise_high, channel.jitter_db);
    SignalTimeline tlb(trace, channel.noise_low, channel.noise_high, channel.jitter_db);
    RngStream ra(17, "trial");
    RngStream rb(17, "trial");
    const auto reca = run_handshake(cfg, link, channel, timing, tla, ra, TimePoint{0});
    const auto recb = run_handshake(cfg, link, channel, timing, tlb, rb, TimePoint{0});
    CHECK(records_equal(reca, recb));
  }
}

TEST_CASE("a blocked channel yields an all-fail record with zero duration") {
  for (const ProtocolParams& p :
       {ProtocolParams{NWayParams{2}}, ProtocolParams{Jam2Params{}},
        ProtocolParams{JamBParams{}}, ProtocolParams{AckBParams{}}}) {
    HandshakeConfig cfg;
    cfg.protocol = p;
    const LinkModel link;
    const ChannelModel channel;
    const TimingModel timing = make_timing_model({});
    SignalTimeline tl(full_busy_trace(), channel.noise_low, channel.noise_high,
                      channel.jitter_db);
    RngStream rng(3, "trial");
    const auto rec = run_handshake(cfg, link, channel, timing, tl, rng, TimePoint{0});
    CHECK(rec.outcome == Outcome::NegativeAgreement);
    CHECK_FALSE(rec.false_positive);
    CHECK(rec.duration.us == 0);
    REQUIRE(rec.nodes.size() ==
            static_cast<std::size_t>(protocol_node_count(p)));
    for (const NodeStats& n : rec.nodes) {
      CHECK_FALSE(n.verdict);
      CHECK(n.tx.us == 0);
      CHECK(n.rx.us == 0);
    }
    CHECK(rec.tx_power.dbm >= -25.0);
    CHECK(rec.tx_power.dbm <= 0.0);
  }
}

TEST_CASE("channel-access waiting is excluded from the reported duration") {
  HandshakeConfig cfg = fixed_cfg(Jam2Params{});
  const LinkModel link = clean_link();
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  ActivityTrace trace = silent_trace();
  trace.intervals.push_back({TimePoint{0}, TimePoint{1000}, dbm(-55.0)});
  SignalTimeline tl(trace, channel.noise_low, channel.noise_high, channel.jitter_db);
  RngStream rng(4, "trial");
  const auto rec = run_handshake(cfg, link, channel, timing, tl, rng, TimePoint{0});
  CHECK(rec.outcome == Outcome::PositiveAgreement);
  CHECK(rec.duration.us == 3024);  // same as on a silent channel
}

TEST_CASE("interference that mimics an ack jam produces a false positive") {
  HandshakeConfig cfg = fixed_cfg(Jam2Params{});
  cfg.cca_before_first = false;
  LinkModel link;
  link.base_loss_points = {{0.0, 1.0}};  // the data packet always dies
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  SignalTimeline tl(full_busy_trace(), channel.noise_low, channel.noise_high,
                    channel.jitter_db);
  RngStream rng(5, "trial");
  const auto rec = run_handshake(cfg, link, channel, timing, tl, rng, TimePoint{0});
  CHECK(rec.outcome == Outcome::Disagreement);
  CHECK(rec.false_positive);
  CHECK(rec.nodes[0].verdict);
  CHECK_FALSE(rec.nodes[1].verdict);
  CHECK(rec.duration.us == 2896);  // no leading CCA window in this mode
}

TEST_CASE("a burst that leaves part of the jam window silent is not detected") {
  HandshakeConfig cfg = fixed_cfg(Jam2Params{});
  cfg.cca_before_first = false;
  LinkModel link;
  link.base_loss_points = {{0.0, 1.0}};
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  ActivityTrace trace = silent_trace();
  trace.intervals.push_back({TimePoint{0}, TimePoint{1500}, dbm(-55.0)});
  SignalTimeline tl(trace, channel.noise_low, channel.noise_high, channel.jitter_db);
  RngStream rng(6, "trial");
  const auto rec = run_handshake(cfg, link, channel, timing, tl, rng, TimePoint{0});
  CHECK(rec.outcome == Outcome::NegativeAgreement);
  CHECK_FALSE(rec.false_positive);
}

TEST_CASE("swept transmit power draws integer dBm per trial") {
  HandshakeConfig cfg;
  cfg.protocol = Jam2Params{};  // default sweep -25..0
  const LinkModel link = clean_link();
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  std::set<double> seen;
  const RngStream root(21, "trials");
  for (std::uint64_t t = 0; t < 60; ++t) {
    SignalTimeline tl(silent_trace(), channel.noise_low, channel.noise_high,
                      channel.jitter_db);
    RngStream rng = root.substream(t);
    const auto rec = run_handshake(cfg, link, channel, timing, tl, rng, TimePoint{0});
    REQUIRE(rec.tx_power.dbm >= -25.0);
    REQUIRE(rec.tx_power.dbm <= 0.0);
    REQUIRE(rec.tx_power.dbm == std::floor(rec.tx_power.dbm));
    REQUIRE(rec.outcome == Outcome::PositiveAgreement);  // silent channel
    seen.insert(rec.tx_power.dbm);
  }
  CHECK(seen.size() > 5);
}

TEST_CASE("parameter validation rejects nonsense") {
  const LinkModel link = clean_link();
  const ChannelModel channel;
  const TimingModel timing = make_timing_model({});
  const auto try_run = [&](ProtocolParams p) {
    SignalTimeline tl(silent_trace(), channel.noise_low, channel.noise_high,
                      channel.jitter_db);
    RngStream rng(1, "trial");
    return run_handshake(fixed_cfg(std::move(p)), link, channel, timing, tl, rng,
                         TimePoint{0});
  };
  CHECK_THROWS_AS(try_run(NWayParams{1}), std::invalid_argument);
  CHECK_THROWS_AS(try_run(AckTrainParams{0}), std::invalid_argument);
  CHECK_THROWS_AS(try_run(Jam2Params{us(0)}), std::invalid_argument);
  CHECK_THROWS_AS(try_run(Jam3Params{us(2000), -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(try_run(JamBParams{.t_slot = us(150)}), std::invalid_argument);
  CHECK_THROWS_AS(try_run(AckBParams{.t_slot = us(700)}), std::invalid_argument);
  CHECK_THROWS_AS(try_run(JamBParams{.receivers = 40}), std::invalid_argument);

  // Link budget below receiver sensitivity is refused up front.
  LinkModel weak;
  weak.path_loss_db = 100.0;
  SignalTimeline tl(silent_trace(), channel.noise_low, channel.noise_high,
                    channel.jitter_db);
  RngStream rng(1, "trial");
  CHECK_THROWS_AS(run_handshake(fixed_cfg(Jam2Params{}), weak, channel, timing, tl, rng,
                                TimePoint{0}),
                  std::invalid_argument);
}
