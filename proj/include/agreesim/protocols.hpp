#ifndef AGREESIM_PROTOCOLS_HPP_
#define AGREESIM_PROTOCOLS_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "agreesim/channel.hpp"
#include "agreesim/core.hpp"

namespace agreesim {

// Node 0 is the initiating sender S; nodes 1..receivers are responders.

// Plain n-message alternating handshake: S and the responder take turns, each
// message sent only if the previous one arrived.
struct NWayParams {
  int n = 2;
};

// Two-way exchange where the responder answers with a burst of back-to-back
// ACK copies; one surviving copy settles it for S.
struct AckTrainParams {
  int train_len = 1;  // T
};

// Two-phase exchange: the responder acknowledges by jamming, the sender
// detects the jam with the noise-floor rule.
struct Jam2Params {
  Duration t_jam{2000};
};

// Three-message handshake, alias for NWayParams{3}.
struct Ack3Params {};

// Three-phase exchange: data, ACK packet, then the sender confirms by jamming;
// the responder detects with the reference-strength rule.
struct Jam3Params {
  Duration t_jam{2000};
  double delta_r_db = 6.0;
};

// Broadcast agreement: responders acknowledge by jamming TDMA slots of a
// shared bit-vector schedule, then the sender jams a confirmation.
struct JamBParams {
  int receivers = 6;
  int slots = 16;          // k
  Duration t_slot{1000};
  Duration t_settle{169};  // per-slot guard: eight RSSI readouts settle time
  Duration t_jam{2000};    // sender's confirmation jam
};

// Packet analogue of JamB: slotted unicast ACKs plus a final confirmation
// packet every responder must hear.
struct AckBParams {
  int receivers = 6;
  int slots = 16;
  Duration t_slot{1000};
};

using ProtocolParams = std::variant<NWayParams, AckTrainParams, Jam2Params, Ack3Params,
                                    Jam3Params, JamBParams, AckBParams>;

// External protocol name as used by scenario files and the CLI.
std::string protocol_name(const ProtocolParams& params);
// Canonical space-separated parameter summary for report rows.
std::string protocol_params_string(const ProtocolParams& params);
// Parses a protocol name ("nway", "ack2", "ack-train", "jam2", "ack3",
// "jam3", "jamb", "ackb") into params with default knobs.
ProtocolParams protocol_by_name(std::string_view name);
// Number of nodes in a trial: 2, or receivers + 1 for broadcast protocols.
int protocol_node_count(const ProtocolParams& params);

struct FixedTxPower {
  PowerDbm value{0.0};
};
// Uniform integer dBm draw per trial; the responder replies with the power
// announced in the packet, so one draw covers the whole exchange.
struct SweptTxPower {
  int lo_dbm = -25;
  int hi_dbm = 0;
};
using TxPowerPolicy = std::variant<FixedTxPower, SweptTxPower>;

// Symmetric link between any two nodes: fixed path loss plus an ambient
// per-packet loss probability interpolated from (tx dBm, probability) points.
struct LinkModel {
  double path_loss_db = 60.0;
  std::vector<std::pair<double, double>> base_loss_points{{-25.0, 0.15}, {0.0, 0.02}};

  double base_loss_at(double tx_dbm) const;
  PowerDbm rx_power(PowerDbm tx) const { return PowerDbm{tx.dbm - path_loss_db}; }
};

// Propagation and receiver constants shared by every node.
struct ChannelModel {
  PowerDbm noise_low{-100.0};
  PowerDbm noise_high{-94.0};
  double jitter_db = 2.0;
  double capture_margin_db = 3.0;
  PowerDbm cca_threshold{-77.0};
};

struct HandshakeConfig {
  ProtocolParams protocol;
  int payload_bytes = 5;
  PowerDbm r_noise{-94.0};  // detector noise ceiling, receiver sensitivity
  TxPowerPolicy tx_power = SweptTxPower{};
  bool cca_before_first = true;  // wait for a clear channel before message 1
};

struct NodeStats {
  bool verdict = false;  // this node deems the exchange successful
  Duration tx{0};        // transmitter-on time (packets and jams)
  Duration rx{0};        // receiver-on time (CCA, listening, RSSI sampling)
};

struct OutcomeRecord {
  Outcome outcome = Outcome::NegativeAgreement;
  // A detector reported a jam while nothing was jamming (interference or
  // noise read as agreement traffic).
  bool false_positive = false;
  std::vector<NodeStats> nodes;  // index 0 = S
  // From the start of the successful pre-handshake CCA window (or first
  // transmission when CCA is off) to the last scheduled protocol event.
  // Channel-access waiting is excluded: it measures the protocol, not the
  // interferer.
  Duration duration{0};
  PowerDbm tx_power{0.0};  // per-trial transmit power actually drawn
};

// Joint classification of per-node verdicts; needs at least two nodes.
Outcome classify(const std::vector<bool>& verdicts);

// TDMA jam schedule: bit i of masks[node] grants the node slot i. Every node
// owns floor(slots/receivers) exclusive stride-spaced slots; leftover slots
// are shared round-robin so each slot has at least one owner.
struct BitVectorSchedule {
  int slots = 0;
  std::vector<std::uint32_t> masks;  // one per receiver
};

// Requires 1 <= receivers <= slots <= 32.
BitVectorSchedule build_bitvector_schedule(int receivers, int slots);

// Runs one handshake starting at `start` (the instant the initiator begins
// channel access). The timeline accumulates the protocol's own emissions.
OutcomeRecord run_handshake(const HandshakeConfig& cfg, const LinkModel& link,
                            const ChannelModel& channel, const TimingModel& timing,
                            SignalTimeline& timeline, RngStream& rng, TimePoint start);

OutcomeRecord run_nway(const NWayParams& p, const HandshakeConfig& cfg,
                       const LinkModel& link, const ChannelModel& channel,
                       const TimingModel& timing, SignalTimeline& timeline,
                       RngStream& rng, TimePoint start);
OutcomeRecord run_ack_train(const AckTrainParams& p, const HandshakeConfig& cfg,
                            const LinkModel& link, const ChannelModel& channel,
                            const TimingModel& timing, SignalTimeline& timeline,
                            RngStream& rng, TimePoint start);
OutcomeRecord run_jam2(const Jam2Params& p, const HandshakeConfig& cfg,
                       const LinkModel& link, const ChannelModel& channel,
                       const TimingModel& timing, SignalTimeline& timeline,
                       RngStream& rng, TimePoint start);
OutcomeRecord run_ack3(const Ack3Params& p, const HandshakeConfig& cfg,
                       const LinkModel& link, const ChannelModel& channel,
                       const TimingModel& timing, SignalTimeline& timeline,
                       RngStream& rng, TimePoint start);
OutcomeRecord run_jam3(const Jam3Params& p, const HandshakeConfig& cfg,
                       const LinkModel& link, const ChannelModel& channel,
                       const TimingModel& timing, SignalTimeline& timeline,
                       RngStream& rng, TimePoint start);
OutcomeRecord run_jamb(const JamBParams& p, const HandshakeConfig& cfg,
                       const LinkModel& link, const ChannelModel& channel,
                       const TimingModel& timing, SignalTimeline& timeline,
                       RngStream& rng, TimePoint start);
OutcomeRecord run_ackb(const AckBParams& p, const HandshakeConfig& cfg,
                       const LinkModel& link, const ChannelModel& channel,
                       const TimingModel& timing, SignalTimeline& timeline,
                       RngStream& rng, TimePoint start);

}  // namespace agreesim

#endif  // AGREESIM_PROTOCOLS_HPP_
