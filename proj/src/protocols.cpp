#include "agreesim/protocols.hpp"

#include <algorithm>
#include <stdexcept>

namespace agreesim {
namespace {

constexpr double kSensitivityDbm = -94.0;

struct Ctx {
  const HandshakeConfig& cfg;
  const LinkModel& link;
  const ChannelModel& channel;
  const TimingModel& timing;
  SignalTimeline& tl;
  RngStream& rng;
  PowerDbm tx{0.0};
  PowerDbm rx{0.0};
  double base_loss = 0.0;
};

PowerDbm draw_tx_power(const TxPowerPolicy& policy, RngStream& rng) {
  if (const auto* fixed = std::get_if<FixedTxPower>(&policy)) {
    return fixed->value;
  }
  const auto& sweep = std::get<SweptTxPower>(policy);
  if (sweep.lo_dbm > sweep.hi_dbm) {
    throw std::invalid_argument("tx power sweep: lo exceeds hi");
  }
  return PowerDbm{static_cast<double>(rng.next_int(sweep.lo_dbm, sweep.hi_dbm))};
}

Ctx make_ctx(const HandshakeConfig& cfg, const LinkModel& link, const ChannelModel& channel,
             const TimingModel& timing, SignalTimeline& tl, RngStream& rng) {
  Ctx c{cfg, link, channel, timing, tl, rng};
  c.tx = draw_tx_power(cfg.tx_power, rng);
  c.rx = link.rx_power(c.tx);
  if (c.rx.dbm <= kSensitivityDbm) {
    throw std::invalid_argument("link budget puts received power at or below sensitivity");
  }
  c.base_loss = link.base_loss_at(c.tx.dbm);
  return c;
}

// Blocking clear-channel wait before the first transmission. Only the final,
// successful CCA window is billed to the radio: the preceding wait depends on
// the interferer, not the protocol.
std::optional<TimePoint> acquire_channel(Ctx& c, TimePoint start, NodeStats& sender) {
  if (!c.cfg.cca_before_first) return start;
  auto t = first_cca_idle(c.tl, start, c.channel.cca_threshold, c.timing.cca_check_duration);
  if (t) sender.rx += c.timing.cca_check_duration;
  return t;
}

TimePoint trial_origin(const Ctx& c, TimePoint first_tx) {
  return c.cfg.cca_before_first ? first_tx - c.timing.cca_check_duration : first_tx;
}

// Single non-blocking carrier check right before a response transmission.
bool cca_clear(Ctx& c, TimePoint send_at, NodeStats& sender) {
  sender.rx += c.timing.cca_check_duration;
  return !c.tl.energy_above(c.channel.cca_threshold,
                            send_at - c.timing.cca_check_duration, send_at);
}

// Evaluates reception at one listener, then puts the packet on the air.
bool deliver_unicast(Ctx& c, TimePoint at, Duration airtime, int sender_node) {
  const bool ok = packet_received(c.tl, at, airtime, c.rx, c.channel.capture_margin_db,
                                  c.base_loss, c.rng);
  c.tl.add_emission({at, at + airtime, c.rx, EmissionKind::Packet, sender_node});
  return ok;
}

// Broadcast variant: an independent ambient-loss draw per listener, one shared
// airtime on the channel.
std::vector<char> deliver_broadcast(Ctx& c, TimePoint at, Duration airtime, int sender_node,
                                    int listeners) {
  std::vector<char> got(static_cast<std::size_t>(listeners), 0);
  for (int i = 0; i < listeners; ++i) {
    got[static_cast<std::size_t>(i)] =
        packet_received(c.tl, at, airtime, c.rx, c.channel.capture_margin_db, c.base_loss,
                        c.rng)
            ? 1
            : 0;
  }
  c.tl.add_emission({at, at + airtime, c.rx, EmissionKind::Packet, sender_node});
  return got;
}

bool jam_on_air(const SignalTimeline& tl, TimePoint start, TimePoint end) {
  for (const Emission& e : tl.protocol_emissions()) {
    if (e.kind == EmissionKind::Jam && e.start.us < end.us && start.us < e.end.us) {
      return true;
    }
  }
  return false;
}

RssiSampleRun drop_leading(const RssiSampleRun& run, std::int64_t n) {
  RssiSampleRun out;
  out.window_start = run.window_start;
  out.window_length = run.window_length;
  if (static_cast<std::int64_t>(run.samples.size()) > n) {
    out.samples.assign(run.samples.begin() + n, run.samples.end());
  }
  return out;
}

OutcomeRecord no_channel_record(int node_count, PowerDbm tx) {
  // The initiator never got on the air; everyone walks away empty-handed.
  OutcomeRecord rec;
  rec.nodes.resize(static_cast<std::size_t>(node_count));
  rec.outcome = Outcome::NegativeAgreement;
  rec.tx_power = tx;
  return rec;
}

void finish(OutcomeRecord& rec) {
  std::vector<bool> verdicts;
  verdicts.reserve(rec.nodes.size());
  for (const NodeStats& n : rec.nodes) verdicts.push_back(n.verdict);
  rec.outcome = classify(verdicts);
}

}  // namespace

double LinkModel::base_loss_at(double tx_dbm) const {
  if (base_loss_points.empty()) return 0.0;
  std::vector<std::pair<double, double>> pts = base_loss_points;
  std::sort(pts.begin(), pts.end());
  if (tx_dbm <= pts.front().first) return pts.front().second;
  if (tx_dbm >= pts.back().first) return pts.back().second;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (tx_dbm <= pts[i].first) {
      const auto& [x0, y0] = pts[i - 1];
      const auto& [x1, y1] = pts[i];
      if (x1 == x0) return y1;
      return y0 + (y1 - y0) * (tx_dbm - x0) / (x1 - x0);
    }
  }
  return pts.back().second;
}

Outcome classify(const std::vector<bool>& verdicts) {
  if (verdicts.size() < 2) {
    throw std::invalid_argument("classify: need at least two verdicts");
  }
  bool all = true;
  bool none = true;
  for (bool v : verdicts) {
    all = all && v;
    none = none && !v;
  }
  if (all) return Outcome::PositiveAgreement;
  if (none) return Outcome::NegativeAgreement;
  return Outcome::Disagreement;
}

BitVectorSchedule build_bitvector_schedule(int receivers, int slots) {
  if (receivers < 1 || slots < receivers || slots > 32) {
    throw std::invalid_argument("bit-vector schedule requires 1 <= receivers <= slots <= 32");
  }
  BitVectorSchedule sched;
  sched.slots = slots;
  sched.masks.assign(static_cast<std::size_t>(receivers), 0);
  const int per_node = slots / receivers;
  // Exclusive slots, stride-spaced so each node's transmissions are as far
  // apart as the schedule allows.
  for (int node = 0; node < receivers; ++node) {
    for (int j = 0; j < per_node; ++j) {
      sched.masks[static_cast<std::size_t>(node)] |= 1u << (node + j * receivers);
    }
  }
  // Leftover slots are shared by round-robin groups so every slot has an owner.
  const int first_leftover = per_node * receivers;
  const int leftovers = slots - first_leftover;
  if (leftovers > 0) {
    const int group = (receivers + leftovers - 1) / leftovers;
    for (int m = 0; m < leftovers; ++m) {
      for (int t = 0; t < group; ++t) {
        const int node = (m * group + t) % receivers;
        sched.masks[static_cast<std::size_t>(node)] |= 1u << (first_leftover + m);
      }
    }
  }
  return sched;
}

std::string protocol_name(const ProtocolParams& params) {
  struct Visitor {
    std::string operator()(const NWayParams&) const { return "nway"; }
    std::string operator()(const AckTrainParams& p) const {
      return p.train_len == 1 ? "ack2" : "ack-train";
    }
    std::string operator()(const Jam2Params&) const { return "jam2"; }
    std::string operator()(const Ack3Params&) const { return "ack3"; }
    std::string operator()(const Jam3Params&) const { return "jam3"; }
    std::string operator()(const JamBParams&) const { return "jamb"; }
    std::string operator()(const AckBParams&) const { return "ackb"; }
  };
  return std::visit(Visitor{}, params);
}

std::string protocol_params_string(const ProtocolParams& params) {
  struct Visitor {
    std::string operator()(const NWayParams& p) const { return "n=" + std::to_string(p.n); }
    std::string operator()(const AckTrainParams& p) const {
      return "T=" + std::to_string(p.train_len);
    }
    std::string operator()(const Jam2Params& p) const {
      return "t_jam=" + std::to_string(p.t_jam.us);
    }
    std::string operator()(const Ack3Params&) const { return "n=3"; }
    std::string operator()(const Jam3Params& p) const {
      return "t_jam=" + std::to_string(p.t_jam.us) + " dr=" + std::to_string(p.delta_r_db);
    }
    std::string operator()(const JamBParams& p) const {
      return "r=" + std::to_string(p.receivers) + " k=" + std::to_string(p.slots) +
             " t_slot=" + std::to_string(p.t_slot.us) + " t_jam=" + std::to_string(p.t_jam.us);
    }
    std::string operator()(const AckBParams& p) const {
      return "r=" + std::to_string(p.receivers) + " k=" + std::to_string(p.slots) +
             " t_slot=" + std::to_string(p.t_slot.us);
    }
  };
  return std::visit(Visitor{}, params);
}

int protocol_node_count(const ProtocolParams& params) {
  if (const auto* jb = std::get_if<JamBParams>(&params)) return jb->receivers + 1;
  if (const auto* ab = std::get_if<AckBParams>(&params)) return ab->receivers + 1;
  return 2;
}

ProtocolParams protocol_by_name(std::string_view name) {
  if (name == "nway") return NWayParams{};
  if (name == "ack2") return AckTrainParams{1};
  if (name == "ack-train") return AckTrainParams{2};
  if (name == "jam2") return Jam2Params{};
  if (name == "ack3") return Ack3Params{};
  if (name == "jam3") return Jam3Params{};
  if (name == "jamb") return JamBParams{};
  if (name == "ackb") return AckBParams{};
  throw std::invalid_argument("unknown protocol '" + std::string(name) +
                              "' (expected nway, ack2, ack-train, jam2, ack3, jam3, jamb, ackb)");
}

OutcomeRecord run_nway(const NWayParams& p, const HandshakeConfig& cfg, const LinkModel& link,
                       const ChannelModel& channel, const TimingModel& timing,
                       SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  if (p.n < 2) throw std::invalid_argument("nway: n must be at least 2");
  Ctx c = make_ctx(cfg, link, channel, timing, timeline, rng);
  OutcomeRecord rec;
  rec.nodes.resize(2);
  rec.tx_power = c.tx;
  NodeStats& s = rec.nodes[0];
  NodeStats& r = rec.nodes[1];

  const auto first_tx = acquire_channel(c, start, s);
  if (!first_tx) return no_channel_record(2, c.tx);
  const TimePoint origin = trial_origin(c, *first_tx);
  const Duration gap = timing.packet_response_gap();

  TimePoint at = *first_tx;
  TimePoint last_event = at;
  int completed = 0;
  for (int i = 1; i <= p.n; ++i) {
    const Duration air =
        i == 1 ? timing.data_packet_airtime(cfg.payload_bytes) : timing.ack_airtime;
    NodeStats& sender = (i % 2 == 1) ? s : r;
    NodeStats& listener = (i % 2 == 1) ? r : s;
    const int sender_node = (i % 2 == 1) ? 0 : 1;

    bool sent = true;
    if (i > 1) sent = cca_clear(c, at, sender);
    bool got = false;
    if (sent) {
      got = deliver_unicast(c, at, air, sender_node);
      sender.tx += air;
    }
    listener.rx += air;  // the listener holds its window open either way
    last_event = at + air;

    if (!got) {
      if (sent && i < p.n) {
        // The node that just transmitted now waits in vain for a reply.
        sender.rx += timing.ack_airtime;
        last_event = at + air + gap + timing.ack_airtime;
      }
      break;
    }
    completed = i;
    at = at + air + gap;
  }

  const int s_needs = (p.n % 2 == 0) ? p.n : p.n - 1;  // last message addressed to S
  const int r_needs = (p.n % 2 == 1) ? p.n : p.n - 1;  // last message addressed to R
  s.verdict = completed >= s_needs;
  r.verdict = completed >= r_needs;
  rec.duration = elapsed(origin, last_event);
  finish(rec);
  return rec;
}

OutcomeRecord run_ack_train(const AckTrainParams& p, const HandshakeConfig& cfg,
                            const LinkModel& link, const ChannelModel& channel,
                            const TimingModel& timing, SignalTimeline& timeline,
                            RngStream& rng, TimePoint start) {
  if (p.train_len < 1) throw std::invalid_argument("ack-train: train length must be >= 1");
  Ctx c = make_ctx(cfg, link, channel, timing, timeline, rng);
  OutcomeRecord rec;
  rec.nodes.resize(2);
  rec.tx_power = c.tx;
  NodeStats& s = rec.nodes[0];
  NodeStats& r = rec.nodes[1];

  const auto first_tx = acquire_channel(c, start, s);
  if (!first_tx) return no_channel_record(2, c.tx);
  const TimePoint origin = trial_origin(c, *first_tx);

  const Duration v_air = timing.data_packet_airtime(cfg.payload_bytes);
  const bool v_got = deliver_unicast(c, *first_tx, v_air, 0);
  s.tx += v_air;
  r.rx += v_air;

  // The train is preloaded once: copies go back to back with no per-copy
  // processing, so a single carrier check gates the whole burst.
  const TimePoint train_start = *first_tx + v_air + timing.packet_response_gap();
  bool any_ack = false;
  if (v_got && cca_clear(c, train_start, r)) {
    for (int j = 0; j < p.train_len; ++j) {
      const TimePoint at = train_start + timing.ack_airtime * j;
      if (deliver_unicast(c, at, timing.ack_airtime, 1)) any_ack = true;
      r.tx += timing.ack_airtime;
    }
  }
  s.rx += timing.ack_airtime * p.train_len;  // S holds the full train window open

  s.verdict = any_ack;
  r.verdict = v_got;
  rec.duration = elapsed(origin, train_start + timing.ack_airtime * p.train_len);
  finish(rec);
  return rec;
}

OutcomeRecord run_jam2(const Jam2Params& p, const HandshakeConfig& cfg, const LinkModel& link,
                       const ChannelModel& channel, const TimingModel& timing,
                       SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  if (p.t_jam.us <= 0) throw std::invalid_argument("jam2: t_jam must be positive");
  Ctx c = make_ctx(cfg, link, channel, timing, timeline, rng);
  OutcomeRecord rec;
  rec.nodes.resize(2);
  rec.tx_power = c.tx;
  NodeStats& s = rec.nodes[0];
  NodeStats& r = rec.nodes[1];

  const auto first_tx = acquire_channel(c, start, s);
  if (!first_tx) return no_channel_record(2, c.tx);
  const TimePoint origin = trial_origin(c, *first_tx);

  const Duration v_air = timing.data_packet_airtime(cfg.payload_bytes);
  const bool v_got = deliver_unicast(c, *first_tx, v_air, 0);
  s.tx += v_air;
  r.rx += v_air;

  // The data packet doubles as the synchronization signal: both sides place
  // the jam window one turnaround after it ends. No carrier check before
  // jamming, and the sampling window equals the jam length.
  const TimePoint window_start = *first_tx + v_air + timing.turnaround;
  if (v_got) {
    c.tl.add_emission({window_start, window_start + p.t_jam, c.rx, EmissionKind::Jam, 1});
    r.tx += p.t_jam;
  }
  const RssiSampleRun run = sample_window(c.tl, window_start, p.t_jam, timing, rng);
  s.rx += p.t_jam;
  const bool detected = detect_jam_floor(run, cfg.r_noise);

  s.verdict = detected;
  r.verdict = v_got;
  rec.false_positive = detected && !v_got;
  rec.duration = elapsed(origin, window_start + p.t_jam);
  finish(rec);
  return rec;
}

OutcomeRecord run_ack3(const Ack3Params&, const HandshakeConfig& cfg, const LinkModel& link,
                       const ChannelModel& channel, const TimingModel& timing,
                       SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  return run_nway(NWayParams{3}, cfg, link, channel, timing, timeline, rng, start);
}

OutcomeRecord run_jam3(const Jam3Params& p, const HandshakeConfig& cfg, const LinkModel& link,
                       const ChannelModel& channel, const TimingModel& timing,
                       SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  if (p.t_jam.us <= 0) throw std::invalid_argument("jam3: t_jam must be positive");
  if (p.delta_r_db < 0) throw std::invalid_argument("jam3: delta_r must be non-negative");
  Ctx c = make_ctx(cfg, link, channel, timing, timeline, rng);
  OutcomeRecord rec;
  rec.nodes.resize(2);
  rec.tx_power = c.tx;
  NodeStats& s = rec.nodes[0];
  NodeStats& r = rec.nodes[1];

  const auto first_tx = acquire_channel(c, start, s);
  if (!first_tx) return no_channel_record(2, c.tx);
  const TimePoint origin = trial_origin(c, *first_tx);

  const Duration v_air = timing.data_packet_airtime(cfg.payload_bytes);
  const bool v_got = deliver_unicast(c, *first_tx, v_air, 0);
  s.tx += v_air;
  r.rx += v_air;

  // R latches the strength the data packet arrived with; the jam detector
  // later compares samples against it.
  PowerDbm r_s{0.0};
  if (v_got) {
    const PowerDbm noise = c.tl.noise_sample(rng);
    const PowerDbm sig = c.tl.jittered(c.rx, rng);
    r_s = sig.dbm > noise.dbm ? sig : noise;
  }

  const TimePoint ack_at = *first_tx + v_air + timing.packet_response_gap();
  const TimePoint ack_end = ack_at + timing.ack_airtime;
  bool ack_sent = false;
  bool ack_got = false;
  if (v_got && cca_clear(c, ack_at, r)) {
    ack_sent = true;
    ack_got = deliver_unicast(c, ack_at, timing.ack_airtime, 1);
    r.tx += timing.ack_airtime;
  }
  s.rx += timing.ack_airtime;  // S holds the ACK window open either way

  const TimePoint jam_start = ack_end + timing.turnaround;
  if (ack_got) {
    c.tl.add_emission({jam_start, jam_start + p.t_jam, c.rx, EmissionKind::Jam, 0});
    s.tx += p.t_jam;
  }

  bool r_detected = false;
  TimePoint last_event = ack_end;
  if (ack_sent) {
    // R expects the confirmation jam right after its own ACK and samples it.
    const RssiSampleRun run = sample_window(c.tl, jam_start, p.t_jam, timing, rng);
    r.rx += p.t_jam;
    r_detected = detect_jam_ref(run, r_s, p.delta_r_db, cfg.r_noise);
    rec.false_positive = r_detected && !ack_got;
    last_event = jam_start + p.t_jam;
  }

  s.verdict = ack_got;
  r.verdict = r_detected;
  rec.duration = elapsed(origin, last_event);
  finish(rec);
  return rec;
}

OutcomeRecord run_jamb(const JamBParams& p, const HandshakeConfig& cfg, const LinkModel& link,
                       const ChannelModel& channel, const TimingModel& timing,
                       SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  if (p.t_jam.us <= 0) throw std::invalid_argument("jamb: t_jam must be positive");
  if (p.t_slot.us <= p.t_settle.us) {
    throw std::invalid_argument("jamb: slot must be longer than the settle guard");
  }
  const BitVectorSchedule sched = build_bitvector_schedule(p.receivers, p.slots);
  Ctx c = make_ctx(cfg, link, channel, timing, timeline, rng);
  OutcomeRecord rec;
  rec.nodes.resize(static_cast<std::size_t>(p.receivers) + 1);
  rec.tx_power = c.tx;
  NodeStats& s = rec.nodes[0];

  const auto first_tx = acquire_channel(c, start, s);
  if (!first_tx) return no_channel_record(p.receivers + 1, c.tx);
  const TimePoint origin = trial_origin(c, *first_tx);

  const Duration v_air = timing.data_packet_airtime(cfg.payload_bytes);
  const std::vector<char> got = deliver_broadcast(c, *first_tx, v_air, 0, p.receivers);
  s.tx += v_air;
  for (int i = 0; i < p.receivers; ++i) rec.nodes[static_cast<std::size_t>(i) + 1].rx += v_air;

  // Responders that heard the broadcast jam their scheduled slots; like the
  // two-party jam, slot timing keys off the data packet plus one turnaround.
  const TimePoint frame_start = *first_tx + v_air + timing.turnaround;
  for (int i = 0; i < p.receivers; ++i) {
    if (!got[static_cast<std::size_t>(i)]) continue;
    const std::uint32_t mask = sched.masks[static_cast<std::size_t>(i)];
    for (int slot = 0; slot < p.slots; ++slot) {
      if (!(mask & (1u << slot))) continue;
      const TimePoint at = frame_start + p.t_slot * slot;
      c.tl.add_emission({at, at + p.t_slot, c.rx, EmissionKind::Jam, i + 1});
      rec.nodes[static_cast<std::size_t>(i) + 1].tx += p.t_slot;
    }
  }

  // S walks the frame slot by slot; the guard drops readings taken while the
  // receive chain is still settling after the TX/RX flip.
  const std::int64_t guard = p.t_settle.us / timing.rssi_sample_period.us;
  bool all_slots = true;
  bool ghost_slot = false;  // a slot passed with no jam actually on the air
  for (int slot = 0; slot < p.slots; ++slot) {
    const TimePoint at = frame_start + p.t_slot * slot;
    const RssiSampleRun run = sample_window(c.tl, at, p.t_slot, timing, rng);
    s.rx += p.t_slot;
    const bool det = detect_jam_floor(drop_leading(run, guard), cfg.r_noise);
    if (det && !jam_on_air(c.tl, at, at + p.t_slot)) ghost_slot = true;
    all_slots = all_slots && det;
  }

  const TimePoint frame_end = frame_start + p.t_slot * p.slots;
  const TimePoint final_start = frame_end + timing.turnaround;
  if (all_slots) {
    c.tl.add_emission({final_start, final_start + p.t_jam, c.rx, EmissionKind::Jam, 0});
    s.tx += p.t_jam;
  }

  bool any_sampled = false;
  bool ghost_final = false;
  for (int i = 0; i < p.receivers; ++i) {
    if (!got[static_cast<std::size_t>(i)]) continue;
    NodeStats& node = rec.nodes[static_cast<std::size_t>(i) + 1];
    const RssiSampleRun run = sample_window(c.tl, final_start, p.t_jam, timing, rng);
    node.rx += p.t_jam;
    const bool det = detect_jam_floor(drop_leading(run, guard), cfg.r_noise);
    if (det && !jam_on_air(c.tl, final_start, final_start + p.t_jam)) ghost_final = true;
    node.verdict = det;
    any_sampled = true;
  }

  s.verdict = all_slots;
  rec.false_positive = (all_slots && ghost_slot) || ghost_final;
  const TimePoint last_event =
      (any_sampled || all_slots) ? final_start + p.t_jam : frame_end;
  rec.duration = elapsed(origin, last_event);
  finish(rec);
  return rec;
}

OutcomeRecord run_ackb(const AckBParams& p, const HandshakeConfig& cfg, const LinkModel& link,
                       const ChannelModel& channel, const TimingModel& timing,
                       SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  if (p.t_slot.us < timing.ack_airtime.us) {
    throw std::invalid_argument("ackb: slot must fit an ACK airtime");
  }
  // Validates the receiver/slot relation; assignment is one dedicated slot
  // per responder (its first exclusive slot in the stride layout).
  (void)build_bitvector_schedule(p.receivers, p.slots);
  Ctx c = make_ctx(cfg, link, channel, timing, timeline, rng);
  OutcomeRecord rec;
  rec.nodes.resize(static_cast<std::size_t>(p.receivers) + 1);
  rec.tx_power = c.tx;
  NodeStats& s = rec.nodes[0];

  const auto first_tx = acquire_channel(c, start, s);
  if (!first_tx) return no_channel_record(p.receivers + 1, c.tx);
  const TimePoint origin = trial_origin(c, *first_tx);

  const Duration v_air = timing.data_packet_airtime(cfg.payload_bytes);
  const std::vector<char> got = deliver_broadcast(c, *first_tx, v_air, 0, p.receivers);
  s.tx += v_air;
  for (int i = 0; i < p.receivers; ++i) rec.nodes[static_cast<std::size_t>(i) + 1].rx += v_air;

  // ACKs are packets, so the frame starts a full response gap after the data
  // packet and each transmission gets the usual carrier check.
  const TimePoint frame_start = *first_tx + v_air + timing.packet_response_gap();
  bool all_acks = true;
  for (int i = 0; i < p.receivers; ++i) {
    NodeStats& node = rec.nodes[static_cast<std::size_t>(i) + 1];
    const TimePoint at = frame_start + p.t_slot * i;
    bool ack_got = false;
    if (got[static_cast<std::size_t>(i)] && cca_clear(c, at, node)) {
      ack_got = deliver_unicast(c, at, timing.ack_airtime, i + 1);
      node.tx += timing.ack_airtime;
    }
    all_acks = all_acks && ack_got;
  }
  const TimePoint frame_end = frame_start + p.t_slot * p.slots;
  s.rx += p.t_slot * p.slots;  // S listens across the whole frame

  // Final confirmation packet; every responder that heard the broadcast holds
  // a window open for it.
  const TimePoint final_at = frame_end + timing.packet_response_gap();
  const Duration final_air = timing.data_packet_airtime(cfg.payload_bytes);
  bool any_waiting = false;
  std::vector<char> final_got(static_cast<std::size_t>(p.receivers), 0);
  if (all_acks) {
    for (int i = 0; i < p.receivers; ++i) {
      if (!got[static_cast<std::size_t>(i)]) continue;
      final_got[static_cast<std::size_t>(i)] =
          packet_received(c.tl, final_at, final_air, c.rx, c.channel.capture_margin_db,
                          c.base_loss, c.rng)
              ? 1
              : 0;
    }
    c.tl.add_emission({final_at, final_at + final_air, c.rx, EmissionKind::Packet, 0});
    s.tx += final_air;
  }
  for (int i = 0; i < p.receivers; ++i) {
    if (!got[static_cast<std::size_t>(i)]) continue;
    NodeStats& node = rec.nodes[static_cast<std::size_t>(i) + 1];
    node.rx += final_air;
    node.verdict = final_got[static_cast<std::size_t>(i)] != 0;
    any_waiting = true;
  }

  s.verdict = all_acks;
  rec.duration = elapsed(origin, any_waiting ? final_at + final_air : frame_end);
  finish(rec);
  return rec;
}

OutcomeRecord run_handshake(const HandshakeConfig& cfg, const LinkModel& link,
                            const ChannelModel& channel, const TimingModel& timing,
                            SignalTimeline& timeline, RngStream& rng, TimePoint start) {
  return std::visit(
      [&](const auto& pp) -> OutcomeRecord {
        using P = std::decay_t<decltype(pp)>;
        if constexpr (std::is_same_v<P, NWayParams>) {
          return run_nway(pp, cfg, link, channel, timing, timeline, rng, start);
        } else if constexpr (std::is_same_v<P, AckTrainParams>) {
          return run_ack_train(pp, cfg, link, channel, timing, timeline, rng, start);
        } else if constexpr (std::is_same_v<P, Jam2Params>) {
          return run_jam2(pp, cfg, link, channel, timing, timeline, rng, start);
        } else if constexpr (std::is_same_v<P, Ack3Params>) {
          return run_ack3(pp, cfg, link, channel, timing, timeline, rng, start);
        } else if constexpr (std::is_same_v<P, Jam3Params>) {
          return run_jam3(pp, cfg, link, channel, timing, timeline, rng, start);
        } else if constexpr (std::is_same_v<P, JamBParams>) {
          return run_jamb(pp, cfg, link, channel, timing, timeline, rng, start);
        } else {
          return run_ackb(pp, cfg, link, channel, timing, timeline, rng, start);
        }
      },
      cfg.protocol);
}

}  // namespace agreesim
