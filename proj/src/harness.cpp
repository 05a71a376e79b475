#include "agreesim/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "agreesim/channel.hpp"

namespace agreesim {
namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  if (line > 0) {
    throw std::runtime_error("scenario line " + std::to_string(line) + ": " + msg);
  }
  throw std::runtime_error("scenario override: " + msg);
}

std::string trim(std::string_view sv) {
  const char* ws = " \t\r\n";
  const auto b = sv.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = sv.find_last_not_of(ws);
  return std::string(sv.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::int64_t parse_i64(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos, 10);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (...) {
    fail(line, "setting '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
  try {
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos, 10);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (...) {
    fail(line, "setting '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (...) {
    fail(line, "setting '" + key + "': expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  fail(line, "setting '" + key + "': expected on/off, got '" + v + "'");
}

TxPowerPolicy parse_tx_power(const std::string& v, int line) {
  const std::vector<std::string> tok = split_ws(v);
  if (tok.size() == 2 && tok[0] == "fixed") {
    return FixedTxPower{PowerDbm{parse_double(tok[1], line, "tx_power")}};
  }
  if (tok.size() == 3 && tok[0] == "sweep") {
    SweptTxPower p;
    p.lo_dbm = static_cast<int>(parse_i64(tok[1], line, "tx_power"));
    p.hi_dbm = static_cast<int>(parse_i64(tok[2], line, "tx_power"));
    return p;
  }
  fail(line, "setting 'tx_power': expected 'fixed DBM' or 'sweep LO HI', got '" + v + "'");
}

std::vector<std::pair<double, double>> parse_base_loss(const std::string& v, int line) {
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      fail(line, "setting 'base_loss': expected 'tx:prob' entries, got '" + item + "'");
    }
    pts.emplace_back(parse_double(trim(item.substr(0, colon)), line, "base_loss"),
                     parse_double(trim(item.substr(colon + 1)), line, "base_loss"));
  }
  if (pts.empty()) fail(line, "setting 'base_loss': empty list");
  return pts;
}

Duration parse_duration(const std::string& v, int line, const std::string& key) {
  return Duration{parse_i64(v, line, key)};
}

// Scenario-level settings (everything that is not per-arm). Returns false for
// keys it does not know.
bool apply_scenario_key(Scenario& s, const std::string& key, const std::string& value,
                        int line) {
  if (key == "name") {
    s.name = value;
  } else if (key == "seed") {
    s.seed = parse_u64(value, line, key);
  } else if (key == "trials") {
    s.trials = parse_i64(value, line, key);
  } else if (key == "source") {
    try {
      preset_source_by_name(value);
    } catch (const std::exception& e) {
      fail(line, e.what());
    }
    s.source = value;
  } else if (key == "source_rx") {
    s.source_rx = PowerDbm{parse_double(value, line, key)};
  } else if (key == "horizon") {
    s.horizon = parse_duration(value, line, key);
  } else if (key == "start_offset_max") {
    s.start_offset_max = parse_duration(value, line, key);
  } else if (key == "out") {
    s.out_path = value;
  } else if (key == "path_loss") {
    s.link.path_loss_db = parse_double(value, line, key);
  } else if (key == "base_loss") {
    s.link.base_loss_points = parse_base_loss(value, line);
  } else if (key == "noise") {
    const std::vector<std::string> tok = split_ws(value);
    if (tok.size() != 2) fail(line, "setting 'noise': expected 'LOW HIGH' in dBm");
    s.channel.noise_low = PowerDbm{parse_double(tok[0], line, key)};
    s.channel.noise_high = PowerDbm{parse_double(tok[1], line, key)};
  } else if (key == "jitter") {
    s.channel.jitter_db = parse_double(value, line, key);
  } else if (key == "capture_margin") {
    s.channel.capture_margin_db = parse_double(value, line, key);
  } else if (key == "cca_threshold") {
    s.channel.cca_threshold = PowerDbm{parse_double(value, line, key)};
  } else if (key == "timing.rssi_sample_period") {
    s.timing.rssi_sample_period = parse_duration(value, line, key);
  } else if (key == "timing.rssi_readout_latency") {
    s.timing.rssi_readout_latency = parse_duration(value, line, key);
  } else if (key == "timing.rssi_settle_time") {
    s.timing.rssi_settle_time = parse_duration(value, line, key);
  } else if (key == "timing.ack_airtime") {
    s.timing.ack_airtime = parse_duration(value, line, key);
  } else if (key == "timing.ack_processing") {
    s.timing.ack_processing_plus_send = parse_duration(value, line, key);
  } else if (key == "timing.packet_rx_processing") {
    s.timing.packet_rx_processing = parse_duration(value, line, key);
  } else if (key == "timing.cca") {
    s.timing.cca_check_duration = parse_duration(value, line, key);
  } else if (key == "timing.turnaround") {
    s.timing.turnaround = parse_duration(value, line, key);
  } else if (key == "timing.phy_overhead") {
    s.timing.phy_overhead_bytes = static_cast<int>(parse_i64(value, line, key));
  } else if (key == "timing.mac_overhead") {
    s.timing.mac_overhead_bytes = static_cast<int>(parse_i64(value, line, key));
  } else if (key == "timing.bits_per_second") {
    s.timing.bits_per_second = parse_i64(value, line, key);
  } else {
    return false;
  }
  return true;
}

// Per-arm settings shared by every protocol. Outside a section these set the
// defaults each later [protocol] section starts from.
bool apply_config_key(HandshakeConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  if (key == "payload") {
    cfg.payload_bytes = static_cast<int>(parse_i64(value, line, key));
  } else if (key == "r_noise") {
    cfg.r_noise = PowerDbm{parse_double(value, line, key)};
  } else if (key == "cca") {
    cfg.cca_before_first = parse_bool(value, line, key);
  } else if (key == "tx_power") {
    cfg.tx_power = parse_tx_power(value, line);
  } else {
    return false;
  }
  return true;
}

bool is_protocol_key(const std::string& key) {
  static const char* const kKeys[] = {"n",         "T",     "train_len", "t_jam",
                                      "dr",        "delta_r", "receivers", "r",
                                      "slots",     "k",     "t_slot",    "t_settle"};
  for (const char* k : kKeys) {
    if (key == k) return true;
  }
  return false;
}

// Protocol knobs. In strict mode a known key on the wrong protocol is an
// error; in lenient mode (CLI overrides fan out over all arms) it is skipped.
bool apply_protocol_key(ProtocolParams& params, const std::string& key,
                        const std::string& value, int line, bool strict) {
  if (!is_protocol_key(key)) return false;
  bool applied = false;
  if (key == "n") {
    if (auto* p = std::get_if<NWayParams>(&params)) {
      p->n = static_cast<int>(parse_i64(value, line, key));
      applied = true;
    }
  } else if (key == "T" || key == "train_len") {
    if (auto* p = std::get_if<AckTrainParams>(&params)) {
      p->train_len = static_cast<int>(parse_i64(value, line, key));
      applied = true;
    }
  } else if (key == "t_jam") {
    if (auto* p = std::get_if<Jam2Params>(&params)) {
      p->t_jam = parse_duration(value, line, key);
      applied = true;
    } else if (auto* p3 = std::get_if<Jam3Params>(&params)) {
      p3->t_jam = parse_duration(value, line, key);
      applied = true;
    } else if (auto* pb = std::get_if<JamBParams>(&params)) {
      pb->t_jam = parse_duration(value, line, key);
      applied = true;
    }
  } else if (key == "dr" || key == "delta_r") {
    if (auto* p = std::get_if<Jam3Params>(&params)) {
      p->delta_r_db = parse_double(value, line, key);
      applied = true;
    }
  } else if (key == "receivers" || key == "r") {
    if (auto* p = std::get_if<JamBParams>(&params)) {
      p->receivers = static_cast<int>(parse_i64(value, line, key));
      applied = true;
    } else if (auto* pa = std::get_if<AckBParams>(&params)) {
      pa->receivers = static_cast<int>(parse_i64(value, line, key));
      applied = true;
    }
  } else if (key == "slots" || key == "k") {
    if (auto* p = std::get_if<JamBParams>(&params)) {
      p->slots = static_cast<int>(parse_i64(value, line, key));
      applied = true;
    } else if (auto* pa = std::get_if<AckBParams>(&params)) {
      pa->slots = static_cast<int>(parse_i64(value, line, key));
      applied = true;
    }
  } else if (key == "t_slot") {
    if (auto* p = std::get_if<JamBParams>(&params)) {
      p->t_slot = parse_duration(value, line, key);
      applied = true;
    } else if (auto* pa = std::get_if<AckBParams>(&params)) {
      pa->t_slot = parse_duration(value, line, key);
      applied = true;
    }
  } else if (key == "t_settle") {
    if (auto* p = std::get_if<JamBParams>(&params)) {
      p->t_settle = parse_duration(value, line, key);
      applied = true;
    }
  }
  if (!applied && strict) {
    fail(line, "setting '" + key + "' does not apply to protocol '" + protocol_name(params) +
                   "'");
  }
  return applied;
}

std::string strip_comment(const std::string& raw) {
  const auto hash = raw.find('#');
  return trim(hash == std::string::npos ? raw : raw.substr(0, hash));
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  HandshakeConfig defaults;
  bool seen_section = false;
  int line_no = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      const std::string prefix = "protocol";
      if (inner.rfind(prefix, 0) != 0 || inner.size() <= prefix.size()) {
        fail(line_no, "expected section header '[protocol NAME]'");
      }
      const std::string pname = trim(inner.substr(prefix.size()));
      HandshakeConfig cfg = defaults;
      try {
        cfg.protocol = protocol_by_name(pname);
      } catch (const std::exception& e) {
        fail(line_no, e.what());
      }
      s.arms.push_back(cfg);
      seen_section = true;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value' or '[protocol NAME]'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "setting '" + key + "': empty value");

    if (!seen_section) {
      if (apply_scenario_key(s, key, value, line_no)) continue;
      if (apply_config_key(defaults, key, value, line_no)) continue;
      if (is_protocol_key(key)) {
        fail(line_no, "setting '" + key + "' belongs inside a [protocol] section");
      }
      fail(line_no, "unknown setting '" + key + "'");
    } else {
      HandshakeConfig& arm = s.arms.back();
      if (apply_config_key(arm, key, value, line_no)) continue;
      if (apply_protocol_key(arm.protocol, key, value, line_no, /*strict=*/true)) continue;
      // A scenario-level key down here is a placement mistake worth naming.
      Scenario probe = s;
      bool is_scenario_key = false;
      try {
        is_scenario_key = apply_scenario_key(probe, key, value, line_no);
      } catch (...) {
        is_scenario_key = true;
      }
      if (is_scenario_key) {
        fail(line_no, "setting '" + key + "' must appear before the [protocol] sections");
      }
      fail(line_no, "unknown setting '" + key + "'");
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read scenario file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void apply_override(Scenario& s, const std::string& key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error("override '" + key_value + "' must look like key=value");
  }
  const std::string key = trim(key_value.substr(0, eq));
  const std::string value = trim(key_value.substr(eq + 1));
  if (key.empty() || value.empty()) {
    throw std::runtime_error("override '" + key_value + "' must look like key=value");
  }
  if (apply_scenario_key(s, key, value, 0)) return;
  bool any = false;
  for (HandshakeConfig& arm : s.arms) {
    if (apply_config_key(arm, key, value, 0)) {
      any = true;
      continue;
    }
    if (apply_protocol_key(arm.protocol, key, value, 0, /*strict=*/false)) any = true;
  }
  if (!any) throw std::runtime_error("override: unknown setting '" + key + "'");
}

void validate_scenario(const Scenario& s) {
  if (s.trials < 1) throw std::invalid_argument("scenario.trials must be >= 1");
  if (s.arms.empty()) {
    throw std::invalid_argument("scenario needs at least one [protocol] section");
  }
  if (s.horizon.us <= 0) throw std::invalid_argument("scenario.horizon must be positive");
  if (s.start_offset_max.us < 0 || s.start_offset_max.us >= s.horizon.us) {
    throw std::invalid_argument("scenario.start_offset_max must lie in [0, horizon)");
  }
  preset_source_by_name(s.source, s.source_rx);
  if (s.channel.noise_low.dbm >= s.channel.noise_high.dbm) {
    throw std::invalid_argument("channel.noise: low bound must sit below high bound");
  }
  if (s.channel.jitter_db < 0) throw std::invalid_argument("channel.jitter must be >= 0");
  if (s.channel.capture_margin_db < 0) {
    throw std::invalid_argument("channel.capture_margin must be >= 0");
  }
  for (const auto& [tx, prob] : s.link.base_loss_points) {
    (void)tx;
    if (prob < 0.0 || prob > 1.0) {
      throw std::invalid_argument("link.base_loss probabilities must lie in [0,1]");
    }
  }
  const TimingModel timing = make_timing_model(s.timing);
  const int max_payload =
      133 - timing.phy_overhead_bytes - timing.mac_overhead_bytes;  // 133-byte frame cap

  for (std::size_t i = 0; i < s.arms.size(); ++i) {
    const HandshakeConfig& arm = s.arms[i];
    const std::string where = "arm " + std::to_string(i) + " (" +
                              protocol_name(arm.protocol) + "): ";
    if (arm.payload_bytes < 1 || arm.payload_bytes > max_payload) {
      throw std::invalid_argument(where + "payload must lie in [1, " +
                                  std::to_string(max_payload) + "]");
    }
    double min_tx = 0.0;
    if (const auto* fixed = std::get_if<FixedTxPower>(&arm.tx_power)) {
      min_tx = fixed->value.dbm;
    } else {
      const auto& sweep = std::get<SweptTxPower>(arm.tx_power);
      if (sweep.lo_dbm > sweep.hi_dbm) {
        throw std::invalid_argument(where + "tx_power sweep: lo exceeds hi");
      }
      min_tx = static_cast<double>(sweep.lo_dbm);
    }
    if (min_tx - s.link.path_loss_db <= -94.0) {
      throw std::invalid_argument(where +
                                  "link budget: weakest tx power lands at or below the "
                                  "-94 dBm sensitivity");
    }
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, NWayParams>) {
            if (p.n < 2) throw std::invalid_argument(where + "n must be >= 2");
          } else if constexpr (std::is_same_v<P, AckTrainParams>) {
            if (p.train_len < 1) throw std::invalid_argument(where + "T must be >= 1");
          } else if constexpr (std::is_same_v<P, Jam2Params>) {
            if (p.t_jam.us <= 0) throw std::invalid_argument(where + "t_jam must be positive");
          } else if constexpr (std::is_same_v<P, Jam3Params>) {
            if (p.t_jam.us <= 0) throw std::invalid_argument(where + "t_jam must be positive");
            if (p.delta_r_db < 0) {
              throw std::invalid_argument(where + "dr must be >= 0");
            }
          } else if constexpr (std::is_same_v<P, JamBParams>) {
            build_bitvector_schedule(p.receivers, p.slots);
            if (p.t_jam.us <= 0) throw std::invalid_argument(where + "t_jam must be positive");
            if (p.t_settle.us < 0) {
              throw std::invalid_argument(where + "t_settle must be >= 0");
            }
            if (p.t_slot.us <= p.t_settle.us) {
              throw std::invalid_argument(where + "t_slot must exceed t_settle");
            }
          } else if constexpr (std::is_same_v<P, AckBParams>) {
            build_bitvector_schedule(p.receivers, p.slots);
            if (p.t_slot.us < timing.ack_airtime.us) {
              throw std::invalid_argument(where + "t_slot must fit an ACK airtime");
            }
          }
        },
        arm.protocol);
  }
}

namespace {

struct TrialOut {
  std::int8_t outcome = 0;
  std::int8_t false_positive = 0;
  std::int64_t duration_us = 0;
  std::int64_t tx_us = 0;  // summed over nodes
  std::int64_t rx_us = 0;
};

// Per-trial draw order is part of the output contract: trace, start offset,
// then handshake draws. Substreams are keyed by trial index alone so every
// arm sees the same interference and power draws (common random numbers).
TrialOut one_trial(const HandshakeConfig& cfg, const Scenario& s,
                   const InterferenceSource& source, const TimingModel& timing,
                   std::int64_t trial) {
  RngStream rng = RngStream(s.seed, "trials").substream(static_cast<std::uint64_t>(trial));
  const ActivityTrace trace = generate_trace(source, s.horizon, rng);
  SignalTimeline tl(trace, s.channel.noise_low, s.channel.noise_high, s.channel.jitter_db);
  TimePoint start{0};
  if (s.start_offset_max.us > 0) {
    start.us = static_cast<std::int64_t>(
        rng.next_below(static_cast<std::uint64_t>(s.start_offset_max.us)));
  }
  const OutcomeRecord rec = run_handshake(cfg, s.link, s.channel, timing, tl, rng, start);

  TrialOut o;
  o.outcome = static_cast<std::int8_t>(rec.outcome);
  o.false_positive = rec.false_positive ? 1 : 0;
  o.duration_us = rec.duration.us;
  for (const NodeStats& n : rec.nodes) {
    o.tx_us += n.tx.us;
    o.rx_us += n.rx.us;
  }
  return o;
}

void run_trials(const HandshakeConfig& cfg, const Scenario& s, const InterferenceSource& source,
                const TimingModel& timing, bool parallel, std::vector<TrialOut>& out) {
  const std::int64_t n = s.trials;
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      out[static_cast<std::size_t>(t)] = one_trial(cfg, s, source, timing, t);
    }
    return;
  }
#else
  (void)parallel;
#endif
  for (std::int64_t t = 0; t < n; ++t) {
    out[static_cast<std::size_t>(t)] = one_trial(cfg, s, source, timing, t);
  }
}

AggregateRow fold_trials(const HandshakeConfig& cfg, const Scenario& s,
                         const std::vector<TrialOut>& outs) {
  AggregateRow row;
  row.protocol = protocol_name(cfg.protocol);
  row.params = protocol_params_string(cfg.protocol);
  if (!cfg.cca_before_first) row.params += " cca=off";
  row.source = s.source;
  row.trials = s.trials;
  row.nodes = protocol_node_count(cfg.protocol);

  std::int64_t pa = 0, na = 0, da = 0, fp = 0;
  std::int64_t dur_sum = 0, tx_sum = 0, rx_sum = 0;
  for (const TrialOut& o : outs) {
    switch (static_cast<Outcome>(o.outcome)) {
      case Outcome::PositiveAgreement: ++pa; break;
      case Outcome::NegativeAgreement: ++na; break;
      case Outcome::Disagreement: ++da; break;
    }
    fp += o.false_positive;
    dur_sum += o.duration_us;
    tx_sum += o.tx_us;
    rx_sum += o.rx_us;
  }
  const double n = static_cast<double>(s.trials);
  row.pa = static_cast<double>(pa) / n;
  row.na = static_cast<double>(na) / n;
  row.da = static_cast<double>(da) / n;
  row.false_pos = static_cast<double>(fp) / n;
  row.mean_duration_us = static_cast<double>(dur_sum) / n;
  row.tx_us = static_cast<double>(tx_sum) / (n * row.nodes);
  row.rx_us = static_cast<double>(rx_sum) / (n * row.nodes);

  std::vector<std::int64_t> durs;
  durs.reserve(outs.size());
  for (const TrialOut& o : outs) durs.push_back(o.duration_us);
  const auto rank = [&](std::int64_t k) {
    auto it = durs.begin() + k;
    std::nth_element(durs.begin(), it, durs.end());
    return static_cast<double>(*it);
  };
  row.p50_duration_us = rank((s.trials - 1) / 2);
  row.p95_duration_us = rank(((s.trials - 1) * 95) / 100);
  return row;
}

}  // namespace

AggregateResult run_scenario(const Scenario& s, bool parallel) {
  validate_scenario(s);
  const TimingModel timing = make_timing_model(s.timing);
  const InterferenceSource source = preset_source_by_name(s.source, s.source_rx);

  AggregateResult result;
  std::vector<TrialOut> outs(static_cast<std::size_t>(s.trials));
  for (const HandshakeConfig& arm : s.arms) {
    run_trials(arm, s, source, timing, parallel, outs);
    result.rows.push_back(fold_trials(arm, s, outs));
  }
  return result;
}

std::string to_csv(const AggregateResult& result) {
  std::string out =
      "protocol,params,source,trials,pa,na,da,false_pos,mean_duration_us,tx_us,rx_us\n";
  char buf[192];
  for (const AggregateRow& r : result.rows) {
    std::snprintf(buf, sizeof buf, ",%lld,%.6f,%.6f,%.6f,%.6f,%.3f,%.3f,%.3f",
                  static_cast<long long>(r.trials), r.pa, r.na, r.da, r.false_pos,
                  r.mean_duration_us, r.tx_us, r.rx_us);
    out += r.protocol;
    out += ',';
    out += r.params;
    out += ',';
    out += r.source;
    out += buf;
    out += '\n';
  }
  return out;
}

void emit_csv(const AggregateResult& result, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  const std::string text = to_csv(result);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

AggregateResult sweep_nway(const std::vector<int>& n_values,
                           const std::vector<std::string>& sources, std::uint64_t seed,
                           std::int64_t trials, bool parallel) {
  if (n_values.empty()) throw std::invalid_argument("sweep_nway: empty n list");
  for (int n : n_values) {
    if (n < 2 || n > 8) throw std::invalid_argument("sweep_nway: n must lie in [2, 8]");
  }
  if (sources.empty()) throw std::invalid_argument("sweep_nway: empty source list");

  AggregateResult out;
  for (const std::string& src : sources) {
    Scenario s;
    s.name = "sweep-nway";
    s.seed = seed;
    s.trials = trials;
    s.source = src;
    for (const bool cca : {true, false}) {
      for (int n : n_values) {
        HandshakeConfig cfg;
        cfg.protocol = NWayParams{n};
        cfg.cca_before_first = cca;
        s.arms.push_back(cfg);
      }
    }
    AggregateResult part = run_scenario(s, parallel);
    out.rows.insert(out.rows.end(), part.rows.begin(), part.rows.end());
  }
  return out;
}

AggregateResult energy_time_frontier(const std::string& source, std::uint64_t seed,
                                     std::int64_t trials, Duration t_jam_lo, Duration t_jam_hi,
                                     Duration t_jam_step, int max_train, bool parallel) {
  if (t_jam_lo.us <= 0 || t_jam_step.us <= 0 || t_jam_hi.us < t_jam_lo.us) {
    throw std::invalid_argument("frontier: need 0 < t_jam_lo <= t_jam_hi and a positive step");
  }
  if (max_train < 1) throw std::invalid_argument("frontier: max_train must be >= 1");

  Scenario s;
  s.name = "frontier";
  s.seed = seed;
  s.trials = trials;
  s.source = source;
  for (std::int64_t t = t_jam_lo.us; t <= t_jam_hi.us; t += t_jam_step.us) {
    HandshakeConfig cfg;
    cfg.protocol = Jam2Params{Duration{t}};
    s.arms.push_back(cfg);
  }
  for (int T = 1; T <= max_train; ++T) {
    HandshakeConfig cfg;
    cfg.protocol = AckTrainParams{T};
    s.arms.push_back(cfg);
  }
  return run_scenario(s, parallel);
}

std::string frontier_csv(const AggregateResult& result) {
  std::string out = "protocol,params,source,trials,mean_duration_us,tx_total_us,da\n";
  char buf[160];
  for (const AggregateRow& r : result.rows) {
    std::snprintf(buf, sizeof buf, ",%lld,%.3f,%.3f,%.6f", static_cast<long long>(r.trials),
                  r.mean_duration_us, r.tx_us * r.nodes, r.da);
    out += r.protocol;
    out += ',';
    out += r.params;
    out += ',';
    out += r.source;
    out += buf;
    out += '\n';
  }
  return out;
}

AggregateResult jamb_compare(const std::vector<std::string>& sources, int receivers,
                             std::uint64_t seed, std::int64_t trials, bool parallel) {
  if (sources.empty()) throw std::invalid_argument("jamb_compare: empty source list");
  AggregateResult out;
  for (const std::string& src : sources) {
    Scenario s;
    s.name = "jamb-compare";
    s.seed = seed;
    s.trials = trials;
    s.source = src;
    HandshakeConfig jamb;
    JamBParams jb;
    jb.receivers = receivers;
    jamb.protocol = jb;
    s.arms.push_back(jamb);
    HandshakeConfig ackb;
    AckBParams ab;
    ab.receivers = receivers;
    ackb.protocol = ab;
    s.arms.push_back(ackb);
    AggregateResult part = run_scenario(s, parallel);
    out.rows.insert(out.rows.end(), part.rows.begin(), part.rows.end());
  }
  return out;
}

}  // namespace agreesim
