#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agreesim/analytics.hpp"
#include "agreesim/harness.hpp"

namespace {

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string surface_csv(int grid_steps) {
  std::string out = "p,n,pa,na,da\n";
  char buf[128];
  for (int i = 0; i <= grid_steps; ++i) {
    const double p = static_cast<double>(i) / grid_steps;
    for (int n = 2; n <= 8; ++n) {
      const agreesim::OutcomeProbs probs = agreesim::handshake_outcome_probs(p, n);
      std::snprintf(buf, sizeof buf, "%.4f,%d,%.9f,%.9f,%.9f\n", p, n, probs.pa, probs.na,
                    probs.da);
      out += buf;
    }
  }
  return out;
}

std::string packet_success_csv() {
  std::string out = "model,scale_us,t_pkt_us,p_success\n";
  char buf[128];
  const std::int64_t pkts[] = {704, 782, 4256};
  const std::int64_t scales[] = {2000, 5000, 10000, 20000};
  for (const std::int64_t scale : scales) {
    for (const std::int64_t pkt : pkts) {
      std::snprintf(buf, sizeof buf, "periodic,%lld,%lld,%.9f\n",
                    static_cast<long long>(scale), static_cast<long long>(pkt),
                    agreesim::packet_success_periodic(agreesim::Duration{scale},
                                                      agreesim::Duration{pkt}));
      out += buf;
      std::snprintf(buf, sizeof buf, "exponential,%lld,%lld,%.9f\n",
                    static_cast<long long>(scale), static_cast<long long>(pkt),
                    agreesim::packet_success_exponential(agreesim::Duration{scale},
                                                         agreesim::Duration{pkt}));
      out += buf;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless agreement protocol simulator"};
  app.require_subcommand(1);

  std::string out_path;
  std::uint64_t seed = 1;
  std::int64_t trials = 10000;
  std::vector<std::string> sources;
  std::vector<std::string> overrides;
  bool serial = false;

  auto add_common = [&](CLI::App* sub, bool with_source_list) {
    sub->add_option("--out", out_path, "Write CSV to this file instead of stdout");
    sub->add_option("--seed", seed, "Base RNG seed");
    sub->add_option("--trials", trials, "Trials per configuration");
    if (with_source_list) {
      sub->add_option("--source", sources, "Interference preset(s)");
    }
    sub->add_flag("--serial", serial, "Force the serial reference path");
  };

  CLI::App* analytic = app.add_subcommand(
      "analytic", "Closed-form outcome surfaces over p in [0,1], n in [2,8]");
  int grid_steps = 100;
  bool packet_success = false;
  analytic->add_option("--out", out_path, "Write CSV to this file instead of stdout");
  analytic->add_option("--steps", grid_steps, "Grid resolution for p")
      ->check(CLI::Range(1, 100000));
  analytic->add_flag("--packet-success", packet_success,
                     "Emit the packet-success formulas table instead of the surfaces");

  CLI::App* run = app.add_subcommand("run", "Run a scenario file");
  std::string scenario_path;
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  add_common(run, false);
  std::string source_override;
  run->add_option("--source", source_override, "Interference preset override");
  run->add_option("--override", overrides, "Scenario setting override, key=value");

  CLI::App* sweep = app.add_subcommand(
      "sweep-nway", "n-message handshake outcomes per (n, source), CCA on and off");
  add_common(sweep, true);

  CLI::App* frontier =
      app.add_subcommand("frontier", "Disagreement vs time/energy: jam2 grid vs ack-train");
  add_common(frontier, false);
  std::string frontier_source = "oven";
  frontier->add_option("--source", frontier_source, "Interference preset");
  std::int64_t tjam_lo = 500, tjam_hi = 10000, tjam_step = 100;
  int max_train = 8;
  frontier->add_option("--tjam-lo", tjam_lo, "Smallest jam length, us");
  frontier->add_option("--tjam-hi", tjam_hi, "Largest jam length, us");
  frontier->add_option("--tjam-step", tjam_step, "Jam grid step, us");
  frontier->add_option("--max-train", max_train, "Largest ACK train length");

  CLI::App* jamb = app.add_subcommand("jamb-compare",
                                      "Broadcast agreement: jamb vs ackb per source");
  add_common(jamb, true);
  int receivers = 6;
  jamb->add_option("--receivers", receivers, "Responder count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analytic->parsed()) {
      write_output(packet_success ? packet_success_csv() : surface_csv(grid_steps), out_path);
      return 0;
    }

    if (run->parsed()) {
      agreesim::Scenario s = agreesim::load_scenario(scenario_path);
      if (run->count("--seed") > 0) s.seed = seed;
      if (run->count("--trials") > 0) s.trials = trials;
      if (!source_override.empty()) s.source = source_override;
      for (const std::string& kv : overrides) agreesim::apply_override(s, kv);
      if (run->count("--out") > 0) s.out_path = out_path;
      const agreesim::AggregateResult result = agreesim::run_scenario(s, !serial);
      if (s.out_path.empty()) {
        std::fputs(agreesim::to_csv(result).c_str(), stdout);
      } else {
        agreesim::emit_csv(result, s.out_path);
      }
      return 0;
    }

    if (sweep->parsed()) {
      if (sources.empty()) sources = agreesim::source_preset_names();
      const std::vector<int> n_values = {2, 3, 4, 5, 6, 7, 8};
      const agreesim::AggregateResult result =
          agreesim::sweep_nway(n_values, sources, seed, trials, !serial);
      write_output(agreesim::to_csv(result), out_path);
      return 0;
    }

    if (frontier->parsed()) {
      const agreesim::AggregateResult result = agreesim::energy_time_frontier(
          frontier_source, seed, trials, agreesim::Duration{tjam_lo},
          agreesim::Duration{tjam_hi}, agreesim::Duration{tjam_step}, max_train, !serial);
      write_output(agreesim::frontier_csv(result), out_path);
      return 0;
    }

    if (jamb->parsed()) {
      if (sources.empty()) sources = agreesim::source_preset_names();
      const agreesim::AggregateResult result =
          agreesim::jamb_compare(sources, receivers, seed, trials, !serial);
      write_output(agreesim::to_csv(result), out_path);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
