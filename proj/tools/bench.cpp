#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "agreesim/harness.hpp"

namespace {

double run_timed(const agreesim::Scenario& s, bool parallel, agreesim::AggregateResult& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = agreesim::run_scenario(s, parallel);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t trials = 20000;
  if (argc > 1) trials = std::atoll(argv[1]);
  if (trials < 1) {
    std::fprintf(stderr, "usage: bench [trials]\n");
    return 2;
  }

  agreesim::Scenario s;
  s.name = "bench";
  s.seed = 7;
  s.trials = trials;
  s.source = "oven";
  agreesim::HandshakeConfig jam2;
  jam2.protocol = agreesim::Jam2Params{agreesim::Duration{2000}};
  s.arms.push_back(jam2);
  agreesim::HandshakeConfig ack;
  ack.protocol = agreesim::AckTrainParams{1};
  s.arms.push_back(ack);
  agreesim::HandshakeConfig jamb;
  jamb.protocol = agreesim::JamBParams{};
  s.arms.push_back(jamb);

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not compiled in\n");
#endif
  std::printf("trials per arm: %lld, arms: %zu\n", static_cast<long long>(trials),
              s.arms.size());

  agreesim::AggregateResult serial_result;
  agreesim::AggregateResult parallel_result;
  const double t_serial = run_timed(s, false, serial_result);
  const double t_parallel = run_timed(s, true, parallel_result);

  const bool identical =
      agreesim::to_csv(serial_result) == agreesim::to_csv(parallel_result);
  std::printf("serial reference: %8.3f s\n", t_serial);
  std::printf("parallel:         %8.3f s\n", t_parallel);
  std::printf("speedup:          %8.2fx\n", t_parallel > 0 ? t_serial / t_parallel : 0.0);
  std::printf("results identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
