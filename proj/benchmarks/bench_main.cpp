#include <benchmark/benchmark.h>

#include "bioauth/attacks.hpp"
#include "bioauth/biohash.hpp"
#include "bioauth/dolev_yao/search.hpp"
#include "bioauth/dolev_yao/spec.hpp"
#include "bioauth/hash.hpp"
#include "bioauth/registry.hpp"

namespace {

using namespace bioauth;

void BM_Hash(benchmark::State& state) {
  const SystemParams params = SystemParams::for_width(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  const BitString input = rng.bits(2 * params.l);
  for (auto _ : state) benchmark::DoNotOptimize(hash(input, params));
}
BENCHMARK(BM_Hash)->Arg(128)->Arg(256)->Arg(1024);

void BM_Biohash(benchmark::State& state) {
  SystemParams params;
  params.d = static_cast<std::size_t>(state.range(0));
  const Projector projector(deployment_key(params), params.d, params.l);
  const auto t = enroll_template(3, params, Rng(1));
  for (auto _ : state) benchmark::DoNotOptimize(biohash(t, projector));
}
BENCHMARK(BM_Biohash)->Arg(128)->Arg(256)->Arg(1024);

// One full honest session; the scan grows with the enrolled population.
void BM_ProposedSession(benchmark::State& state) {
  SystemParams params;
  params.n = static_cast<std::size_t>(state.range(0));
  auto proto = make_protocol("proposed", params);
  Rng rng(2);
  for (std::size_t i = 0; i < params.n; ++i) proto->enroll(rng.next_u64(), rng);
  const std::size_t last = params.n - 1;
  const auto live = genuine_capture(*proto, last, params.noise_sigma, rng);
  for (auto _ : state) {
    Channel channel;
    benchmark::DoNotOptimize(run(*proto, last, &live, channel, rng));
  }
}
BENCHMARK(BM_ProposedSession)->Arg(1)->Arg(16)->Arg(256);

void BM_TraceGame(benchmark::State& state) {
  const SystemParams params;
  const Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(trace_game("proposed", 1000, params, rng));
}
BENCHMARK(BM_TraceGame)->Unit(benchmark::kMillisecond);

void BM_SymbolicSearch(benchmark::State& state) {
  const auto& spec = dy::builtin_spec("proposed");
  const auto scenario = dy::scenario_for_sessions(spec, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dy::search_attacks(spec, scenario));
}
BENCHMARK(BM_SymbolicSearch)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
