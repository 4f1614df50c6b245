// Serial reference vs OpenMP trial loop on E. coli adaptation trials.
#include <random>

#include <benchmark/benchmark.h>

#include "imk/exo.hpp"
#include "imk/sim.hpp"

using namespace imk;

namespace {

const Cascade& ecoli_cascade() {
  static const Cascade c = [] {
    const std::vector<std::string> names{"a1", "a2", "a3", "a4", "a5", "a6"};
    std::map<std::string, Rational> values;
    for (const auto& n : names) values[n] = 1;
    const AffineSystem s = parse_affine_system(2, names, values, {"a1 - a2*x1 + a3*x2", "a5 - a6*x2"},
                                               {"-a4*x1", "a4*x1"}, "(a1 + a5) - (a2*x1 + (a6 - a3)*x2)");
    return Cascade(s.bind_params(), constant_exosystem());
  }();
  return c;
}

std::vector<Trial> trials(int count) {
  std::mt19937_64 rng(derive_seed(0, 1));
  std::uniform_real_distribution<double> pos(0.1, 5.0), u(0.2, 3.0);
  std::vector<Trial> out;
  for (int k = 0; k < count; ++k) out.push_back({{pos(rng), pos(rng)}, {u(rng)}});
  return out;
}

void BM_Serial(benchmark::State& state) {
  const auto t = trials(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_adaptation_serial(ecoli_cascade(), t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Parallel(benchmark::State& state) {
  const auto t = trials(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_adaptation(ecoli_cascade(), t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
