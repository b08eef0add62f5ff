#include <benchmark/benchmark.h>

#include <map>

#include "distconv/fe_lpm.hpp"
#include "distconv/resampling.hpp"
#include "distconv/synthgen.hpp"

using namespace distconv;

namespace {

const Panel& bench_panel(std::size_t families) {
  static std::map<std::size_t, Panel> cache;
  auto it = cache.find(families);
  if (it == cache.end()) {
    SyntheticConfig c;
    c.n_families = families;
    c.n_reference_families = families;
    c.true_betas = {.01, 0, 0, 0, -.01};
    c.effect_center = {.2, .2, .2, .2, .2};
    c.reference_distribution = {.1, .2, .4, .2, .1};
    it = cache.emplace(families, generate_panel(c).panel).first;
  }
  return it->second;
}

const Statistic kBetas = [](const Panel& p) { return fit_category_system(p, "Q1").betas; };

void BM_BootstrapParallel(benchmark::State& state) {
  const Panel& p = bench_panel(static_cast<std::size_t>(state.range(0)));
  BootstrapOptions o;
  o.reps = 64;
  o.threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(family_bootstrap(p, kBetas, o));
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_BootstrapSerial(benchmark::State& state) {
  const Panel& p = bench_panel(static_cast<std::size_t>(state.range(0)));
  BootstrapOptions o;
  o.reps = 64;
  for (auto _ : state) benchmark::DoNotOptimize(family_bootstrap_serial(p, kBetas, o));
  state.SetItemsProcessed(state.iterations() * 64);
}

}  // namespace

BENCHMARK(BM_BootstrapSerial)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)
    ->Args({200, 0})
    ->Args({1000, 0})
    ->Args({1000, 2})
    ->Args({1000, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
