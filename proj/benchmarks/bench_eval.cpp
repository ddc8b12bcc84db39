#include <benchmark/benchmark.h>

#include "spectracal/eval/metrics.hpp"
#include "spectracal/eval/unmix.hpp"
#include "spectracal/illum/scene.hpp"

using namespace spectracal;

namespace {

void BM_Unmix(benchmark::State& state) {
    illum::SceneConfig cfg;
    Rng rng(5);
    const auto scene = illum::synth_scene(cfg, rng);
    const auto basis = illum::chromophore_basis(cfg.grid);
    for (auto _ : state) benchmark::DoNotOptimize(eval::unmix(scene.cube, basis, cfg.path_length));
}
BENCHMARK(BM_Unmix)->Unit(benchmark::kMillisecond);

void BM_Nsd(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    LabelMask a(n, n);
    LabelMask b(n, n);
    // Blocky masks so boundaries stay realistic.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a.at(i, j) = ((i / 4) + (j / 4)) % 2;
            b.at(i, j) = ((i / 4) + (j / 4) + (rng.uniform() < 0.1)) % 2;
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(eval::nsd(a, b, 1, 1.0));
}
BENCHMARK(BM_Nsd)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace
