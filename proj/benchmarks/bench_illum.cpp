#include <benchmark/benchmark.h>

#include "spectracal/illum/halogen.hpp"

using namespace spectracal;

namespace {

void BM_FitHalogen(benchmark::State& state) {
    const auto grid = state.range(0) == 0 ? WavelengthGrid::desk_scale() : WavelengthGrid::full_scale();
    const auto target = illum::eval_halogen({1.2, 0.3, 6.0, 1.5}, grid);
    for (auto _ : state) benchmark::DoNotOptimize(illum::fit_halogen(target));
}
BENCHMARK(BM_FitHalogen)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
