#include <benchmark/benchmark.h>

#include "spectracal/nn/layers.hpp"
#include "spectracal/nn/network.hpp"

using namespace spectracal;
using namespace spectracal::nn;

namespace {

Tensor random_tensor(std::size_t c, std::size_t n, std::size_t b, Rng& rng) {
    Tensor t(c, n, n, b);
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_ConvForward(benchmark::State& state) {
    const auto ch = static_cast<std::size_t>(state.range(0));
    const ConvGeometry g{ch, ch, 3, 1};
    Rng rng(1);
    const Tensor x = random_tensor(ch, 16, 8, rng);
    std::vector<double> w(g.weight_count());
    std::vector<double> b(ch, 0.0);
    for (double& v : w) v = rng.uniform(-0.1, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(conv3d_forward(x, w, b, g, nullptr));
}
BENCHMARK(BM_ConvForward)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ConvBackward(benchmark::State& state) {
    const auto ch = static_cast<std::size_t>(state.range(0));
    const ConvGeometry g{ch, ch, 3, 1};
    Rng rng(2);
    const Tensor x = random_tensor(ch, 16, 8, rng);
    std::vector<double> w(g.weight_count());
    std::vector<double> b(ch, 0.0);
    for (double& v : w) v = rng.uniform(-0.1, 0.1);
    ConvCache cache;
    const Tensor y = conv3d_forward(x, w, b, g, &cache);
    const Tensor dy = random_tensor(ch, y.d0, y.d2, rng);
    std::vector<double> gw(w.size());
    std::vector<double> gb(b.size());
    Tensor dx;
    for (auto _ : state) {
        conv3d_backward(x, cache, dy, w, g, gw, gb, &dx);
        benchmark::DoNotOptimize(dx.data.data());
    }
}
BENCHMARK(BM_ConvBackward)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_NetworkForward(benchmark::State& state) {
    const Network net(NetConfig{});
    Rng rng(3);
    const auto params = net.init_params(rng);
    std::vector<double> v(32 * 32 * 16);
    for (double& x : v) x = rng.uniform(0.1, 1.0);
    const HsiCube raw(32, 32, WavelengthGrid::desk_scale(), v);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(params, raw));
}
BENCHMARK(BM_NetworkForward)->Unit(benchmark::kMillisecond);

void BM_NetworkGradient(benchmark::State& state) {
    const Network net(NetConfig{});
    Rng rng(4);
    const auto params = net.init_params(rng);
    std::vector<double> v(32 * 32 * 16);
    std::vector<double> t(v.size());
    for (double& x : v) x = rng.uniform(0.1, 1.0);
    for (double& x : t) x = rng.uniform(0.5, 1.5);
    const HsiCube raw(32, 32, WavelengthGrid::desk_scale(), v);
    const WhiteRefImage target(HsiCube(32, 32, WavelengthGrid::desk_scale(), t));
    auto grad = params.zeros_like();
    for (auto _ : state) benchmark::DoNotOptimize(net.accumulate_gradient(params, raw, target, grad));
}
BENCHMARK(BM_NetworkGradient)->Unit(benchmark::kMillisecond);

}  // namespace
