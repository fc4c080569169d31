#include <benchmark/benchmark.h>

#include <vector>

#include "prefevo/kernels.hpp"
#include "prefevo/rng.hpp"
#include "prefevo/simulate.hpp"

using namespace prefevo;

namespace {

std::vector<float> signal(std::size_t n) {
    Rng rng(1);
    std::vector<float> x(n);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return x;
}

std::vector<double> filter(std::size_t taps) {
    Rng rng(2);
    std::vector<double> h(taps);
    for (auto& v : h) v = rng.uniform(-1.0, 1.0) / static_cast<double>(taps);
    return h;
}

void BM_ConvolveDirect(benchmark::State& state) {
    const auto x = signal(48000);
    const auto h = filter(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::convolve_direct(x, h));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

void BM_ConvolveFft(benchmark::State& state) {
    const auto x = signal(48000);
    const auto h = filter(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::convolve_fft(x, h));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

void BM_SimulateSerial(benchmark::State& state) {
    const ExperimentConfig config = ExperimentConfig::defaults();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_batch_serial(config, static_cast<std::size_t>(state.range(0)), 7));
}

void BM_SimulateParallel(benchmark::State& state) {
    const ExperimentConfig config = ExperimentConfig::defaults();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_batch(config, static_cast<std::size_t>(state.range(0)), 7));
}

} // namespace

BENCHMARK(BM_ConvolveDirect)->Arg(255)->Arg(4095)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConvolveFft)->Arg(255)->Arg(4095)->Arg(16383)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSerial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
