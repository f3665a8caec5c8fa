#include <benchmark/benchmark.h>

#include <vector>

#include "kdelab/convolve.hpp"
#include "kdelab/lattice.hpp"
#include "kdelab/rng.hpp"

using namespace kdelab;

namespace {

// args: dimension, output side, kernel side, method (0 direct, 1 fourier)
void BM_Convolve(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const std::int64_t n = state.range(1), k = state.range(2);
    const auto method = state.range(3) == 0 ? ConvolutionMethod::Direct : ConvolutionMethod::Fourier;
    CounterRng rng({1, 2, 3});
    std::vector<double> kernel(checked_power(k, d)), input(checked_power(n + k - 1, d)), out(checked_power(n, d));
    for (auto& v : kernel) v = rng.normal();
    for (auto& v : input) v = rng.normal();
    const LatticeConvolver conv(d, n, k, {kernel}, method);
    const std::span<double> views[] = {out};
    for (auto _ : state) {
        conv.apply(input, views);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
    state.counters["direct_cost"] = LatticeConvolver::direct_cost(d, n, kernel.size());
    state.counters["fourier_cost"] = LatticeConvolver::fourier_cost(d, fft_friendly_size(n + k - 1), 1);
}

}  // namespace

BENCHMARK(BM_Convolve)
    ->ArgNames({"d", "n", "k", "fourier"})
    ->ArgsProduct({{1}, {4096}, {4, 16, 64, 256}, {0, 1}})
    ->ArgsProduct({{2}, {64, 256}, {4, 8, 16, 32}, {0, 1}})
    ->ArgsProduct({{3}, {32}, {3, 6, 12}, {0, 1}})
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
