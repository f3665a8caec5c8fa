#include <benchmark/benchmark.h>

#include <vector>

#include "kdelab/field.hpp"

using namespace kdelab;

namespace {

// args: dimension, n, M; coupled X and X_m with m = 4
void BM_GenerateInto(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const std::int64_t n = state.range(1), radius = state.range(2);
    const auto model = CoefficientModel::power_decay(d, 4.0);
    const FieldGenerator gen(model, InnovationModel::gaussian(), n, 4, TruncationPlan::fixed(model, radius));
    std::vector<double> full(checked_power(n, d)), trunc(full.size());
    std::uint64_t r = 0;
    for (auto _ : state) {
        gen.generate_into({7, static_cast<std::uint64_t>(n), r++}, full, trunc);
        benchmark::DoNotOptimize(full.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(full.size()));
    state.SetLabel(to_string(gen.method()));
}

}  // namespace

BENCHMARK(BM_GenerateInto)
    ->ArgNames({"d", "n", "M"})
    ->Args({1, 4096, 16})
    ->Args({1, 16384, 64})
    ->Args({2, 64, 16})
    ->Args({2, 256, 32})
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
