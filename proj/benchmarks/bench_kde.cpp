#include <benchmark/benchmark.h>

#include <vector>

#include "kdelab/clt_lab.hpp"
#include "kdelab/kde.hpp"
#include "kdelab/rng.hpp"

using namespace kdelab;

namespace {

void BM_KdeEstimate(benchmark::State& state) {
    const auto kernel = state.range(1) == 0 ? KernelModel::epanechnikov() : KernelModel::gaussian();
    std::vector<double> values(static_cast<std::size_t>(state.range(0)));
    CounterRng rng({3, 0, 0});
    for (auto& v : values) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(kde_estimate(values, 0.1, 0.2, kernel));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SmoothedNormalMoment(benchmark::State& state) {
    const auto kernel = KernelModel::epanechnikov();
    for (auto _ : state) benchmark::DoNotOptimize(smoothed_normal_moment(kernel, 0.2, 0.3, 1.3, 2));
}

void BM_CltReplicates(benchmark::State& state) {
    ExperimentConfig c;
    c.model = CoefficientModel::geometric(1, 0.5);
    c.bandwidth = BandwidthSchedule(1.0, 0.2);
    c.n_grid = {state.range(0)};
    c.m_fixed = 4;
    c.replicates = 50;
    for (auto _ : state) benchmark::DoNotOptimize(run_clt_experiment(c).verdict);
    state.SetItemsProcessed(state.iterations() * c.replicates);
}

}  // namespace

BENCHMARK(BM_KdeEstimate)->ArgNames({"sites", "gaussian"})->ArgsProduct({{4096, 65536}, {0, 1}});
BENCHMARK(BM_SmoothedNormalMoment);
BENCHMARK(BM_CltReplicates)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
