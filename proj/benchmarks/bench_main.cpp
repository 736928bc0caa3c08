#include <benchmark/benchmark.h>

#include "entstop/binomial.hpp"
#include "entstop/drivers.hpp"
#include "entstop/market.hpp"
#include "entstop/schemes.hpp"

namespace {

using namespace entstop;

MarketConfig two_asset() { return MarketConfig{{100.0, 100.0}, 0.05, 0.1, 0.2, 3.0}; }

void BM_Phi(benchmark::State& state) {
    double x = -40.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(phi(x));
        x = x > 40.0 ? -40.0 : x + 0.37;
    }
}
BENCHMARK(BM_Phi);

void BM_GibbsMean(benchmark::State& state) {
    double a = -5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gibbs_mean(a, 100.0));
        a = a > 5.0 ? -5.0 : a + 0.013;
    }
}
BENCHMARK(BM_GibbsMean);

void BM_Binomial2D(benchmark::State& state) {
    BinomialConfig cfg;
    cfg.steps = static_cast<int>(state.range(0));
    cfg.market = two_asset();
    for (auto _ : state) {
        benchmark::DoNotOptimize(binomial_price(cfg));
    }
}
BENCHMARK(BM_Binomial2D)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SimulatePaths(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_paths(two_asset(), TimeGrid(3.0, 100), n, 1).raw().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePaths)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_EntropyImplicit(benchmark::State& state) {
    const PathGrid paths = simulate_paths(two_asset(), TimeGrid(3.0, 100), 10000, 1);
    ContinuationEstimator est(paths, PayoffSpec{}, BasisSpec::default_for(2, 100.0));
    SchemeConfig cfg;
    cfg.params = DriverParams{0.01, 100.0, 0.05};
    for (auto _ : state) {
        benchmark::DoNotOptimize(entropy_implicit(est, cfg).price);
    }
}
BENCHMARK(BM_EntropyImplicit)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
