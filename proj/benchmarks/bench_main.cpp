#include <vector>

#include <benchmark/benchmark.h>

#include "gevcast/bootstrap.hpp"
#include "gevcast/gaev.hpp"
#include "gevcast/gev.hpp"
#include "gevcast/metrics.hpp"
#include "gevcast/random.hpp"
#include "gevcast/simulate.hpp"
#include "gevcast/var.hpp"

using namespace gevcast;

namespace {

std::vector<double> sample(std::size_t n) {
    Rng rng(1);
    std::vector<double> x(n);
    for (auto& v : x) v = quantile(GevParams(10, 2, 0.2), rng.uniform_open());
    return x;
}

void BM_LogLikelihood(benchmark::State& state) {
    const auto x = sample(static_cast<std::size_t>(state.range(0)));
    const GevParams p(10, 2, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(log_likelihood(p, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogLikelihood)->Arg(366)->Arg(5000);

void BM_FitMle(benchmark::State& state) {
    const auto x = sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit_mle(x));
}
BENCHMARK(BM_FitMle)->Arg(366)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_FitGaev(benchmark::State& state) {
    DgpSpec spec;
    spec.setting = 2;
    spec.T = 2;
    spec.J = static_cast<int>(state.range(0));
    const SimTruth sim = generate(spec);
    const GaevDesign design(sim.series.grid, {5, 5, 0});
    const auto curve = sim.series.curve(0);
    for (auto _ : state) benchmark::DoNotOptimize(fit_gaev(curve, design));
}
BENCHMARK(BM_FitGaev)->Arg(30)->Arg(366)->Unit(benchmark::kMillisecond);

void BM_FitVar(benchmark::State& state) {
    Rng rng(2);
    Eigen::MatrixXd y(50, state.range(0));
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(fit_var(y));
}
BENCHMARK(BM_FitVar)->Arg(3)->Arg(13)->Unit(benchmark::kMicrosecond);

void BM_CurveDivergence(benchmark::State& state) {
    DgpSpec spec;
    spec.setting = 3;
    spec.T = 2;
    const SimTruth sim = generate(spec);
    for (auto _ : state) benchmark::DoNotOptimize(curve_divergence(sim.truth[0], sim.truth[1]));
}
BENCHMARK(BM_CurveDivergence)->Unit(benchmark::kMicrosecond);

void BM_SieveBootstrap(benchmark::State& state) {
    DgpSpec spec;
    spec.setting = 2;
    const SimTruth sim = generate(spec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sieve_bootstrap_forecasts(sim.series, {5, 5, 0}, 0.999, 200, 1));
    }
}
BENCHMARK(BM_SieveBootstrap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
