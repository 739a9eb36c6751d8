#include <random>

#include <benchmark/benchmark.h>

#include "sensorprep/sensorprep.hpp"

using namespace sensorprep;

namespace {

SensorDataset drift(std::size_t m, std::size_t n) { return synth_generate(7, m, n, SynthProfile{}); }

void BM_SymmetricEigen(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto c = correlation_matrix(standardize(drift(400, n)).values);
    for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigen(c));
}
BENCHMARK(BM_SymmetricEigen)->Arg(5)->Arg(15)->Arg(40);

void BM_K2Search(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto train = drift(400, n);
    const auto states = discretize(train, fit_discretization(train));
    for (auto _ : state) benchmark::DoNotOptimize(learn_static(states));
}
BENCHMARK(BM_K2Search)->Arg(5)->Arg(15)->Arg(30);

void BM_TqScreen(benchmark::State& state) {
    const auto all = drift(600, 15);
    const auto model = build_pca_model(all.slice_rows(0, 400));
    std::size_t r = 400;
    for (auto _ : state) {
        benchmark::DoNotOptimize(tq_screen(all.row(r), model));
        r = r + 1 < all.rows() ? r + 1 : 400;
    }
}
BENCHMARK(BM_TqScreen);

void BM_RsdrdaSchedule(benchmark::State& state) {
    SynthProfile profile;
    profile.kind = SynthKind::LaggedCopy;
    const auto data = synth_generate(7, static_cast<std::size_t>(state.range(0)), 15, profile);
    const ScheduleOptions options{100, 0.6, kDefaultTau, kDefaultMaxParents};
    const auto scheme = fit_discretization(data.slice_rows(0, training_length(options)));
    for (auto _ : state) benchmark::DoNotOptimize(rsdrda_schedule(data, scheme, options));
}
BENCHMARK(BM_RsdrdaSchedule)->Arg(500)->Arg(2000);

} // namespace
BENCHMARK_MAIN();
