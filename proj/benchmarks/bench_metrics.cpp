#include <benchmark/benchmark.h>

#include <vector>

#include "taxeval/metrics.hpp"
#include "taxeval/rng.hpp"

namespace {

std::vector<taxeval::RatioObservation> make_observations(std::size_t n) {
    taxeval::RngStream rng(1);
    std::vector<taxeval::RatioObservation> obs;
    obs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double price = std::exp(rng.normal(12.0, 0.5));
        const double assessed = price * std::exp(rng.normal(-0.02, 0.15));
        obs.push_back({assessed, price, assessed / price, std::nullopt});
    }
    return obs;
}

void BM_accuracy_report(benchmark::State& state) {
    const auto obs = make_observations(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(taxeval::accuracy_report(obs));
    }
}

void BM_log_coefficient(benchmark::State& state) {
    const auto obs = make_observations(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(taxeval::log_coefficient(obs));
    }
}

void BM_suits_index(benchmark::State& state) {
    const auto obs = make_observations(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(taxeval::suits_index(obs));
    }
}

void BM_prd(benchmark::State& state) {
    const auto obs = make_observations(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(taxeval::prd(obs));
    }
}

} // namespace

BENCHMARK(BM_accuracy_report)->Arg(1000)->Arg(10000);
BENCHMARK(BM_log_coefficient)->Arg(1000)->Arg(10000);
BENCHMARK(BM_suits_index)->Arg(1000)->Arg(10000);
BENCHMARK(BM_prd)->Arg(1000)->Arg(10000);
