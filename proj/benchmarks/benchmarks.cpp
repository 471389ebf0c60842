#include <benchmark/benchmark.h>

#include "tanglesim/mam.hpp"
#include "tanglesim/scenario.hpp"
#include "tanglesim/stats.hpp"
#include "tanglesim/tangle.hpp"

using namespace tanglesim;

namespace {

Tangle build_tangle(std::size_t transactions) {
    Tangle tangle;
    RngStream rng(1, "bench");
    for (std::size_t i = 0; i < transactions; ++i) {
        const auto [a, b] = tangle.select_tips(rng);
        tangle.attach({0x1, 0x2}, a, b, static_cast<double>(i));
    }
    return tangle;
}

void BM_TangleAttach(benchmark::State& state) {
    for (auto _ : state) {
        state.PauseTiming();
        Tangle tangle = build_tangle(static_cast<std::size_t>(state.range(0)));
        RngStream rng(2, "attach");
        state.ResumeTiming();
        for (int i = 0; i < 1000; ++i) {
            const auto [a, b] = tangle.select_tips(rng);
            benchmark::DoNotOptimize(tangle.attach({0x1}, a, b, 0.0));
        }
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_TangleAttach)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ConfirmationCone(benchmark::State& state) {
    Tangle tangle = build_tangle(static_cast<std::size_t>(state.range(0)));
    RngStream rng(3, "cone");
    tangle.issue_milestone(1.0, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tangle.confirmation_cone());
    }
}
BENCHMARK(BM_ConfirmationCone)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_MamPublishDecode(benchmark::State& state) {
    mam::MamChannel channel =
        mam::MamChannel::create("bench-secret", mam::ChannelKey::from_passphrase("k"));
    const std::string payload(static_cast<std::size_t>(state.range(0)), 'x');
    for (auto _ : state) {
        const auto bundle = channel.publish(payload);
        benchmark::DoNotOptimize(mam::decode_bundle(bundle, channel.key()));
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MamPublishDecode)->Arg(64)->Arg(1024)->Arg(16384);

void BM_Boxplot(benchmark::State& state) {
    RngStream rng(4, "box");
    std::vector<double> xs;
    for (int i = 0; i < state.range(0); ++i) {
        xs.push_back(rng.lognormal(20.0, 1.0));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stats::boxplot(xs));
    }
}
BENCHMARK(BM_Boxplot)->Arg(1000)->Arg(100000);

void BM_Ecdf(benchmark::State& state) {
    RngStream rng(5, "ecdf");
    std::vector<double> xs;
    for (int i = 0; i < state.range(0); ++i) {
        xs.push_back(rng.lognormal(20.0, 1.0));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stats::ecdf(xs));
    }
}
BENCHMARK(BM_Ecdf)->Arg(1000)->Arg(100000);

void BM_Scenario(benchmark::State& state) {
    ScenarioConfig config;
    config.bus_count = static_cast<int>(state.range(0));
    std::uint64_t seed = 42;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_scenario(config, seed++));
    }
}
BENCHMARK(BM_Scenario)->Arg(60)->Arg(240)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
