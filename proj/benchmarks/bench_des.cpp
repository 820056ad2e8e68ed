#include <benchmark/benchmark.h>

#include "dpusim/builtin.hpp"
#include "dpusim/calibrate.hpp"
#include "dpusim/des.hpp"
#include "dpusim/latency.hpp"
#include "dpusim/validate.hpp"

using namespace dpusim;

static void BM_SimulateBaseline(benchmark::State& state) {
    auto cfg = builtin_scenario("b512-2t");
    cfg.sim.frames = static_cast<int>(state.range(0));
    cfg.sim.warmup_frames = 50;
    const auto scenario = ValidatedScenario::make(cfg);
    const auto params = effective_params(cfg);
    for (auto _ : state) {
        auto r = simulate(scenario, params);
        benchmark::DoNotOptimize(r.metrics.throughput_fps);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateBaseline)->Arg(200)->Arg(1000)->Arg(5000);

static void BM_SimulateJitter(benchmark::State& state) {
    auto cfg = builtin_scenario("b512-2t");
    cfg.sim.frames = 1000;
    cfg.sim.warmup_frames = 50;
    cfg.sim.jitter_cv = 0.2;
    const auto scenario = ValidatedScenario::make(cfg);
    const auto params = effective_params(cfg);
    for (auto _ : state) {
        auto r = simulate(scenario, params);
        benchmark::DoNotOptimize(r.metrics.throughput_fps);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SimulateJitter);

static void BM_MetricsFromTrace(benchmark::State& state) {
    auto cfg = builtin_scenario("b512-2t");
    cfg.sim.frames = 1000;
    const auto scenario = ValidatedScenario::make(cfg);
    const auto r = simulate(scenario, effective_params(cfg));
    for (auto _ : state) {
        auto m = metrics_from_trace(r.trace, r.trace.window_t0_ms, r.trace.window_t1_ms);
        benchmark::DoNotOptimize(m.throughput_fps);
    }
}
BENCHMARK(BM_MetricsFromTrace);

static void BM_ObjectiveEval(benchmark::State& state) {
    const auto table = builtin_measurements();
    const auto provider = builtin_provider();
    ScenarioProvider short_runs = [&provider](const std::string& id) {
        auto c = provider(id);
        c.sim.frames = 400;
        c.sim.warmup_frames = 40;
        return c;
    };
    const auto params = warm_start(table, short_runs);
    for (auto _ : state) {
        benchmark::DoNotOptimize(objective(params, table, {}, short_runs));
    }
}
BENCHMARK(BM_ObjectiveEval);

BENCHMARK_MAIN();
