#include "dpusim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpusim/errors.hpp"

namespace dpusim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string ThroughputBound::binding_label() const {
    std::string out;
    for (const auto& b : binding) {
        if (!out.empty()) out += "+";
        out += b;
    }
    return out;
}

double single_thread_period(const ValidatedScenario& scenario, const ParamSet& params) {
    const auto d = frame_demands(scenario->pipeline, params, scenario->accelerator);
    const double pipeline_ms = d.total_ms();
    const double interval = params.camera_interval_ms;
    const double camera_wait = interval > 0.0 ? std::max(0.0, interval - pipeline_ms) : 0.0;
    return camera_wait + pipeline_ms;
}

ThroughputBound throughput_upper_bound(const ValidatedScenario& scenario,
                                       const ParamSet& params) {
    const auto d = frame_demands(scenario->pipeline, params, scenario->accelerator);

    const double cpu_servers = scenario->host.effective_servers();
    const double cpu_bound =
        d.cpu_total_ms > 0.0 ? 1000.0 * cpu_servers / d.cpu_total_ms : kInf;
    const double dpu_bound = d.dpu_total_ms > 0.0 ? 1000.0 / d.dpu_total_ms : kInf;
    const double worker_bound =
        d.total_ms() > 0.0 ? 1000.0 * scenario->threading.workers / d.total_ms() : kInf;
    const double camera_bound =
        params.camera_interval_ms > 0.0 ? 1000.0 / params.camera_interval_ms : kInf;

    const std::pair<double, const char*> candidates[] = {
        {cpu_bound, "cpu"}, {dpu_bound, "dpu"}, {worker_bound, "worker"},
        {camera_bound, "camera"}};

    ThroughputBound out;
    out.fps = kInf;
    for (const auto& [fps, name] : candidates) out.fps = std::min(out.fps, fps);
    for (const auto& [fps, name] : candidates)
        if (fps == out.fps) out.binding.emplace_back(name);
    return out;
}

std::map<std::pair<std::string, std::string>, double>
predicted_busy(const ValidatedScenario& scenario, const ParamSet& params,
               double achieved_fps) {
    if (!(achieved_fps > 0.0))
        throw ModelError("predicted_busy: achieved_fps must be > 0");
    const auto bound = throughput_upper_bound(scenario, params);
    if (achieved_fps > bound.fps + 1e-6)
        throw ModelError("predicted_busy: achieved_fps " + std::to_string(achieved_fps) +
                         " exceeds the throughput upper bound " + std::to_string(bound.fps));

    const auto d = frame_demands(scenario->pipeline, params, scenario->accelerator);
    std::map<std::pair<std::string, std::string>, double> demand_ms;
    for (const auto& s : d.stages)
        demand_ms[{to_string(s.resource), s.task}] += s.duration_ms;

    std::map<std::pair<std::string, std::string>, double> busy;
    for (const auto& [key, ms] : demand_ms) {
        const double servers =
            key.first == "cpu" ? scenario->host.effective_servers() : 1.0;
        busy[key] = achieved_fps * ms / 1000.0 / servers;
    }
    return busy;
}

ScenarioConfig apply_sweep_point(const ScenarioConfig& base, const SweepPoint& p) {
    ScenarioConfig c = base;
    c.accelerator.ops_per_cycle = p.ops_per_cycle;
    c.accelerator.freq_mhz = p.freq_mhz;
    c.accelerator.name = "b" + std::to_string(p.ops_per_cycle);
    c.threading.workers = p.workers;
    c.id = base.id + "-sweep";
    return c;
}

std::vector<SaturationRow> saturation_report(const ValidatedScenario& base,
                                             const ParamSet& params,
                                             const std::vector<SweepPoint>& sweep) {
    std::vector<SaturationRow> rows;
    rows.reserve(sweep.size());
    bool knee_seen = false;
    for (const auto& p : sweep) {
        auto scenario = ValidatedScenario::make(apply_sweep_point(base.config(), p));
        const auto bound = throughput_upper_bound(scenario, params);
        SaturationRow row;
        row.point = p;
        row.bound_fps = bound.fps;
        row.binding = bound.binding_label();
        const bool dpu_binding =
            std::find(bound.binding.begin(), bound.binding.end(), "dpu") !=
            bound.binding.end();
        if (!knee_seen && !dpu_binding) {
            row.knee = true;
            knee_seen = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace dpusim
