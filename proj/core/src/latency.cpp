#include "dpusim/latency.hpp"

#include "dpusim/errors.hpp"

namespace dpusim {

double dpu_service_time(const DpuTaskParams& task, const AcceleratorSpec& accel) {
    const double b = static_cast<double>(accel.ops_per_cycle);
    const double f = accel.freq_mhz;
    return task.alpha_ms * (kRefOpsPerCycle * kRefFreqMhz) / (b * f) +
           task.beta_ms * (kRefFreqMhz / f) +
           task.gamma_ms;
}

FrameDemands frame_demands(const PipelineSpec& pipeline, const ParamSet& params,
                           const AcceleratorSpec& accel) {
    FrameDemands out;
    out.stages.reserve(pipeline.stages.size());
    for (const auto& s : pipeline.stages) {
        StageDemand d;
        d.stage = s.name;
        d.resource = s.resource;
        if (s.resource == Resource::Cpu) {
            auto it = params.cpu_stage_ms.find(s.name);
            if (it == params.cpu_stage_ms.end())
                throw ModelError("no cpu duration parameter for stage '" + s.name + "'");
            d.task = s.name;
            d.duration_ms = it->second;
            out.cpu_total_ms += d.duration_ms;
        } else {
            auto it = params.dpu_tasks.find(s.task_ref);
            if (it == params.dpu_tasks.end())
                throw ModelError("no task parameters for '" + s.task_ref +
                                 "' referenced by stage '" + s.name + "'");
            d.task = s.task_ref;
            d.duration_ms = dpu_service_time(it->second, accel);
            out.dpu_total_ms += d.duration_ms;
        }
        out.stages.push_back(std::move(d));
    }
    return out;
}

ParamSet effective_params(const ScenarioConfig& scenario, const ParamSet& overrides) {
    ParamSet eff = effective_params(scenario);
    for (const auto& [name, t] : overrides.dpu_tasks) eff.dpu_tasks[name] = t;
    for (const auto& [name, ms] : overrides.cpu_stage_ms) eff.cpu_stage_ms[name] = ms;
    eff.camera_interval_ms = overrides.camera_interval_ms;
    return eff;
}

ParamSet effective_params(const ScenarioConfig& scenario) {
    ParamSet eff;
    for (const auto& t : scenario.tasks) eff.dpu_tasks[t.name] = t;
    for (const auto& s : scenario.pipeline.stages)
        if (s.resource == Resource::Cpu) eff.cpu_stage_ms[s.name] = s.fixed_ms;
    eff.camera_interval_ms = scenario.threading.camera_interval_ms;
    return eff;
}

} // namespace dpusim
