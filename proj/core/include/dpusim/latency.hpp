#pragma once

#include <string>
#include <vector>

#include "dpusim/types.hpp"
#include "dpusim/validate.hpp"

namespace dpusim {

inline constexpr double kRefOpsPerCycle = 512.0;
inline constexpr double kRefFreqMhz = 400.0;

/// Service time of one task invocation on a given accelerator:
///   alpha * (512*400)/(B*f) + beta * (400/f) + gamma
/// Equals alpha+beta+gamma at the reference configuration.
double dpu_service_time(const DpuTaskParams& task, const AcceleratorSpec& accel);

/// One pipeline stage's resolved demand.
struct StageDemand {
    std::string stage;
    Resource resource;
    std::string task;     // task name for dpu stages, stage name for cpu
    double duration_ms;
};

struct FrameDemands {
    std::vector<StageDemand> stages;   // pipeline order
    double cpu_total_ms = 0.0;
    double dpu_total_ms = 0.0;

    double total_ms() const { return cpu_total_ms + dpu_total_ms; }
};

/// Resolves every stage of the pipeline against a parameter set.
/// Throws ModelError when a stage has no entry in `params`.
FrameDemands frame_demands(const PipelineSpec& pipeline, const ParamSet& params,
                           const AcceleratorSpec& accel);

/// Parameter set assembled from the scenario's bundled defaults with
/// `overrides` winning entry by entry. The result covers every stage, so it
/// is safe to hand to frame_demands or simulate.
ParamSet effective_params(const ScenarioConfig& scenario, const ParamSet& overrides);
ParamSet effective_params(const ScenarioConfig& scenario);

} // namespace dpusim
