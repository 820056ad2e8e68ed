#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpusim/latency.hpp"
#include "dpusim/types.hpp"
#include "dpusim/validate.hpp"

namespace dpusim {

/// Hypothetical one-worker sequential period in ms: camera wait (when the
/// interval exceeds the pipeline time) plus the sum of stage durations.
/// 1000/period is the exact deterministic single-worker throughput.
double single_thread_period(const ValidatedScenario& scenario, const ParamSet& params);

struct ThroughputBound {
    double fps = 0.0;
    std::vector<std::string> binding;   // "cpu", "dpu", "worker", "camera"; ties keep all

    std::string binding_label() const;  // "+"-joined
};

/// Upper bound on steady-state throughput: min over the cpu-capacity, dpu,
/// worker-count, and camera bounds. Queueing delay is deliberately ignored;
/// the DES is the predictor, this is the oracle.
ThroughputBound throughput_upper_bound(const ValidatedScenario& scenario,
                                       const ParamSet& params);

/// Busy fraction each (resource, task) pair would show at a given achieved
/// rate: fps * demand_ms / 1000 / effective_servers.
/// Throws ModelError if achieved_fps exceeds the bound by more than 1e-6.
std::map<std::pair<std::string, std::string>, double>
predicted_busy(const ValidatedScenario& scenario, const ParamSet& params,
               double achieved_fps);

struct SweepPoint {
    int ops_per_cycle = 0;
    double freq_mhz = 0.0;
    int workers = 0;
};

struct SaturationRow {
    SweepPoint point;
    double bound_fps = 0.0;
    std::string binding;
    bool knee = false;   // first point where the binding constraint leaves the dpu
};

/// Bound table over a sweep, flagging the saturation knee.
std::vector<SaturationRow> saturation_report(const ValidatedScenario& base,
                                             const ParamSet& params,
                                             const std::vector<SweepPoint>& sweep);

/// Copy of `base` with the sweep point's knobs applied.
ScenarioConfig apply_sweep_point(const ScenarioConfig& base, const SweepPoint& p);

} // namespace dpusim
