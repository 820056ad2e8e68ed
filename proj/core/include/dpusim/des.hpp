#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpusim/types.hpp"
#include "dpusim/validate.hpp"

namespace dpusim {

enum class TraceKind : uint8_t {
    Produce,
    Drop,
    Dequeue,
    EnqueueResource,
    StartService,
    EndService,
    Complete,
};

const char* to_string(TraceKind k);
std::optional<TraceKind> trace_kind_from_string(const std::string& s);

/// One event of a simulation run. stage/resource are empty for frame-level
/// events (produce, drop, dequeue, complete).
struct TraceEvent {
    double t_ms = 0.0;
    int worker_id = -1;        // -1 = camera source
    int64_t frame_id = 0;
    std::string stage;
    std::string resource;
    TraceKind kind = TraceKind::Produce;

    bool operator==(const TraceEvent&) const = default;
};

/// Event log plus the context needed to interpret it: which task each stage
/// maps to, the cpu server count, and the measurement window the run chose.
struct Trace {
    std::vector<TraceEvent> events;
    std::map<std::string, std::string> stage_task;  // stage name -> metric task key
    int cpu_servers = 1;
    double window_t0_ms = 0.0;
    double window_t1_ms = 0.0;
};

/// (resource, task) keyed metric maps; resource is "cpu" or "dpu".
using ResourceTaskMap = std::map<std::pair<std::string, std::string>, double>;

struct MetricsReport {
    double throughput_fps = 0.0;
    double window_ms = 0.0;
    int64_t completed = 0;
    int64_t dropped = 0;
    ResourceTaskMap busy_fraction;       // service time / (window * servers)
    ResourceTaskMap occupancy_fraction;  // (queue wait + service) / window
    double mean_latency_ms = 0.0;        // dequeue -> complete
    double p95_latency_ms = 0.0;
    double mean_in_flight = 0.0;         // time-average frames being processed
    std::optional<double> power_w;
    std::optional<double> fps_per_watt;

    double busy_total(const std::string& resource) const;
    double occupancy_total(const std::string& resource) const;
};

struct SimLimits {
    uint64_t max_events = 0;   // 0 = derived from the frame budget
};

struct SimResult {
    MetricsReport metrics;
    Trace trace;
};

/// Deterministic discrete-event run of the camera source, worker threads,
/// cpu pool and the single FIFO accelerator. `params` must cover every
/// pipeline stage (see effective_params for merging scenario defaults).
SimResult simulate(const ValidatedScenario& scenario, const ParamSet& params,
                   const SimLimits& limits = {});

/// Recomputes a MetricsReport from an event log over an explicit window.
/// Recomputing over the simulate-chosen window reproduces simulate's report.
MetricsReport metrics_from_trace(const Trace& trace, double t0_ms, double t1_ms);

/// Self-check of a trace against the scenario that produced it: service
/// intervals never exceed server capacity, frames are conserved, stage order
/// matches the pipeline, timestamps are nondecreasing. Empty result = clean.
std::vector<std::string> validate_trace(const Trace& trace,
                                        const ValidatedScenario& scenario);

/// Context builder for traces loaded from CSV (events only on disk).
Trace make_trace(std::vector<TraceEvent> events, const ValidatedScenario& scenario,
                 double window_t0_ms = 0.0, double window_t1_ms = 0.0);

} // namespace dpusim
