#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpusim {

/// One accelerator configuration: how many operations the array retires per
/// clock cycle and at what clock. These are the two knobs the sweeps vary.
struct AcceleratorSpec {
    std::string name;
    int ops_per_cycle = 512;
    double freq_mhz = 400.0;

    bool operator==(const AcceleratorSpec&) const = default;
};

/// Host CPU resource pool. serialize_compute forces all CPU stage work
/// through a single logical server regardless of cores (a global-compute-lock
/// runtime), which makes the host-bottleneck hypothesis a testable knob.
struct HostSpec {
    int cores = 1;
    bool serialize_compute = false;

    int effective_servers() const { return serialize_compute ? 1 : cores; }

    bool operator==(const HostSpec&) const = default;
};

/// Per-task accelerator cost decomposition, all in milliseconds at the
/// reference configuration (512 ops/cycle, 400 MHz):
///   alpha_ms  scales with 1/(ops_per_cycle * freq)  (compute-bound part)
///   beta_ms   scales with 1/freq                    (size-insensitive part)
///   gamma_ms  fixed per invocation
/// The service time at the reference configuration is exactly the sum.
struct DpuTaskParams {
    std::string name;
    double alpha_ms = 0.0;
    double beta_ms = 0.0;
    double gamma_ms = 0.0;

    bool operator==(const DpuTaskParams&) const = default;
};

enum class Resource : uint8_t { Cpu, Dpu };

const char* to_string(Resource r);

/// One box of the per-frame flow. CPU stages carry a fixed default duration;
/// DPU stages reference a task whose cost comes from DpuTaskParams.
struct StageSpec {
    std::string name;
    Resource resource = Resource::Cpu;
    double fixed_ms = 0.0;     // cpu stages
    std::string task_ref;      // dpu stages

    bool operator==(const StageSpec&) const = default;
};

struct PipelineSpec {
    std::vector<StageSpec> stages;

    bool operator==(const PipelineSpec&) const = default;
};

/// Worker threads pull frames from a bounded camera queue. A zero camera
/// interval means a fresh frame is always available on demand.
struct ThreadingSpec {
    int workers = 1;
    double camera_interval_ms = 0.0;
    int frame_queue_depth = 1;

    bool operator==(const ThreadingSpec&) const = default;
};

struct SimOptions {
    int frames = 1000;          // measured completions
    int warmup_frames = 50;
    uint64_t seed = 12345;
    double jitter_cv = 0.0;     // lognormal service jitter; 0 = deterministic

    bool operator==(const SimOptions&) const = default;
};

/// Full experiment description. metadata carries free-form key/values such
/// as synthesis resource counts; it is never interpreted by the model.
struct ScenarioConfig {
    std::string id;
    AcceleratorSpec accelerator;
    HostSpec host;
    std::vector<DpuTaskParams> tasks;
    PipelineSpec pipeline;
    ThreadingSpec threading;
    SimOptions sim;
    std::map<std::string, std::string> metadata;

    const DpuTaskParams* find_task(const std::string& name) const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Calibratable latency parameters. When present these override the
/// scenario's bundled defaults stage by stage.
struct ParamSet {
    std::map<std::string, DpuTaskParams> dpu_tasks;
    std::map<std::string, double> cpu_stage_ms;
    double camera_interval_ms = 0.0;

    bool operator==(const ParamSet&) const = default;
};

/// Linear power-feature coefficients (dynamic watts). idle_board_w is the
/// measured idle baseline, reported alongside, never fitted.
struct PowerParams {
    double c0_w = 0.0;
    double c_freq_w = 0.0;   // on f/400
    double c_size_w = 0.0;   // on log2(B/512)
    double c_busy_w = 0.0;   // on total dpu busy fraction
    double idle_board_w = 7.8;

    bool operator==(const PowerParams&) const = default;
};

/// One observed row of a measurement table. Utilization columns are carried
/// in percent, exactly as reported and as written to CSV; the simulation's
/// internal fractions are converted where the two meet. Absent values were
/// not reported.
struct MeasurementRow {
    std::string scenario_id;
    std::string source;                           // which bundled table it came from
    std::optional<double> throughput_fps;
    std::optional<double> busy_total_pct;         // [0,100]
    std::optional<double> occupancy_fd_pct;       // [0,100]
    std::optional<double> occupancy_fer_pct;      // [0,100]
    std::optional<double> power_w;
    std::optional<double> peak_power_w;
    std::optional<double> freq_mhz;
    std::optional<int> ops_per_cycle;
    std::optional<int> workers;

    std::optional<double> occupancy_total_pct() const {
        if (!occupancy_fd_pct && !occupancy_fer_pct) return std::nullopt;
        return occupancy_fd_pct.value_or(0.0) + occupancy_fer_pct.value_or(0.0);
    }

    bool operator==(const MeasurementRow&) const = default;
};

struct MeasurementTable {
    std::vector<MeasurementRow> rows;

    bool operator==(const MeasurementTable&) const = default;
};

} // namespace dpusim
