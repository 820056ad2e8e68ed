#include "dpusim/builtin.hpp"

#include <sstream>

#include "dpusim/csv.hpp"
#include "dpusim/errors.hpp"

namespace dpusim {

namespace {

// Measurements of the reference system, one CSV per published table.
// Values are transcribed verbatim; the transcription is covered by tests.

const char* const kBaselineCsv =
    "scenario_id,throughput_fps,busy_total_pct,occupancy_fd_pct,occupancy_fer_pct,"
    "power_w,peak_power_w,freq_mhz,ops_per_cycle,workers\n"
    "b512-1t,14.69,22.85,15.84,7.01,2.4,10.2,400,512,1\n"
    "b512-2t,25.00,,49.72,28.72,2.7,10.5,400,512,2\n";

const char* const kFreqSweepCsv =
    "scenario_id,throughput_fps,busy_total_pct,occupancy_fd_pct,occupancy_fer_pct,"
    "power_w,peak_power_w,freq_mhz,ops_per_cycle,workers\n"
    "b512-2t-f300,21.74,,,,1.8,11.2,300,512,2\n"
    "b512-2t,25.00,,,,2.0,11.4,400,512,2\n"
    "b512-2t-f500,25.00,,,,2.2,11.6,500,512,2\n"
    "b512-2t-f600,27.78,,,,2.3,11.7,600,512,2\n";

const char* const kSizeSweepCsv =
    "scenario_id,throughput_fps,busy_total_pct,occupancy_fd_pct,occupancy_fer_pct,"
    "power_w,peak_power_w,freq_mhz,ops_per_cycle,workers\n"
    "b512-1t,14.69,,,,2.4,,400,512,1\n"
    "b512-2t,25.00,,,,2.7,,400,512,2\n"
    "b1024-1t,19.21,,,,2.5,,400,1024,1\n"
    "b1024-2t,27.74,,,,3.1,,400,1024,2\n"
    "b2034-1t,20.80,,,,2.9,,400,2034,1\n"
    "b2034-2t,27.75,,,,3.2,,400,2034,2\n"
    "b4096-1t,23.77,,,,3.2,,400,4096,1\n"
    "b4096-2t,27.74,,,,3.5,,400,4096,2\n";

struct SizeResources {
    int ops;
    const char* luts;
    const char* dsps;
    const char* brams;
};

const SizeResources kResources[] = {
    {512, "27023", "118", "12.0"},
    {1024, "34593", "230", "44.0"},
    {2034, "41861", "438", "60.5"},
    {4096, "51561", "710", "82.5"},
};

ScenarioConfig base_scenario(int ops_per_cycle, double freq_mhz, int workers) {
    ScenarioConfig c;
    c.accelerator.name = "b" + std::to_string(ops_per_cycle);
    c.accelerator.ops_per_cycle = ops_per_cycle;
    c.accelerator.freq_mhz = freq_mhz;

    c.host.cores = 4;
    c.host.serialize_compute = false;

    // Placeholder costs; a fitted params file overrides them all.
    c.tasks = {{"FD", 11.0, 0.0, 0.0}, {"FER", 5.0, 0.0, 0.0}};
    c.pipeline.stages = {
        {"pre", Resource::Cpu, 20.0, ""},
        {"fd", Resource::Dpu, 0.0, "FD"},
        {"mid", Resource::Cpu, 20.0, ""},
        {"fer", Resource::Dpu, 0.0, "FER"},
        {"post", Resource::Cpu, 12.0, ""},
    };

    c.threading.workers = workers;
    c.threading.camera_interval_ms = 36.0;
    c.threading.frame_queue_depth = 1;

    c.sim.frames = 1000;
    c.sim.warmup_frames = 50;
    c.sim.seed = 12345;
    c.sim.jitter_cv = 0.0;

    for (const auto& r : kResources) {
        if (r.ops == ops_per_cycle) {
            c.metadata["luts"] = r.luts;
            c.metadata["dsps"] = r.dsps;
            c.metadata["brams"] = r.brams;
        }
    }
    if (ops_per_cycle == 2034)
        c.metadata["size_note"] =
            "2034 is not a standard array size (2304 is the nearest); label kept verbatim";
    return c;
}

} // namespace

std::vector<std::string> builtin_scenario_ids() {
    return {"b512-1t",      "b512-2t",      "b1024-1t", "b1024-2t",
            "b2034-1t",     "b2034-2t",     "b4096-1t", "b4096-2t",
            "b512-2t-f300", "b512-2t-f500", "b512-2t-f600"};
}

ScenarioConfig builtin_scenario(const std::string& id) {
    ScenarioConfig c;
    if (id == "b512-1t") c = base_scenario(512, 400.0, 1);
    else if (id == "b512-2t") c = base_scenario(512, 400.0, 2);
    else if (id == "b1024-1t") c = base_scenario(1024, 400.0, 1);
    else if (id == "b1024-2t") c = base_scenario(1024, 400.0, 2);
    else if (id == "b2034-1t") c = base_scenario(2034, 400.0, 1);
    else if (id == "b2034-2t") c = base_scenario(2034, 400.0, 2);
    else if (id == "b4096-1t") c = base_scenario(4096, 400.0, 1);
    else if (id == "b4096-2t") c = base_scenario(4096, 400.0, 2);
    else if (id == "b512-2t-f300") c = base_scenario(512, 300.0, 2);
    else if (id == "b512-2t-f500") c = base_scenario(512, 500.0, 2);
    else if (id == "b512-2t-f600") c = base_scenario(512, 600.0, 2);
    else {
        std::ostringstream msg;
        msg << "unknown builtin scenario '" << id << "'; valid ids:";
        for (const auto& v : builtin_scenario_ids()) msg << " " << v;
        throw ValidationError(msg.str());
    }
    c.id = id;
    return c;
}

std::vector<std::string> builtin_measurement_sources() {
    return {kSourceBaseline, kSourceFreqSweep, kSourceSizeSweep};
}

const char* builtin_measurements_csv(const std::string& source) {
    if (source == kSourceBaseline) return kBaselineCsv;
    if (source == kSourceFreqSweep) return kFreqSweepCsv;
    if (source == kSourceSizeSweep) return kSizeSweepCsv;
    throw ValidationError("unknown measurement source '" + source +
                          "'; valid: baseline freq-sweep size-sweep");
}

MeasurementTable builtin_measurements() {
    MeasurementTable all;
    for (const auto& source : builtin_measurement_sources()) {
        std::istringstream in(builtin_measurements_csv(source));
        MeasurementTable t = read_measurements_csv(in, "builtin:" + source, source);
        for (auto& row : t.rows) all.rows.push_back(std::move(row));
    }
    return all;
}

} // namespace dpusim
