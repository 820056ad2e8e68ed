#include "dpusim/validate.hpp"

#include <set>
#include <sstream>

#include "dpusim/errors.hpp"

namespace dpusim {

const char* to_string(Resource r) {
    return r == Resource::Cpu ? "cpu" : "dpu";
}

const DpuTaskParams* ScenarioConfig::find_task(const std::string& name) const {
    for (const auto& t : tasks)
        if (t.name == name) return &t;
    return nullptr;
}

std::vector<std::string> validate_scenario_errors(const ScenarioConfig& c) {
    std::vector<std::string> errs;
    auto err = [&errs](const std::string& m) { errs.push_back(m); };

    if (c.accelerator.ops_per_cycle < 1)
        err("accelerator '" + c.accelerator.name + "': ops_per_cycle must be >= 1");
    if (!(c.accelerator.freq_mhz > 0.0))
        err("accelerator '" + c.accelerator.name + "': freq_mhz must be > 0");

    if (c.host.cores < 1)
        err("host: cores must be >= 1");

    std::set<std::string> task_names;
    for (const auto& t : c.tasks) {
        if (!task_names.insert(t.name).second)
            err("task '" + t.name + "' defined more than once");
        if (t.alpha_ms < 0.0 || t.beta_ms < 0.0 || t.gamma_ms < 0.0)
            err("task '" + t.name + "': alpha/beta/gamma must all be >= 0");
    }

    if (c.pipeline.stages.empty())
        err("pipeline must have at least one stage");
    std::set<std::string> stage_names;
    for (const auto& s : c.pipeline.stages) {
        if (!stage_names.insert(s.name).second)
            err("stage '" + s.name + "' defined more than once");
        if (s.resource == Resource::Cpu) {
            if (s.fixed_ms < 0.0)
                err("stage '" + s.name + "': fixed_ms must be >= 0");
            if (!s.task_ref.empty())
                err("stage '" + s.name + "': cpu stages do not take a task reference");
        } else {
            if (s.task_ref.empty())
                err("stage '" + s.name + "': dpu stages must reference a task");
            else if (!task_names.count(s.task_ref))
                err("stage '" + s.name + "' references undefined task '" + s.task_ref + "'");
        }
    }

    if (c.threading.workers < 1)
        err("threading: workers must be >= 1");
    if (c.threading.camera_interval_ms < 0.0)
        err("threading: camera_interval_ms must be >= 0");
    if (c.threading.frame_queue_depth < 1)
        err("threading: frame_queue_depth must be >= 1");

    if (c.sim.frames < 1)
        err("sim: frames must be >= 1");
    if (c.sim.warmup_frames < 0)
        err("sim: warmup_frames must be >= 0");
    if (c.sim.jitter_cv < 0.0)
        err("sim: jitter_cv must be >= 0");

    return errs;
}

ValidatedScenario ValidatedScenario::make(const ScenarioConfig& config) {
    auto errs = validate_scenario_errors(config);
    if (!errs.empty()) {
        std::ostringstream msg;
        msg << "scenario '" << config.id << "' is invalid:";
        for (const auto& e : errs) msg << "\n  - " << e;
        throw ValidationError(msg.str());
    }
    return ValidatedScenario(config);
}

} // namespace dpusim
