#include "dpusim/config_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "dpusim/csv.hpp"
#include "dpusim/errors.hpp"

namespace dpusim {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Entry {
    int line;
    std::string key;
    std::string value;
};

struct Section {
    int line = 0;
    std::string kind;    // first word inside the brackets
    std::string label;   // optional second word
    std::vector<Entry> entries;
};

std::vector<Section> read_sections(std::istream& in, const std::string& file) {
    std::vector<Section> sections;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError(file, lineno, "", "unterminated section header");
            std::istringstream hdr(t.substr(1, t.size() - 2));
            Section s;
            s.line = lineno;
            hdr >> s.kind >> s.label;
            if (s.kind.empty())
                throw ParseError(file, lineno, "", "empty section header");
            sections.push_back(std::move(s));
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(file, lineno, "", "expected `key = value`");
        if (sections.empty())
            throw ParseError(file, lineno, "", "entry before any [section]");
        Entry e;
        e.line = lineno;
        e.key = trim(t.substr(0, eq));
        e.value = trim(t.substr(eq + 1));
        if (e.key.empty()) throw ParseError(file, lineno, "", "empty key");
        sections.back().entries.push_back(std::move(e));
    }
    return sections;
}

double to_double(const Entry& e, const std::string& file) {
    double v = 0.0;
    auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        throw ParseError(file, e.line, e.key, "not a number: '" + e.value + "'");
    return v;
}

int64_t to_int(const Entry& e, const std::string& file) {
    int64_t v = 0;
    auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        throw ParseError(file, e.line, e.key, "not an integer: '" + e.value + "'");
    return v;
}

uint64_t to_uint64(const Entry& e, const std::string& file) {
    uint64_t v = 0;
    auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        throw ParseError(file, e.line, e.key, "not an unsigned integer: '" + e.value + "'");
    return v;
}

bool to_bool(const Entry& e, const std::string& file) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ParseError(file, e.line, e.key, "expected true or false");
}

[[noreturn]] void unknown_key(const Entry& e, const std::string& section,
                              const std::string& file) {
    throw ParseError(file, e.line, e.key, "unknown key in [" + section + "]");
}

} // namespace

ScenarioConfig read_scenario(std::istream& in, const std::string& file) {
    ScenarioConfig cfg;
    bool saw_accel = false, saw_pipeline = false;
    for (const auto& s : read_sections(in, file)) {
        if (s.kind == "scenario") {
            for (const auto& e : s.entries) {
                if (e.key == "id") cfg.id = e.value;
                else unknown_key(e, s.kind, file);
            }
        } else if (s.kind == "accelerator") {
            saw_accel = true;
            for (const auto& e : s.entries) {
                if (e.key == "name") cfg.accelerator.name = e.value;
                else if (e.key == "ops_per_cycle")
                    cfg.accelerator.ops_per_cycle = static_cast<int>(to_int(e, file));
                else if (e.key == "freq_mhz") cfg.accelerator.freq_mhz = to_double(e, file);
                else unknown_key(e, s.kind, file);
            }
        } else if (s.kind == "host") {
            for (const auto& e : s.entries) {
                if (e.key == "cores") cfg.host.cores = static_cast<int>(to_int(e, file));
                else if (e.key == "serialize_compute")
                    cfg.host.serialize_compute = to_bool(e, file);
                else unknown_key(e, s.kind, file);
            }
        } else if (s.kind == "task") {
            if (s.label.empty())
                throw ParseError(file, s.line, "", "[task] needs a name: [task FD]");
            DpuTaskParams t;
            t.name = s.label;
            for (const auto& e : s.entries) {
                if (e.key == "alpha_ms") t.alpha_ms = to_double(e, file);
                else if (e.key == "beta_ms") t.beta_ms = to_double(e, file);
                else if (e.key == "gamma_ms") t.gamma_ms = to_double(e, file);
                else unknown_key(e, s.kind, file);
            }
            cfg.tasks.push_back(std::move(t));
        } else if (s.kind == "pipeline") {
            saw_pipeline = true;
            for (const auto& e : s.entries) {
                if (e.key != "stage") unknown_key(e, s.kind, file);
                std::istringstream ss(e.value);
                StageSpec stage;
                std::string res, cost;
                ss >> stage.name >> res >> cost;
                if (stage.name.empty() || res.empty() || cost.empty())
                    throw ParseError(file, e.line, e.key,
                                     "expected `stage = <name> <cpu|dpu> <ms|task>`");
                if (res == "cpu") {
                    stage.resource = Resource::Cpu;
                    double ms = 0.0;
                    auto r = std::from_chars(cost.data(), cost.data() + cost.size(), ms);
                    if (r.ec != std::errc{} || r.ptr != cost.data() + cost.size())
                        throw ParseError(file, e.line, e.key,
                                         "cpu stage duration is not a number: '" + cost + "'");
                    stage.fixed_ms = ms;
                } else if (res == "dpu") {
                    stage.resource = Resource::Dpu;
                    stage.task_ref = cost;
                } else {
                    throw ParseError(file, e.line, e.key,
                                     "unknown resource '" + res + "' (cpu or dpu)");
                }
                cfg.pipeline.stages.push_back(std::move(stage));
            }
        } else if (s.kind == "threading") {
            for (const auto& e : s.entries) {
                if (e.key == "workers")
                    cfg.threading.workers = static_cast<int>(to_int(e, file));
                else if (e.key == "camera_interval_ms")
                    cfg.threading.camera_interval_ms = to_double(e, file);
                else if (e.key == "frame_queue_depth")
                    cfg.threading.frame_queue_depth = static_cast<int>(to_int(e, file));
                else unknown_key(e, s.kind, file);
            }
        } else if (s.kind == "sim") {
            for (const auto& e : s.entries) {
                if (e.key == "frames") cfg.sim.frames = static_cast<int>(to_int(e, file));
                else if (e.key == "warmup_frames")
                    cfg.sim.warmup_frames = static_cast<int>(to_int(e, file));
                else if (e.key == "seed")
                    cfg.sim.seed = to_uint64(e, file);
                else if (e.key == "jitter_cv") cfg.sim.jitter_cv = to_double(e, file);
                else unknown_key(e, s.kind, file);
            }
        } else if (s.kind == "metadata") {
            for (const auto& e : s.entries) cfg.metadata[e.key] = e.value;
        } else {
            throw ParseError(file, s.line, "", "unknown section [" + s.kind + "]");
        }
    }
    if (!saw_accel)
        throw ParseError(file, 0, "", "missing [accelerator] section");
    if (!saw_pipeline)
        throw ParseError(file, 0, "", "missing [pipeline] section");
    return cfg;
}

ScenarioConfig read_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "", "cannot open file");
    return read_scenario(in, path);
}

std::string write_scenario(const ScenarioConfig& c) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "id = " << c.id << "\n\n";
    out << "[accelerator]\n";
    out << "name = " << c.accelerator.name << "\n";
    out << "ops_per_cycle = " << c.accelerator.ops_per_cycle << "\n";
    out << "freq_mhz = " << format_double(c.accelerator.freq_mhz) << "\n\n";
    out << "[host]\n";
    out << "cores = " << c.host.cores << "\n";
    out << "serialize_compute = " << (c.host.serialize_compute ? "true" : "false")
        << "\n\n";
    for (const auto& t : c.tasks) {
        out << "[task " << t.name << "]\n";
        out << "alpha_ms = " << format_double(t.alpha_ms) << "\n";
        out << "beta_ms = " << format_double(t.beta_ms) << "\n";
        out << "gamma_ms = " << format_double(t.gamma_ms) << "\n\n";
    }
    out << "[pipeline]\n";
    for (const auto& s : c.pipeline.stages) {
        out << "stage = " << s.name << ' ';
        if (s.resource == Resource::Cpu)
            out << "cpu " << format_double(s.fixed_ms) << "\n";
        else
            out << "dpu " << s.task_ref << "\n";
    }
    out << "\n[threading]\n";
    out << "workers = " << c.threading.workers << "\n";
    out << "camera_interval_ms = " << format_double(c.threading.camera_interval_ms)
        << "\n";
    out << "frame_queue_depth = " << c.threading.frame_queue_depth << "\n\n";
    out << "[sim]\n";
    out << "frames = " << c.sim.frames << "\n";
    out << "warmup_frames = " << c.sim.warmup_frames << "\n";
    out << "seed = " << c.sim.seed << "\n";
    out << "jitter_cv = " << format_double(c.sim.jitter_cv) << "\n";
    if (!c.metadata.empty()) {
        out << "\n[metadata]\n";
        for (const auto& [k, v] : c.metadata) out << k << " = " << v << "\n";
    }
    return out.str();
}

ParamsFile read_params(std::istream& in, const std::string& file) {
    ParamsFile pf;
    for (const auto& s : read_sections(in, file)) {
        if (s.kind == "task") {
            if (s.label.empty())
                throw ParseError(file, s.line, "", "[task] needs a name: [task FD]");
            DpuTaskParams t;
            t.name = s.label;
            for (const auto& e : s.entries) {
                if (e.key == "alpha_ms") t.alpha_ms = to_double(e, file);
                else if (e.key == "beta_ms") t.beta_ms = to_double(e, file);
                else if (e.key == "gamma_ms") t.gamma_ms = to_double(e, file);
                else unknown_key(e, s.kind, file);
            }
            pf.params.dpu_tasks[t.name] = std::move(t);
        } else if (s.kind == "cpu") {
            for (const auto& e : s.entries)
                pf.params.cpu_stage_ms[e.key] = to_double(e, file);
        } else if (s.kind == "camera") {
            for (const auto& e : s.entries) {
                if (e.key == "interval_ms")
                    pf.params.camera_interval_ms = to_double(e, file);
                else unknown_key(e, s.kind, file);
            }
        } else if (s.kind == "power") {
            PowerParams pp;
            for (const auto& e : s.entries) {
                if (e.key == "c0_w") pp.c0_w = to_double(e, file);
                else if (e.key == "c_freq_w") pp.c_freq_w = to_double(e, file);
                else if (e.key == "c_size_w") pp.c_size_w = to_double(e, file);
                else if (e.key == "c_busy_w") pp.c_busy_w = to_double(e, file);
                else if (e.key == "idle_board_w") pp.idle_board_w = to_double(e, file);
                else unknown_key(e, s.kind, file);
            }
            pf.power = pp;
        } else {
            throw ParseError(file, s.line, "", "unknown section [" + s.kind + "]");
        }
    }
    return pf;
}

ParamsFile read_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "", "cannot open file");
    return read_params(in, path);
}

std::string write_params(const ParamsFile& pf) {
    std::ostringstream out;
    for (const auto& [name, t] : pf.params.dpu_tasks) {
        out << "[task " << name << "]\n";
        out << "alpha_ms = " << format_double(t.alpha_ms) << "\n";
        out << "beta_ms = " << format_double(t.beta_ms) << "\n";
        out << "gamma_ms = " << format_double(t.gamma_ms) << "\n\n";
    }
    out << "[cpu]\n";
    for (const auto& [stage, ms] : pf.params.cpu_stage_ms)
        out << stage << " = " << format_double(ms) << "\n";
    out << "\n[camera]\n";
    out << "interval_ms = " << format_double(pf.params.camera_interval_ms) << "\n";
    if (pf.power) {
        out << "\n[power]\n";
        out << "c0_w = " << format_double(pf.power->c0_w) << "\n";
        out << "c_freq_w = " << format_double(pf.power->c_freq_w) << "\n";
        out << "c_size_w = " << format_double(pf.power->c_size_w) << "\n";
        out << "c_busy_w = " << format_double(pf.power->c_busy_w) << "\n";
        out << "idle_board_w = " << format_double(pf.power->idle_board_w) << "\n";
    }
    return out.str();
}

} // namespace dpusim
