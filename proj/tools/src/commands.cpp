#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "dpusim/analytic.hpp"
#include "dpusim/builtin.hpp"
#include "dpusim/calibrate.hpp"
#include "dpusim/config_io.hpp"
#include "dpusim/csv.hpp"
#include "dpusim/des.hpp"
#include "dpusim/errors.hpp"
#include "dpusim/latency.hpp"
#include "dpusim/power.hpp"
#include "dpusim/report.hpp"
#include "dpusim/validate.hpp"

namespace dpusim::cli {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

int map_exception(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
    if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
    return kExitSimulation;
}

ScenarioConfig resolve_scenario(const std::string& id, const std::string& path) {
    if (!id.empty() && !path.empty())
        throw ValidationError("give either --scenario or --config, not both");
    if (id.empty() && path.empty())
        throw ValidationError("a scenario is required: --scenario <id> or --config <file>");
    return id.empty() ? read_scenario_file(path) : builtin_scenario(id);
}

ParamsFile resolve_params(const std::string& path, const ScenarioConfig& scenario) {
    if (!path.empty()) return read_params_file(path);
    if (const char* env = std::getenv(kParamsEnvVar); env && *env)
        return read_params_file(env);
    return ParamsFile{effective_params(scenario), std::nullopt};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
    if (s.empty()) throw ValidationError(std::string("empty ") + what + " list");
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        try {
            size_t pos = 0;
            const int v = std::stoi(item, &pos);
            if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError(std::string("bad ") + what + " value '" + item + "'");
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    if (s.empty()) throw ValidationError(std::string("empty ") + what + " list");
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        try {
            size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size() || v <= 0.0) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError(std::string("bad ") + what + " value '" + item + "'");
        }
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write to '" + path + "'");
    return f;
}

void print_metrics_block(std::ostream& out, const ScenarioConfig& cfg,
                         const MetricsReport& m) {
    out << "scenario: " << cfg.id << " (" << cfg.accelerator.name << " @ "
        << fmt("%.0f", cfg.accelerator.freq_mhz) << " MHz, "
        << cfg.threading.workers << (cfg.threading.workers == 1 ? " worker" : " workers")
        << ")\n";
    out << "throughput: " << fmt("%.2f", m.throughput_fps) << " FPS\n";
    out << "completed: " << m.completed << " frames over " << fmt("%.3f", m.window_ms)
        << " ms, dropped: " << m.dropped << "\n";
    out << "latency: mean " << fmt("%.3f", m.mean_latency_ms) << " ms, p95 "
        << fmt("%.3f", m.p95_latency_ms) << " ms\n";
    for (const char* res : {"dpu", "cpu"}) {
        std::string busy_line, occ_line;
        for (const auto& [key, v] : m.busy_fraction)
            if (key.first == res)
                busy_line += key.second + " " + fmt("%.2f", v * 100.0) + "%, ";
        for (const auto& [key, v] : m.occupancy_fraction)
            if (key.first == res)
                occ_line += key.second + " " + fmt("%.2f", v * 100.0) + "%, ";
        if (!busy_line.empty())
            out << res << " busy: " << busy_line << "total "
                << fmt("%.2f", m.busy_total(res) * 100.0) << "%\n";
        if (!occ_line.empty())
            out << res << " occupancy: " << occ_line << "total "
                << fmt("%.2f", m.occupancy_total(res) * 100.0) << "%\n";
    }
    if (m.power_w) {
        out << "power: " << fmt("%.1f", *m.power_w) << " W dynamic";
        if (m.fps_per_watt) out << " (" << fmt("%.2f", *m.fps_per_watt) << " FPS/W)";
        out << "\n";
    }
}

void write_metrics_csv(std::ostream& out, const MetricsReport& m) {
    out << "metric,value\n";
    auto row = [&out](const std::string& k, double v) {
        out << k << ',' << format_double(v) << "\n";
    };
    row("throughput_fps", m.throughput_fps);
    row("window_ms", m.window_ms);
    row("completed", static_cast<double>(m.completed));
    row("dropped", static_cast<double>(m.dropped));
    row("mean_latency_ms", m.mean_latency_ms);
    row("p95_latency_ms", m.p95_latency_ms);
    row("mean_in_flight", m.mean_in_flight);
    for (const auto& [key, v] : m.busy_fraction)
        row("busy." + key.first + "." + key.second, v);
    for (const auto& [key, v] : m.occupancy_fraction)
        row("occupancy." + key.first + "." + key.second, v);
    if (m.power_w) row("power_w", *m.power_w);
    if (m.fps_per_watt) row("fps_per_watt", *m.fps_per_watt);
}

MeasurementTable load_tables(const std::string& spec) {
    if (spec == "builtin") return builtin_measurements();
    MeasurementTable all;
    for (const auto& path : split_list(spec)) {
        if (path.empty()) throw ValidationError("empty path in --tables list");
        std::string source = path;
        if (auto slash = source.find_last_of('/'); slash != std::string::npos)
            source = source.substr(slash + 1);
        if (auto dot = source.find_last_of('.'); dot != std::string::npos)
            source = source.substr(0, dot);
        MeasurementTable t = read_measurements_file(path, source);
        for (auto& row : t.rows) all.rows.push_back(std::move(row));
    }
    return all;
}

struct PowerFitOutcome {
    std::optional<PowerParams> params;
    std::vector<PowerFitRow> report;   // per-row residuals of the group fits
};

/// Power fit shipped in the params file. Busy fractions come from
/// deterministic runs at the fitted latency parameters. The frequency slope
/// is fitted on the frequency-sweep rows alone and the size/busy terms on
/// the remaining rows; the two groups disagree on their shared point, so
/// they are never fitted together.
PowerFitOutcome fit_power_for_tables(const MeasurementTable& table,
                                     const ParamSet& params,
                                     const ScenarioProvider& provider) {
    std::vector<PowerSample> freq_rows, base_rows;
    std::map<std::string, double> busy_cache;
    for (const auto& row : table.rows) {
        if (!row.power_w) continue;
        auto it = busy_cache.find(row.scenario_id);
        if (it == busy_cache.end()) {
            const auto scenario = ValidatedScenario::make(provider(row.scenario_id));
            const auto sim = simulate(scenario, params);
            it = busy_cache.emplace(row.scenario_id, sim.metrics.busy_total("dpu")).first;
        }
        PowerSample s;
        s.row_id = row.source + "/" + row.scenario_id;
        s.power_w = *row.power_w;
        s.freq_mhz = row.freq_mhz.value_or(kRefFreqMhz);
        s.ops_per_cycle = row.ops_per_cycle.value_or(512);
        s.busy_dpu_total = it->second;
        (row.source == kSourceFreqSweep ? freq_rows : base_rows).push_back(std::move(s));
    }
    PowerFitOutcome out;
    if (freq_rows.empty() && base_rows.empty()) return out;

    auto report_rows = [&out](const std::vector<PowerSample>& samples,
                              const PowerFit& fit) {
        for (size_t i = 0; i < samples.size(); ++i)
            out.report.push_back({samples[i].row_id, samples[i].power_w,
                                  samples[i].power_w - fit.residuals[i],
                                  fit.residuals[i]});
    };

    try {
        if (!freq_rows.empty() && !base_rows.empty()) {
            const auto freq_fit = fit_power(
                freq_rows, {PowerFeature::Intercept, PowerFeature::Freq});
            report_rows(freq_rows, freq_fit);
            const double c_freq = freq_fit.params.c_freq_w;
            std::vector<PowerSample> adjusted = base_rows;
            for (auto& s : adjusted) s.power_w -= c_freq * (s.freq_mhz / kRefFreqMhz);
            auto fit = fit_power(adjusted, {PowerFeature::Intercept, PowerFeature::Size,
                                            PowerFeature::Busy});
            // Residuals are unchanged by the subtracted frequency term;
            // report them against the original observations.
            for (size_t i = 0; i < base_rows.size(); ++i)
                out.report.push_back({base_rows[i].row_id, base_rows[i].power_w,
                                      base_rows[i].power_w - fit.residuals[i],
                                      fit.residuals[i]});
            fit.params.c_freq_w = c_freq;
            out.params = fit.params;
            return out;
        }
        // Single group: fall back to the richest full-rank feature set.
        const std::vector<PowerSample>& rows = freq_rows.empty() ? base_rows : freq_rows;
        const std::vector<std::set<PowerFeature>> attempts = {
            {PowerFeature::Intercept, PowerFeature::Freq, PowerFeature::Size,
             PowerFeature::Busy},
            {PowerFeature::Intercept, PowerFeature::Size, PowerFeature::Busy},
            {PowerFeature::Intercept, PowerFeature::Freq},
            {PowerFeature::Intercept},
        };
        for (const auto& features : attempts) {
            if (rows.size() < features.size() + 1) continue;
            try {
                const auto fit = fit_power(rows, features);
                report_rows(rows, fit);
                out.params = fit.params;
                return out;
            } catch (const ModelError&) {
                continue;
            }
        }
    } catch (const ModelError&) {
        out.report.clear();
    }
    return out;
}

} // namespace

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const ScenarioConfig cfg = resolve_scenario(args.scenario, args.config_path);
        if (args.dump_config) {
            out << write_scenario(cfg);
            return kExitOk;
        }
        const auto validated = ValidatedScenario::make(cfg);
        const ParamsFile pf = resolve_params(args.params_path, cfg);
        const ParamSet params = effective_params(cfg, pf.params);

        SimResult sim = simulate(validated, params);
        if (pf.power) {
            const double busy = sim.metrics.busy_total("dpu");
            const double watts = estimate_power(cfg.accelerator, busy, *pf.power);
            sim.metrics.power_w = watts;
            if (watts > 0.0)
                sim.metrics.fps_per_watt = fps_per_watt(sim.metrics.throughput_fps, watts);
        }

        print_metrics_block(out, cfg, sim.metrics);
        if (!args.csv_path.empty()) {
            auto f = open_out(args.csv_path);
            write_metrics_csv(f, sim.metrics);
        }
        if (!args.trace_path.empty()) {
            auto f = open_out(args.trace_path);
            write_trace_csv(f, sim.trace.events);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const ScenarioConfig base = resolve_scenario(args.scenario, args.config_path);
        ValidatedScenario::make(base);
        const ParamsFile pf = resolve_params(args.params_path, base);
        const ParamSet params = effective_params(base, pf.params);

        const std::vector<int> sizes =
            args.sizes.empty() ? std::vector<int>{base.accelerator.ops_per_cycle}
                               : parse_int_list(args.sizes, "--size");
        const std::vector<double> freqs =
            args.freqs.empty() ? std::vector<double>{base.accelerator.freq_mhz}
                               : parse_double_list(args.freqs, "--freq");
        const std::vector<int> workers =
            args.workers.empty() ? std::vector<int>{base.threading.workers}
                                 : parse_int_list(args.workers, "--workers");

        std::vector<SweepPoint> grid;
        for (int b : sizes)
            for (double f : freqs)
                for (int w : workers) grid.push_back({b, f, w});

        // Points run concurrently; rows are joined back in grid order.
        std::vector<std::future<SweepRow>> futures;
        futures.reserve(grid.size());
        std::vector<ScenarioConfig> configs;
        configs.reserve(grid.size());
        for (const auto& p : grid) configs.push_back(apply_sweep_point(base, p));
        for (size_t i = 0; i < grid.size(); ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                const auto scenario = ValidatedScenario::make(configs[i]);
                const SimResult sim = simulate(scenario, params);
                const auto bound = throughput_upper_bound(scenario, params);
                SweepRow row;
                row.ops_per_cycle = grid[i].ops_per_cycle;
                row.freq_mhz = grid[i].freq_mhz;
                row.workers = grid[i].workers;
                row.throughput_fps = sim.metrics.throughput_fps;
                row.busy_dpu = sim.metrics.busy_total("dpu");
                row.occupancy_dpu = sim.metrics.occupancy_total("dpu");
                row.binding_bound = bound.binding_label();
                if (pf.power) {
                    const double watts = estimate_power(configs[i].accelerator,
                                                        row.busy_dpu, *pf.power);
                    row.power_w = watts;
                    if (watts > 0.0)
                        row.fps_per_watt = fps_per_watt(row.throughput_fps, watts);
                }
                return row;
            }));
        }
        std::vector<SweepRow> rows;
        rows.reserve(grid.size());
        for (auto& f : futures) rows.push_back(f.get());

        if (args.out_path.empty()) {
            write_sweep_csv(out, rows);
        } else {
            auto f = open_out(args.out_path);
            write_sweep_csv(f, rows);
            out << "wrote " << rows.size() << " sweep rows to " << args.out_path << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const MeasurementTable table = load_tables(args.tables);
        FitOptions opts;
        opts.seed = args.seed;
        opts.max_evals = args.max_iters;
        const FitResult fit = fit_params(table, opts);

        ParamsFile pf;
        pf.params = fit.params;
        const PowerFitOutcome power =
            fit_power_for_tables(table, fit.params, builtin_provider());
        pf.power = power.params;
        {
            auto f = open_out(args.out_path);
            f << write_params(pf);
        }
        const std::string report_path =
            args.report_path.empty() ? args.out_path + ".report.csv" : args.report_path;
        {
            std::vector<FitReportRow> rows;
            rows.reserve(fit.per_row_error.size());
            for (const auto& r : fit.per_row_error)
                rows.push_back({r.scenario_id, r.metric, r.observed, r.simulated,
                                r.rel_error});
            auto f = open_out(report_path);
            write_fit_report_csv(f, rows);
        }
        if (!power.report.empty()) {
            auto f = open_out(args.out_path + ".power.csv");
            write_power_fit_csv(f, power.report);
        }

        const RowError* worst = nullptr;
        for (const auto& r : fit.per_row_error)
            if (!worst || std::abs(r.rel_error) > std::abs(worst->rel_error)) worst = &r;

        out << "objective: " << format_double(fit.objective) << " after "
            << fit.iterations << " evaluations\n";
        if (worst)
            out << "worst row: " << worst->row_key << " " << worst->metric << " observed "
                << format_double(worst->observed) << " simulated "
                << format_double(worst->simulated) << " (" << fmt("%+.2f", worst->rel_error * 100.0)
                << "%)\n";
        out << "params written to " << args.out_path << ", report to " << report_path
            << "\n";
        if (!fit.converged) {
            err << "warning: no improvement over the analytic warm start\n";
            return kExitNoConvergence;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const ScenarioConfig base = resolve_scenario(args.scenario, args.config_path);
        const auto validated = ValidatedScenario::make(base);
        const ParamsFile pf = resolve_params(args.params_path, base);
        const ParamSet params = effective_params(base, pf.params);

        const std::vector<int> sizes =
            args.sizes.empty() ? std::vector<int>{base.accelerator.ops_per_cycle}
                               : parse_int_list(args.sizes, "--size");
        const std::vector<double> freqs =
            args.freqs.empty() ? std::vector<double>{base.accelerator.freq_mhz}
                               : parse_double_list(args.freqs, "--freq");
        const std::vector<int> workers =
            args.workers.empty() ? std::vector<int>{base.threading.workers}
                                 : parse_int_list(args.workers, "--workers");

        std::vector<SweepPoint> grid;
        for (int b : sizes)
            for (double f : freqs)
                for (int w : workers) grid.push_back({b, f, w});

        const auto rows = saturation_report(validated, params, grid);
        std::vector<SaturationCsvRow> csv_rows;
        csv_rows.reserve(rows.size());
        for (const auto& r : rows)
            csv_rows.push_back({r.point.ops_per_cycle, r.point.freq_mhz, r.point.workers,
                                r.bound_fps, r.binding});

        if (args.out_path.empty()) {
            write_saturation_csv(out, csv_rows);
        } else {
            auto f = open_out(args.out_path);
            write_saturation_csv(f, csv_rows);
        }
        for (const auto& r : rows)
            if (r.knee)
                out << "saturation knee at b" << r.point.ops_per_cycle << " @ "
                    << fmt("%.0f", r.point.freq_mhz) << " MHz, " << r.point.workers
                    << " workers (binding: " << r.binding << ")\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (!args.against_paper)
            throw ValidationError("nothing to do: pass --against-paper");
        if (args.params_path.empty())
            throw ValidationError(
                "a fitted params file is required (--params <file>); run "
                "`dpusim calibrate --tables builtin --out fitted.params` first");
        const ParamsFile pf = read_params_file(args.params_path);
        const std::string report = paper_comparison_report(pf.params);
        if (args.out_path.empty()) {
            out << report;
        } else {
            auto f = open_out(args.out_path);
            f << report;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return map_exception(e, err);
    }
}

} // namespace dpusim::cli
