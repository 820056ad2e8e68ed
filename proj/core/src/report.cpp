#include "dpusim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "dpusim/builtin.hpp"
#include "dpusim/des.hpp"
#include "dpusim/errors.hpp"
#include "dpusim/latency.hpp"
#include "dpusim/power.hpp"
#include "dpusim/validate.hpp"

namespace dpusim {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string fps_s(double v) { return fmt("%.2f", v); }
std::string watt_s(double v) { return fmt("%.1f", v); }
std::string rel_s(double v) { return fmt("%+.2f%%", v * 100.0); }
std::string ratio_s(double v) { return fmt("%.2f", v); }

struct SimCache {
    std::map<std::string, MetricsReport> metrics;

    const MetricsReport& get(const std::string& id, const ParamSet& params,
                             const ScenarioProvider& provider) {
        auto it = metrics.find(id);
        if (it != metrics.end()) return it->second;
        const auto scenario = ValidatedScenario::make(provider(id));
        auto [m, trace] = simulate(scenario, params);
        return metrics.emplace(id, std::move(m)).first->second;
    }
};

} // namespace

std::string paper_comparison_report(const ParamSet& params,
                                    const ScenarioProvider& provider_in) {
    const ScenarioProvider provider =
        provider_in ? provider_in : builtin_provider();
    const MeasurementTable all = builtin_measurements();
    SimCache sims;
    const PreviousWork prev;

    std::ostringstream out;
    out << "# Simulation vs reference measurements\n\n";
    out << "Deterministic simulation with the supplied parameter set, compared "
           "against the bundled measurement tables. Throughput in FPS, power in "
           "watts of dynamic power (board idle 7.8 W excluded), percentages as "
           "reported.\n";

    const struct {
        const char* source;
        const char* title;
    } sections[] = {
        {kSourceBaseline, "Baseline (b512 @ 400 MHz, one vs two worker threads)"},
        {kSourceFreqSweep, "Frequency sweep (b512, two workers)"},
        {kSourceSizeSweep, "Size sweep (400 MHz)"},
    };

    for (const auto& section : sections) {
        out << "\n## " << section.title << "\n\n";
        out << "| scenario | metric | observed | simulated | rel. error |\n";
        out << "|---|---|---|---|---|\n";
        for (const auto& row : all.rows) {
            if (row.source != section.source) continue;
            const MetricsReport& m = sims.get(row.scenario_id, params, provider);
            if (row.throughput_fps) {
                const double rel = (m.throughput_fps - *row.throughput_fps) /
                                   *row.throughput_fps;
                out << "| " << row.scenario_id << " | throughput [FPS] | "
                    << fps_s(*row.throughput_fps) << " | " << fps_s(m.throughput_fps)
                    << " | " << rel_s(rel) << " |\n";
            }
            if (auto occ_pct = row.occupancy_total_pct()) {
                const double sim_occ = m.occupancy_total("dpu") * 100.0;
                out << "| " << row.scenario_id << " | dpu occupancy [%] | "
                    << fmt("%.2f", *occ_pct) << " | " << fmt("%.2f", sim_occ) << " | "
                    << rel_s((sim_occ - *occ_pct) / *occ_pct) << " |\n";
            }
            if (row.busy_total_pct) {
                const double sim_busy = m.busy_total("dpu") * 100.0;
                out << "| " << row.scenario_id << " | dpu busy [%] | "
                    << fmt("%.2f", *row.busy_total_pct) << " | " << fmt("%.2f", sim_busy)
                    << " | " << rel_s((sim_busy - *row.busy_total_pct) / *row.busy_total_pct)
                    << " |\n";
            }
        }
    }

    // Power fits: the frequency-sweep table is fitted separately from the
    // baseline+size tables because they disagree at 400 MHz / two workers.
    out << "\n## Power model fits\n\n";
    auto collect = [&](std::initializer_list<const char*> sources) {
        std::vector<PowerSample> samples;
        for (const auto& row : all.rows) {
            bool wanted = false;
            for (const char* s : sources) wanted |= row.source == s;
            if (!wanted || !row.power_w) continue;
            const MetricsReport& m = sims.get(row.scenario_id, params, provider);
            PowerSample s;
            s.row_id = row.source + "/" + row.scenario_id;
            s.power_w = *row.power_w;
            s.freq_mhz = row.freq_mhz.value_or(kRefFreqMhz);
            s.ops_per_cycle = row.ops_per_cycle.value_or(512);
            s.busy_dpu_total = m.busy_total("dpu");
            samples.push_back(std::move(s));
        }
        return samples;
    };

    const auto freq_fit =
        fit_power(collect({kSourceFreqSweep}), {PowerFeature::Intercept, PowerFeature::Freq});
    out << "Frequency sweep, features {c0, c_freq}: c0 = " << fmt("%.3f", freq_fit.params.c0_w)
        << " W, c_freq = " << fmt("%.3f", freq_fit.params.c_freq_w)
        << " W per (f/400), max |residual| = " << fmt("%.3f", freq_fit.max_abs_residual)
        << " W\n\n";
    const auto base_fit =
        fit_power(collect({kSourceBaseline, kSourceSizeSweep}),
                  {PowerFeature::Intercept, PowerFeature::Size, PowerFeature::Busy});
    out << "Baseline + size sweep, features {c0, c_size, c_busy}: c0 = "
        << fmt("%.3f", base_fit.params.c0_w) << " W, c_size = "
        << fmt("%.3f", base_fit.params.c_size_w) << " W per log2(B/512), c_busy = "
        << fmt("%.3f", base_fit.params.c_busy_w) << " W, max |residual| = "
        << fmt("%.3f", base_fit.max_abs_residual) << " W\n";

    // FPS per watt ranking over the size sweep, annotated with the two
    // reference efficiency figures (6.12 single thread, 9.26 two threads).
    out << "\n## Throughput per watt (size sweep ranking)\n\n";
    out << "| rank | scenario | observed FPS/W | simulated FPS/W |\n";
    out << "|---|---|---|---|\n";
    struct Ranked {
        std::string id;
        double observed;
        double simulated;
    };
    std::vector<Ranked> ranking;
    for (const auto& row : all.rows) {
        if (row.source != std::string(kSourceSizeSweep)) continue;
        if (!row.throughput_fps || !row.power_w) continue;
        const MetricsReport& m = sims.get(row.scenario_id, params, provider);
        ranking.push_back({row.scenario_id,
                           fps_per_watt(*row.throughput_fps, *row.power_w),
                           fps_per_watt(m.throughput_fps, *row.power_w)});
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const Ranked& a, const Ranked& b) { return a.observed > b.observed; });
    for (size_t i = 0; i < ranking.size(); ++i)
        out << "| " << (i + 1) << " | " << ranking[i].id << " | "
            << ratio_s(ranking[i].observed) << " | " << ratio_s(ranking[i].simulated)
            << " |\n";
    out << "\nReference efficiency figures: 6.12 FPS/W (b512, one thread) and "
           "9.26 FPS/W (b512, two threads).\n";

    // Efficiency vs the previous system.
    const double prev_eff = fps_per_watt(prev.throughput_fps, prev.power_w);
    const double ours_eff = fps_per_watt(25.00, 2.7);
    out << "\n## Comparison with the previous system\n\n";
    out << "Previous system (Haar Cascade on the host CPU, " << prev.alms << " ALMs, "
        << prev.dsps << " DSPs, " << prev.brams << " BRAMs): "
        << fps_s(prev.throughput_fps) << " FPS at " << watt_s(prev.power_w)
        << " W dynamic = " << ratio_s(prev_eff) << " FPS/W.\n\n";
    out << "Two-thread b512: " << ratio_s(ours_eff) << " FPS/W, a "
        << ratio_s(ours_eff / prev_eff) << "x efficiency gain recomputed from the "
        << "table rows. The reference data quotes a 2.4x gain; the basis of that "
        << "figure is not derivable from the rows, so both numbers are shown.\n";

    out << "\n## Discrepancy notes\n\n";
    out << "- The baseline and frequency-sweep tables disagree on the dynamic power "
           "of b512 with two workers at 400 MHz (2.7 W vs 2.0 W). The power model is "
           "therefore fitted per table group, never across the disagreement.\n";
    out << "- Observed throughput is equal at 400 and 500 MHz (25.00 FPS) yet jumps "
           "at 600 MHz (27.78 FPS); no smooth single-bottleneck model reproduces "
           "that exactly, so this row is flagged rather than fitted tightly.\n";
    out << "- The peak-power columns of the baseline and frequency-sweep tables "
           "disagree at the shared 400 MHz point (10.5 W vs 11.4 W); dynamic power "
           "is modeled, peak is carried as reported.\n";
    out << "- Size label 2034 is kept verbatim; 2304 is the nearest standard array "
           "size.\n";
    return out.str();
}

} // namespace dpusim
