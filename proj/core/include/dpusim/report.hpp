#pragma once

#include <optional>
#include <string>

#include "dpusim/calibrate.hpp"
#include "dpusim/types.hpp"

namespace dpusim {

/// Constants of the previous system the reference data compares against
/// (Haar Cascade face detection on the host CPU, single thread). Not a
/// buildable scenario; used only for the efficiency comparison.
struct PreviousWork {
    double throughput_fps = 11.67;
    double power_w = 2.3;
    double peak_power_w = 10.1;
    const char* alms = "34,593";
    const char* dsps = "230";
    const char* brams = "44";
};

/// Markdown comparison of simulated metrics against the bundled measurement
/// tables: one section per table, a throughput-per-watt ranking, the two
/// separate power fits, and a discrepancy appendix. Deterministic output.
std::string paper_comparison_report(const ParamSet& params,
                                    const ScenarioProvider& provider = {});

} // namespace dpusim
