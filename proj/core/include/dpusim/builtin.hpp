#pragma once

#include <string>
#include <vector>

#include "dpusim/types.hpp"

namespace dpusim {

/// Scenario ids bundled with the library:
///   b512-1t .. b4096-2t        size x thread grid at 400 MHz
///   b512-2t-f300/-f500/-f600   frequency variants of b512-2t
std::vector<std::string> builtin_scenario_ids();

/// Returns the bundled scenario. Stage costs are placeholders; run a
/// calibration (or load a fitted params file) for realistic timings.
/// Throws ValidationError for unknown ids, listing the valid ones.
ScenarioConfig builtin_scenario(const std::string& id);

/// Sources of the bundled measurement rows.
inline constexpr const char* kSourceBaseline = "baseline";
inline constexpr const char* kSourceFreqSweep = "freq-sweep";
inline constexpr const char* kSourceSizeSweep = "size-sweep";

std::vector<std::string> builtin_measurement_sources();

/// Raw CSV text of one bundled table (identical to the file under data/).
const char* builtin_measurements_csv(const std::string& source);

/// Every bundled measurement row, tagged with its source table. Rows for the
/// same scenario may repeat across sources (repeated observations).
MeasurementTable builtin_measurements();

} // namespace dpusim
