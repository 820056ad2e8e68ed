#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dpusim/types.hpp"

namespace dpusim {

/// Scenario and parameter files share one dialect: '#' comments,
/// `[section]` or `[section LABEL]` headers, `key = value` entries.
/// See data/scenario_example.conf for a complete annotated example.

ScenarioConfig read_scenario(std::istream& in, const std::string& file_label);
ScenarioConfig read_scenario_file(const std::string& path);
std::string write_scenario(const ScenarioConfig& config);

/// A parameter file: the calibratable latency parameters plus an optional
/// fitted power model.
struct ParamsFile {
    ParamSet params;
    std::optional<PowerParams> power;

    bool operator==(const ParamsFile&) const = default;
};

ParamsFile read_params(std::istream& in, const std::string& file_label);
ParamsFile read_params_file(const std::string& path);
std::string write_params(const ParamsFile& file);

} // namespace dpusim
