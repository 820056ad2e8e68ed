#pragma once

#include <string>
#include <vector>

#include "dpusim/types.hpp"

namespace dpusim {

/// Checks every structural invariant of a scenario and returns *all*
/// violations, not just the first.
std::vector<std::string> validate_scenario_errors(const ScenarioConfig& config);

/// A scenario that passed validation. Immutable; safe to share read-only.
class ValidatedScenario {
public:
    /// Throws ValidationError listing every violation if the config is bad.
    static ValidatedScenario make(const ScenarioConfig& config);

    const ScenarioConfig& config() const { return config_; }
    const ScenarioConfig* operator->() const { return &config_; }

private:
    explicit ValidatedScenario(ScenarioConfig config) : config_(std::move(config)) {}
    ScenarioConfig config_;
};

} // namespace dpusim
