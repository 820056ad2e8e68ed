#pragma once

#include <stdexcept>
#include <string>

namespace dpusim {

/// Config/CSV file could not be parsed. Carries file, line and key so the
/// CLI can point at the offending spot.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, int line, std::string key, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) +
                             (key.empty() ? "" : " (key '" + key + "')") + ": " + what),
          file_(std::move(file)), line_(line), key_(std::move(key)) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::string file_;
    int line_;
    std::string key_;
};

/// A scenario or parameter set violates a structural constraint.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Simulation failed (event budget exceeded, empty measurement window, ...).
/// diagnostics() carries the tail of the event trace when available.
class SimError : public std::runtime_error {
public:
    SimError(const std::string& what, std::string diagnostics = {})
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const { return diagnostics_; }

private:
    std::string diagnostics_;
};

/// Model evaluation failed (missing stage parameter, inconsistent inputs).
class ModelError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Calibration failed outright (empty table, unbuildable row).
class FitError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dpusim
