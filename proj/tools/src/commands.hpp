#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dpusim::cli {

// Exit codes shared by every subcommand:
//   0 success, 1 parse error, 2 validation error, 3 simulation error,
//   4 calibration did not improve on its warm start.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSimulation = 3;
inline constexpr int kExitNoConvergence = 4;

/// Environment variable naming a default params file used when --params is
/// not given.
inline constexpr const char* kParamsEnvVar = "DPUSIM_PARAMS";

struct SimulateArgs {
    std::string scenario;      // builtin id
    std::string config_path;   // or a scenario file (exactly one of the two)
    std::string params_path;
    std::string csv_path;
    std::string trace_path;
    bool dump_config = false;
};
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct SweepArgs {
    std::string scenario;
    std::string config_path;
    std::string params_path;
    std::string sizes;     // comma lists; empty = keep the base value
    std::string freqs;
    std::string workers;
    std::string out_path;  // empty = stdout
};
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct CalibrateArgs {
    std::string tables = "builtin";   // or comma-separated CSV paths
    std::string out_path = "fitted.params";
    std::string report_path;          // empty = <out>.report.csv
    uint64_t seed = 1;
    int max_iters = 10000;
};
int cmd_calibrate(const CalibrateArgs& args, std::ostream& out, std::ostream& err);

struct AnalyzeArgs {
    std::string scenario;
    std::string config_path;
    std::string params_path;
    std::string sizes;
    std::string freqs;
    std::string workers;
    std::string out_path;
};
int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);

struct ReportArgs {
    bool against_paper = false;
    std::string params_path;
    std::string out_path;   // empty = stdout
};
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

} // namespace dpusim::cli
