#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpusim/des.hpp"
#include "dpusim/types.hpp"

namespace dpusim {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Measurement tables. Header is fixed:
///   scenario_id,throughput_fps,busy_total_pct,occupancy_fd_pct,
///   occupancy_fer_pct,power_w,peak_power_w,freq_mhz,ops_per_cycle,workers
/// Empty cells mean "not reported". Fractions live in [0,1] in memory and
/// as percent in the file.
extern const char* const kMeasurementsCsvHeader;

MeasurementTable read_measurements_csv(std::istream& in, const std::string& file_label,
                                       const std::string& source);
MeasurementTable read_measurements_file(const std::string& path, const std::string& source);
void write_measurements_csv(std::ostream& out, const MeasurementTable& table);

/// Trace export: t_ms,worker_id,frame_id,stage,resource,kind with timestamps
/// printed to 3 decimal places, rows in event order.
void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& events);
std::vector<TraceEvent> read_trace_csv(std::istream& in, const std::string& file_label);

/// One row of a sweep result.
struct SweepRow {
    int ops_per_cycle = 0;
    double freq_mhz = 0.0;
    int workers = 0;
    double throughput_fps = 0.0;
    double busy_dpu = 0.0;        // fraction
    double occupancy_dpu = 0.0;   // fraction
    std::optional<double> power_w;
    std::optional<double> fps_per_watt;
    std::string binding_bound;
};

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& file_label);

struct SaturationCsvRow {
    int ops_per_cycle = 0;
    double freq_mhz = 0.0;
    int workers = 0;
    double bound_fps = 0.0;
    std::string binding;
};

void write_saturation_csv(std::ostream& out, const std::vector<SaturationCsvRow>& rows);
std::vector<SaturationCsvRow> read_saturation_csv(std::istream& in,
                                                  const std::string& file_label);

/// Calibration fit report: scenario_id,metric,observed,simulated,rel_error.
struct FitReportRow {
    std::string scenario_id;
    std::string metric;
    double observed = 0.0;
    double simulated = 0.0;
    double rel_error = 0.0;
};

void write_fit_report_csv(std::ostream& out, const std::vector<FitReportRow>& rows);
std::vector<FitReportRow> read_fit_report_csv(std::istream& in,
                                              const std::string& file_label);

/// Power fit report: row_id,observed_w,predicted_w,residual_w.
struct PowerFitRow {
    std::string row_id;
    double observed_w = 0.0;
    double predicted_w = 0.0;
    double residual_w = 0.0;
};

void write_power_fit_csv(std::ostream& out, const std::vector<PowerFitRow>& rows);

} // namespace dpusim
