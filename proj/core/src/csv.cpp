#include "dpusim/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpusim/errors.hpp"

namespace dpusim {

const char* const kMeasurementsCsvHeader =
    "scenario_id,throughput_fps,busy_total_pct,occupancy_fd_pct,occupancy_fer_pct,"
    "power_w,peak_power_w,freq_mhz,ops_per_cycle,workers";

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double_cell(const std::string& cell, const std::string& file, int line,
                         const std::string& col) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw ParseError(file, line, col, "not a number: '" + cell + "'");
    return v;
}

int parse_int_cell(const std::string& cell, const std::string& file, int line,
                   const std::string& col) {
    int v = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw ParseError(file, line, col, "not an integer: '" + cell + "'");
    return v;
}

std::optional<double> opt_double(const std::string& cell, const std::string& file,
                                 int line, const std::string& col) {
    if (cell.empty()) return std::nullopt;
    return parse_double_cell(cell, file, line, col);
}

std::string cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

void expect_header(const std::string& got, const std::string& want,
                   const std::string& file) {
    std::string g = got;
    if (!g.empty() && g.back() == '\r') g.pop_back();
    if (g != want)
        throw ParseError(file, 1, "", "unexpected header: '" + g + "'");
}

} // namespace

MeasurementTable read_measurements_csv(std::istream& in, const std::string& file,
                                       const std::string& source) {
    MeasurementTable table;
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(file, 1, "", "empty measurements file");
    expect_header(line, kMeasurementsCsvHeader, file);

    int lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 10)
            throw ParseError(file, lineno, "",
                             "expected 10 columns, got " + std::to_string(cells.size()));
        MeasurementRow row;
        row.scenario_id = cells[0];
        row.source = source;
        if (row.scenario_id.empty())
            throw ParseError(file, lineno, "scenario_id", "must not be empty");
        row.throughput_fps = opt_double(cells[1], file, lineno, "throughput_fps");
        auto pct = [&](const std::string& c, const char* col) -> std::optional<double> {
            auto v = opt_double(c, file, lineno, col);
            if (v && (*v < 0.0 || *v > 100.0))
                throw ParseError(file, lineno, col, "percentage out of [0,100]");
            return v;
        };
        row.busy_total_pct = pct(cells[2], "busy_total_pct");
        row.occupancy_fd_pct = pct(cells[3], "occupancy_fd_pct");
        row.occupancy_fer_pct = pct(cells[4], "occupancy_fer_pct");
        row.power_w = opt_double(cells[5], file, lineno, "power_w");
        row.peak_power_w = opt_double(cells[6], file, lineno, "peak_power_w");
        row.freq_mhz = opt_double(cells[7], file, lineno, "freq_mhz");
        if (!cells[8].empty())
            row.ops_per_cycle = parse_int_cell(cells[8], file, lineno, "ops_per_cycle");
        if (!cells[9].empty())
            row.workers = parse_int_cell(cells[9], file, lineno, "workers");
        table.rows.push_back(std::move(row));
    }
    return table;
}

MeasurementTable read_measurements_file(const std::string& path,
                                        const std::string& source) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "", "cannot open file");
    return read_measurements_csv(in, path, source);
}

void write_measurements_csv(std::ostream& out, const MeasurementTable& table) {
    out << kMeasurementsCsvHeader << "\n";
    for (const auto& r : table.rows) {
        out << r.scenario_id << ',' << cell(r.throughput_fps) << ','
            << cell(r.busy_total_pct) << ',' << cell(r.occupancy_fd_pct) << ','
            << cell(r.occupancy_fer_pct) << ',' << cell(r.power_w) << ','
            << cell(r.peak_power_w) << ',' << cell(r.freq_mhz) << ','
            << (r.ops_per_cycle ? std::to_string(*r.ops_per_cycle) : std::string()) << ','
            << (r.workers ? std::to_string(*r.workers) : std::string()) << "\n";
    }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& events) {
    out << "t_ms,worker_id,frame_id,stage,resource,kind\n";
    char buf[64];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof(buf), "%.3f", e.t_ms);
        out << buf << ',' << e.worker_id << ',' << e.frame_id << ',' << e.stage << ','
            << e.resource << ',' << to_string(e.kind) << "\n";
    }
}

std::vector<TraceEvent> read_trace_csv(std::istream& in, const std::string& file) {
    std::vector<TraceEvent> events;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "", "empty trace file");
    expect_header(line, "t_ms,worker_id,frame_id,stage,resource,kind", file);
    int lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 6)
            throw ParseError(file, lineno, "",
                             "expected 6 columns, got " + std::to_string(cells.size()));
        TraceEvent e;
        e.t_ms = parse_double_cell(cells[0], file, lineno, "t_ms");
        e.worker_id = parse_int_cell(cells[1], file, lineno, "worker_id");
        {
            int64_t fid = 0;
            auto res = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), fid);
            if (res.ec != std::errc{} || res.ptr != cells[2].data() + cells[2].size())
                throw ParseError(file, lineno, "frame_id", "not an integer: '" + cells[2] + "'");
            e.frame_id = fid;
        }
        e.stage = cells[3];
        e.resource = cells[4];
        auto kind = trace_kind_from_string(cells[5]);
        if (!kind) throw ParseError(file, lineno, "kind", "unknown kind '" + cells[5] + "'");
        e.kind = *kind;
        events.push_back(std::move(e));
    }
    return events;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "ops_per_cycle,freq_mhz,workers,throughput_fps,busy_dpu_pct,"
           "occupancy_dpu_pct,power_w,fps_per_watt,binding_bound\n";
    for (const auto& r : rows) {
        out << r.ops_per_cycle << ',' << format_double(r.freq_mhz) << ',' << r.workers
            << ',' << format_double(r.throughput_fps) << ','
            << format_double(r.busy_dpu * 100.0) << ','
            << format_double(r.occupancy_dpu * 100.0) << ',' << cell(r.power_w) << ','
            << cell(r.fps_per_watt) << ',' << r.binding_bound << "\n";
    }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& file) {
    std::vector<SweepRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "", "empty sweep file");
    expect_header(line,
                  "ops_per_cycle,freq_mhz,workers,throughput_fps,busy_dpu_pct,"
                  "occupancy_dpu_pct,power_w,fps_per_watt,binding_bound",
                  file);
    int lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 9)
            throw ParseError(file, lineno, "",
                             "expected 9 columns, got " + std::to_string(cells.size()));
        SweepRow r;
        r.ops_per_cycle = parse_int_cell(cells[0], file, lineno, "ops_per_cycle");
        r.freq_mhz = parse_double_cell(cells[1], file, lineno, "freq_mhz");
        r.workers = parse_int_cell(cells[2], file, lineno, "workers");
        r.throughput_fps = parse_double_cell(cells[3], file, lineno, "throughput_fps");
        r.busy_dpu = parse_double_cell(cells[4], file, lineno, "busy_dpu_pct") / 100.0;
        r.occupancy_dpu =
            parse_double_cell(cells[5], file, lineno, "occupancy_dpu_pct") / 100.0;
        r.power_w = opt_double(cells[6], file, lineno, "power_w");
        r.fps_per_watt = opt_double(cells[7], file, lineno, "fps_per_watt");
        r.binding_bound = cells[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_saturation_csv(std::ostream& out, const std::vector<SaturationCsvRow>& rows) {
    out << "ops_per_cycle,freq_mhz,workers,bound_fps,binding\n";
    for (const auto& r : rows)
        out << r.ops_per_cycle << ',' << format_double(r.freq_mhz) << ',' << r.workers
            << ',' << format_double(r.bound_fps) << ',' << r.binding << "\n";
}

std::vector<SaturationCsvRow> read_saturation_csv(std::istream& in,
                                                  const std::string& file) {
    std::vector<SaturationCsvRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "", "empty saturation file");
    expect_header(line, "ops_per_cycle,freq_mhz,workers,bound_fps,binding", file);
    int lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 5)
            throw ParseError(file, lineno, "",
                             "expected 5 columns, got " + std::to_string(cells.size()));
        SaturationCsvRow r;
        r.ops_per_cycle = parse_int_cell(cells[0], file, lineno, "ops_per_cycle");
        r.freq_mhz = parse_double_cell(cells[1], file, lineno, "freq_mhz");
        r.workers = parse_int_cell(cells[2], file, lineno, "workers");
        r.bound_fps = parse_double_cell(cells[3], file, lineno, "bound_fps");
        r.binding = cells[4];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_fit_report_csv(std::ostream& out, const std::vector<FitReportRow>& rows) {
    out << "scenario_id,metric,observed,simulated,rel_error\n";
    for (const auto& r : rows)
        out << r.scenario_id << ',' << r.metric << ',' << format_double(r.observed) << ','
            << format_double(r.simulated) << ',' << format_double(r.rel_error) << "\n";
}

std::vector<FitReportRow> read_fit_report_csv(std::istream& in, const std::string& file) {
    std::vector<FitReportRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "", "empty fit report");
    expect_header(line, "scenario_id,metric,observed,simulated,rel_error", file);
    int lineno = 1;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 5)
            throw ParseError(file, lineno, "",
                             "expected 5 columns, got " + std::to_string(cells.size()));
        FitReportRow r;
        r.scenario_id = cells[0];
        r.metric = cells[1];
        r.observed = parse_double_cell(cells[2], file, lineno, "observed");
        r.simulated = parse_double_cell(cells[3], file, lineno, "simulated");
        r.rel_error = parse_double_cell(cells[4], file, lineno, "rel_error");
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_power_fit_csv(std::ostream& out, const std::vector<PowerFitRow>& rows) {
    out << "row_id,observed_w,predicted_w,residual_w\n";
    for (const auto& r : rows)
        out << r.row_id << ',' << format_double(r.observed_w) << ','
            << format_double(r.predicted_w) << ',' << format_double(r.residual_w) << "\n";
}

} // namespace dpusim
