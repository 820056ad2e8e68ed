#pragma once

#include <set>
#include <string>
#include <vector>

#include "dpusim/types.hpp"

namespace dpusim {

/// Dynamic power estimate in watts:
///   c0 + c_freq*(f/400) + c_size*log2(B/512) + c_busy*busy_dpu_total
double estimate_power(const AcceleratorSpec& accel, double busy_dpu_total,
                      const PowerParams& pp);

/// Throughput per watt of dynamic power. Zero throughput gives 0; throws
/// ModelError on nonpositive power.
double fps_per_watt(double throughput_fps, double dynamic_watts);

enum class PowerFeature { Intercept, Freq, Size, Busy };

const char* to_string(PowerFeature f);

/// One observation for the power fit. busy_dpu_total is only read when the
/// Busy feature is enabled.
struct PowerSample {
    std::string row_id;
    double power_w = 0.0;
    double freq_mhz = 400.0;
    int ops_per_cycle = 512;
    double busy_dpu_total = 0.0;
};

struct PowerFit {
    PowerParams params;
    std::vector<double> residuals;   // observed - predicted, per sample
    double max_abs_residual = 0.0;
};

/// Ordinary least squares over the enabled features. Needs at least one more
/// sample than enabled features; a rank-deficient design throws ModelError
/// naming the collinear feature.
PowerFit fit_power(const std::vector<PowerSample>& samples,
                   const std::set<PowerFeature>& features);

} // namespace dpusim
