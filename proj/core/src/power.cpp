#include "dpusim/power.hpp"

#include <cmath>

#include "dpusim/errors.hpp"
#include "dpusim/latency.hpp"

namespace dpusim {

double estimate_power(const AcceleratorSpec& accel, double busy_dpu_total,
                      const PowerParams& pp) {
    const double f_norm = accel.freq_mhz / kRefFreqMhz;
    const double size_norm =
        std::log2(static_cast<double>(accel.ops_per_cycle) / kRefOpsPerCycle);
    return pp.c0_w + pp.c_freq_w * f_norm + pp.c_size_w * size_norm +
           pp.c_busy_w * busy_dpu_total;
}

double fps_per_watt(double throughput_fps, double dynamic_watts) {
    if (!(dynamic_watts > 0.0))
        throw ModelError("fps_per_watt: dynamic power must be > 0");
    if (throughput_fps == 0.0) return 0.0;
    return throughput_fps / dynamic_watts;
}

const char* to_string(PowerFeature f) {
    switch (f) {
        case PowerFeature::Intercept: return "c0";
        case PowerFeature::Freq: return "c_freq";
        case PowerFeature::Size: return "c_size";
        case PowerFeature::Busy: return "c_busy";
    }
    return "?";
}

namespace {

double feature_value(PowerFeature f, const PowerSample& s) {
    switch (f) {
        case PowerFeature::Intercept: return 1.0;
        case PowerFeature::Freq: return s.freq_mhz / kRefFreqMhz;
        case PowerFeature::Size:
            return std::log2(static_cast<double>(s.ops_per_cycle) / kRefOpsPerCycle);
        case PowerFeature::Busy: return s.busy_dpu_total;
    }
    return 0.0;
}

} // namespace

PowerFit fit_power(const std::vector<PowerSample>& samples,
                   const std::set<PowerFeature>& features) {
    if (features.empty()) throw ModelError("fit_power: no features enabled");
    const size_t k = features.size();
    if (samples.size() < k + 1)
        throw ModelError("fit_power: need at least " + std::to_string(k + 1) +
                         " samples for " + std::to_string(k) + " features, got " +
                         std::to_string(samples.size()));

    std::vector<PowerFeature> cols(features.begin(), features.end());
    const size_t n = samples.size();

    // Normal equations (X^T X) b = X^T y, solved with partial pivoting.
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    for (size_t r = 0; r < n; ++r) {
        for (size_t i = 0; i < k; ++i) {
            const double xi = feature_value(cols[i], samples[r]);
            for (size_t j = 0; j < k; ++j)
                a[i][j] += xi * feature_value(cols[j], samples[r]);
            a[i][k] += xi * samples[r].power_w;
        }
    }

    for (size_t p = 0; p < k; ++p) {
        size_t best = p;
        for (size_t r = p + 1; r < k; ++r)
            if (std::fabs(a[r][p]) > std::fabs(a[best][p])) best = r;
        std::swap(a[p], a[best]);
        if (std::fabs(a[p][p]) < 1e-9) {
            throw ModelError(std::string("fit_power: rank-deficient design; feature ") +
                             to_string(cols[p]) +
                             " is collinear with the others on this data");
        }
        for (size_t r = 0; r < k; ++r) {
            if (r == p) continue;
            const double factor = a[r][p] / a[p][p];
            for (size_t c = p; c <= k; ++c) a[r][c] -= factor * a[p][c];
        }
    }

    PowerFit fit;
    for (size_t i = 0; i < k; ++i) {
        const double coef = a[i][k] / a[i][i];
        switch (cols[i]) {
            case PowerFeature::Intercept: fit.params.c0_w = coef; break;
            case PowerFeature::Freq: fit.params.c_freq_w = coef; break;
            case PowerFeature::Size: fit.params.c_size_w = coef; break;
            case PowerFeature::Busy: fit.params.c_busy_w = coef; break;
        }
    }

    fit.residuals.reserve(n);
    for (const auto& s : samples) {
        AcceleratorSpec accel;
        accel.ops_per_cycle = s.ops_per_cycle;
        accel.freq_mhz = s.freq_mhz;
        const double pred = estimate_power(accel, s.busy_dpu_total, fit.params);
        const double res = s.power_w - pred;
        fit.residuals.push_back(res);
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::fabs(res));
    }
    return fit;
}

} // namespace dpusim
