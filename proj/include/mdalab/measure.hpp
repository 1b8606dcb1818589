#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

namespace mdalab {

enum class Provenance { exact, closed_form, numeric_exact, monte_carlo };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::exact: return "exact";
        case Provenance::closed_form: return "closed-form";
        case Provenance::numeric_exact: return "numeric-exact";
        case Provenance::monte_carlo: return "monte-carlo";
    }
    return "?";
}

/// Two-sided 95% quantile of the standard normal.
inline constexpr double kZ95 = 1.959963984540054;

/// Hits below which the normal approximation gives way to Clopper-Pearson.
inline constexpr std::uint64_t kExactCiThreshold = 30;

/// 95% confidence interval for a binomial proportion. Normal approximation,
/// or exact Clopper-Pearson bounds when hits or misses are fewer than 30.
inline std::pair<double, double> binomial_ci(std::uint64_t hits, std::uint64_t samples) {
    if (samples == 0) return {0.0, 1.0};
    const double n = double(samples);
    const double p = double(hits) / n;
    if (std::min(hits, samples - hits) < kExactCiThreshold) {
        const double alpha = 1.0 - 0.95;
        double lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(double(hits), n - hits + 1, alpha / 2);
        double hi = hits == samples ? 1.0 : boost::math::ibeta_inv(double(hits) + 1, n - hits, 1 - alpha / 2);
        return {std::min(lo, p), std::max(hi, p)};
    }
    double half = kZ95 * std::sqrt(p * (1 - p) / n);
    return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

/// A measure in [0, 1] together with how it was obtained.
struct MeasureEstimate {
    double value = 0;
    Provenance provenance = Provenance::exact;
    double error_bound = 0;  ///< achieved absolute error for numeric-exact values
    std::uint64_t samples = 0;
    std::uint64_t hits = 0;
    std::uint64_t seed = 0;
    std::string generator;
    double ci_low = 0;
    double ci_high = 0;

    static MeasureEstimate exact(double v) { return {v, Provenance::exact, 0, 0, 0, 0, {}, v, v}; }
    static MeasureEstimate closed_form(double v) { return {v, Provenance::closed_form, 0, 0, 0, 0, {}, v, v}; }
    static MeasureEstimate numeric(double v, double err) {
        return {v, Provenance::numeric_exact, err, 0, 0, 0, {}, v - err, v + err};
    }
    static MeasureEstimate monte_carlo(std::uint64_t hits, std::uint64_t samples, std::uint64_t seed,
                                       std::string generator) {
        MeasureEstimate m;
        m.provenance = Provenance::monte_carlo;
        m.samples = samples;
        m.hits = hits;
        m.seed = seed;
        m.generator = std::move(generator);
        m.value = samples ? double(hits) / double(samples) : 0.0;
        std::tie(m.ci_low, m.ci_high) = binomial_ci(hits, samples);
        return m;
    }

    bool is_monte_carlo() const noexcept { return provenance == Provenance::monte_carlo; }

    /// Binomial standard error sqrt(p(1-p)/N); zero for non-sampled values.
    double std_error() const {
        if (!is_monte_carlo() || samples == 0) return 0.0;
        return std::sqrt(value * (1 - value) / double(samples));
    }
};

}  // namespace mdalab
