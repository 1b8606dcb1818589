#pragma once

/**
 * Divergence Borel-Cantelli lower bound
 *
 *     mu(limsup E_k) >= limsup_Q (sum_{s<=Q} mu(E_s))^2 / sum_{s,t<=Q} mu(E_s & E_t)
 *
 * and the quasi-independence diagnostic used with it.
 */

#include "mdalab/errors.hpp"
#include "mdalab/measure.hpp"
#include "mdalab/psi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace mdalab {

enum class PairSource { exact, monte_carlo, independence_model };

inline std::string to_string(PairSource s) {
    switch (s) {
        case PairSource::exact: return "exact";
        case PairSource::monte_carlo: return "monte-carlo";
        case PairSource::independence_model: return "independence-model";
    }
    return "?";
}

/// Single and pairwise measures of events E_1..E_K (labelled first..first+K-1).
/// Pairs come either from a dense symmetric table or from the model
/// mu(E_s & E_t) = mu(E_s) mu(E_t) for s != t.
class EventStats {
public:
    static EventStats independent(std::vector<double> singles, std::uint64_t first = 1) {
        EventStats s(std::move(singles), first, PairSource::independence_model);
        s.validate_singles();
        return s;
    }

    /// `pairs` is row-major K x K; the diagonal must equal `singles`.
    static EventStats from_table(std::vector<double> singles, std::vector<double> pairs, PairSource source,
                                 std::uint64_t first = 1) {
        EventStats s(std::move(singles), first, source);
        s.validate_singles();
        const std::size_t K = s.singles_.size();
        if (pairs.size() != K * K) throw ValidationError("EventStats: pair table must be K x K");
        for (std::size_t a = 0; a < K; ++a) {
            if (pairs[a * K + a] != s.singles_[a]) throw ValidationError("EventStats: diagonal must equal singles");
            for (std::size_t b = 0; b < K; ++b) {
                double v = pairs[a * K + b];
                if (v != pairs[b * K + a]) throw ValidationError("EventStats: pair table must be symmetric");
                if (!(v >= 0) || v > std::min(s.singles_[a], s.singles_[b]))
                    throw ValidationError("EventStats: pair measure outside [0, min(mu_s, mu_t)]");
            }
        }
        s.pairs_ = std::move(pairs);
        return s;
    }

    std::size_t size() const noexcept { return singles_.size(); }
    std::uint64_t first() const noexcept { return first_; }
    PairSource source() const noexcept { return source_; }

    /// mu(E_s), 1-based position within the range.
    double single(std::size_t s) const { return singles_.at(s - 1); }

    double pair(std::size_t s, std::size_t t) const {
        if (s == t) return single(s);
        if (pairs_.empty()) return single(s) * single(t);
        return pairs_.at((s - 1) * size() + (t - 1));
    }

    /// sum_{s<t} mu(E_s & E_t), given prefix = sum_{s<t} mu(E_s).
    long double pair_row_sum(std::size_t t, long double prefix) const {
        if (pairs_.empty()) return prefix * single(t);
        long double acc = 0;
        const double* row = pairs_.data() + (t - 1) * size();
        for (std::size_t s = 0; s + 1 < t; ++s) acc += row[s];
        return acc;
    }

private:
    EventStats(std::vector<double> singles, std::uint64_t first, PairSource source)
        : singles_(std::move(singles)), first_(first), source_(source) {}

    void validate_singles() const {
        for (double v : singles_)
            if (!(v >= 0 && v <= 1)) throw ValidationError("EventStats: single measures must lie in [0, 1]");
    }

    std::vector<double> singles_;
    std::vector<double> pairs_;
    std::uint64_t first_;
    PairSource source_;
};

struct BoundPoint {
    std::uint64_t Q;
    double bound;        ///< NaN where the double sum is still zero
    double running_max;  ///< limsup proxy over the grid so far
};

/// Second-moment bound at each checkpoint (positions 1..K) of a sorted grid, with the running maximum.
inline std::vector<BoundPoint> bc_scan(const EventStats& stats, const std::vector<std::uint64_t>& grid) {
    std::vector<BoundPoint> out;
    long double singles = 0, doubles = 0;
    std::size_t t = 0;
    double best = 0;
    for (auto Q : grid) {
        if (Q == 0 || Q > stats.size()) throw DomainError("bc_lower_bound: Q outside the event range");
        if (Q < t) throw DomainError("bc_lower_bound: grid must be sorted");
        for (++t; t <= Q; ++t) {
            doubles += stats.single(t) + 2 * stats.pair_row_sum(t, singles);
            singles += stats.single(t);
        }
        t = Q;
        double bound = doubles > 0 ? double(singles * singles / doubles) : std::nan("");
        if (doubles > 0) best = std::max(best, bound);
        out.push_back({Q, bound, best});
    }
    return out;
}

inline double bc_lower_bound(const EventStats& stats, std::uint64_t Q) {
    auto p = bc_scan(stats, {Q}).front();
    if (std::isnan(p.bound)) throw UndefinedRatio("bc_lower_bound: double sum is zero at Q = " + std::to_string(Q));
    return p.bound;
}

struct BoundInterval {
    double low;
    double high;
};

/// Interval bound from CI-bracketed singles and pairs: the quotient is
/// increasing in the singles and decreasing in the pair sum.
inline BoundInterval bc_bound_interval(const EventStats& low, const EventStats& high, std::uint64_t Q) {
    if (low.size() != high.size()) throw ValidationError("bc_bound_interval: mismatched ranges");
    long double s_lo = 0, s_hi = 0, d_lo = 0, d_hi = 0;
    for (std::size_t t = 1; t <= Q; ++t) {
        d_lo += low.single(t) + 2 * low.pair_row_sum(t, s_lo);
        d_hi += high.single(t) + 2 * high.pair_row_sum(t, s_hi);
        s_lo += low.single(t);
        s_hi += high.single(t);
    }
    if (!(d_lo > 0)) throw UndefinedRatio("bc_bound_interval: lower double sum is zero");
    return {double(std::min<long double>(1, s_lo * s_lo / d_hi)), double(std::min<long double>(1, s_hi * s_hi / d_lo))};
}

/// |H(q) & H(r)| / (psi(q) (ln q)^(n-1) psi(r) (ln r)^(n-1)).
inline double quasi_independence_ratio(std::uint64_t q, std::uint64_t r, const ApproxFunction& f, int n,
                                       const MeasureEstimate& intersection) {
    if (q == r) throw DomainError("quasi_independence_ratio: q and r must differ");
    if (n >= 2 && (q < 2 || r < 2)) throw DomainError("quasi_independence_ratio: q, r >= 2 needed when n >= 2");
    auto factor = [&](std::uint64_t s) {
        double w = n >= 2 ? std::pow(std::log(double(s)), n - 1) : 1.0;
        return f.eval(s) * w;
    };
    double den = factor(q) * factor(r);
    if (!(den > 0)) throw UndefinedRatio("quasi_independence_ratio: zero denominator");
    return intersection.value / den;
}

}  // namespace mdalab
