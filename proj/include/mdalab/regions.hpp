#pragma once

/**
 * Measures of single approximation domains and of 1-D truncated unions.
 *
 * A q-slice is {x in [0,1]^n : dist(q x_i) combined < delta} where dist is
 * ||.|| (plain) or ||.||' (coprime) and the combination is the product
 * (hyperbolic domains) or max^n (cubical domains). For x uniform, ||qx|| is
 * uniform on [0, 1/2] whatever q is; ||qx||' has the piecewise-linear law
 * built by coprime_dist_cdf. That law is a mixture of uniforms, so the
 * coprime product measure is a finite mixture of the plain closed form
 *
 *     P(prod U_i < s) = s sum_{k<n} (ln 1/s)^k / k!.
 */

#include "mdalab/arith.hpp"
#include "mdalab/errors.hpp"
#include "mdalab/interval_union.hpp"
#include "mdalab/measure.hpp"
#include "mdalab/psi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <numeric>
#include <vector>

namespace mdalab {

enum class Mode { product, max };

inline std::string to_string(Mode m) { return m == Mode::product ? "product" : "max"; }

struct RegionSpec {
    std::uint64_t q = 1;
    int n = 1;
    double delta = 0;  ///< psi(q)
    Mode mode = Mode::product;
    bool coprime = false;
};

inline constexpr double kDefaultConvolutionTol = 1e-9;

/// Default cap on candidate intervals for 1-D truncated unions (16 bytes each).
inline constexpr std::uint64_t kDefaultIntervalBudget = 20'000'000;

/// Non-decreasing piecewise-linear F on [0, T] with F(0) = 0 and F(T) = 1.
class PiecewiseCdf {
public:
    PiecewiseCdf(std::vector<double> breaks, std::vector<double> slopes)
        : x_(std::move(breaks)), slope_(std::move(slopes)), F_(x_.size(), 0.0) {
        if (x_.size() < 2 || slope_.size() + 1 != x_.size() || x_.front() != 0)
            throw DomainError("PiecewiseCdf: need breakpoints 0 = x0 < ... < xm and one slope per piece");
        for (std::size_t j = 1; j < x_.size(); ++j) {
            if (!(x_[j] > x_[j - 1]) || slope_[j - 1] < 0) throw DomainError("PiecewiseCdf: not non-decreasing");
            F_[j] = F_[j - 1] + slope_[j - 1] * (x_[j] - x_[j - 1]);
        }
        F_.back() = 1.0;  // total mass, exact by construction
    }

    /// P(D < t).
    double operator()(double t) const {
        if (t <= 0) return 0.0;
        if (t >= x_.back()) return 1.0;
        std::size_t k = segment(t);
        return std::min(1.0, F_[k - 1] + slope_[k - 1] * (t - x_[k - 1]));
    }

    double top() const noexcept { return x_.back(); }
    const std::vector<double>& breakpoints() const noexcept { return x_; }
    const std::vector<double>& slopes() const noexcept { return slope_; }
    const std::vector<double>& values() const noexcept { return F_; }

    /// Index k with x_{k-1} <= t < x_k, for 0 <= t < top().
    std::size_t segment(double t) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        return std::size_t(it - x_.begin());
    }

private:
    std::vector<double> x_;
    std::vector<double> slope_;
    std::vector<double> F_;
};

/// Exact law of ||qx||' for x uniform on [0, 1]: a cyclic gap g between
/// consecutive coprime integers contributes min(2t, g)/q to P(||qx||' < t).
inline PiecewiseCdf coprime_dist_cdf(std::uint64_t q) {
    auto hist = coprime_gap_histogram(q);
    std::vector<double> breaks{0.0};
    std::vector<double> slopes;
    std::uint64_t remaining = std::accumulate(hist.begin(), hist.end(), std::uint64_t(0));
    for (std::size_t g = 1; g < hist.size(); ++g) {
        if (hist[g] == 0) continue;
        slopes.push_back(2.0 * double(remaining) / double(q));
        breaks.push_back(double(g) / 2.0);
        remaining -= hist[g];
    }
    return PiecewiseCdf(std::move(breaks), std::move(slopes));
}

/// P(||qx||' < t) in exact rational arithmetic.
inline Rational coprime_dist_cdf_exact(std::uint64_t q, const Rational& t) {
    auto hist = coprime_gap_histogram(q);
    Rational total = 0;
    for (std::size_t g = 1; g < hist.size(); ++g) {
        if (hist[g] == 0) continue;
        Rational piece = std::min(Rational(2) * t, Rational(g));
        if (piece < 0) piece = 0;
        total += piece * Rational(hist[g]);
    }
    return total / Rational(q);
}

/// Candidate intervals of one slice in dimension 1: radius delta/q around
/// p/q, over all p or p coprime to q.
inline std::vector<Interval> slice_intervals(std::uint64_t q, double delta, bool coprime) {
    if (q == 0) throw DomainError("slice: q must be >= 1");
    std::vector<Interval> out;
    if (!(delta > 0)) return out;
    if (!coprime && delta >= 0.5) return {{0.0, 1.0}};
    const double qd = double(q);
    auto reach = std::int64_t(std::ceil(std::min(delta, qd)));
    for (std::int64_t p = -reach; p <= std::int64_t(q) + reach; ++p) {
        if (coprime && std::gcd(std::uint64_t(p < 0 ? -p : p), q) != 1) continue;
        out.push_back({(double(p) - delta) / qd, (double(p) + delta) / qd});
    }
    return out;
}

inline IntervalUnion slice_union_1d(std::uint64_t q, double delta, bool coprime) {
    return IntervalUnion::from_intervals(slice_intervals(q, delta, coprime));
}

/// Exact measure of a 1-D slice.
inline MeasureEstimate region_measure_1d(const RegionSpec& spec) {
    if (spec.n != 1) throw DomainError("region_measure_1d: n must be 1");
    if (spec.q == 0) throw DomainError("region_measure_1d: q must be >= 1");
    double d = spec.delta;
    if (!(d > 0)) return MeasureEstimate::exact(0.0);
    if (!spec.coprime) return MeasureEstimate::exact(std::min(1.0, 2 * d));
    if (d < 0.5) return MeasureEstimate::exact(2 * d * phi_ratio(spec.q));
    return MeasureEstimate::exact(slice_union_1d(spec.q, d, true).measure());
}

/// |{x in [0,1]^n : prod ||q x_i|| < delta}| = F_n(2^n delta), with
/// F_n(t) = t * sum_{k<n} ln(1/t)^k / k! on (0, 1]. Independent of q.
inline MeasureEstimate product_region_measure_plain(int n, double delta) {
    if (n < 1) throw DomainError("product_region_measure_plain: n must be >= 1");
    if (!(delta > 0)) return MeasureEstimate::closed_form(0.0);
    double t = std::ldexp(delta, n);
    if (t >= 1) return MeasureEstimate::closed_form(1.0);
    double L = -std::log(t);
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < n; ++k) {
        sum += term;
        term *= L / double(k + 1);
    }
    return MeasureEstimate::closed_form(std::min(1.0, t * sum));
}

/// ||qx||' as a mixture: with probability g n_g / q it is uniform on [0, g/2],
/// where n_g counts cyclic coprime gaps of length g.
struct MixtureAtom {
    double half_width;
    double weight;
};

inline std::vector<MixtureAtom> coprime_dist_mixture(std::uint64_t q) {
    auto hist = coprime_gap_histogram(q);
    std::vector<MixtureAtom> atoms;
    for (std::size_t g = 1; g < hist.size(); ++g)
        if (hist[g] > 0) atoms.push_back({double(g) / 2.0, double(g) * double(hist[g]) / double(q)});
    return atoms;
}

/// Leaves of the mixture expansion allowed before giving up (C(m+n-1, n) for m gap lengths).
inline constexpr std::uint64_t kDefaultMixtureBudget = 50'000'000;

namespace detail {

struct Integral {
    double value = 0;
    double error = 0;
};

/// P(c_1 U_1 ... c_n U_n < delta) summed over multisets of mixture atoms, each
/// term the plain closed form F_n(delta / prod c).
inline Integral mixture_product_cdf(const std::vector<MixtureAtom>& atoms, int n, double delta,
                                    std::uint64_t budget) {
    if (!(delta > 0)) return {0.0, 0.0};
    const std::size_t m = atoms.size();
    long double leaves = 1;  // C(m + n - 1, n)
    for (int i = 1; i <= n; ++i) leaves = leaves * (long double)(m - 1 + std::size_t(i)) / i;
    if (leaves > (long double)budget)
        throw ResourceError("coprime product measure: " + std::to_string(double(leaves)) +
                            " mixture terms exceed budget " + std::to_string(budget));

    auto plain = [n](double s) {
        if (s >= 1) return 1.0;
        if (!(s > 0)) return 0.0;
        double L = std::log(1 / s), sum = 0, term = 1;
        for (int k = 0; k < n; ++k) {
            sum += term;
            term *= L / double(k + 1);
        }
        return std::min(1.0, s * sum);
    };

    long double total = 0;
    // Atom i takes some count of the `left` remaining factors; weight carries the multinomial.
    std::function<void(std::size_t, int, double, double)> walk = [&](std::size_t i, int left, double scale,
                                                                     double weight) {
        if (left == 0) {
            total += weight * plain(delta / scale);
            return;
        }
        if (i + 1 == m) {
            walk(i + 1, 0, scale * std::pow(atoms[i].half_width, left), weight * std::pow(atoms[i].weight, left));
            return;
        }
        double w = weight, c = scale;
        for (int take = 0; take <= left; ++take) {
            walk(i + 1, left - take, c, w);
            w *= atoms[i].weight * double(left - take) / double(take + 1);
            c *= atoms[i].half_width;
        }
    };
    walk(0, n, 1.0, 1.0);
    double v = std::clamp(double(total), 0.0, 1.0);
    return {v, 8.0 * (n + 4) * std::numeric_limits<double>::epsilon()};
}

}  // namespace detail

/// |{x in [0,1]^n : prod ||q x_i||' < delta}|, exact up to rounding via the
/// mixture expansion. Throws ConvergenceError when the rounding bound exceeds
/// tol and ResourceError when the expansion is too large.
inline MeasureEstimate product_region_measure_coprime(std::uint64_t q, int n, double delta,
                                                      double tol = kDefaultConvolutionTol,
                                                      std::uint64_t budget = kDefaultMixtureBudget) {
    if (n < 1) throw DomainError("product_region_measure_coprime: n must be >= 1");
    if (!(tol > 0)) throw DomainError("product_region_measure_coprime: tol must be positive");
    if (n == 1) return region_measure_1d({q, 1, delta, Mode::product, true});
    auto r = detail::mixture_product_cdf(coprime_dist_mixture(q), n, delta, budget);
    if (!(r.error <= tol))
        throw ConvergenceError("coprime product measure: tolerance not reached", std::max(0.0, r.value - r.error),
                               std::min(1.0, r.value + r.error));
    return MeasureEstimate::numeric(r.value, r.error);
}

/// Cubical domain: (max_i dist(q x_i))^n < delta, i.e. every coordinate
/// below delta^(1/n). Coordinates are independent, so the measure is p^n.
inline MeasureEstimate max_region_measure(std::uint64_t q, int n, double delta, bool coprime) {
    if (n < 1 || q == 0) throw DomainError("max_region_measure: need n >= 1 and q >= 1");
    if (!(delta > 0)) return MeasureEstimate::closed_form(0.0);
    double r = std::pow(delta, 1.0 / n);
    double p = coprime ? coprime_dist_cdf(q)(r) : std::min(1.0, 2 * r);
    return MeasureEstimate::closed_form(std::pow(p, n));
}

/// Measure of one slice of any kind.
inline MeasureEstimate region_measure(const RegionSpec& s, double tol = kDefaultConvolutionTol) {
    if (s.q == 0 || s.n < 1) throw DomainError("region_measure: need q >= 1 and n >= 1");
    if (s.n == 1) return region_measure_1d(s);
    if (s.mode == Mode::max) return max_region_measure(s.q, s.n, s.delta, s.coprime);
    if (!s.coprime) return product_region_measure_plain(s.n, s.delta);
    return product_region_measure_coprime(s.q, s.n, s.delta, tol);
}

/// All candidate intervals of the slices Q0..Q, merged.
inline IntervalUnion truncated_union_intervals(const ApproxFunction& f, std::uint64_t Q0, std::uint64_t Q,
                                               bool coprime,
                                               std::uint64_t budget = kDefaultIntervalBudget) {
    if (Q0 == 0 || Q < Q0) throw DomainError("truncated_union_1d: need 1 <= Q0 <= Q");
    std::uint64_t count = 0;
    std::vector<double> psi(Q - Q0 + 1);
    for (std::uint64_t q = Q0; q <= Q; ++q) {
        double v = f.eval(q);
        if (!std::isfinite(v)) throw DomainError("truncated_union_1d: psi not finite at q = " + std::to_string(q));
        psi[q - Q0] = v;
        if (v > 0) count += (coprime ? euler_phi(q) : q) + 2 * std::uint64_t(std::ceil(std::min(v, double(q)))) + 1;
    }
    if (count > budget)
        throw ResourceError("truncated_union_1d: " + std::to_string(count) + " candidate intervals exceed budget " +
                            std::to_string(budget));
    std::vector<Interval> all;
    all.reserve(count);
    for (std::uint64_t q = Q0; q <= Q; ++q) {
        auto part = slice_intervals(q, psi[q - Q0], coprime);
        all.insert(all.end(), part.begin(), part.end());
    }
    return IntervalUnion::from_intervals(std::move(all));
}

/// Exact measure of the union of the 1-D slices Q0..Q.
inline MeasureEstimate truncated_union_1d(const ApproxFunction& f, std::uint64_t Q0, std::uint64_t Q, bool coprime,
                                          std::uint64_t budget = kDefaultIntervalBudget) {
    return MeasureEstimate::exact(truncated_union_intervals(f, Q0, Q, coprime, budget).measure());
}

}  // namespace mdalab
