#pragma once

/**
 * Number-theoretic kernel: Euler totient (linear sieve plus trial-division
 * fallback), distances to the nearest integer and to the nearest integer
 * coprime to a modulus, coprime residue gap tables and the p-adic absolute
 * value.
 *
 * Everything here is pure. PhiTable is immutable once built, so a single
 * instance is shared by all workers.
 */

#include "mdalab/errors.hpp"
#include "mdalab/rational.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mdalab {

/// Totient and smallest-prime-factor tables for 1 <= q <= limit.
class PhiTable {
public:
    explicit PhiTable(std::uint32_t limit) : limit_(limit), phi_(limit + 1, 0), spf_(limit + 1, 0) {
        if (limit == 0) throw DomainError("PhiTable limit must be positive");
        phi_[1] = 1;
        spf_[1] = 1;
        // Linear sieve: every composite is struck exactly once, by its smallest prime.
        for (std::uint32_t i = 2; i <= limit; ++i) {
            if (spf_[i] == 0) {
                spf_[i] = i;
                phi_[i] = i - 1;
                primes_.push_back(i);
            }
            for (std::uint32_t p : primes_) {
                std::uint64_t m = std::uint64_t(p) * i;
                if (p > spf_[i] || m > limit) break;
                spf_[m] = p;
                phi_[m] = (i % p == 0) ? phi_[i] * p : phi_[i] * (p - 1);
            }
        }
    }

    std::uint32_t limit() const noexcept { return limit_; }
    bool contains(std::uint64_t q) const noexcept { return q >= 1 && q <= limit_; }

    std::uint32_t phi(std::uint64_t q) const { return phi_.at(q); }
    std::uint32_t smallest_prime_factor(std::uint64_t q) const { return spf_.at(q); }

    /// phi(q) for q = 0..limit (entry 0 unused).
    std::span<const std::uint32_t> values() const noexcept { return phi_; }
    std::span<const std::uint32_t> primes() const noexcept { return primes_; }

private:
    std::uint32_t limit_;
    std::vector<std::uint32_t> phi_;
    std::vector<std::uint32_t> spf_;
    std::vector<std::uint32_t> primes_;
};

inline constexpr std::uint32_t kDefaultPhiLimit = 1u << 20;

/// Process-wide table covering q <= 2^20.
inline const PhiTable& default_phi_table() {
    static const PhiTable table(kDefaultPhiLimit);
    return table;
}

/// Prime factorisation as (prime, exponent) pairs in increasing prime order.
inline std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t q) {
    if (q == 0) throw DomainError("factorize: q must be >= 1");
    std::vector<std::pair<std::uint64_t, unsigned>> out;
    const PhiTable& table = default_phi_table();
    auto push = [&](std::uint64_t p) {
        if (!out.empty() && out.back().first == p)
            ++out.back().second;
        else
            out.emplace_back(p, 1u);
    };
    while (q > 1 && !table.contains(q)) {
        std::uint64_t p = 0;
        for (std::uint64_t d = 2; d * d <= q; d += (d == 2 ? 1 : 2)) {
            if (q % d == 0) {
                p = d;
                break;
            }
        }
        if (p == 0) p = q;
        push(p);
        q /= p;
    }
    while (q > 1) {
        std::uint64_t p = table.smallest_prime_factor(q);
        push(p);
        q /= p;
    }
    return out;
}

inline bool is_prime(std::uint64_t p) {
    if (p < 2) return false;
    auto f = factorize(p);
    return f.size() == 1 && f.front().second == 1;
}

/// Product of the distinct primes dividing q.
inline std::uint64_t radical(std::uint64_t q) {
    std::uint64_t r = 1;
    for (auto [p, e] : factorize(q)) r *= p;
    return r;
}

/// phi(q): table lookup when q is covered, trial-division factorisation otherwise.
inline std::uint64_t euler_phi(std::uint64_t q) {
    if (q == 0) throw DomainError("euler_phi: q must be >= 1");
    const PhiTable& table = default_phi_table();
    if (table.contains(q)) return table.phi(q);
    std::uint64_t result = q;
    for (auto [p, e] : factorize(q)) result = result / p * (p - 1);
    return result;
}

/// phi(q)/q as a double.
inline double phi_ratio(std::uint64_t q) { return double(euler_phi(q)) / double(q); }

/// ||qx||: distance from qx to the nearest integer, in [0, 1/2].
inline double dist_nearest(std::uint64_t q, double x) {
    if (q == 0) throw DomainError("dist_nearest: q must be >= 1");
    double y = double(q) * x;
    return std::fabs(y - std::nearbyint(y));
}

/// Distance from real y to the nearest integer p with gcd(p, m) = 1.
/// The nearest coprime integer on each side lies within m steps.
inline double coprime_distance(double y, std::uint64_t m) {
    if (m == 0) throw DomainError("coprime_distance: modulus must be >= 1");
    if (m == 1) return std::fabs(y - std::nearbyint(y));
    auto coprime = [m](std::int64_t p) {
        std::uint64_t a = p < 0 ? std::uint64_t(-p) : std::uint64_t(p);
        return std::gcd(a, m) == 1;
    };
    auto lo = std::int64_t(std::floor(y));
    auto hi = lo + 1;
    double best = INFINITY;
    // Walk outwards, always advancing the nearer frontier; stop once the
    // nearer frontier is already farther than the best hit.
    for (std::uint64_t steps = 0; steps <= 2 * m + 2; ++steps) {
        double dlo = y - double(lo);
        double dhi = double(hi) - y;
        if (std::min(dlo, dhi) >= best) break;
        if (dlo <= dhi) {
            if (coprime(lo)) best = std::min(best, dlo);
            --lo;
        } else {
            if (coprime(hi)) best = std::min(best, dhi);
            ++hi;
        }
    }
    return best;
}

/// ||qx||': distance from qx to the nearest integer coprime to q. Can exceed 1/2.
inline double dist_nearest_coprime(std::uint64_t q, double x) {
    if (q == 0) throw DomainError("dist_nearest_coprime: q must be >= 1");
    return coprime_distance(double(q) * x, q);
}

struct CoprimeGap {
    std::uint64_t residue;
    std::uint64_t gap;
    friend bool operator==(const CoprimeGap&, const CoprimeGap&) = default;
};

/// Residues r in [0, q) coprime to q, each with the cyclic gap to the next
/// coprime residue. Gaps sum to q; q = 1 yields the single entry (0, 1).
inline std::vector<CoprimeGap> coprime_gaps(std::uint64_t q) {
    if (q == 0) throw DomainError("coprime_gaps: q must be >= 1");
    if (q == 1) return {{0, 1}};
    std::vector<CoprimeGap> out;
    out.reserve(euler_phi(q));
    for (std::uint64_t r = 1; r < q; ++r)
        if (std::gcd(r, q) == 1) out.push_back({r, 0});
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i].gap = out[i + 1].residue - out[i].residue;
    out.back().gap = q - out.back().residue + out.front().residue;
    return out;
}

/// Histogram of coprime gap lengths for modulus q: entry g holds the number
/// of cyclic gaps of length g. Built from rad(q) (the coprime pattern mod q
/// is the pattern mod rad(q) repeated q/rad(q) times).
inline std::vector<std::uint64_t> coprime_gap_histogram(std::uint64_t q) {
    if (q == 0) throw DomainError("coprime_gap_histogram: q must be >= 1");
    auto factors = factorize(q);
    std::uint64_t r = 1;
    for (auto [p, e] : factors) r *= p;
    std::uint64_t reps = q / r;
    if (r == 1) return {0, q};

    std::vector<unsigned char> blocked(r, 0);
    for (auto [p, e] : factors)
        for (std::uint64_t m = 0; m < r; m += p) blocked[m] = 1;

    std::vector<std::uint64_t> hist(2, 0);
    std::uint64_t first = 1;  // residue 1 is always coprime
    std::uint64_t prev = first;
    auto record = [&](std::uint64_t g) {
        if (g >= hist.size()) hist.resize(g + 1, 0);
        hist[g] += reps;
    };
    for (std::uint64_t a = first + 1; a < r; ++a) {
        if (!blocked[a]) {
            record(a - prev);
            prev = a;
        }
    }
    record(r - prev + first);
    return hist;
}

/// |q|_p = p^(-v) where p^v exactly divides q.
inline Rational padic_abs(std::uint64_t q, std::uint64_t p) {
    if (q == 0) throw DomainError("padic_abs: q must be >= 1");
    if (!is_prime(p)) throw DomainError("padic_abs: " + std::to_string(p) + " is not prime");
    BigInt den = 1;
    while (q % p == 0) {
        q /= p;
        den *= p;
    }
    return Rational(BigInt(1), den);
}

/// |q|_p as a double, for prime p (not re-validated).
inline double padic_abs_value(std::uint64_t q, std::uint64_t p) {
    double v = 1.0;
    while (q % p == 0) {
        q /= p;
        v /= double(p);
    }
    return v;
}

}  // namespace mdalab
