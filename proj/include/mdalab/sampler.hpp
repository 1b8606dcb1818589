#pragma once

/**
 * Monte Carlo estimation of truncated limsup-set measures.
 *
 * Sample i is the point PointStream(seed).point(i), so any partition of the
 * index range over workers produces the same integer hit counters and hence
 * bit-identical estimates.
 */

#include "mdalab/arith.hpp"
#include "mdalab/errors.hpp"
#include "mdalab/measure.hpp"
#include "mdalab/philox.hpp"
#include "mdalab/psi.hpp"
#include "mdalab/regions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace mdalab {

/// Strict "<" for the limsup sets; non-strict "<=" for the p-adic inequality.
enum class Inequality { strict, non_strict };

inline constexpr int kMaxDimension = 16;

/// Worker count from MDALAB_WORKERS, defaulting to 1.
inline unsigned default_workers() {
    if (const char* env = std::getenv("MDALAB_WORKERS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    return 1;
}

/// Runs fn(begin, end, worker) over a contiguous partition of [0, count).
template <class Fn>
void parallel_chunks(std::uint64_t count, unsigned workers, Fn&& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2) {
        fn(std::uint64_t(0), count, 0u);
        return;
    }
    std::vector<std::thread> pool;
    std::uint64_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::uint64_t b = std::min(count, w * chunk);
        std::uint64_t e = std::min(count, b + chunk);
        pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
    }
    for (auto& t : pool) t.join();
}

/// Membership of x in the q-slice with threshold psi_q.
inline bool membership_value(std::span<const double> x, std::uint64_t q, double psi_q, Mode mode, bool coprime,
                             Inequality ineq = Inequality::strict) {
    auto passes = [&](double v) { return ineq == Inequality::strict ? v < psi_q : v <= psi_q; };
    const int n = int(x.size());
    if (mode == Mode::product) {
        double prod = 1.0;
        for (double xi : x) prod *= dist_nearest(q, xi);
        if (!passes(prod)) return false;  // ||.||' >= ||.||
        if (!coprime) return true;
        prod = 1.0;
        for (double xi : x) prod *= dist_nearest_coprime(q, xi);
        return passes(prod);
    }
    double m = 0.0;
    for (double xi : x) m = std::max(m, dist_nearest(q, xi));
    if (!passes(std::pow(m, n))) return false;
    if (!coprime) return true;
    m = 0.0;
    for (double xi : x) m = std::max(m, dist_nearest_coprime(q, xi));
    return passes(std::pow(m, n));
}

inline bool membership(std::span<const double> x, std::uint64_t q, const ApproxFunction& f, Mode mode, bool coprime) {
    double v = f.eval(q);
    if (!std::isfinite(v)) throw DomainError("membership: psi(q) must be finite");
    return membership_value(x, q, v, mode, coprime);
}

struct ExperimentConfig {
    ApproxFunction family;
    int n = 1;
    Mode mode = Mode::product;
    bool coprime = false;
    std::uint64_t Q0 = 1;
    std::uint64_t Q = 1;
    std::uint64_t samples = 1000;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> Q_grid;  ///< empty means {Q}

    void validate() const {
        if (n < 1 || n > kMaxDimension) throw DomainError("config: n must be in [1, 16]");
        if (Q0 < 1 || Q < Q0) throw DomainError("config: need 1 <= Q0 <= Q");
        if (samples < 1) throw DomainError("config: samples must be >= 1");
        if (!std::is_sorted(Q_grid.begin(), Q_grid.end())) throw DomainError("config: Q_grid must be sorted");
        for (auto g : Q_grid)
            if (g < Q0 || g > Q) throw DomainError("config: Q_grid entries must lie in [Q0, Q]");
    }

    std::vector<std::uint64_t> checkpoints() const { return Q_grid.empty() ? std::vector<std::uint64_t>{Q} : Q_grid; }
};

struct Checkpoint {
    std::uint64_t Q;
    MeasureEstimate estimate;
};

namespace detail {

inline std::vector<double> psi_table(const ApproxFunction& f, std::uint64_t Q0, std::uint64_t Q) {
    std::vector<double> psi(Q - Q0 + 1);
    for (std::uint64_t q = Q0; q <= Q; ++q) {
        psi[q - Q0] = f.eval(q);
        if (!std::isfinite(psi[q - Q0]))
            throw DomainError("sampler: psi not finite at q = " + std::to_string(q));
    }
    return psi;
}

}  // namespace detail

/// Hit fractions of the unions of slices Q0..Qc at every checkpoint Qc.
inline std::vector<Checkpoint> estimate_union_measure(const ExperimentConfig& cfg, unsigned workers = 1) {
    cfg.validate();
    const auto grid = cfg.checkpoints();
    const auto psi = detail::psi_table(cfg.family, cfg.Q0, cfg.Q);
    std::vector<Checkpoint> out;
    if (std::all_of(psi.begin(), psi.end(), [](double v) { return v == 0; })) {
        for (auto Qc : grid) out.push_back({Qc, MeasureEstimate::exact(0.0)});
        return out;
    }
    const std::uint64_t last = grid.back();
    std::vector<std::vector<std::uint64_t>> local(std::max(1u, workers), std::vector<std::uint64_t>(grid.size(), 0));
    const PointStream stream(cfg.seed);
    parallel_chunks(cfg.samples, workers, [&](std::uint64_t b, std::uint64_t e, unsigned w) {
        std::array<double, kMaxDimension> x{};
        std::span<const double> pt(x.data(), std::size_t(cfg.n));
        auto& counts = local[w];
        for (std::uint64_t i = b; i < e; ++i) {
            stream.point(i, x, std::size_t(cfg.n));
            for (std::uint64_t q = cfg.Q0; q <= last; ++q) {
                double v = psi[q - cfg.Q0];
                if (v > 0 && membership_value(pt, q, v, cfg.mode, cfg.coprime)) {
                    auto slot = std::lower_bound(grid.begin(), grid.end(), q) - grid.begin();
                    ++counts[std::size_t(slot)];
                    break;
                }
            }
        }
    });
    std::uint64_t cumulative = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        for (const auto& c : local) cumulative += c[k];
        out.push_back({grid[k], MeasureEstimate::monte_carlo(cumulative, cfg.samples, cfg.seed, kGeneratorId)});
    }
    return out;
}

/// Hit fraction of the intersection of the q- and r-slices.
inline MeasureEstimate estimate_pairwise_intersection(std::uint64_t q, std::uint64_t r, const ApproxFunction& f,
                                                      int n, Mode mode, bool coprime, std::uint64_t samples,
                                                      std::uint64_t seed, unsigned workers = 1) {
    if (n < 1 || n > kMaxDimension || q == 0 || r == 0 || samples == 0)
        throw DomainError("estimate_pairwise_intersection: invalid arguments");
    const double pq = f.eval(q), pr = f.eval(r);
    if (!std::isfinite(pq) || !std::isfinite(pr)) throw DomainError("estimate_pairwise_intersection: psi not finite");
    if (pq == 0 || pr == 0) return MeasureEstimate::exact(0.0);
    std::vector<std::uint64_t> hits(std::max(1u, workers), 0);
    const PointStream stream(seed);
    parallel_chunks(samples, workers, [&](std::uint64_t b, std::uint64_t e, unsigned w) {
        std::array<double, kMaxDimension> x{};
        std::span<const double> pt(x.data(), std::size_t(n));
        for (std::uint64_t i = b; i < e; ++i) {
            stream.point(i, x, std::size_t(n));
            if (membership_value(pt, q, pq, mode, coprime) && membership_value(pt, r, pr, mode, coprime)) ++hits[w];
        }
    });
    return MeasureEstimate::monte_carlo(std::accumulate(hits.begin(), hits.end(), std::uint64_t(0)), samples, seed,
                                        kGeneratorId);
}

/// #{1 <= q <= Q : x lies in the q-slice}.
inline std::uint64_t solution_count(std::span<const double> x, const ApproxFunction& f, std::uint64_t Q, Mode mode,
                                    bool coprime, Inequality ineq = Inequality::strict) {
    std::uint64_t count = 0;
    for (std::uint64_t q = 1; q <= Q; ++q) {
        double v = f.eval(q);
        if (!std::isfinite(v)) throw DomainError("solution_count: psi not finite at q = " + std::to_string(q));
        if (membership_value(x, q, v, mode, coprime, ineq)) ++count;
    }
    return count;
}

/// Solution counts at each checkpoint of a sorted grid, in one pass.
inline std::vector<std::uint64_t> solution_counts(std::span<const double> x, const ApproxFunction& f,
                                                  const std::vector<std::uint64_t>& grid, Mode mode, bool coprime,
                                                  Inequality ineq = Inequality::strict) {
    std::vector<std::uint64_t> out;
    std::uint64_t count = 0, q = 1;
    for (auto Qc : grid) {
        for (; q <= Qc; ++q) {
            double v = f.eval(q);
            if (!std::isfinite(v)) throw DomainError("solution_count: psi not finite at q = " + std::to_string(q));
            if (membership_value(x, q, v, mode, coprime, ineq)) ++count;
        }
        out.push_back(count);
    }
    return out;
}

/// Row-major m x n matrix; row j holds the coefficients of q_j.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;
    double operator()(std::size_t r, std::size_t c) const { return data.at(r * cols + c); }
};

/// Radial multi-variable approximating function Psi(q) = psi(||q||_inf).
struct MultiPsi {
    ApproxFunction base;
    double operator()(std::span<const std::int64_t> q) const {
        std::uint64_t norm = 0;
        for (auto v : q) norm = std::max<std::uint64_t>(norm, std::uint64_t(v < 0 ? -v : v));
        return base.eval(norm);
    }
};

inline constexpr std::uint64_t kDefaultLinearFormsBudget = 100'000'000;

/// Counts q in Z^m \ {0}, ||q||_inf <= Qbound, with prod_i |(qX)_i + p_i| < Psi(q)
/// for the minimising p. With `coprime`, p_i is restricted to gcd(p_i, gcd(q)) = 1.
inline std::uint64_t linear_forms_count(const Matrix& X, const MultiPsi& Psi, std::uint64_t Qbound, bool coprime,
                                        std::uint64_t budget = kDefaultLinearFormsBudget) {
    const std::size_t m = X.rows, n = X.cols;
    if (m == 0 || n == 0 || X.data.size() != m * n) throw DomainError("linear_forms_count: malformed matrix");
    double side = 2.0 * double(Qbound) + 1.0;
    if (std::pow(side, double(m)) > double(budget))
        throw ResourceError("linear_forms_count: enumeration of " + std::to_string(std::pow(side, double(m))) +
                            " vectors exceeds budget " + std::to_string(budget));
    const auto B = std::int64_t(Qbound);
    std::vector<std::int64_t> q(m, -B);
    std::uint64_t count = 0;
    for (;;) {
        bool nonzero = std::any_of(q.begin(), q.end(), [](std::int64_t v) { return v != 0; });
        if (nonzero) {
            double bound = Psi(q);
            if (bound > 0) {
                std::uint64_t g = 0;
                for (auto v : q) g = std::gcd(g, std::uint64_t(v < 0 ? -v : v));
                double prod = 1.0;
                for (std::size_t i = 0; i < n && prod > 0; ++i) {
                    double y = 0;
                    for (std::size_t j = 0; j < m; ++j) y += double(q[j]) * X(j, i);
                    // gcd(-p, g) = gcd(p, g): the nearest admissible -p to y.
                    prod *= coprime ? coprime_distance(y, g) : std::fabs(y - std::nearbyint(y));
                }
                if (prod < bound) ++count;
            }
        }
        std::size_t k = 0;
        while (k < m && q[k] == B) q[k++] = -B;
        if (k == m) break;
        ++q[k];
    }
    return count;
}

}  // namespace mdalab
