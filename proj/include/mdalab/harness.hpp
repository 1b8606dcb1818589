#pragma once

/**
 * Experiment batteries: zero-one dichotomy scans, Borel-Cantelli evidence
 * runs and p-adic solution counting. Every run is a pure function of its
 * configuration and seed; worker counts only change throughput.
 */

#include "mdalab/arith.hpp"
#include "mdalab/borel_cantelli.hpp"
#include "mdalab/errors.hpp"
#include "mdalab/measure.hpp"
#include "mdalab/philox.hpp"
#include "mdalab/psi.hpp"
#include "mdalab/regions.hpp"
#include "mdalab/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mdalab {

inline constexpr const char* kDisclaimer =
    "Finite truncations and finite samples are numerical evidence only; "
    "a trend at finite Q does not establish full or null measure.";

enum class Expectation { expect_full, expect_null, exploratory };
enum class ExperimentKind { dichotomy, bc, padic };
enum class Trend { full_trending, null_trending, inconclusive };

inline std::string to_string(Expectation e) {
    switch (e) {
        case Expectation::expect_full: return "expect-full";
        case Expectation::expect_null: return "expect-null";
        case Expectation::exploratory: return "exploratory";
    }
    return "?";
}

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::dichotomy: return "dichotomy";
        case ExperimentKind::bc: return "bc";
        case ExperimentKind::padic: return "padic";
    }
    return "?";
}

inline std::string to_string(Trend t) {
    switch (t) {
        case Trend::full_trending: return "full-trending";
        case Trend::null_trending: return "null-trending";
        case Trend::inconclusive: return "inconclusive";
    }
    return "?";
}

struct Thresholds {
    double hi = 0.95;
    double lo = 0.05;
};

struct PadicSpec {
    std::vector<std::uint64_t> primes;
    std::vector<WeightFunction> weights;
    std::uint64_t points = 8;
};

struct BatteryEntry {
    std::string name;
    ExperimentKind kind = ExperimentKind::dichotomy;
    ExperimentConfig config;
    Expectation expect = Expectation::exploratory;
    SumCriterion criterion{SumKind::log_weighted, 1};  ///< metadata the expectation cites
    PairSource pair_source = PairSource::monte_carlo;  ///< bc runs only
    PadicSpec padic;                                   ///< padic runs only
};

struct Battery {
    std::string name;
    Thresholds thresholds;
    std::vector<BatteryEntry> entries;

    /// Expect-full must cite known-divergent metadata, expect-null known-convergent.
    void validate() const {
        if (!(thresholds.lo < thresholds.hi)) throw ValidationError("battery: thresholds need lo < hi");
        for (const auto& e : entries) {
            e.config.validate();
            auto d = classify(e.config.family, e.criterion);
            if (e.expect == Expectation::expect_full && d != Divergence::known_divergent)
                throw ValidationError("battery entry '" + e.name + "': expect-full needs known-divergent metadata for " +
                                      to_string(e.criterion.kind) + ", family has " + to_string(d));
            if (e.expect == Expectation::expect_null && d != Divergence::known_convergent)
                throw ValidationError("battery entry '" + e.name + "': expect-null needs known-convergent metadata for " +
                                      to_string(e.criterion.kind) + ", family has " + to_string(d));
        }
    }
};

inline Trend classify_trend(double value, const Thresholds& t) {
    if (value >= t.hi) return Trend::full_trending;
    if (value <= t.lo) return Trend::null_trending;
    return Trend::inconclusive;
}

struct DichotomyResult {
    std::string name;
    Expectation expect;
    std::vector<Checkpoint> checkpoints;
    Trend trend;
    bool meets_expectation;
};

inline DichotomyResult run_dichotomy(const BatteryEntry& e, const Thresholds& t, unsigned workers = 1) {
    DichotomyResult r{e.name, e.expect, estimate_union_measure(e.config, workers), Trend::inconclusive, true};
    r.trend = classify_trend(r.checkpoints.back().estimate.value, t);
    if (e.expect == Expectation::expect_full) r.meets_expectation = r.trend == Trend::full_trending;
    if (e.expect == Expectation::expect_null) r.meets_expectation = r.trend == Trend::null_trending;
    return r;
}

/// Tail-union estimates and trend classification for every dichotomy entry.
inline std::vector<DichotomyResult> run_dichotomy_scan(const Battery& b, unsigned workers = 1) {
    b.validate();
    std::vector<DichotomyResult> out;
    for (const auto& e : b.entries)
        if (e.kind == ExperimentKind::dichotomy) out.push_back(run_dichotomy(e, b.thresholds, workers));
    return out;
}

struct SumconRow {
    std::uint64_t q;
    MeasureEstimate measure;  ///< |H(psi, q)|
    double scale;             ///< (phi(q)/q)^n psi(q) (ln q)^(n-1)
    std::optional<double> ratio;
};

struct BcRow {
    std::uint64_t Q;
    double bound;
    double bound_low;
    double bound_high;
    double running_max;
    MeasureEstimate union_estimate;
    bool anomaly;
};

struct BcReport {
    PairSource source;
    std::vector<BcRow> rows;
    std::vector<SumconRow> sumcon;
    std::vector<std::string> anomalies;
};

/// Slice measures |H(psi,q)| against the (phi/q)^n psi (ln q)^(n-1) scale.
inline std::vector<SumconRow> sumcon_table(const ApproxFunction& f, int n, Mode mode, bool coprime,
                                           const std::vector<std::uint64_t>& qs, double tol = kDefaultConvolutionTol) {
    std::vector<SumconRow> out;
    for (auto q : qs) {
        double psi = f.eval(q);
        SumconRow row{q, region_measure({q, n, psi, mode, coprime}, tol), 0.0, std::nullopt};
        double w = n >= 2 ? std::pow(std::log(double(q)), n - 1) : 1.0;
        row.scale = std::pow(coprime ? phi_ratio(q) : 1.0, n) * psi * w;
        if (row.scale > 0) row.ratio = row.measure.value / row.scale;
        out.push_back(row);
    }
    return out;
}

/// Cap on K = Q - Q0 + 1 for pair tables (K^2 entries).
inline constexpr std::uint64_t kMaxPairEvents = 2048;

namespace detail {

inline void check_bc_consistency(BcReport& rep) {
    for (auto& row : rep.rows) {
        const auto& u = row.union_estimate;
        double slack = u.is_monte_carlo() ? 3 * (u.ci_high - u.ci_low) : 1e-12;
        if (!std::isnan(row.bound) && row.bound > u.value + slack) {
            row.anomaly = true;
            rep.anomalies.push_back("Q=" + std::to_string(row.Q) + ": bound " + std::to_string(row.bound) +
                                    " exceeds union estimate " + std::to_string(u.value) + " beyond tolerance");
        }
    }
}

inline std::vector<BcRow> rows_from_scan(const std::vector<BoundPoint>& scan) {
    std::vector<BcRow> rows;
    for (const auto& p : scan)
        rows.push_back({p.Q, p.bound, p.bound, p.bound, p.running_max, MeasureEstimate::exact(0.0), false});
    return rows;
}

}  // namespace detail

/// Second-moment bound curve, union-estimate curve and sumcon table for E_q = H(psi, q), Q0 <= q <= Q.
inline BcReport run_bc_evidence(const ExperimentConfig& cfg, PairSource source, unsigned workers = 1) {
    cfg.validate();
    BcReport rep{source, {}, {}, {}};
    const std::uint64_t K = cfg.Q - cfg.Q0 + 1;
    const auto psi = detail::psi_table(cfg.family, cfg.Q0, cfg.Q);
    if (std::all_of(psi.begin(), psi.end(), [](double v) { return v == 0; })) return rep;
    if (K > kMaxPairEvents)
        throw ResourceError("run_bc_evidence: " + std::to_string(K) + " events exceed the pair-table cap " +
                            std::to_string(kMaxPairEvents));

    const auto grid = cfg.checkpoints();
    std::vector<std::uint64_t> positions;
    for (auto Qc : grid) positions.push_back(Qc - cfg.Q0 + 1);

    std::vector<std::uint64_t> sumcon_qs;
    for (auto q : geometric_grid(std::max<std::uint64_t>(cfg.Q0, 2), std::max<std::uint64_t>(cfg.Q, 2)))
        if (q <= cfg.Q) sumcon_qs.push_back(q);
    rep.sumcon = sumcon_table(cfg.family, cfg.n, cfg.mode, cfg.coprime, sumcon_qs);

    if (source == PairSource::exact) {
        if (cfg.n != 1) throw DomainError("run_bc_evidence: exact pair tables are available in dimension 1 only");
        std::vector<IntervalUnion> slices;
        std::vector<double> singles;
        for (std::uint64_t q = cfg.Q0; q <= cfg.Q; ++q) {
            slices.push_back(slice_union_1d(q, psi[q - cfg.Q0], cfg.coprime));
            singles.push_back(slices.back().measure());
        }
        std::vector<double> pairs(K * K);
        for (std::size_t a = 0; a < K; ++a) {
            pairs[a * K + a] = singles[a];
            for (std::size_t b = a + 1; b < K; ++b)
                pairs[a * K + b] = pairs[b * K + a] =
                    std::min({IntervalUnion::intersection_measure(slices[a], slices[b]), singles[a], singles[b]});
        }
        auto stats = EventStats::from_table(singles, std::move(pairs), PairSource::exact, cfg.Q0);
        rep.rows = detail::rows_from_scan(bc_scan(stats, positions));
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            rep.rows[i].Q = grid[i];
            rep.rows[i].union_estimate = truncated_union_1d(cfg.family, cfg.Q0, grid[i], cfg.coprime);
        }
        detail::check_bc_consistency(rep);
        return rep;
    }

    if (source == PairSource::independence_model) {
        std::vector<double> singles;
        for (std::uint64_t q = cfg.Q0; q <= cfg.Q; ++q)
            singles.push_back(region_measure({q, cfg.n, psi[q - cfg.Q0], cfg.mode, cfg.coprime}).value);
        auto stats = EventStats::independent(std::move(singles), cfg.Q0);
        rep.rows = detail::rows_from_scan(bc_scan(stats, positions));
        auto unions = estimate_union_measure(cfg, workers);
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            rep.rows[i].Q = grid[i];
            rep.rows[i].union_estimate = unions[i].estimate;
        }
        detail::check_bc_consistency(rep);
        return rep;
    }

    // Monte Carlo: singles, pairs and the union all from one sample set.
    workers = std::max(1u, workers);
    std::vector<std::vector<std::uint32_t>> pair_counts(workers, std::vector<std::uint32_t>(K * K, 0));
    std::vector<std::vector<std::uint64_t>> first_hit(workers, std::vector<std::uint64_t>(grid.size(), 0));
    const PointStream stream(cfg.seed);
    parallel_chunks(cfg.samples, workers, [&](std::uint64_t b, std::uint64_t e, unsigned w) {
        std::array<double, kMaxDimension> x{};
        std::span<const double> pt(x.data(), std::size_t(cfg.n));
        std::vector<std::uint32_t> hits;
        auto& pc = pair_counts[w];
        for (std::uint64_t i = b; i < e; ++i) {
            stream.point(i, x, std::size_t(cfg.n));
            hits.clear();
            for (std::uint64_t k = 0; k < K; ++k)
                if (psi[k] > 0 && membership_value(pt, cfg.Q0 + k, psi[k], cfg.mode, cfg.coprime))
                    hits.push_back(std::uint32_t(k));
            for (std::size_t a = 0; a < hits.size(); ++a)
                for (std::size_t c = a; c < hits.size(); ++c) ++pc[std::size_t(hits[a]) * K + hits[c]];
            if (!hits.empty()) {
                auto slot = std::lower_bound(positions.begin(), positions.end(), hits.front() + 1) - positions.begin();
                if (std::size_t(slot) < grid.size()) ++first_hit[w][std::size_t(slot)];
            }
        }
    });
    std::vector<std::uint64_t> counts(K * K, 0);
    for (const auto& pc : pair_counts)
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += pc[i];
    const double N = double(cfg.samples);
    std::vector<double> singles(K), lo_s(K), hi_s(K), pairs(K * K), lo_p(K * K), hi_p(K * K);
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a; b < K; ++b) {
            std::uint64_t c = counts[a * K + b];
            auto [lo, hi] = binomial_ci(c, cfg.samples);
            pairs[a * K + b] = pairs[b * K + a] = double(c) / N;
            lo_p[a * K + b] = lo_p[b * K + a] = lo;
            hi_p[a * K + b] = hi_p[b * K + a] = hi;
        }
        singles[a] = pairs[a * K + a];
        lo_s[a] = lo_p[a * K + a];
        hi_s[a] = hi_p[a * K + a];
    }
    // Clamp CI tables so each stays a valid EventStats (pairs <= min singles).
    for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = 0; b < K; ++b) {
            if (a == b) continue;
            lo_p[a * K + b] = std::min({lo_p[a * K + b], lo_s[a], lo_s[b]});
            hi_p[a * K + b] = std::min({hi_p[a * K + b], hi_s[a], hi_s[b]});
        }
    auto stats = EventStats::from_table(singles, pairs, PairSource::monte_carlo, cfg.Q0);
    auto low = EventStats::from_table(lo_s, lo_p, PairSource::monte_carlo, cfg.Q0);
    auto high = EventStats::from_table(hi_s, hi_p, PairSource::monte_carlo, cfg.Q0);
    rep.rows = detail::rows_from_scan(bc_scan(stats, positions));
    std::uint64_t cumulative = 0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        for (const auto& fh : first_hit) cumulative += fh[i];
        auto& row = rep.rows[i];
        row.Q = grid[i];
        row.union_estimate = MeasureEstimate::monte_carlo(cumulative, cfg.samples, cfg.seed, kGeneratorId);
        try {
            auto iv = bc_bound_interval(low, high, positions[i]);
            row.bound_low = iv.low;
            row.bound_high = iv.high;
        } catch (const UndefinedRatio&) {
            row.bound_low = 0;
            row.bound_high = 1;
        }
    }
    detail::check_bc_consistency(rep);
    return rep;
}

struct PadicPoint {
    std::vector<double> alpha;
    std::vector<std::uint64_t> counts;  ///< weighted inequality (<=), per checkpoint
};

struct PadicReport {
    std::vector<std::uint64_t> checkpoints;
    std::vector<double> partial_sums;  ///< sum psi(q)/prod f_i(|q|_p_i) (ln q)^(n-1)
    std::vector<PadicPoint> points;
};

/// Solution counts of f_1(|q|_p1)...f_k(|q|_pk) ||q a_1||...||q a_n|| <= psi(q) for sampled a.
inline PadicReport run_padic(const ExperimentConfig& cfg, const PadicSpec& spec) {
    cfg.validate();
    auto weighted = padic_weighted_psi(cfg.family, spec.primes, spec.weights);
    PadicReport rep;
    rep.checkpoints = cfg.checkpoints();
    rep.partial_sums = partial_sums(weighted, {SumKind::log_weighted, cfg.n}, rep.checkpoints);
    const PointStream stream(cfg.seed);
    for (std::uint64_t i = 0; i < spec.points; ++i) {
        PadicPoint p;
        p.alpha.resize(std::size_t(cfg.n));
        stream.point(i, p.alpha, p.alpha.size());
        p.counts = solution_counts(p.alpha, weighted, rep.checkpoints, Mode::product, cfg.coprime,
                                   Inequality::non_strict);
        rep.points.push_back(std::move(p));
    }
    return rep;
}

}  // namespace mdalab
