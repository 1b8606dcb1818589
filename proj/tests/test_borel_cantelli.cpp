#include "mdalab/borel_cantelli.hpp"
#include "mdalab/regions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mdalab;

TEST(BcLowerBound, Examples) {
    auto two = EventStats::from_table({0.5, 0.5}, {0.5, 0.25, 0.25, 0.5}, PairSource::exact);
    EXPECT_NEAR(bc_lower_bound(two, 2), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(bc_lower_bound(EventStats::independent({0.5, 0.5}), 2), 2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(bc_lower_bound(EventStats::independent({0.37}), 1), 0.37);
    EXPECT_THROW(bc_lower_bound(EventStats::independent({0.0, 0.0}), 2), UndefinedRatio);
    EXPECT_THROW(bc_lower_bound(EventStats::independent({0.1}), 2), DomainError);
}

TEST(BcLowerBound, NestedEventsGiveTheirCommonMeasure) {
    const double p = 0.3;
    const std::size_t K = 12;
    std::vector<double> pairs(K * K, p);
    auto stats = EventStats::from_table(std::vector<double>(K, p), pairs, PairSource::exact);
    for (std::uint64_t Q = 1; Q <= K; ++Q) EXPECT_NEAR(bc_lower_bound(stats, Q), p, 1e-15);
}

TEST(EventStatsTest, RejectsInvalidTables) {
    EXPECT_THROW(EventStats::independent({1.2}), ValidationError);
    EXPECT_THROW(EventStats::from_table({0.5, 0.5}, {0.5, 0.3, 0.2, 0.5}, PairSource::exact), ValidationError);
    EXPECT_THROW(EventStats::from_table({0.5, 0.2}, {0.5, 0.3, 0.3, 0.2}, PairSource::exact), ValidationError);
    EXPECT_THROW(EventStats::from_table({0.5, 0.5}, {0.4, 0.2, 0.2, 0.5}, PairSource::exact), ValidationError);
    EXPECT_THROW(EventStats::from_table({0.5, 0.5}, {0.5, 0.2, 0.2}, PairSource::exact), ValidationError);
}

TEST(BcLowerBound, NeverExceedsOneOnRealizableEvents) {
    // Events as random subsets of a weighted finite probability space.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t atoms = 40, K = 1 + rng() % 30;
        std::vector<double> w(atoms);
        double total = 0;
        for (auto& v : w) total += v = u(rng) * (rng() % 4 == 0 ? 0 : 1);
        if (total == 0) continue;
        for (auto& v : w) v /= total;
        const double density = u(rng);
        std::vector<std::vector<bool>> ev;
        for (std::size_t e = 0; e < K; ++e) {
            ev.emplace_back(atoms);
            for (std::size_t a = 0; a < atoms; ++a) ev[e][a] = u(rng) < density;
        }
        std::vector<double> singles, pairs;
        for (std::size_t s = 0; s < K; ++s)
            for (std::size_t t = 0; t < K; ++t) {
                double m = 0;
                for (std::size_t a = 0; a < atoms; ++a)
                    if (ev[s][a] && ev[t][a]) m += w[a];
                pairs.push_back(std::min(m, 1.0));
            }
        for (std::size_t s = 0; s < K; ++s) singles.push_back(pairs[s * K + s]);
        auto stats = EventStats::from_table(singles, pairs, PairSource::exact);
        std::vector<std::uint64_t> grid;
        for (std::uint64_t Q = 1; Q <= K; ++Q) grid.push_back(Q);
        for (const auto& pt : bc_scan(stats, grid)) {
            if (!std::isnan(pt.bound)) {
                ASSERT_LE(pt.bound, 1.0 + 1e-12);
            }
        }
    }
}

TEST(BcLowerBound, IndependenceModelMatchesDoubleLoop) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> mu(1 + rng() % 300);
        for (auto& v : mu) v = u(rng) * u(rng);
        auto stats = EventStats::independent(mu);
        long double single = 0, dbl = 0;
        for (std::size_t s = 0; s < mu.size(); ++s) {
            single += mu[s];
            for (std::size_t t = 0; t < mu.size(); ++t) dbl += s == t ? mu[s] : mu[s] * mu[t];
        }
        EXPECT_NEAR(bc_lower_bound(stats, mu.size()), double(single * single / dbl), 1e-12);
    }
}

TEST(BcLowerBound, HarmonicIndependentEventsApproachOne) {
    // mu(E_k) = 1/k: E_1 is the whole space, so the bound starts at 1, dips to ~0.861
    // at Q = 8 and is non-decreasing from there on.
    std::vector<double> mu(100000);
    for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = 1.0 / double(k + 1);
    auto scan = bc_scan(EventStats::independent(mu), geometric_grid(1, 100000));
    EXPECT_EQ(scan[0].bound, 1.0);
    EXPECT_NEAR(scan[3].bound, 0.861209, 1e-6);
    for (std::size_t i = 1; i < scan.size(); ++i) {
        EXPECT_GE(scan[i].running_max, scan[i - 1].running_max);
        if (scan[i - 1].Q >= 8) {
            EXPECT_GE(scan[i].bound, scan[i - 1].bound) << scan[i].Q;
        }
    }
    EXPECT_GT(scan.back().bound, 0.93);
    EXPECT_LE(scan.back().bound, 1.0);
}

TEST(BcLowerBound, ShiftedHarmonicIsMonotoneOnTheWholeGrid) {
    std::vector<double> mu(100000);
    for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = 1.0 / double(k + 2);
    auto scan = bc_scan(EventStats::independent(mu), geometric_grid(1, 100000));
    for (std::size_t i = 1; i < scan.size(); ++i) {
        EXPECT_GE(scan[i].bound, scan[i - 1].bound);
        EXPECT_EQ(scan[i].running_max, scan[i].bound);
    }
}

TEST(BcLowerBound, RunningMaxIsTheLimsupProxy) {
    auto stats = EventStats::independent({0.9, 0.0, 0.0, 0.05});
    auto scan = bc_scan(stats, {1, 2, 3, 4});
    EXPECT_NEAR(scan[0].bound, 0.9, 1e-15);
    for (const auto& pt : scan) EXPECT_NEAR(pt.running_max, 0.9, 1e-15);
    EXPECT_LT(scan[3].bound, 0.9);
}

TEST(BcBoundInterval, BracketsThePointBound) {
    std::vector<double> mid{0.2, 0.1, 0.3}, lo{0.18, 0.08, 0.27}, hi{0.22, 0.12, 0.33};
    auto interval = bc_bound_interval(EventStats::independent(lo), EventStats::independent(hi), 3);
    double point = bc_lower_bound(EventStats::independent(mid), 3);
    EXPECT_LE(interval.low, point);
    EXPECT_GE(interval.high, point);
    EXPECT_LE(interval.high, 1.0);
    EXPECT_THROW(bc_bound_interval(EventStats::independent({0.0}), EventStats::independent({0.1}), 1), UndefinedRatio);
}

TEST(QuasiIndependence, Examples) {
    auto f = ApproxFunction::power_log(0.25, 1, 0);
    EXPECT_EQ(quasi_independence_ratio(100, 101, f, 2, MeasureEstimate::exact(0)), 0.0);
    EXPECT_THROW(quasi_independence_ratio(5, 5, f, 2, MeasureEstimate::exact(0)), DomainError);
    EXPECT_THROW(quasi_independence_ratio(1, 5, f, 2, MeasureEstimate::exact(0)), DomainError);
    EXPECT_THROW(quasi_independence_ratio(3, 5, ApproxFunction::zero(), 2, MeasureEstimate::exact(0)), UndefinedRatio);
    double den = f(100) * std::log(100.0) * f(101) * std::log(101.0);
    EXPECT_NEAR(quasi_independence_ratio(100, 101, f, 2, MeasureEstimate::exact(1e-6)), 1e-6 / den, 1e-18 / den);
}

TEST(QuasiIndependence, DoublingPsiStaysInFactorFourBand) {
    // Exact 1-D coprime intersections.
    for (auto [q, r] : {std::pair<std::uint64_t, std::uint64_t>{10, 13}, {30, 49}, {97, 101}, {100, 101}, {7, 1000}}) {
        auto ratio = [q = q, r = r](double c) {
            auto f = ApproxFunction::constant(c);
            double inter = IntervalUnion::intersection_measure(slice_union_1d(q, f(q), true), slice_union_1d(r, f(r), true));
            return quasi_independence_ratio(q, r, f, 1, MeasureEstimate::exact(inter));
        };
        double a = ratio(0.1), b = ratio(0.2);
        EXPECT_GT(a, 0) << q << "," << r;
        EXPECT_LE(b / a, 4.0) << q << "," << r;
        EXPECT_GE(b / a, 0.25) << q << "," << r;
    }
}
