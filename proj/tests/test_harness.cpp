#include "mdalab/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mdalab;

namespace {

ApproxFunction quarter_over_q() { return ApproxFunction::power_log(0.25, 1, 0); }

BatteryEntry entry(std::string name, ExperimentConfig cfg, Expectation e, SumCriterion c) {
    BatteryEntry b;
    b.name = std::move(name);
    b.config = std::move(cfg);
    b.expect = e;
    b.criterion = c;
    return b;
}

}  // namespace

TEST(Trend, Thresholds) {
    Thresholds t;
    EXPECT_EQ(classify_trend(0.95, t), Trend::full_trending);
    EXPECT_EQ(classify_trend(0.9499, t), Trend::inconclusive);
    EXPECT_EQ(classify_trend(0.05, t), Trend::null_trending);
    EXPECT_EQ(classify_trend(0.5, t), Trend::inconclusive);
    EXPECT_EQ(classify_trend(0.97, {0.99, 0.01}), Trend::inconclusive);
}

TEST(Battery, ExpectationsMustMatchMetadata) {
    Battery b{"b", {}, {}};
    b.entries.push_back(entry("full", {quarter_over_q(), 2, Mode::product, false, 1, 10, 10, 1, {}},
                              Expectation::expect_full, {SumKind::log_weighted, 2}));
    EXPECT_NO_THROW(b.validate());
    b.entries[0].expect = Expectation::expect_null;
    EXPECT_THROW(b.validate(), ValidationError);
    b.entries[0].expect = Expectation::exploratory;
    b.entries[0].config.family = ApproxFunction::table({0.1, 0.2});
    EXPECT_NO_THROW(b.validate());
    b.entries[0].expect = Expectation::expect_full;
    EXPECT_THROW(b.validate(), ValidationError);
    b.entries[0].expect = Expectation::exploratory;
    b.thresholds = {0.1, 0.2};
    EXPECT_THROW(b.validate(), ValidationError);
}

TEST(Dichotomy, ZeroFamilyIsNullTrending) {
    auto e = entry("zero", {ApproxFunction::zero(), 2, Mode::product, false, 1, 1000, 500, 3, {10, 100, 1000}},
                   Expectation::exploratory, {SumKind::log_weighted, 2});
    auto r = run_dichotomy(e, {});
    ASSERT_EQ(r.checkpoints.size(), 3u);
    for (const auto& c : r.checkpoints) {
        EXPECT_EQ(c.estimate.value, 0.0);
        EXPECT_EQ(c.estimate.provenance, Provenance::exact);
    }
    EXPECT_EQ(r.trend, Trend::null_trending);
    EXPECT_TRUE(r.meets_expectation);
}

TEST(Dichotomy, DivergentQuarterOverQIsFullTrending) {
    auto e = entry("full", {quarter_over_q(), 2, Mode::product, false, 100, 10000, 4000, 11, {1000, 10000}},
                   Expectation::expect_full, {SumKind::log_weighted, 2});
    auto r = run_dichotomy(e, {});
    EXPECT_EQ(r.trend, Trend::full_trending);
    EXPECT_TRUE(r.meets_expectation);
    EXPECT_LE(r.checkpoints[0].estimate.value, r.checkpoints[1].estimate.value);
}

TEST(Dichotomy, ScanSkipsNonDichotomyEntries) {
    Battery b{"b", {}, {}};
    b.entries.push_back(entry("z", {ApproxFunction::zero(), 1, Mode::product, false, 1, 10, 10, 1, {}},
                              Expectation::exploratory, {SumKind::plain, 1}));
    b.entries.push_back(b.entries[0]);
    b.entries[1].kind = ExperimentKind::bc;
    EXPECT_EQ(run_dichotomy_scan(b).size(), 1u);
    EXPECT_TRUE(run_dichotomy_scan(Battery{"empty", {}, {}}).empty());
}

TEST(Dichotomy, ConvergentTailBelowExactTailSum) {
    // Union of the tail is at most the sum of its slice measures.
    auto f = ApproxFunction::power_log(1, 1, 3);
    ExperimentConfig cfg{f, 2, Mode::product, true, 200, 2000, 20000, 5, {}};
    auto r = run_dichotomy(entry("tail", cfg, Expectation::exploratory, {SumKind::phi_log_weighted, 2}), {});
    double sum = 0;
    for (std::uint64_t q = 200; q <= 2000; ++q) sum += region_measure({q, 2, f.eval(q), Mode::product, true}).value;
    const auto& m = r.checkpoints.back().estimate;
    EXPECT_LE(m.value - 4 * m.std_error(), sum);
    EXPECT_GT(m.value, 0);
}

TEST(Sumcon, RowsCarryTheScale) {
    auto rows = sumcon_table(quarter_over_q(), 2, Mode::product, true, {16, 64, 256});
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        double psi = 0.25 / double(r.q);
        EXPECT_NEAR(r.scale, std::pow(phi_ratio(r.q), 2) * psi * std::log(double(r.q)), 1e-15);
        ASSERT_TRUE(r.ratio);
        EXPECT_GT(*r.ratio, 0.1);
        EXPECT_LT(*r.ratio, 10);
    }
    auto zero = sumcon_table(ApproxFunction::zero(), 2, Mode::product, true, {16});
    EXPECT_FALSE(zero[0].ratio);
}

TEST(BcEvidence, ExactOneDimensionalPipeline) {
    ExperimentConfig cfg{quarter_over_q(), 1, Mode::product, true, 1, 256, 1, 0, geometric_grid(1, 256)};
    auto rep = run_bc_evidence(cfg, PairSource::exact);
    ASSERT_EQ(rep.rows.size(), cfg.checkpoints().size());
    EXPECT_TRUE(rep.anomalies.empty());
    double prev = 0;
    for (const auto& row : rep.rows) {
        EXPECT_GT(row.bound, 0);
        EXPECT_LE(row.bound, row.union_estimate.value + 1e-12);
        EXPECT_EQ(row.union_estimate.provenance, Provenance::exact);
        EXPECT_GE(row.union_estimate.value, prev);
        prev = row.union_estimate.value;
    }
}

TEST(BcEvidence, ZeroFamilyHasNoRows) {
    ExperimentConfig cfg{ApproxFunction::zero(), 1, Mode::product, false, 1, 100, 10, 1, {}};
    auto rep = run_bc_evidence(cfg, PairSource::monte_carlo);
    EXPECT_TRUE(rep.rows.empty());
    EXPECT_TRUE(rep.anomalies.empty());
}

TEST(BcEvidence, IndependenceModelMatchesDoubleSumOracle) {
    ExperimentConfig cfg{quarter_over_q(), 1, Mode::product, false, 2, 60, 2000, 9, {10, 60}};
    auto rep = run_bc_evidence(cfg, PairSource::independence_model);
    ASSERT_EQ(rep.rows.size(), 2u);
    for (const auto& row : rep.rows) {
        std::vector<double> m;
        for (std::uint64_t q = 2; q <= row.Q; ++q) m.push_back(std::min(1.0, 2 * 0.25 / double(q)));
        double s = 0, d = 0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            s += m[i];
            for (std::size_t j = 0; j < m.size(); ++j) d += i == j ? m[i] : m[i] * m[j];
        }
        EXPECT_NEAR(row.bound, s * s / d, 1e-12);
    }
}

TEST(BcEvidence, PairTableCapIsEnforced) {
    ExperimentConfig cfg{quarter_over_q(), 1, Mode::product, false, 1, kMaxPairEvents + 1, 10, 1, {}};
    EXPECT_THROW(run_bc_evidence(cfg, PairSource::monte_carlo), ResourceError);
    cfg.Q = 10;
    cfg.n = 2;
    EXPECT_THROW(run_bc_evidence(cfg, PairSource::exact), DomainError);
}

TEST(Padic, UnitWeightsGivePlainCounts) {
    ExperimentConfig cfg{ApproxFunction::power_log(1, 1, 0), 1, Mode::product, false, 1, 2000, 1, 17, {10, 100, 2000}};
    PadicSpec spec{{2, 5}, {WeightFunction::unit(), WeightFunction::unit()}, 6};
    auto rep = run_padic(cfg, spec);
    ASSERT_EQ(rep.points.size(), 6u);
    auto plain = partial_sums(cfg.family, {SumKind::log_weighted, 1}, rep.checkpoints);
    for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_DOUBLE_EQ(rep.partial_sums[i], plain[i]);
    for (const auto& p : rep.points) {
        // Brute count of ||q a|| <= 1/q.
        for (std::size_t c = 0; c < rep.checkpoints.size(); ++c) {
            std::uint64_t count = 0;
            for (std::uint64_t q = 1; q <= rep.checkpoints[c]; ++q)
                count += dist_nearest(q, p.alpha[0]) <= 1.0 / double(q);
            EXPECT_EQ(p.counts[c], count);
        }
    }
}

TEST(Padic, CountsAreMonotoneAndWeightsOnlyAddSolutions) {
    ExperimentConfig cfg{ApproxFunction::power_log(1, 1, 0), 2, Mode::product, false, 1, 5000, 1, 4, geometric_grid(1, 5000)};
    auto unit = run_padic(cfg, {{3}, {WeightFunction::unit()}, 5});
    auto ident = run_padic(cfg, {{3}, {WeightFunction::identity()}, 5});
    for (std::size_t i = 0; i < unit.points.size(); ++i) {
        EXPECT_EQ(unit.points[i].alpha, ident.points[i].alpha);
        for (std::size_t c = 0; c < unit.checkpoints.size(); ++c) {
            if (c > 0) {
                EXPECT_GE(ident.points[i].counts[c], ident.points[i].counts[c - 1]);
            }
            // |q|_3 <= 1, so dividing by it only enlarges psi.
            EXPECT_GE(ident.points[i].counts[c], unit.points[i].counts[c]);
        }
    }
}

TEST(Padic, ZeroFamilyHasNoSolutions) {
    ExperimentConfig cfg{ApproxFunction::zero(), 1, Mode::product, false, 1, 1000, 1, 2, {1000}};
    auto rep = run_padic(cfg, {{2}, {WeightFunction::identity()}, 4});
    for (const auto& p : rep.points) EXPECT_EQ(p.counts[0], 0u);
    EXPECT_EQ(rep.partial_sums[0], 0.0);
}

TEST(Harness, RunsAreReproducible) {
    ExperimentConfig cfg{quarter_over_q(), 2, Mode::product, true, 10, 300, 3000, 99, {30, 300}};
    auto a = run_dichotomy(entry("a", cfg, Expectation::exploratory, {SumKind::log_weighted, 2}), {}, 1);
    auto b = run_dichotomy(entry("a", cfg, Expectation::exploratory, {SumKind::log_weighted, 2}), {}, 3);
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
        EXPECT_EQ(a.checkpoints[i].estimate.hits, b.checkpoints[i].estimate.hits);
    auto p = run_bc_evidence(cfg, PairSource::monte_carlo, 1);
    auto q = run_bc_evidence(cfg, PairSource::monte_carlo, 2);
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        EXPECT_EQ(p.rows[i].bound, q.rows[i].bound);
        EXPECT_EQ(p.rows[i].union_estimate.hits, q.rows[i].union_estimate.hits);
    }
}
