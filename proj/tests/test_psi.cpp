#include "mdalab/psi.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mdalab;

TEST(PsiEval, Examples) {
    EXPECT_DOUBLE_EQ(psi_eval(ApproxFunction::power_log(1, 1, 0), 4), 0.25);
    EXPECT_EQ(psi_eval(ApproxFunction::table({0.5, 0, 0.1}), 2), 0.0);
    EXPECT_EQ(psi_eval(ApproxFunction::table({0.5, 0, 0.1}), 3), 0.1);
    EXPECT_EQ(psi_eval(ApproxFunction::table({0.5, 0, 0.1}), 4), 0.0);
    auto cond = conditional_psi(ApproxFunction::constant(0.1), {0.5});
    EXPECT_TRUE(std::isinf(psi_eval(cond, 2)));  // ||2 * 0.5|| = 0
    EXPECT_THROW(psi_eval(ApproxFunction::zero(), 0), DomainError);
}

TEST(PsiEval, InvalidParametersRejectedAtConstruction) {
    EXPECT_THROW(ApproxFunction::power_log(-1, 1, 0), DomainError);
    EXPECT_THROW(ApproxFunction::power_log(1, NAN, 0), DomainError);
    EXPECT_THROW(ApproxFunction::table({0.1, -0.2}), DomainError);
    EXPECT_THROW(ApproxFunction::indicator_support(ApproxFunction::constant(1), SupportPredicate::multiple_of(0)),
                 DomainError);
    EXPECT_THROW(conditional_psi(ApproxFunction::constant(1), {}), DomainError);
}

TEST(PsiEval, PowerLogUsesShiftedLog) {
    auto f = ApproxFunction::power_log(2, 1, 3);
    EXPECT_DOUBLE_EQ(f(1), 2.0 / std::pow(std::log(2.0), 3));
    EXPECT_DOUBLE_EQ(f(10), 0.2 / std::pow(std::log(11.0), 3));
}

TEST(ConditionalPsi, Examples) {
    // q = 1, x1 = 0.2: ||x1|| = 0.2
    EXPECT_NEAR(conditional_psi(ApproxFunction::constant(0.1), {0.2})(1), 0.5, 1e-15);
    EXPECT_EQ(conditional_psi(ApproxFunction::zero(), {0.0})(1), 0.0);
    EXPECT_TRUE(std::isinf(conditional_psi(ApproxFunction::constant(0.3), {0.0})(1)));
}

TEST(ConditionalPsi, DividesBaseByAnchorDistances) {
    auto base = ApproxFunction::power_log(1, 1, 0);
    std::vector<double> anchors{0.1234, 0.77};
    auto cond = conditional_psi(base, anchors);
    for (std::uint64_t q = 1; q <= 200; ++q) {
        double den = dist_nearest(q, anchors[0]) * dist_nearest(q, anchors[1]);
        if (den == 0) {
            ASSERT_TRUE(std::isinf(cond(q)));
            continue;
        }
        ASSERT_NEAR(cond(q) * den, base(q), 1e-14 * base(q));
    }
}

TEST(PadicWeightedPsi, Examples) {
    auto base = ApproxFunction::power_log(1, 1, 0);
    auto f = padic_weighted_psi(base, {2}, {WeightFunction::identity()});
    // (1/8) / |8|_2 with |8|_2 from the exact p-adic oracle
    EXPECT_DOUBLE_EQ(f(8), (1.0 / 8) / to_double(padic_abs(8, 2)));
    EXPECT_DOUBLE_EQ(f(8), 1.0);
    EXPECT_DOUBLE_EQ(f(9), 1.0 / 9);
    auto unit = padic_weighted_psi(base, {2, 3}, {WeightFunction::unit(), WeightFunction::unit()});
    for (std::uint64_t q = 1; q <= 1000; ++q) ASSERT_EQ(unit(q), base(q));
}

TEST(PadicWeightedPsi, Validation) {
    auto base = ApproxFunction::constant(1);
    EXPECT_THROW(padic_weighted_psi(base, {2, 2}, {WeightFunction::unit(), WeightFunction::unit()}), DomainError);
    EXPECT_THROW(padic_weighted_psi(base, {4}, {WeightFunction::unit()}), DomainError);
    EXPECT_THROW(padic_weighted_psi(base, {2}, {}), DomainError);
}

TEST(PartialSum, Examples) {
    EXPECT_NEAR(partial_sum(ApproxFunction::constant(1), {SumKind::log_weighted, 2}, 3), std::log(2.0) + std::log(3.0),
                1e-14);
    for (auto k : {SumKind::plain, SumKind::log_weighted, SumKind::phi_log_weighted, SumKind::phi_plain})
        EXPECT_EQ(partial_sum(ApproxFunction::zero(), {k, 3}, 100), 0.0);
    // 1 + (1/2)(1/2) + (2/3)(1/3) + (1/2)(1/4)
    double oracle = 0;
    for (std::uint64_t q = 1; q <= 4; ++q) {
        std::uint64_t phi = 0;
        for (std::uint64_t p = 1; p <= q; ++p) phi += std::gcd(p, q) == 1;
        oracle += double(phi) / double(q) / double(q);
    }
    double v = partial_sum(ApproxFunction::power_log(1, 1, 0), {SumKind::phi_plain, 1}, 4);
    EXPECT_NEAR(v, oracle, 1e-15);
    EXPECT_NEAR(v, 1.5972, 1e-4);
}

TEST(PartialSum, FirstLogWeightedTermIsZero) {
    EXPECT_EQ(partial_sum(ApproxFunction::constant(5), {SumKind::log_weighted, 2}, 1), 0.0);
    EXPECT_EQ(partial_sum(ApproxFunction::constant(5), {SumKind::log_weighted, 1}, 1), 5.0);
}

TEST(PartialSum, InfiniteSummandIsOverflow) {
    auto cond = conditional_psi(ApproxFunction::constant(0.1), {0.5});
    EXPECT_THROW(partial_sum(cond, {SumKind::plain, 1}, 4), OverflowError);
}

TEST(PartialSum, MonotoneAndPhiDominated) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> vals(300);
    for (auto& v : vals) v = u(rng) < 0.3 ? 0.0 : u(rng);
    std::vector<ApproxFunction> fams{ApproxFunction::table(vals), ApproxFunction::power_log(1, 1, 0),
                                     ApproxFunction::power_log(0.5, 0.5, 2),
                                     ApproxFunction::adversarial_primorial(2, ApproxFunction::constant(1))};
    auto grid = geometric_grid(1, 300, 1.3);
    for (const auto& f : fams) {
        for (int n = 1; n <= 3; ++n) {
            for (auto k : {SumKind::plain, SumKind::log_weighted, SumKind::phi_log_weighted, SumKind::phi_plain}) {
                auto s = partial_sums(f, {k, n}, grid);
                ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
            }
            auto a = partial_sums(f, {SumKind::phi_log_weighted, n}, grid);
            auto b = partial_sums(f, {SumKind::log_weighted, n}, grid);
            for (std::size_t i = 0; i < grid.size(); ++i) ASSERT_LE(a[i], b[i]);
        }
    }
}

TEST(Cond1Ratio, ConstantPsiApproachesSixOverPiSquared) {
    double r = cond1_ratio(ApproxFunction::constant(1), 1, 1'000'000);
    EXPECT_NEAR(r, 6 / (std::numbers::pi * std::numbers::pi), 1e-3);
}

TEST(Cond1Ratio, SupportFilteredBelowThreshold) {
    // No q <= 1e6 has phi(q)/q < 0.1; 0.2 is reachable (q = 30030 multiples and others).
    auto f = ApproxFunction::indicator_support(ApproxFunction::constant(1), SupportPredicate::phi_ratio_below(0.2));
    auto scan = cond1_scan(f, 1, geometric_grid(1, 200000, 2));
    bool any = false;
    for (auto& p : scan) {
        if (!p.ratio) continue;
        any = true;
        EXPECT_LT(*p.ratio, 0.2);
        EXPECT_GT(*p.ratio, 0.0);
    }
    EXPECT_TRUE(any);
}

TEST(Cond1Ratio, UndefinedWhenDenominatorVanishes) {
    std::vector<double> vals(50, 0.0);
    vals.push_back(1.0);
    EXPECT_THROW(cond1_ratio(ApproxFunction::table(vals), 1, 50), UndefinedRatio);
    EXPECT_NO_THROW(cond1_ratio(ApproxFunction::table(vals), 1, 51));
    // n >= 2: the q = 1 term carries (ln 1)^(n-1) = 0
    EXPECT_THROW(cond1_ratio(ApproxFunction::constant(1), 2, 1), UndefinedRatio);
}

TEST(Cond1Ratio, InUnitIntervalWhenDefined) {
    for (int n = 1; n <= 3; ++n) {
        auto scan = cond1_scan(ApproxFunction::power_log(1, 1, 0), n, geometric_grid(2, 10000));
        for (auto& p : scan) {
            ASSERT_TRUE(p.ratio.has_value());
            EXPECT_GT(*p.ratio, 0.0);
            EXPECT_LE(*p.ratio, 1.0);
            EXPECT_GE(p.running_max, *p.ratio);
        }
    }
}

TEST(Classify, Examples) {
    EXPECT_EQ(classify(ApproxFunction::power_log(1, 1, 0), {SumKind::log_weighted, 2}), Divergence::known_divergent);
    EXPECT_EQ(classify(ApproxFunction::power_log(1, 1, 3), {SumKind::log_weighted, 2}), Divergence::known_convergent);
    EXPECT_EQ(classify(ApproxFunction::table({1, 1, 1}), {SumKind::plain, 1}), Divergence::unknown);
    EXPECT_EQ(classify(ApproxFunction::zero(), {SumKind::plain, 1}), Divergence::known_convergent);
    EXPECT_EQ(classify(ApproxFunction::power_log(1, 2, 0), {SumKind::log_weighted, 5}), Divergence::known_convergent);
    EXPECT_EQ(classify(ApproxFunction::power_log(1, 0.5, 9), {SumKind::phi_plain, 1}), Divergence::known_divergent);
    // sum ln q / (q ln^2 q) diverges at the boundary b - k = 1
    EXPECT_EQ(classify(ApproxFunction::power_log(1, 1, 2), {SumKind::log_weighted, 2}), Divergence::known_divergent);
}

TEST(Classify, AdversarialFamilyIsDivergentForPlainSumOnly) {
    auto f = ApproxFunction::adversarial_primorial(3, ApproxFunction::power_log(1, 1, 0));
    EXPECT_EQ(classify(f, {SumKind::plain, 1}), Divergence::known_divergent);
    EXPECT_EQ(classify(f, {SumKind::phi_plain, 1}), Divergence::unknown);
    EXPECT_EQ(f(30), 1.0 / 30);
    EXPECT_EQ(f(31), 0.0);
}

TEST(Grid, Geometric) {
    EXPECT_EQ(geometric_grid(1, 10), (std::vector<std::uint64_t>{1, 2, 4, 8, 10}));
    EXPECT_EQ(geometric_grid(5, 5), (std::vector<std::uint64_t>{5}));
    EXPECT_THROW(geometric_grid(0, 5), DomainError);
}
