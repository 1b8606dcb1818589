#include "mdalab/arith.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace mdalab;

namespace {

std::uint64_t brute_phi(std::uint64_t q) {
    std::uint64_t c = 0;
    for (std::uint64_t p = 1; p <= q; ++p)
        if (std::gcd(p, q) == 1) ++c;
    return c;
}

}  // namespace

TEST(EulerPhi, Examples) {
    EXPECT_EQ(euler_phi(1), 1u);
    EXPECT_EQ(euler_phi(12), brute_phi(12));
    EXPECT_EQ(euler_phi(12), 4u);
    EXPECT_EQ(euler_phi(7), 6u);
    EXPECT_THROW(euler_phi(0), DomainError);
}

TEST(EulerPhi, AgreesWithGcdCountingUpTo10k) {
    for (std::uint64_t q = 1; q <= 10000; ++q) ASSERT_EQ(euler_phi(q), brute_phi(q)) << "q=" << q;
}

TEST(EulerPhi, FallsBackToFactorisationPastTheTable) {
    // 2*3*5*7*11*13*17*19*23
    EXPECT_EQ(euler_phi(223092870ull), 1ull * 2 * 4 * 6 * 10 * 12 * 16 * 18 * 22);
    const std::uint64_t p = 1048583;  // prime above 2^20
    ASSERT_TRUE(is_prime(p));
    EXPECT_EQ(euler_phi(p), p - 1);
    EXPECT_EQ(euler_phi(2 * p), p - 1);
}

TEST(PhiTable, Invariants) {
    PhiTable t(5000);
    EXPECT_EQ(t.phi(1), 1u);
    for (auto p : t.primes()) EXPECT_EQ(t.phi(p), p - 1);
    for (std::uint64_t a = 1; a <= 70; ++a)
        for (std::uint64_t b = 1; b <= 70; ++b)
            if (std::gcd(a, b) == 1) {
                EXPECT_EQ(t.phi(a * b), std::uint64_t(t.phi(a)) * t.phi(b));
            }
    for (std::uint64_t q = 1; q <= 5000; ++q) {
        EXPECT_GE(t.phi(q), 1u);
        EXPECT_LE(t.phi(q), q);
    }
    EXPECT_THROW(PhiTable(0), DomainError);
}

TEST(DistNearest, Examples) {
    EXPECT_NEAR(dist_nearest(3, 1.0 / 3.0), 0.0, 1e-15);
    EXPECT_NEAR(dist_nearest(4, 0.49), 0.04, 1e-15);
    EXPECT_EQ(dist_nearest(1, 0.5), 0.5);
    EXPECT_THROW(dist_nearest(0, 0.1), DomainError);
}

TEST(DistNearestCoprime, Examples) {
    EXPECT_NEAR(dist_nearest_coprime(1, 0.3), 0.3, 1e-15);
    // qx = 2, nearest odd integers are 1 and 3.
    EXPECT_EQ(dist_nearest_coprime(4, 0.5), 1.0);
    EXPECT_NEAR(dist_nearest_coprime(12, 1.0 / 12.0), 0.0, 1e-15);
    EXPECT_THROW(dist_nearest_coprime(0, 0.1), DomainError);
}

TEST(DistNearestCoprime, MatchesExhaustiveSearch) {
    for (std::uint64_t q = 1; q <= 60; ++q) {
        for (int k = 0; k <= 101; ++k) {
            double x = k / 101.0;
            double y = double(q) * x;
            double best = INFINITY;
            for (std::int64_t p = -std::int64_t(q) - 2; p <= 2 * std::int64_t(q) + 2; ++p)
                if (std::gcd(std::uint64_t(std::llabs(p)), q) == 1) best = std::min(best, std::fabs(y - double(p)));
            ASSERT_EQ(dist_nearest_coprime(q, x), best) << q << " " << x;
        }
    }
}

TEST(Distances, BoundsSymmetryPeriodicity) {
    const int N = 97;
    for (std::uint64_t q = 1; q <= 40; ++q) {
        for (int a = 0; a <= N; ++a) {
            double x = double(a) / N;
            double d = dist_nearest(q, x);
            double dc = dist_nearest_coprime(q, x);
            EXPECT_GE(d, 0.0);
            EXPECT_LE(d, 0.5);
            EXPECT_GE(dc, d);
            EXPECT_NEAR(d, dist_nearest(q, 1.0 - x), 1e-12);
            EXPECT_NEAR(dc, dist_nearest_coprime(q, 1.0 - x), 1e-12);
            for (std::uint64_t k = 1; k < q; ++k) {
                double shifted = x + double(k) / double(q);
                shifted -= std::floor(shifted);
                EXPECT_NEAR(d, dist_nearest(q, shifted), 1e-12);
            }
        }
    }
}

TEST(CoprimeGaps, Examples) {
    EXPECT_EQ(coprime_gaps(4), (std::vector<CoprimeGap>{{1, 2}, {3, 2}}));
    EXPECT_EQ(coprime_gaps(1), (std::vector<CoprimeGap>{{0, 1}}));
    EXPECT_EQ(coprime_gaps(6), (std::vector<CoprimeGap>{{1, 4}, {5, 2}}));
}

TEST(CoprimeGaps, CountAndTotal) {
    for (std::uint64_t q = 1; q <= 600; ++q) {
        auto g = coprime_gaps(q);
        ASSERT_EQ(g.size(), euler_phi(q));
        std::uint64_t total = 0;
        for (auto& e : g) total += e.gap;
        ASSERT_EQ(total, q);
        ASSERT_TRUE(std::is_sorted(g.begin(), g.end(), [](auto& a, auto& b) { return a.residue < b.residue; }));
    }
}

TEST(CoprimeGaps, HistogramFromRadicalMatchesDirectTable) {
    for (std::uint64_t q = 1; q <= 2500; ++q) {
        std::vector<std::uint64_t> direct(2, 0);
        for (auto& e : coprime_gaps(q)) {
            if (e.gap >= direct.size()) direct.resize(e.gap + 1, 0);
            ++direct[e.gap];
        }
        auto fast = coprime_gap_histogram(q);
        fast.resize(std::max(fast.size(), direct.size()), 0);
        direct.resize(fast.size(), 0);
        ASSERT_EQ(fast, direct) << "q=" << q;
    }
}

TEST(PadicAbs, Examples) {
    EXPECT_EQ(padic_abs(8, 2), Rational(1, 8));
    EXPECT_EQ(padic_abs(9, 2), Rational(1));
    EXPECT_EQ(padic_abs(12, 3), Rational(1, 3));
    EXPECT_THROW(padic_abs(12, 4), DomainError);
    EXPECT_THROW(padic_abs(0, 2), DomainError);
    EXPECT_EQ(padic_abs_value(48, 2), 1.0 / 16);
}
