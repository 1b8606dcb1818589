#pragma once

/**
 * Cross fibering on finite discrete probability spaces, in exact rational
 * arithmetic. "Almost every" means "every atom of positive weight"; zero-
 * weight atoms are where it differs from "every".
 */

#include "mdalab/errors.hpp"
#include "mdalab/rational.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mdalab {

/// Atom indicator over one factor space.
using Subset = std::vector<bool>;

class DiscreteSpace {
public:
    explicit DiscreteSpace(std::vector<Rational> weights) : weights_(std::move(weights)) {
        if (weights_.empty()) throw ValidationError("DiscreteSpace: at least one atom required");
        Rational total = 0;
        for (const auto& w : weights_) {
            if (w < 0) throw ValidationError("DiscreteSpace: negative weight " + to_string(w));
            total += w;
        }
        if (total != 1) throw ValidationError("DiscreteSpace: weights sum to " + to_string(total) + ", not 1");
    }

    static DiscreteSpace uniform(std::size_t atoms) {
        return DiscreteSpace(std::vector<Rational>(atoms, Rational(1, std::int64_t(atoms))));
    }

    std::size_t size() const noexcept { return weights_.size(); }
    const Rational& weight(std::size_t i) const { return weights_.at(i); }
    const std::vector<Rational>& weights() const noexcept { return weights_; }

    Rational measure(const Subset& a) const {
        if (a.size() != size()) throw ValidationError("DiscreteSpace: subset size mismatch");
        Rational m = 0;
        for (std::size_t i = 0; i < size(); ++i)
            if (a[i]) m += weights_[i];
        return m;
    }

private:
    std::vector<Rational> weights_;
};

/// S subset of X x Y as a membership matrix indexed (x, y).
class ProductSet {
public:
    ProductSet(DiscreteSpace X, DiscreteSpace Y, std::vector<bool> member)
        : X_(std::move(X)), Y_(std::move(Y)), member_(std::move(member)) {
        if (member_.size() != X_.size() * Y_.size())
            throw ValidationError("ProductSet: membership matrix is not |X| x |Y|");
    }

    static ProductSet full(const DiscreteSpace& X, const DiscreteSpace& Y) {
        return {X, Y, std::vector<bool>(X.size() * Y.size(), true)};
    }
    static ProductSet empty(const DiscreteSpace& X, const DiscreteSpace& Y) {
        return {X, Y, std::vector<bool>(X.size() * Y.size(), false)};
    }
    static ProductSet rectangle(const DiscreteSpace& X, const DiscreteSpace& Y, const Subset& A, const Subset& B) {
        std::vector<bool> m(X.size() * Y.size());
        for (std::size_t i = 0; i < X.size(); ++i)
            for (std::size_t j = 0; j < Y.size(); ++j) m[i * Y.size() + j] = A.at(i) && B.at(j);
        return {X, Y, std::move(m)};
    }

    const DiscreteSpace& X() const noexcept { return X_; }
    const DiscreteSpace& Y() const noexcept { return Y_; }
    bool contains(std::size_t x, std::size_t y) const { return member_.at(x * Y_.size() + y); }

private:
    DiscreteSpace X_;
    DiscreteSpace Y_;
    std::vector<bool> member_;
};

/// S_x = {y : (x, y) in S}.
inline Subset fiber_x(const ProductSet& S, std::size_t x) {
    if (x >= S.X().size()) throw DomainError("fiber_x: unknown atom " + std::to_string(x));
    Subset f(S.Y().size());
    for (std::size_t y = 0; y < f.size(); ++y) f[y] = S.contains(x, y);
    return f;
}

/// S^y = {x : (x, y) in S}.
inline Subset fiber_y(const ProductSet& S, std::size_t y) {
    if (y >= S.Y().size()) throw DomainError("fiber_y: unknown atom " + std::to_string(y));
    Subset f(S.X().size());
    for (std::size_t x = 0; x < f.size(); ++x) f[x] = S.contains(x, y);
    return f;
}

enum class TrivialityKind { null, full, nontrivial };

inline std::string to_string(TrivialityKind k) {
    switch (k) {
        case TrivialityKind::null: return "Null";
        case TrivialityKind::full: return "Full";
        case TrivialityKind::nontrivial: return "Nontrivial";
    }
    return "?";
}

struct Triviality {
    TrivialityKind kind;
    Rational measure;
    bool trivial() const noexcept { return kind != TrivialityKind::nontrivial; }
};

inline Triviality classify_measure(const Rational& m) {
    if (m == 0) return {TrivialityKind::null, m};
    if (m == 1) return {TrivialityKind::full, m};
    return {TrivialityKind::nontrivial, m};
}

/// Thrown when the two Fubini iteration orders disagree; impossible in exact arithmetic.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// int nu(S_x) dmu, i.e. sum_x mu(x) nu(S_x).
inline Rational integral_over_x(const ProductSet& S) {
    Rational total = 0;
    for (std::size_t x = 0; x < S.X().size(); ++x) total += S.X().weight(x) * S.Y().measure(fiber_x(S, x));
    return total;
}

/// int mu(S^y) dnu.
inline Rational integral_over_y(const ProductSet& S) {
    Rational total = 0;
    for (std::size_t y = 0; y < S.Y().size(); ++y) total += S.Y().weight(y) * S.X().measure(fiber_y(S, y));
    return total;
}

/// (mu x nu)(S), computed in both iteration orders.
inline Rational product_measure(const ProductSet& S) {
    Rational a = integral_over_x(S);
    Rational b = integral_over_y(S);
    if (a != b) throw InvariantViolation("Fubini orders disagree: " + to_string(a) + " vs " + to_string(b));
    return a;
}

struct CrossFiberReport {
    Triviality left;     ///< S under mu x nu
    Rational right_x;    ///< mu-mass of x with nu-trivial S_x
    Rational right_y;    ///< nu-mass of y with mu-trivial S^y
    bool left_trivial() const noexcept { return left.trivial(); }
    bool right_holds() const { return right_x == 1 && right_y == 1; }
    bool equivalence_holds;
};

inline CrossFiberReport cross_fibering_check(const ProductSet& S) {
    CrossFiberReport r{classify_measure(product_measure(S)), 0, 0, false};
    for (std::size_t x = 0; x < S.X().size(); ++x)
        if (classify_measure(S.Y().measure(fiber_x(S, x))).trivial()) r.right_x += S.X().weight(x);
    for (std::size_t y = 0; y < S.Y().size(); ++y)
        if (classify_measure(S.X().measure(fiber_y(S, y))).trivial()) r.right_y += S.Y().weight(y);
    r.equivalence_holds = r.left_trivial() == r.right_holds();
    return r;
}

/// Fiber-triviality classes and the witness rectangle M = X0 x Y1.
struct Decomposition {
    Subset X0, X1, Xnt;
    Subset Y0, Y1, Ynt;
    Rational mu_X0, mu_X1, nu_Y0, nu_Y1;
    Rational via_y_fibers;  ///< int mu(S^y & X0) 1_{Y1}(y) dnu
    Rational rectangle;     ///< mu(X0) nu(Y1)
    Rational via_x_fibers;  ///< int nu(S_x & Y1) 1_{X0}(x) dmu
    bool four_classes_positive() const { return mu_X0 > 0 && mu_X1 > 0 && nu_Y0 > 0 && nu_Y1 > 0; }
};

inline Decomposition decompose(const ProductSet& S) {
    const auto& X = S.X();
    const auto& Y = S.Y();
    Decomposition d;
    d.X0 = d.X1 = d.Xnt = Subset(X.size(), false);
    d.Y0 = d.Y1 = d.Ynt = Subset(Y.size(), false);
    for (std::size_t x = 0; x < X.size(); ++x) {
        auto k = classify_measure(Y.measure(fiber_x(S, x))).kind;
        (k == TrivialityKind::null ? d.X0 : k == TrivialityKind::full ? d.X1 : d.Xnt)[x] = true;
    }
    for (std::size_t y = 0; y < Y.size(); ++y) {
        auto k = classify_measure(X.measure(fiber_y(S, y))).kind;
        (k == TrivialityKind::null ? d.Y0 : k == TrivialityKind::full ? d.Y1 : d.Ynt)[y] = true;
    }
    d.mu_X0 = X.measure(d.X0);
    d.mu_X1 = X.measure(d.X1);
    d.nu_Y0 = Y.measure(d.Y0);
    d.nu_Y1 = Y.measure(d.Y1);

    d.via_y_fibers = 0;
    for (std::size_t y = 0; y < Y.size(); ++y) {
        if (!d.Y1[y]) continue;
        Subset cut = fiber_y(S, y);
        for (std::size_t x = 0; x < X.size(); ++x) cut[x] = cut[x] && d.X0[x];
        d.via_y_fibers += Y.weight(y) * X.measure(cut);
    }
    d.via_x_fibers = 0;
    for (std::size_t x = 0; x < X.size(); ++x) {
        if (!d.X0[x]) continue;
        Subset cut = fiber_x(S, x);
        for (std::size_t y = 0; y < Y.size(); ++y) cut[y] = cut[y] && d.Y1[y];
        d.via_x_fibers += X.weight(x) * Y.measure(cut);
    }
    d.rectangle = d.mu_X0 * d.nu_Y1;
    return d;
}

/// Random exact weights (numerators 0..6) on k atoms; `with_zero` forces atom 0 to weight 0.
inline DiscreteSpace random_space(std::size_t k, std::mt19937_64& rng, bool with_zero) {
    if (k == 0) throw DomainError("random_space: k must be positive");
    std::vector<std::int64_t> raw(k);
    std::int64_t total = 0;
    for (auto& v : raw) total += v = std::int64_t(rng() % 7);
    if (with_zero && k > 1) {
        total -= raw[0];
        raw[0] = 0;
    }
    if (total == 0) {
        raw[k - 1] = 1;
        total = 1;
    }
    std::vector<Rational> w;
    for (auto v : raw) w.emplace_back(v, total);
    return DiscreteSpace(std::move(w));
}

struct ExhaustiveSummary {
    std::size_t k = 0;
    std::uint64_t subsets = 0;         ///< 2^(k*k)
    std::uint64_t weight_samples = 0;
    std::uint64_t checks = 0;
    std::uint64_t equivalence_failures = 0;
    std::uint64_t fubini_mismatches = 0;
    std::uint64_t samples_with_zero_atoms = 0;
    bool all_hold() const noexcept { return equivalence_failures == 0 && fubini_mismatches == 0; }
};

/// Every subset of a k x k space under `weight_samples` random weight pairs;
/// every other pair puts a zero-weight atom in X, every third in Y.
inline ExhaustiveSummary exhaustive_check(std::size_t k, std::uint64_t weight_samples, std::uint64_t seed) {
    if (k < 1 || k > 4) throw DomainError("exhaustive_check: k must be in [1, 4]");
    ExhaustiveSummary s;
    s.k = k;
    s.subsets = std::uint64_t(1) << (k * k);
    s.weight_samples = weight_samples;
    std::mt19937_64 rng(seed);
    for (std::uint64_t sample = 0; sample < weight_samples; ++sample) {
        auto X = random_space(k, rng, sample % 2 == 0);
        auto Y = random_space(k, rng, sample % 3 == 0);
        bool zero = false;
        for (const auto& w : X.weights()) zero = zero || w == 0;
        for (const auto& w : Y.weights()) zero = zero || w == 0;
        s.samples_with_zero_atoms += zero;
        for (std::uint64_t mask = 0; mask < s.subsets; ++mask) {
            std::vector<bool> m(k * k);
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = (mask >> i) & 1;
            ProductSet S(X, Y, std::move(m));
            ++s.checks;
            if (integral_over_x(S) != integral_over_y(S)) ++s.fubini_mismatches;
            if (!cross_fibering_check(S).equivalence_holds) ++s.equivalence_failures;
        }
    }
    return s;
}

}  // namespace mdalab
