#pragma once

/**
 * Approximating functions psi: N -> [0, inf) and the divergence-sum
 * criteria attached to them.
 *
 * ApproxFunction is an immutable value: copies share the underlying node.
 * Families:
 *   power_log(c, a, b)       c * q^(-a) * ln(q+1)^(-b)
 *   table(values)            values[q-1], zero past the end
 *   indicator_support        base(q) on a support predicate, zero elsewhere
 *   conditional(base, xs)    base(q) / prod ||q x_i||, with a/0 = inf (a > 0) and 0/0 = 0
 *   padic_weighted           base(q) / prod f_i(|q|_{p_i})
 *
 * Logarithms are natural throughout. Divergence of a sum is never inferred
 * from partial sums; families carry analytic metadata and `classify` reports it.
 */

#include "mdalab/arith.hpp"
#include "mdalab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace mdalab {

enum class SumKind {
    plain,             ///< sum psi(q)
    log_weighted,      ///< sum psi(q) (ln q)^(n-1)
    phi_log_weighted,  ///< sum (phi(q)/q)^n psi(q) (ln q)^(n-1)
    phi_plain,         ///< sum (phi(q)/q)^n psi(q)
};

struct SumCriterion {
    SumKind kind = SumKind::plain;
    int n = 1;
};

enum class Divergence { known_divergent, known_convergent, unknown };

inline std::string to_string(SumKind k) {
    switch (k) {
        case SumKind::plain: return "plain";
        case SumKind::log_weighted: return "log_weighted";
        case SumKind::phi_log_weighted: return "phi_log_weighted";
        case SumKind::phi_plain: return "phi_plain";
    }
    return "?";
}

inline std::string to_string(Divergence d) {
    switch (d) {
        case Divergence::known_divergent: return "known-divergent";
        case Divergence::known_convergent: return "known-convergent";
        case Divergence::unknown: return "unknown";
    }
    return "?";
}

/// Support filters for indicator_support families.
struct SupportPredicate {
    enum class Kind { primorial_multiple, multiple_of, phi_ratio_below };
    Kind kind = Kind::multiple_of;
    std::uint64_t k = 1;        // primorial index or modulus
    double threshold = 0;       // for phi_ratio_below
    std::uint64_t modulus = 1;  // resolved divisor for the multiple-of kinds

    static SupportPredicate primorial_multiple(std::uint64_t k) {
        return {Kind::primorial_multiple, k, 0, primorial(k)};
    }
    static SupportPredicate multiple_of(std::uint64_t m) {
        if (m == 0) throw DomainError("multiple_of: modulus must be positive");
        return {Kind::multiple_of, m, 0, m};
    }
    static SupportPredicate phi_ratio_below(double t) { return {Kind::phi_ratio_below, 0, t, 1}; }

    /// Product of the first k primes; throws once it leaves 64 bits.
    static std::uint64_t primorial(std::uint64_t k) {
        std::uint64_t p = 1;
        std::uint64_t found = 0;
        for (std::uint64_t c = 2; found < k; ++c) {
            if (!is_prime(c)) continue;
            if (p > std::numeric_limits<std::uint64_t>::max() / c) throw DomainError("primorial overflow");
            p *= c;
            ++found;
        }
        return p;
    }

    bool operator()(std::uint64_t q) const {
        if (kind == Kind::phi_ratio_below) return phi_ratio(q) < threshold;
        return q % modulus == 0;
    }

    std::string id() const {
        switch (kind) {
            case Kind::primorial_multiple: return "primorial_multiple:" + std::to_string(k);
            case Kind::multiple_of: return "multiple_of:" + std::to_string(k);
            case Kind::phi_ratio_below: return "phi_ratio_below:" + std::to_string(threshold);
        }
        return "?";
    }
};

/// Positive weight f(t) applied to |q|_p.
struct WeightFunction {
    enum class Kind { unit, identity, power };
    Kind kind = Kind::unit;
    double exponent = 1.0;

    static WeightFunction unit() { return {Kind::unit, 0.0}; }
    static WeightFunction identity() { return {Kind::identity, 1.0}; }
    static WeightFunction power(double s) { return {Kind::power, s}; }

    double operator()(double t) const {
        switch (kind) {
            case Kind::unit: return 1.0;
            case Kind::identity: return t;
            case Kind::power: return std::pow(t, exponent);
        }
        return 1.0;
    }
};

class ApproxFunction {
public:
    struct PowerLog {
        double c, a, b;
    };
    struct Table {
        std::vector<double> values;
    };
    struct Indicator {
        std::shared_ptr<const ApproxFunction> base;
        SupportPredicate support;
    };
    struct Conditional {
        std::shared_ptr<const ApproxFunction> base;
        std::vector<double> anchors;
    };
    struct PadicWeighted {
        std::shared_ptr<const ApproxFunction> base;
        std::vector<std::uint64_t> primes;
        std::vector<WeightFunction> weights;
    };
    using Node = std::variant<PowerLog, Table, Indicator, Conditional, PadicWeighted>;

    /// psi == 0.
    ApproxFunction() : node_(std::make_shared<Node>(PowerLog{0.0, 0.0, 0.0})) {}

    static ApproxFunction power_log(double c, double a, double b) {
        if (!(c >= 0) || !std::isfinite(c) || !std::isfinite(a) || !std::isfinite(b))
            throw DomainError("power_log: c must be finite and >= 0, a and b finite");
        return ApproxFunction(PowerLog{c, a, b});
    }
    static ApproxFunction constant(double c) { return power_log(c, 0.0, 0.0); }
    static ApproxFunction zero() { return constant(0.0); }

    static ApproxFunction table(std::vector<double> values) {
        for (double v : values)
            if (!(v >= 0) || !std::isfinite(v)) throw DomainError("table: values must be finite and >= 0");
        return ApproxFunction(Table{std::move(values)});
    }

    static ApproxFunction indicator_support(const ApproxFunction& base, SupportPredicate support) {
        if (support.modulus == 0) throw DomainError("indicator_support: modulus must be positive");
        return ApproxFunction(Indicator{std::make_shared<const ApproxFunction>(base), support});
    }

    /// Heuristic Duffin-Schaeffer style family: base supported on multiples
    /// of the k-th primorial, where phi(q)/q is as small as it gets.
    static ApproxFunction adversarial_primorial(std::uint64_t k, const ApproxFunction& base) {
        return indicator_support(base, SupportPredicate::primorial_multiple(k));
    }

    const Node& node() const noexcept { return *node_; }

    bool is_conditional() const noexcept { return std::holds_alternative<Conditional>(*node_); }

    double operator()(std::uint64_t q) const { return eval(q); }

    double eval(std::uint64_t q) const {
        if (q == 0) throw DomainError("psi evaluated at q = 0");
        return std::visit([q](const auto& f) { return eval_node(f, q); }, *node_);
    }

    /// Analytic divergence metadata for a criterion.
    Divergence divergence(const SumCriterion& c) const {
        return std::visit([&c](const auto& f) { return divergence_node(f, c); }, *node_);
    }

private:
    explicit ApproxFunction(Node n) : node_(std::make_shared<Node>(std::move(n))) {}

    friend ApproxFunction conditional_psi(const ApproxFunction&, std::vector<double>);
    friend ApproxFunction padic_weighted_psi(const ApproxFunction&, std::vector<std::uint64_t>,
                                             std::vector<WeightFunction>);

    static double eval_node(const PowerLog& f, std::uint64_t q) {
        if (f.c == 0) return 0.0;
        double v = f.c;
        if (f.a != 0) v *= std::pow(double(q), -f.a);
        if (f.b != 0) v *= std::pow(std::log(double(q) + 1.0), -f.b);
        return v;
    }
    static double eval_node(const Table& f, std::uint64_t q) {
        return q <= f.values.size() ? f.values[q - 1] : 0.0;
    }
    static double eval_node(const Indicator& f, std::uint64_t q) {
        return f.support(q) ? f.base->eval(q) : 0.0;
    }
    static double eval_node(const Conditional& f, std::uint64_t q) {
        double num = f.base->eval(q);
        double den = 1.0;
        for (double x : f.anchors) den *= dist_nearest(q, x);
        if (den == 0) return num > 0 ? std::numeric_limits<double>::infinity() : 0.0;
        return num / den;
    }
    static double eval_node(const PadicWeighted& f, std::uint64_t q) {
        double den = 1.0;
        for (std::size_t i = 0; i < f.primes.size(); ++i)
            den *= f.weights[i](padic_abs_value(q, f.primes[i]));
        return f.base->eval(q) / den;
    }

    // Sum of q^(-a) (ln q)^k ln(q+1)^(-b) diverges iff a < 1, or a == 1 and b - k <= 1.
    // (phi(q)/q)^n has a positive mean, so it does not change the class for these weights.
    static Divergence divergence_node(const PowerLog& f, const SumCriterion& c) {
        if (f.c == 0) return Divergence::known_convergent;
        double k = 0;
        if (c.kind == SumKind::log_weighted || c.kind == SumKind::phi_log_weighted) k = c.n - 1;
        if (f.a < 1) return Divergence::known_divergent;
        if (f.a > 1) return Divergence::known_convergent;
        return (f.b - k <= 1) ? Divergence::known_divergent : Divergence::known_convergent;
    }
    static Divergence divergence_node(const Table&, const SumCriterion&) { return Divergence::unknown; }
    static Divergence divergence_node(const Indicator& f, const SumCriterion& c) {
        // Restricting to multiples of M rescales q by M: the non-phi sums keep their class.
        bool arithmetic = f.support.kind != SupportPredicate::Kind::phi_ratio_below;
        bool phi_free = c.kind == SumKind::plain || c.kind == SumKind::log_weighted;
        if (arithmetic && phi_free && std::holds_alternative<PowerLog>(f.base->node()))
            return f.base->divergence(c);
        if (f.base->divergence(c) == Divergence::known_convergent) return Divergence::known_convergent;
        return Divergence::unknown;
    }
    static Divergence divergence_node(const Conditional&, const SumCriterion&) { return Divergence::unknown; }
    static Divergence divergence_node(const PadicWeighted& f, const SumCriterion& c) {
        bool all_unit = std::all_of(f.weights.begin(), f.weights.end(),
                                    [](const WeightFunction& w) { return w.kind == WeightFunction::Kind::unit; });
        return all_unit ? f.base->divergence(c) : Divergence::unknown;
    }

    std::shared_ptr<const Node> node_;
};

/// psi_{(x_1..x_k)}(q) = psi(q) / (||q x_1|| ... ||q x_k||).
inline ApproxFunction conditional_psi(const ApproxFunction& base, std::vector<double> anchors) {
    if (anchors.empty()) throw DomainError("conditional_psi: anchors must be non-empty");
    return ApproxFunction(
        ApproxFunction::Conditional{std::make_shared<const ApproxFunction>(base), std::move(anchors)});
}

/// q -> psi(q) / prod_i f_i(|q|_{p_i}).
inline ApproxFunction padic_weighted_psi(const ApproxFunction& base, std::vector<std::uint64_t> primes,
                                         std::vector<WeightFunction> weights) {
    if (primes.size() != weights.size()) throw DomainError("padic_weighted_psi: one weight per prime");
    std::set<std::uint64_t> seen;
    for (auto p : primes) {
        if (!is_prime(p)) throw DomainError("padic_weighted_psi: " + std::to_string(p) + " is not prime");
        if (!seen.insert(p).second) throw DomainError("padic_weighted_psi: primes must be distinct");
    }
    for (const auto& w : weights)
        if (!(w(0.5) > 0) || !(w(1.0) > 0)) throw DomainError("padic_weighted_psi: weights must be positive");
    return ApproxFunction(ApproxFunction::PadicWeighted{std::make_shared<const ApproxFunction>(base),
                                                        std::move(primes), std::move(weights)});
}

inline double psi_eval(const ApproxFunction& f, std::uint64_t q) { return f.eval(q); }

inline Divergence classify(const ApproxFunction& f, const SumCriterion& c) { return f.divergence(c); }

/// Weight multiplying psi(q) in the criterion's summand. (ln 1)^(n-1) is 0 for n >= 2.
inline double criterion_weight(const SumCriterion& c, std::uint64_t q) {
    double w = 1.0;
    if (c.kind == SumKind::phi_plain || c.kind == SumKind::phi_log_weighted) w = std::pow(phi_ratio(q), c.n);
    if ((c.kind == SumKind::log_weighted || c.kind == SumKind::phi_log_weighted) && c.n >= 2)
        w *= std::pow(std::log(double(q)), c.n - 1);
    return w;
}

namespace detail {

inline double summand(const ApproxFunction& f, const SumCriterion& c, std::uint64_t q) {
    double v = f.eval(q);
    if (std::isinf(v)) throw OverflowError("infinite summand at q = " + std::to_string(q));
    return v == 0 ? 0.0 : v * criterion_weight(c, q);
}

}  // namespace detail

/// Partial sums at each checkpoint of a sorted grid, in one pass.
inline std::vector<double> partial_sums(const ApproxFunction& f, const SumCriterion& c,
                                        const std::vector<std::uint64_t>& grid) {
    std::vector<double> out;
    out.reserve(grid.size());
    long double acc = 0;
    std::uint64_t q = 0;
    for (std::uint64_t Q : grid) {
        if (Q == 0) throw DomainError("partial_sum: Q must be >= 1");
        if (Q < q) throw DomainError("partial_sum: grid must be sorted");
        for (++q; q <= Q; ++q) acc += detail::summand(f, c, q);
        q = Q;
        out.push_back(double(acc));
    }
    return out;
}

inline double partial_sum(const ApproxFunction& f, const SumCriterion& c, std::uint64_t Q) {
    return partial_sums(f, c, {Q}).front();
}

struct Cond1Point {
    std::uint64_t Q;
    std::optional<double> ratio;  ///< empty where the denominator is still zero
    double running_max;
};

/// Ratio (sum (phi/q)^n psi (ln q)^(n-1)) / (sum psi (ln q)^(n-1)) at every
/// checkpoint, with the running maximum as a limsup proxy.
inline std::vector<Cond1Point> cond1_scan(const ApproxFunction& f, int n, const std::vector<std::uint64_t>& grid) {
    auto num = partial_sums(f, {SumKind::phi_log_weighted, n}, grid);
    auto den = partial_sums(f, {SumKind::log_weighted, n}, grid);
    std::vector<Cond1Point> out;
    double best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Cond1Point p{grid[i], std::nullopt, best};
        if (den[i] > 0) {
            p.ratio = num[i] / den[i];
            best = std::max(best, *p.ratio);
            p.running_max = best;
        }
        out.push_back(p);
    }
    return out;
}

inline double cond1_ratio(const ApproxFunction& f, int n, std::uint64_t Q) {
    auto p = cond1_scan(f, n, {Q}).front();
    if (!p.ratio) throw UndefinedRatio("cond1_ratio: denominator partial sum is zero at Q = " + std::to_string(Q));
    return *p.ratio;
}

/// Geometric checkpoints first, first*ratio, ... capped at and always including last.
inline std::vector<std::uint64_t> geometric_grid(std::uint64_t first, std::uint64_t last, double ratio = 2.0) {
    if (first == 0 || last < first || !(ratio > 1)) throw DomainError("geometric_grid: invalid range or ratio");
    std::vector<std::uint64_t> grid;
    double x = double(first);
    while (x < double(last)) {
        auto v = static_cast<std::uint64_t>(std::llround(x));
        if (grid.empty() || v > grid.back()) grid.push_back(v);
        x *= ratio;
    }
    if (grid.empty() || grid.back() != last) grid.push_back(last);
    return grid;
}

}  // namespace mdalab
