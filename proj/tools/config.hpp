#pragma once

// JSON configuration, CSV emission and number formatting for the CLI.

#include "mdalab/arith.hpp"
#include "mdalab/borel_cantelli.hpp"
#include "mdalab/errors.hpp"
#include "mdalab/harness.hpp"
#include "mdalab/psi.hpp"
#include "mdalab/rational.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace mdalab::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// 12 significant digits.
inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// v rounded to 12 significant digits, for JSON output.
inline double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::stod(fmt(v));
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---- field access with path-qualified errors ----

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + "." + key, "missing required field");
    return *it;
}

inline double get_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

inline std::uint64_t get_count(const Json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return std::uint64_t(j.get<std::int64_t>());
    if (j.is_number_float()) {
        double v = j.get<double>();
        if (v >= 0 && v == std::floor(v) && v < 1.8e19) return std::uint64_t(v);
    }
    throw ParseError(path, "expected a non-negative integer");
}

inline std::string get_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path, "expected a string");
    return j.get<std::string>();
}

inline bool get_bool(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw ParseError(path, "expected true or false");
    return j.get<bool>();
}

template <class T, class Fn>
T optional_field(const Json& j, const std::string& key, const std::string& path, T fallback, Fn&& read) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return read(*it, path + "." + key);
}

/// Exact rational from "a/b", an integer or a decimal literal.
inline Rational get_rational(const Json& j, const std::string& path) {
    std::string text;
    if (j.is_string())
        text = j.get<std::string>();
    else if (j.is_number_integer() || j.is_number_unsigned())
        text = j.dump();
    else if (j.is_number_float())
        text = fmt(j.get<double>());
    else
        throw ParseError(path, "expected a rational such as \"1/3\"");
    try {
        if (text.find_first_of("eE") != std::string::npos) throw std::invalid_argument("exponent");
        return parse_rational(text);
    } catch (const std::exception&) {
        throw ParseError(path, "cannot read '" + text + "' as an exact rational");
    }
}

// ---- approximating functions ----

inline WeightFunction weight_from_json(const Json& j, const std::string& path) {
    auto kind = get_string(require(j, "kind", path), path + ".kind");
    if (kind == "unit") return WeightFunction::unit();
    if (kind == "identity") return WeightFunction::identity();
    if (kind == "power") return WeightFunction::power(get_number(require(j, "exponent", path), path + ".exponent"));
    throw ParseError(path + ".kind", "unknown weight '" + kind + "'");
}

inline Json weight_to_json(const WeightFunction& w) {
    switch (w.kind) {
        case WeightFunction::Kind::unit: return Json{{"kind", "unit"}};
        case WeightFunction::Kind::identity: return Json{{"kind", "identity"}};
        case WeightFunction::Kind::power: return Json{{"kind", "power"}, {"exponent", w.exponent}};
    }
    return Json{};
}

inline SupportPredicate support_from_json(const Json& j, const std::string& path) {
    auto kind = get_string(require(j, "kind", path), path + ".kind");
    if (kind == "primorial_multiple")
        return SupportPredicate::primorial_multiple(get_count(require(j, "k", path), path + ".k"));
    if (kind == "multiple_of") return SupportPredicate::multiple_of(get_count(require(j, "m", path), path + ".m"));
    if (kind == "phi_ratio_below")
        return SupportPredicate::phi_ratio_below(get_number(require(j, "threshold", path), path + ".threshold"));
    throw ParseError(path + ".kind", "unknown support '" + kind + "'");
}

inline Json support_to_json(const SupportPredicate& s) {
    switch (s.kind) {
        case SupportPredicate::Kind::primorial_multiple: return Json{{"kind", "primorial_multiple"}, {"k", s.k}};
        case SupportPredicate::Kind::multiple_of: return Json{{"kind", "multiple_of"}, {"m", s.k}};
        case SupportPredicate::Kind::phi_ratio_below:
            return Json{{"kind", "phi_ratio_below"}, {"threshold", s.threshold}};
    }
    return Json{};
}

inline ApproxFunction family_from_json(const Json& j, const std::string& path) {
    auto type = get_string(require(j, "type", path), path + ".type");
    try {
        if (type == "zero") return ApproxFunction::zero();
        if (type == "constant") return ApproxFunction::constant(get_number(require(j, "c", path), path + ".c"));
        if (type == "power_log") {
            auto num = [&](const char* k, double d) {
                return optional_field(j, k, path, d, [](const Json& v, const std::string& p) { return get_number(v, p); });
            };
            return ApproxFunction::power_log(get_number(require(j, "c", path), path + ".c"), num("a", 0), num("b", 0));
        }
        if (type == "table") {
            const auto& vals = require(j, "values", path);
            if (!vals.is_array()) throw ParseError(path + ".values", "expected an array");
            std::vector<double> v;
            for (std::size_t i = 0; i < vals.size(); ++i)
                v.push_back(get_number(vals[i], path + ".values[" + std::to_string(i) + "]"));
            return ApproxFunction::table(std::move(v));
        }
        if (type == "indicator")
            return ApproxFunction::indicator_support(family_from_json(require(j, "base", path), path + ".base"),
                                                     support_from_json(require(j, "support", path), path + ".support"));
        if (type == "adversarial_primorial")
            return ApproxFunction::adversarial_primorial(get_count(require(j, "k", path), path + ".k"),
                                                         family_from_json(require(j, "base", path), path + ".base"));
        if (type == "conditional") {
            const auto& a = require(j, "anchors", path);
            if (!a.is_array()) throw ParseError(path + ".anchors", "expected an array");
            std::vector<double> anchors;
            for (std::size_t i = 0; i < a.size(); ++i)
                anchors.push_back(get_number(a[i], path + ".anchors[" + std::to_string(i) + "]"));
            return conditional_psi(family_from_json(require(j, "base", path), path + ".base"), std::move(anchors));
        }
        if (type == "padic_weighted") {
            const auto& p = require(j, "primes", path);
            const auto& w = require(j, "weights", path);
            if (!p.is_array() || !w.is_array()) throw ParseError(path, "primes and weights must be arrays");
            std::vector<std::uint64_t> primes;
            std::vector<WeightFunction> weights;
            for (std::size_t i = 0; i < p.size(); ++i)
                primes.push_back(get_count(p[i], path + ".primes[" + std::to_string(i) + "]"));
            for (std::size_t i = 0; i < w.size(); ++i)
                weights.push_back(weight_from_json(w[i], path + ".weights[" + std::to_string(i) + "]"));
            return padic_weighted_psi(family_from_json(require(j, "base", path), path + ".base"), std::move(primes),
                                      std::move(weights));
        }
    } catch (const DomainError& e) {
        throw ParseError(path, e.what());
    }
    throw ParseError(path + ".type", "unknown family '" + type + "'");
}

inline Json family_to_json(const ApproxFunction& f) {
    struct Visitor {
        Json operator()(const ApproxFunction::PowerLog& p) const {
            return Json{{"type", "power_log"}, {"c", p.c}, {"a", p.a}, {"b", p.b}};
        }
        Json operator()(const ApproxFunction::Table& t) const { return Json{{"type", "table"}, {"values", t.values}}; }
        Json operator()(const ApproxFunction::Indicator& i) const {
            return Json{{"type", "indicator"}, {"base", family_to_json(*i.base)}, {"support", support_to_json(i.support)}};
        }
        Json operator()(const ApproxFunction::Conditional& c) const {
            return Json{{"type", "conditional"}, {"base", family_to_json(*c.base)}, {"anchors", c.anchors}};
        }
        Json operator()(const ApproxFunction::PadicWeighted& p) const {
            Json w = Json::array();
            for (const auto& x : p.weights) w.push_back(weight_to_json(x));
            return Json{{"type", "padic_weighted"}, {"base", family_to_json(*p.base)}, {"primes", p.primes}, {"weights", w}};
        }
    };
    return std::visit(Visitor{}, f.node());
}

// ---- enums ----

inline Mode mode_from_string(const std::string& s, const std::string& path) {
    if (s == "product") return Mode::product;
    if (s == "max") return Mode::max;
    throw ParseError(path, "unknown mode '" + s + "' (product or max)");
}

inline SumKind sum_kind_from_string(const std::string& s, const std::string& path) {
    for (auto k : {SumKind::plain, SumKind::log_weighted, SumKind::phi_log_weighted, SumKind::phi_plain})
        if (to_string(k) == s) return k;
    throw ParseError(path, "unknown sum kind '" + s + "'");
}

inline PairSource pair_source_from_string(const std::string& s, const std::string& path) {
    for (auto k : {PairSource::exact, PairSource::monte_carlo, PairSource::independence_model})
        if (to_string(k) == s) return k;
    throw ParseError(path, "unknown pair source '" + s + "'");
}

inline Expectation expectation_from_string(const std::string& s, const std::string& path) {
    for (auto e : {Expectation::expect_full, Expectation::expect_null, Expectation::exploratory})
        if (to_string(e) == s) return e;
    throw ParseError(path, "unknown expectation '" + s + "'");
}

inline ExperimentKind kind_from_string(const std::string& s, const std::string& path) {
    for (auto k : {ExperimentKind::dichotomy, ExperimentKind::bc, ExperimentKind::padic})
        if (to_string(k) == s) return k;
    throw ParseError(path, "unknown experiment kind '" + s + "'");
}

// ---- experiments and batteries ----

inline std::uint64_t get_u64(const Json& j, const std::string& key, const std::string& path, std::uint64_t fallback) {
    return optional_field(j, key, path, fallback, [](const Json& v, const std::string& p) { return get_count(v, p); });
}

/// Checkpoints: explicit "Q_grid" array, or geometric from Q0 with "grid_ratio", or just {Q}.
inline ExperimentConfig experiment_from_json(const Json& j, const std::string& path) {
    ExperimentConfig c;
    c.family = family_from_json(require(j, "family", path), path + ".family");
    c.n = int(get_u64(j, "n", path, 1));
    c.mode = mode_from_string(
        optional_field(j, "mode", path, std::string("product"), [](const Json& v, const std::string& p) { return get_string(v, p); }),
        path + ".mode");
    c.coprime = optional_field(j, "coprime", path, false, [](const Json& v, const std::string& p) { return get_bool(v, p); });
    c.Q0 = get_u64(j, "Q0", path, 1);
    c.Q = get_count(require(j, "Q", path), path + ".Q");
    c.samples = get_u64(j, "samples", path, 1000);
    c.seed = get_count(require(j, "seed", path), path + ".seed");
    if (auto it = j.find("Q_grid"); it != j.end()) {
        if (!it->is_array()) throw ParseError(path + ".Q_grid", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            c.Q_grid.push_back(get_count((*it)[i], path + ".Q_grid[" + std::to_string(i) + "]"));
    } else if (auto r = j.find("grid_ratio"); r != j.end()) {
        double ratio = get_number(*r, path + ".grid_ratio");
        if (!(ratio > 1)) throw ParseError(path + ".grid_ratio", "must exceed 1");
        if (c.Q0 >= 1 && c.Q >= c.Q0) c.Q_grid = geometric_grid(c.Q0, c.Q, ratio);
    }
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ParseError(path, e.what());
    }
    return c;
}

inline Json experiment_to_json(const ExperimentConfig& c) {
    return Json{{"family", family_to_json(c.family)},
                {"n", c.n},
                {"mode", to_string(c.mode)},
                {"coprime", c.coprime},
                {"Q0", c.Q0},
                {"Q", c.Q},
                {"samples", c.samples},
                {"seed", c.seed},
                {"Q_grid", c.checkpoints()}};
}

inline void check_schema(const Json& j, const std::string& path) {
    auto v = get_count(require(j, "schema_version", path), path + ".schema_version");
    if (v != std::uint64_t(kSchemaVersion))
        throw ParseError(path + ".schema_version", "unsupported version " + std::to_string(v) + " (expected " +
                                                       std::to_string(kSchemaVersion) + ")");
}

inline Battery battery_from_json(const Json& j) {
    const std::string root = "$";
    check_schema(j, root);
    Battery b;
    b.name = optional_field(j, "name", root, std::string("battery"),
                            [](const Json& v, const std::string& p) { return get_string(v, p); });
    if (auto t = j.find("thresholds"); t != j.end()) {
        b.thresholds.hi = optional_field(*t, "hi", root + ".thresholds", b.thresholds.hi,
                                         [](const Json& v, const std::string& p) { return get_number(v, p); });
        b.thresholds.lo = optional_field(*t, "lo", root + ".thresholds", b.thresholds.lo,
                                         [](const Json& v, const std::string& p) { return get_number(v, p); });
    }
    const auto& list = require(j, "experiments", root);
    if (!list.is_array()) throw ParseError(root + ".experiments", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = root + ".experiments[" + std::to_string(i) + "]";
        const Json& e = list[i];
        BatteryEntry entry;
        entry.name = get_string(require(e, "name", path), path + ".name");
        if (entry.name.empty() || entry.name.find_first_of("/\\") != std::string::npos)
            throw ParseError(path + ".name", "must be a non-empty file-name-safe string");
        entry.kind = kind_from_string(
            optional_field(e, "kind", path, std::string("dichotomy"), [](const Json& v, const std::string& p) { return get_string(v, p); }),
            path + ".kind");
        entry.config = experiment_from_json(e, path);
        entry.expect = expectation_from_string(
            optional_field(e, "expect", path, std::string("exploratory"), [](const Json& v, const std::string& p) { return get_string(v, p); }),
            path + ".expect");
        if (auto c = e.find("criterion"); c != e.end()) {
            entry.criterion.kind = sum_kind_from_string(get_string(require(*c, "kind", path + ".criterion"), path + ".criterion.kind"),
                                                        path + ".criterion.kind");
            entry.criterion.n = int(get_u64(*c, "n", path + ".criterion", std::uint64_t(entry.config.n)));
        } else {
            entry.criterion = {SumKind::log_weighted, entry.config.n};
        }
        if (auto s = e.find("pair_source"); s != e.end())
            entry.pair_source = pair_source_from_string(get_string(*s, path + ".pair_source"), path + ".pair_source");
        if (auto p = e.find("padic"); p != e.end()) {
            const std::string pp = path + ".padic";
            const auto& primes = require(*p, "primes", pp);
            const auto& weights = require(*p, "weights", pp);
            if (!primes.is_array() || !weights.is_array()) throw ParseError(pp, "primes and weights must be arrays");
            for (std::size_t k = 0; k < primes.size(); ++k)
                entry.padic.primes.push_back(get_count(primes[k], pp + ".primes[" + std::to_string(k) + "]"));
            for (std::size_t k = 0; k < weights.size(); ++k)
                entry.padic.weights.push_back(weight_from_json(weights[k], pp + ".weights[" + std::to_string(k) + "]"));
            entry.padic.points = get_u64(*p, "points", pp, entry.padic.points);
        } else if (entry.kind == ExperimentKind::padic) {
            throw ParseError(path + ".padic", "missing required field");
        }
        b.entries.push_back(std::move(entry));
    }
    try {
        b.validate();
    } catch (const std::exception& e) {
        throw ParseError(root + ".experiments", e.what());
    }
    return b;
}

inline Json battery_to_json(const Battery& b) {
    Json list = Json::array();
    for (const auto& e : b.entries) {
        Json j{{"name", e.name}, {"kind", to_string(e.kind)}};
        j.update(experiment_to_json(e.config));
        j["expect"] = to_string(e.expect);
        j["criterion"] = Json{{"kind", to_string(e.criterion.kind)}, {"n", e.criterion.n}};
        if (e.kind == ExperimentKind::bc) j["pair_source"] = to_string(e.pair_source);
        if (e.kind == ExperimentKind::padic) {
            Json w = Json::array();
            for (const auto& x : e.padic.weights) w.push_back(weight_to_json(x));
            j["padic"] = Json{{"primes", e.padic.primes}, {"weights", w}, {"points", e.padic.points}};
        }
        list.push_back(std::move(j));
    }
    return Json{{"schema_version", kSchemaVersion},
                {"name", b.name},
                {"thresholds", Json{{"hi", b.thresholds.hi}, {"lo", b.thresholds.lo}}},
                {"experiments", list}};
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(origin, e.what());
    }
}

// ---- CSV ----

inline constexpr const char* kCsvHeader = "q,phi_q,psi_q,measure,provenance,ci_low,ci_high";

/// One row per checkpoint; CI fields stay empty unless the value is sampled.
inline void write_csv_row(std::ostream& out, std::uint64_t q, double psi_q, const MeasureEstimate& m) {
    out << q << ',' << euler_phi(q) << ',' << fmt(psi_q) << ',' << fmt(m.value) << ',' << to_string(m.provenance) << ',';
    if (m.is_monte_carlo()) out << fmt(m.ci_low) << ',' << fmt(m.ci_high);
    else out << ',';
    out << '\n';
}

}  // namespace mdalab::cli
