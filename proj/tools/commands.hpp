#pragma once

// Subcommand implementations behind the `mdalab` binary.

#include "config.hpp"

#include "mdalab/fibering.hpp"
#include "mdalab/philox.hpp"
#include "mdalab/regions.hpp"
#include "mdalab/sampler.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mdalab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnomaly = 1;  ///< ran, but flagged anomalies or a failed check
inline constexpr int kExitUsage = 2;    ///< bad flags, config or input data

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + path.string());
    out << text;
}

/// Family from inline JSON text, or from a file when the text starts with '@'.
inline ApproxFunction family_arg(const std::string& text) {
    if (!text.empty() && text[0] == '@') return family_from_json(parse_json_text(read_file(text.substr(1)), "family"), "family");
    return family_from_json(parse_json_text(text, "--family"), "family");
}

inline std::vector<std::uint64_t> checkpoint_grid(std::uint64_t Q0, std::uint64_t Q, double ratio) {
    if (ratio <= 0) return {Q};
    if (!(ratio > 1)) throw ValidationError("--grid-ratio must exceed 1");
    return geometric_grid(Q0, Q, ratio);
}

inline Json estimate_json(const MeasureEstimate& m) {
    Json j{{"measure", round12(m.value)}, {"provenance", to_string(m.provenance)}};
    if (m.is_monte_carlo()) {
        j["ci_low"] = round12(m.ci_low);
        j["ci_high"] = round12(m.ci_high);
        j["samples"] = m.samples;
        j["hits"] = m.hits;
    }
    return j;
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(round12(v)) : Json(nullptr); }

// ---- experiment ----

struct ExperimentOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
};

inline Battery apply_overrides(Battery b, const ExperimentOverrides& o) {
    for (auto& e : b.entries) {
        if (o.seed) e.config.seed = *o.seed;
        if (o.samples) e.config.samples = *o.samples;
    }
    return b;
}

struct ExperimentArtifacts {
    std::vector<std::pair<std::string, std::string>> csv;  ///< file name, contents
    std::string summary;
    std::string config;
    std::vector<std::string> anomalies;
};

/// Runs a battery; data artifacts depend only on the battery, never on `workers`.
inline ExperimentArtifacts run_battery(const Battery& b, unsigned workers) {
    ExperimentArtifacts art;
    const Json config = battery_to_json(b);
    art.config = config.dump(2) + "\n";
    Json experiments = Json::array();
    for (const auto& e : b.entries) {
        const auto& cfg = e.config;
        Json ej{{"name", e.name}, {"kind", to_string(e.kind)}, {"expect", to_string(e.expect)}, {"seed", cfg.seed}};
        std::ostringstream csv;
        try {
            if (e.kind == ExperimentKind::dichotomy) {
                auto r = run_dichotomy(e, b.thresholds, workers);
                csv << kCsvHeader << '\n';
                Json rows = Json::array();
                for (const auto& c : r.checkpoints) {
                    write_csv_row(csv, c.Q, cfg.family.eval(c.Q), c.estimate);
                    Json row{{"Q", c.Q}};
                    row.update(estimate_json(c.estimate));
                    rows.push_back(row);
                }
                ej["rows"] = rows;
                ej["trend"] = to_string(r.trend);
                ej["meets_expectation"] = r.meets_expectation;
                if (!r.meets_expectation)
                    art.anomalies.push_back(e.name + ": " + to_string(e.expect) + " but trend is " + to_string(r.trend));
                art.csv.emplace_back(e.name + ".csv", csv.str());
            } else if (e.kind == ExperimentKind::bc) {
                auto rep = run_bc_evidence(cfg, e.pair_source, workers);
                csv << kCsvHeader << '\n';
                Json rows = Json::array();
                for (const auto& row : rep.rows) {
                    write_csv_row(csv, row.Q, cfg.family.eval(row.Q), row.union_estimate);
                    Json rj{{"Q", row.Q},
                            {"bound", number_or_null(row.bound)},
                            {"bound_low", number_or_null(row.bound_low)},
                            {"bound_high", number_or_null(row.bound_high)},
                            {"running_max", number_or_null(row.running_max)},
                            {"union", estimate_json(row.union_estimate)},
                            {"anomaly", row.anomaly}};
                    rows.push_back(rj);
                }
                Json sumcon = Json::array();
                for (const auto& s : rep.sumcon)
                    sumcon.push_back(Json{{"q", s.q},
                                          {"measure", round12(s.measure.value)},
                                          {"scale", round12(s.scale)},
                                          {"ratio", s.ratio ? Json(round12(*s.ratio)) : Json(nullptr)}});
                ej["pair_source"] = to_string(rep.source);
                ej["rows"] = rows;
                ej["sumcon"] = sumcon;
                for (const auto& a : rep.anomalies) art.anomalies.push_back(e.name + ": " + a);
                art.csv.emplace_back(e.name + ".csv", csv.str());
            } else {
                auto rep = run_padic(cfg, e.padic);
                Json points = Json::array();
                for (const auto& p : rep.points) {
                    Json alpha = Json::array();
                    for (double a : p.alpha) alpha.push_back(round12(a));
                    points.push_back(Json{{"alpha", alpha}, {"counts", p.counts}});
                }
                Json sums = Json::array();
                for (double s : rep.partial_sums) sums.push_back(round12(s));
                ej["checkpoints"] = rep.checkpoints;
                ej["partial_sums"] = sums;
                ej["points"] = points;
            }
        } catch (const std::exception& ex) {
            ej["error"] = ex.what();
            art.anomalies.push_back(e.name + ": " + ex.what());
        }
        experiments.push_back(std::move(ej));
    }
    Json summary{{"schema_version", kSchemaVersion},
                 {"battery", b.name},
                 {"generator", kGeneratorId},
                 {"config_hash", hex64(fnv1a(config.dump()))},
                 {"config", config},
                 {"disclaimer", kDisclaimer},
                 {"experiments", experiments},
                 {"anomalies", art.anomalies}};
    art.summary = summary.dump(2) + "\n";
    return art;
}

inline std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

// ---- fiber-check ----

/// {"x_weights": [...], "y_weights": [...], "grid": [[0/1, ...], ...]} with grid indexed [x][y].
inline ProductSet product_set_from_json(const Json& j) {
    auto weights = [&](const char* key) {
        const auto& w = require(j, key, "$");
        if (!w.is_array()) throw ParseError(std::string("$.") + key, "expected an array");
        std::vector<Rational> v;
        for (std::size_t i = 0; i < w.size(); ++i)
            v.push_back(get_rational(w[i], std::string("$.") + key + "[" + std::to_string(i) + "]"));
        return DiscreteSpace(std::move(v));
    };
    auto X = weights("x_weights");
    auto Y = weights("y_weights");
    const auto& g = require(j, "grid", "$");
    if (!g.is_array() || g.size() != X.size()) throw ParseError("$.grid", "expected one row per x atom");
    std::vector<bool> m;
    for (std::size_t x = 0; x < g.size(); ++x) {
        const std::string path = "$.grid[" + std::to_string(x) + "]";
        if (!g[x].is_array() || g[x].size() != Y.size()) throw ParseError(path, "expected one entry per y atom");
        for (std::size_t y = 0; y < Y.size(); ++y) {
            auto v = get_count(g[x][y], path + "[" + std::to_string(y) + "]");
            if (v > 1) throw ParseError(path + "[" + std::to_string(y) + "]", "expected 0 or 1");
            m.push_back(v == 1);
        }
    }
    return {std::move(X), std::move(Y), std::move(m)};
}

inline std::string subset_string(const Subset& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i]) out += (out.size() > 1 ? "," : "") + std::to_string(i);
    return out + "}";
}

// ---- dispatcher ----

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"mdalab: metric multiplicative Diophantine approximation lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mdalab 1.0.0");

    unsigned workers = default_workers();
    auto add_workers = [&](CLI::App* c) {
        c->add_option("--workers", workers, "worker threads (default MDALAB_WORKERS or 1)")->check(CLI::PositiveNumber);
    };

    // measure
    auto* measure = app.add_subcommand("measure", "exact slice measures |H(delta, q)|");
    std::vector<std::uint64_t> m_q{1};
    int m_n = 1;
    double m_delta = 0;
    bool m_coprime = false, m_plain = false;
    std::string m_mode = "product";
    double m_tol = kDefaultConvolutionTol;
    measure->add_option("--q", m_q, "denominators")->check(CLI::PositiveNumber);
    measure->add_option("--n", m_n, "dimension")->check(CLI::Range(1, kMaxDimension));
    measure->add_option("--delta", m_delta, "psi(q)")->required()->check(CLI::NonNegativeNumber);
    auto* m_cop = measure->add_flag("--coprime", m_coprime, "coprime numerators");
    measure->add_flag("--plain", m_plain, "all numerators")->excludes(m_cop);
    measure->add_option("--mode", m_mode, "product or max")->check(CLI::IsMember({"product", "max"}));
    measure->add_option("--tol", m_tol, "absolute tolerance for coprime products")->check(CLI::PositiveNumber);

    // union
    auto* uni = app.add_subcommand("union", "truncated limsup union |U_{Q0<=q<=Q} H(psi, q)|");
    std::string u_family;
    int u_n = 1;
    std::uint64_t u_Q0 = 1, u_Q = 1, u_samples = 100000;
    std::optional<std::uint64_t> u_seed;
    bool u_coprime = false, u_plain = false;
    std::string u_mode = "product";
    double u_ratio = 0;
    uni->add_option("--family", u_family, "family JSON (or @file)")->required();
    uni->add_option("--n", u_n)->check(CLI::Range(1, kMaxDimension));
    uni->add_option("--Q0", u_Q0)->check(CLI::PositiveNumber);
    uni->add_option("--Q", u_Q)->required()->check(CLI::PositiveNumber);
    uni->add_option("--samples", u_samples)->check(CLI::PositiveNumber);
    uni->add_option("--seed", u_seed, "required when sampling (n >= 2)");
    auto* u_cop = uni->add_flag("--coprime", u_coprime);
    uni->add_flag("--plain", u_plain)->excludes(u_cop);
    uni->add_option("--mode", u_mode)->check(CLI::IsMember({"product", "max"}));
    uni->add_option("--grid-ratio", u_ratio, "geometric checkpoints from Q0 (default: Q only)");
    add_workers(uni);

    // sums
    auto* sums = app.add_subcommand("sums", "partial sums and the cond1 ratio");
    std::string s_family, s_kind = "log_weighted";
    int s_n = 1;
    std::uint64_t s_Q = 1, s_Q0 = 1;
    double s_ratio = 0;
    sums->add_option("--family", s_family, "family JSON (or @file)")->required();
    sums->add_option("--kind", s_kind)->check(
        CLI::IsMember({"plain", "log_weighted", "phi_log_weighted", "phi_plain", "cond1"}));
    sums->add_option("--n", s_n)->check(CLI::Range(1, kMaxDimension));
    sums->add_option("--Q0", s_Q0, "first checkpoint for --grid-ratio")->check(CLI::PositiveNumber);
    sums->add_option("--Q", s_Q)->required()->check(CLI::PositiveNumber);
    sums->add_option("--grid-ratio", s_ratio);

    // bc-bound
    auto* bc = app.add_subcommand("bc-bound", "second-moment lower bound for the limsup set");
    std::string b_family, b_source = "monte-carlo";
    int b_n = 1;
    std::uint64_t b_Q0 = 1, b_Q = 1, b_samples = 100000;
    std::optional<std::uint64_t> b_seed;
    bool b_coprime = false, b_plain = false;
    std::string b_mode = "product";
    double b_ratio = 0;
    bc->add_option("--family", b_family, "family JSON (or @file)")->required();
    bc->add_option("--source", b_source)->check(CLI::IsMember({"exact", "monte-carlo", "independence-model"}));
    bc->add_option("--n", b_n)->check(CLI::Range(1, kMaxDimension));
    bc->add_option("--Q0", b_Q0)->check(CLI::PositiveNumber);
    bc->add_option("--Q", b_Q)->required()->check(CLI::PositiveNumber);
    bc->add_option("--samples", b_samples)->check(CLI::PositiveNumber);
    bc->add_option("--seed", b_seed, "required unless --source exact");
    auto* b_cop = bc->add_flag("--coprime", b_coprime);
    bc->add_flag("--plain", b_plain)->excludes(b_cop);
    bc->add_option("--mode", b_mode)->check(CLI::IsMember({"product", "max"}));
    bc->add_option("--grid-ratio", b_ratio);
    add_workers(bc);

    // fiber-check
    auto* fc = app.add_subcommand("fiber-check", "cross fibering on finite product spaces");
    std::string f_matrix;
    std::size_t f_k = 0;
    std::uint64_t f_samples = 25, f_seed = 0;
    auto* f_mat = fc->add_option("matrix", f_matrix, "matrix JSON file");
    fc->add_option("--exhaustive", f_k, "enumerate every subset of a k x k space")->check(CLI::Range(1, 4))->excludes(f_mat);
    fc->add_option("--weight-samples", f_samples)->check(CLI::PositiveNumber);
    fc->add_option("--seed", f_seed, "weight sampler seed (default 0)");

    // experiment
    auto* ex = app.add_subcommand("experiment", "run a battery config");
    std::string e_config, e_out;
    ExperimentOverrides e_over;
    ex->add_option("config", e_config, "battery JSON")->required();
    ex->add_option("--out", e_out, "output directory")->required();
    ex->add_option("--seed", e_over.seed, "override every entry's seed");
    ex->add_option("--samples", e_over.samples, "override every entry's sample count")->check(CLI::PositiveNumber);
    add_workers(ex);

    // padic
    auto* pa = app.add_subcommand("padic", "solution counts under p-adic weights");
    std::string p_family = R"({"type":"power_log","c":1,"a":1,"b":0})";
    std::vector<std::uint64_t> p_primes;
    std::vector<std::string> p_weights;
    int p_n = 1;
    std::uint64_t p_Q0 = 1, p_Q = 1, p_points = 8;
    std::optional<std::uint64_t> p_seed;
    bool p_coprime = false;
    double p_ratio = 0;
    pa->add_option("--family", p_family, "base family JSON (or @file), default 1/q");
    pa->add_option("--primes", p_primes)->required();
    pa->add_option("--weights", p_weights, "unit | identity | power:<s>, one per prime");
    pa->add_option("--n", p_n)->check(CLI::Range(1, kMaxDimension));
    pa->add_option("--Q0", p_Q0)->check(CLI::PositiveNumber);
    pa->add_option("--Q", p_Q)->required()->check(CLI::PositiveNumber);
    pa->add_option("--points", p_points)->check(CLI::PositiveNumber);
    pa->add_option("--seed", p_seed)->required();
    pa->add_flag("--coprime", p_coprime);
    pa->add_option("--grid-ratio", p_ratio);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*measure) {
            out << kCsvHeader << '\n';
            const bool coprime = m_coprime && !m_plain;
            for (auto q : m_q)
                write_csv_row(out, q, m_delta,
                              region_measure({q, m_n, m_delta, mode_from_string(m_mode, "--mode"), coprime}, m_tol));
            return kExitOk;
        }
        if (*uni) {
            ExperimentConfig cfg{family_arg(u_family), u_n, mode_from_string(u_mode, "--mode"), u_coprime, u_Q0, u_Q,
                                 u_samples, u_seed.value_or(0), checkpoint_grid(u_Q0, u_Q, u_ratio)};
            cfg.validate();
            out << kCsvHeader << '\n';
            if (u_n == 1) {
                for (auto Q : cfg.checkpoints())
                    write_csv_row(out, Q, cfg.family.eval(Q), truncated_union_1d(cfg.family, u_Q0, Q, u_coprime));
                return kExitOk;
            }
            if (!u_seed) throw ValidationError("union: --seed is required when sampling (n >= 2)");
            for (const auto& c : estimate_union_measure(cfg, workers))
                write_csv_row(out, c.Q, cfg.family.eval(c.Q), c.estimate);
            return kExitOk;
        }
        if (*sums) {
            auto f = family_arg(s_family);
            auto grid = checkpoint_grid(s_Q0, s_Q, s_ratio);
            if (s_kind == "cond1") {
                out << "Q,ratio,running_max\n";
                for (const auto& p : cond1_scan(f, s_n, grid))
                    out << p.Q << ',' << (p.ratio ? fmt(*p.ratio) : "") << ',' << fmt(p.running_max) << '\n';
                return kExitOk;
            }
            SumCriterion c{sum_kind_from_string(s_kind, "--kind"), s_n};
            auto values = partial_sums(f, c, grid);
            out << "# " << to_string(c.kind) << " n=" << s_n << " metadata: " << to_string(classify(f, c)) << '\n';
            out << "Q,partial_sum\n";
            for (std::size_t i = 0; i < grid.size(); ++i) out << grid[i] << ',' << fmt(values[i]) << '\n';
            return kExitOk;
        }
        if (*bc) {
            auto source = pair_source_from_string(b_source, "--source");
            if (source != PairSource::exact && !b_seed) throw ValidationError("bc-bound: --seed is required");
            ExperimentConfig cfg{family_arg(b_family), b_n, mode_from_string(b_mode, "--mode"), b_coprime, b_Q0, b_Q,
                                 b_samples, b_seed.value_or(0), checkpoint_grid(b_Q0, b_Q, b_ratio)};
            auto rep = run_bc_evidence(cfg, source, workers);
            out << "Q,bound,bound_low,bound_high,running_max,union,union_provenance,anomaly\n";
            for (const auto& r : rep.rows)
                out << r.Q << ',' << fmt(r.bound) << ',' << fmt(r.bound_low) << ',' << fmt(r.bound_high) << ','
                    << fmt(r.running_max) << ',' << fmt(r.union_estimate.value) << ','
                    << to_string(r.union_estimate.provenance) << ',' << (r.anomaly ? 1 : 0) << '\n';
            for (const auto& a : rep.anomalies) err << "anomaly: " << a << '\n';
            return rep.anomalies.empty() ? kExitOk : kExitAnomaly;
        }
        if (*fc) {
            if (f_k > 0) {
                auto s = exhaustive_check(f_k, f_samples, f_seed);
                out << s.subsets << " subsets × " << s.weight_samples << " weight samples: ";
                if (s.all_hold()) {
                    out << "all equivalences hold\n";
                    return kExitOk;
                }
                out << s.equivalence_failures << " equivalence failures, " << s.fubini_mismatches
                    << " Fubini mismatches\n";
                return kExitAnomaly;
            }
            if (f_matrix.empty()) throw ValidationError("fiber-check: give a matrix file or --exhaustive k");
            auto S = product_set_from_json(parse_json_text(read_file(f_matrix), f_matrix));
            auto r = cross_fibering_check(S);
            auto d = decompose(S);
            out << "measure " << to_string(r.left.measure) << '\n';
            out << "iterated over x " << to_string(integral_over_x(S)) << ", over y " << to_string(integral_over_y(S))
                << '\n';
            out << "x with trivial fiber: mass " << to_string(r.right_x) << "; y with trivial fiber: mass "
                << to_string(r.right_y) << '\n';
            out << "X0 " << subset_string(d.X0) << " X1 " << subset_string(d.X1) << " Y0 " << subset_string(d.Y0)
                << " Y1 " << subset_string(d.Y1) << '\n';
            out << to_string(r.left.kind) << " / equivalence " << (r.equivalence_holds ? "holds" : "FAILS") << '\n';
            return r.equivalence_holds ? kExitOk : kExitAnomaly;
        }
        if (*ex) {
            auto battery = apply_overrides(battery_from_json(parse_json_text(read_file(e_config), e_config)), e_over);
            const std::string started = timestamp();
            auto art = run_battery(battery, workers);
            std::filesystem::path dir(e_out);
            std::filesystem::create_directories(dir);
            for (const auto& [name, text] : art.csv) write_file(dir / name, text);
            write_file(dir / "summary.json", art.summary);
            write_file(dir / "config.json", art.config);
            std::ostringstream log;
            log << "started " << started << "\nfinished " << timestamp() << "\nconfig " << e_config
                << "\nworkers " << workers << "\nanomalies " << art.anomalies.size() << '\n';
            write_file(dir / "run.log", log.str());
            out << battery.entries.size() << " experiments, " << art.anomalies.size() << " anomalies; wrote "
                << dir.string() << '\n';
            for (const auto& a : art.anomalies) err << "anomaly: " << a << '\n';
            return art.anomalies.empty() ? kExitOk : kExitAnomaly;
        }
        if (*pa) {
            PadicSpec spec;
            spec.primes = p_primes;
            spec.points = p_points;
            if (p_weights.empty()) p_weights.assign(p_primes.size(), "unit");
            for (const auto& w : p_weights) {
                if (w == "unit") spec.weights.push_back(WeightFunction::unit());
                else if (w == "identity") spec.weights.push_back(WeightFunction::identity());
                else if (w.rfind("power:", 0) == 0) spec.weights.push_back(WeightFunction::power(std::stod(w.substr(6))));
                else throw ParseError("--weights", "unknown weight '" + w + "'");
            }
            ExperimentConfig cfg{family_arg(p_family), p_n, Mode::product, p_coprime, p_Q0, p_Q, 1, *p_seed,
                                 checkpoint_grid(p_Q0, p_Q, p_ratio)};
            auto rep = run_padic(cfg, spec);
            out << "Q,partial_sum";
            for (std::size_t i = 0; i < rep.points.size(); ++i) out << ",count_" << i;
            out << '\n';
            for (std::size_t c = 0; c < rep.checkpoints.size(); ++c) {
                out << rep.checkpoints[c] << ',' << fmt(rep.partial_sums[c]);
                for (const auto& p : rep.points) out << ',' << p.counts[c];
                out << '\n';
            }
            return kExitOk;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitAnomaly;
    }
    return kExitUsage;
}

}  // namespace mdalab::cli
