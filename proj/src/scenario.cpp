#include "scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace kw {

const char* scenario_kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::orbit_set: return "orbit_set";
        case ScenarioKind::gluskin: return "gluskin";
        case ScenarioKind::mixed_ball: return "mixed_ball";
        case ScenarioKind::matrix_polytope: return "matrix_polytope";
        case ScenarioKind::independent: return "independent";
        case ScenarioKind::isotropic_check: return "isotropic_check";
    }
    return "?";
}

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& what,
                              int line = 0) {
    std::string msg = "config error: " + where + ": " + what;
    if (line > 0) msg += " (line " + std::to_string(line) + ")";
    fail(errc::config_error, msg);
}

struct RawEntry {
    std::string value;
    int line;
    mutable bool used = false;
};

struct RawConfig {
    std::map<std::string, RawEntry> entries;  // "section.key" or "key"

    const RawEntry* find(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::string require_str(const std::string& key) const {
        const RawEntry* e = find(key);
        if (!e) config_fail(key, "required key is missing");
        return e->value;
    }
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

RawConfig tokenize_config(const std::string& text) {
    RawConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_fail("line " + std::to_string(lineno), "unterminated [section]");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) config_fail("line " + std::to_string(lineno), "empty section name");
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            config_fail("line " + std::to_string(lineno), "expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) config_fail("line " + std::to_string(lineno), "empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries.count(full)) {
            config_fail(full, "duplicate key", lineno);
        }
        cfg.entries[full] = RawEntry{value, lineno};
    }
    return cfg;
}

double parse_double(const std::string& key, const RawEntry& e, const std::string& token) {
    if (token == "inf" || token == "infinity") return inf_exponent;
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token.empty()) {
        config_fail(key, "'" + token + "' is not a number", e.line);
    }
    return v;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : value) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double get_double(const RawConfig& cfg, const std::string& key, double fallback,
                  bool* present = nullptr) {
    const RawEntry* e = cfg.find(key);
    if (present) *present = (e != nullptr);
    if (!e) return fallback;
    return parse_double(key, *e, e->value);
}

long long get_int(const RawConfig& cfg, const std::string& key, long long fallback,
                  bool* present = nullptr) {
    const RawEntry* e = cfg.find(key);
    if (present) *present = (e != nullptr);
    if (!e) return fallback;
    double v = parse_double(key, *e, e->value);
    if (v != std::floor(v)) config_fail(key, "expected an integer", e->line);
    return static_cast<long long>(v);
}

bool get_bool(const RawConfig& cfg, const std::string& key, bool fallback) {
    const RawEntry* e = cfg.find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    config_fail(key, "expected true/false", e->line);
}

std::vector<double> get_double_list(const RawConfig& cfg, const std::string& key) {
    const RawEntry* e = cfg.find(key);
    if (!e) config_fail(key, "required list is missing");
    std::vector<double> out;
    for (const auto& tok : split_list(e->value)) out.push_back(parse_double(key, *e, tok));
    if (out.empty()) config_fail(key, "list is empty", e->line);
    return out;
}

std::vector<int> get_int_list(const RawConfig& cfg, const std::string& key) {
    const RawEntry* e = cfg.find(key);
    if (!e) config_fail(key, "required list is missing");
    std::vector<int> out;
    for (const auto& tok : split_list(e->value)) {
        double v = parse_double(key, *e, tok);
        if (v != std::floor(v)) config_fail(key, "expected integers", e->line);
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) config_fail(key, "list is empty", e->line);
    return out;
}

Vec parse_point(const RawConfig& cfg, const std::string& key, int expected_dim) {
    const RawEntry* e = cfg.find(key);
    if (!e) config_fail(key, "required vector is missing");
    if (e->value == "ones") {
        if (expected_dim < 1) config_fail(key, "x = ones needs ensemble.N", e->line);
        return Vec::Ones(expected_dim);
    }
    if (e->value == "e1") {
        if (expected_dim < 1) config_fail(key, "x = e1 needs ensemble.N", e->line);
        return Vec::Unit(expected_dim, 0);
    }
    auto toks = split_list(e->value);
    if (toks.empty()) config_fail(key, "vector is empty", e->line);
    Vec x(static_cast<long>(toks.size()));
    for (size_t i = 0; i < toks.size(); ++i) x(static_cast<long>(i)) = parse_double(key, *e, toks[i]);
    if (expected_dim > 0 && x.size() != expected_dim) {
        config_fail(key, "vector has " + std::to_string(x.size()) + " entries, ensemble.N = " +
                              std::to_string(expected_dim), e->line);
    }
    return x;
}

ScalarLaw parse_law(const std::string& key, const RawEntry& e) {
    if (e.value == "rademacher") return ScalarLaw{{-1.0, 1.0}, {0.5, 0.5}};
    ScalarLaw law;
    for (const auto& tok : split_list(e.value)) {
        size_t colon = tok.find(':');
        if (colon == std::string::npos) {
            config_fail(key, "law entries look like value:prob", e.line);
        }
        law.values.push_back(parse_double(key, e, tok.substr(0, colon)));
        law.probs.push_back(parse_double(key, e, tok.substr(colon + 1)));
    }
    if (law.values.empty()) config_fail(key, "law is empty", e.line);
    return law;
}

ScenarioKind kind_from_name(const std::string& name) {
    for (ScenarioKind k :
         {ScenarioKind::orbit_set, ScenarioKind::gluskin, ScenarioKind::mixed_ball,
          ScenarioKind::matrix_polytope, ScenarioKind::independent,
          ScenarioKind::isotropic_check}) {
        if (name == scenario_kind_name(k)) return k;
    }
    config_fail("scenario", "unknown scenario kind '" + name + "'");
}

} // namespace

ScenarioConfig ScenarioConfig::parse_text(const std::string& text) {
    RawConfig raw = tokenize_config(text);
    ScenarioConfig cfg;
    cfg.kind = kind_from_name(raw.require_str("scenario"));
    {
        long long seed = get_int(raw, "seed", 0);
        if (seed < 0) config_fail("seed", "must be >= 0");
        cfg.seed = static_cast<uint64_t>(seed);
    }

    // grid
    cfg.q_list = get_double_list(raw, "grid.q");
    for (double q : cfg.q_list) {
        if (std::isnan(q) || q < 1.0) config_fail("grid.q", "exponents must be in [1, inf]");
    }
    bool has_n = raw.entries.count("grid.n") > 0;
    bool has_eps = raw.entries.count("grid.eps") > 0;
    if (has_n == has_eps) {
        config_fail("grid", "exactly one of grid.n / grid.eps is required");
    }

    // mode
    const RawEntry* mode = raw.find("ensemble.mode");
    if (mode) {
        if (mode->value == "exact") {
            cfg.exact = true;
        } else if (mode->value == "sample") {
            cfg.exact = false;
        } else {
            config_fail("ensemble.mode", "expected exact or sample", mode->line);
        }
    }
    cfg.samples = get_int(raw, "ensemble.samples", 20000);
    if (cfg.samples < 1) config_fail("ensemble.samples", "must be >= 1");

    auto parse_group = [&raw](GroupKind fallback) {
        const RawEntry* e = raw.find("ensemble.group");
        if (!e) return fallback;
        try {
            return group_kind_from_name(e->value);
        } catch (const error&) {
            config_fail("ensemble.group", "unknown group kind '" + e->value + "'", e->line);
        }
    };

    switch (cfg.kind) {
        case ScenarioKind::orbit_set: {
            cfg.N = static_cast<int>(get_int(raw, "ensemble.N", 0));
            cfg.x = parse_point(raw, "ensemble.x", cfg.N);
            cfg.N = static_cast<int>(cfg.x.size());
            if (cfg.x.cwiseAbs().maxCoeff() == 0.0) config_fail("ensemble.x", "must be nonzero");
            cfg.group = parse_group(GroupKind::cyclic_signs);
            break;
        }
        case ScenarioKind::gluskin: {
            cfg.N = static_cast<int>(get_int(raw, "ensemble.N", 0));
            if (cfg.N < 1) config_fail("ensemble.N", "must be >= 1");
            cfg.k_list = get_int_list(raw, "ensemble.k");
            for (int k : cfg.k_list) {
                if (k < 1 || k > cfg.N) config_fail("ensemble.k", "need 1 <= k <= N");
            }
            cfg.group = parse_group(GroupKind::cyclic_signs);
            break;
        }
        case ScenarioKind::mixed_ball: {
            cfg.s = static_cast<int>(get_int(raw, "ensemble.s", 0));
            cfg.b = static_cast<int>(get_int(raw, "ensemble.b", 0));
            if (cfg.s < 1) config_fail("ensemble.s", "must be >= 1");
            if (cfg.b < 1) config_fail("ensemble.b", "must be >= 1");
            bool p1_present = false, p2_present = false;
            cfg.p1 = get_double(raw, "ensemble.p1", 2.0, &p1_present);
            cfg.p2 = get_double(raw, "ensemble.p2", 2.0, &p2_present);
            if (!p1_present) config_fail("ensemble.p1", "required key is missing");
            if (!p2_present) config_fail("ensemble.p2", "required key is missing");
            if (cfg.p1 < 1.0 || cfg.p2 < 1.0) {
                config_fail("ensemble.p1/p2", "exponents must be in [1, inf]");
            }
            cfg.N = cfg.s * cfg.b;
            break;
        }
        case ScenarioKind::matrix_polytope: {
            cfg.N1 = static_cast<int>(get_int(raw, "ensemble.N1", 0));
            cfg.N2 = static_cast<int>(get_int(raw, "ensemble.N2", 0));
            cfg.k1 = static_cast<int>(get_int(raw, "ensemble.k1", 0));
            cfg.k2 = static_cast<int>(get_int(raw, "ensemble.k2", 0));
            if (cfg.N1 < 1) config_fail("ensemble.N1", "must be >= 1");
            if (cfg.N2 < 1) config_fail("ensemble.N2", "must be >= 1");
            if (cfg.k1 < 1 || cfg.k1 > cfg.N1) config_fail("ensemble.k1", "need 1 <= k1 <= N1");
            if (cfg.k2 < 1 || cfg.k2 > cfg.N2) config_fail("ensemble.k2", "need 1 <= k2 <= N2");
            cfg.N = cfg.N1 * cfg.N2;
            break;
        }
        case ScenarioKind::independent: {
            cfg.N = static_cast<int>(get_int(raw, "ensemble.N", 0));
            if (cfg.N < 1) config_fail("ensemble.N", "must be >= 1");
            const RawEntry* shared = raw.find("ensemble.law");
            ScalarLaw base = shared ? parse_law("ensemble.law", *shared)
                                    : ScalarLaw{{-1.0, 1.0}, {0.5, 0.5}};
            cfg.laws.assign(cfg.N, base);
            for (int i = 0; i < cfg.N; ++i) {
                std::string key = "ensemble.law" + std::to_string(i);
                const RawEntry* e = raw.find(key);
                if (e) cfg.laws[i] = parse_law(key, *e);
            }
            if (!cfg.exact) config_fail("ensemble.mode", "independent supports exact mode only");
            break;
        }
        case ScenarioKind::isotropic_check: {
            cfg.N = static_cast<int>(get_int(raw, "ensemble.N", 0));
            if (raw.entries.count("ensemble.x")) {
                cfg.x = parse_point(raw, "ensemble.x", cfg.N);
                cfg.N = static_cast<int>(cfg.x.size());
            } else {
                if (cfg.N < 1) config_fail("ensemble.N", "must be >= 1");
                cfg.x = std::sqrt(static_cast<double>(cfg.N)) * Vec::Unit(cfg.N, 0);
            }
            cfg.group = parse_group(GroupKind::cyclic_signs);
            if (!cfg.exact) config_fail("ensemble.mode", "isotropic_check supports exact mode only");
            break;
        }
    }

    // grid.n / grid.eps need N
    if (has_n) {
        cfg.n_list = get_int_list(raw, "grid.n");
    } else {
        for (double eps : get_double_list(raw, "grid.eps")) {
            if (!(eps > 0.0 && eps < 1.0)) config_fail("grid.eps", "need 0 < eps < 1");
            cfg.n_list.push_back(static_cast<int>(std::floor(cfg.N * (1.0 - eps))));
        }
    }
    for (int n : cfg.n_list) {
        if (n < 0 || n > cfg.N) {
            config_fail("grid.n", "need 0 <= n <= N = " + std::to_string(cfg.N));
        }
    }

    cfg.opt.iters = static_cast<int>(get_int(raw, "optimizer.iters", 200));
    cfg.opt.restarts = static_cast<int>(get_int(raw, "optimizer.restarts", 8));
    cfg.opt.tol = get_double(raw, "optimizer.tol", 1e-8);
    if (cfg.opt.iters < 0) config_fail("optimizer.iters", "must be >= 0");
    if (cfg.opt.restarts < 0) config_fail("optimizer.restarts", "must be >= 0");
    if (!(cfg.opt.tol > 0)) config_fail("optimizer.tol", "must be > 0");
    cfg.with_upper = get_bool(raw, "optimizer.with_upper", true);

    cfg.out_path = raw.find("output.path") ? raw.entries.at("output.path").value : "";
    cfg.format = raw.find("output.format") ? raw.entries.at("output.format").value : "csv";
    if (cfg.format != "csv" && cfg.format != "json") {
        config_fail("output.format", "expected csv or json");
    }
    cfg.timings = get_bool(raw, "output.timings", false);

    for (const auto& [key, entry] : raw.entries) {
        if (!entry.used) config_fail(key, "unknown key", entry.line);
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_error, "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

namespace {

struct Instance {
    std::string label;
    Vec x;                 // orbit-style generator when applicable
    bool set_semantics;    // sup-width target vs avg-width target
};

std::string fmt_exp(double p) {
    if (is_inf_exponent(p)) return "inf";
    std::ostringstream ss;
    ss << p;
    return ss.str();
}

std::vector<Instance> scenario_instances(const ScenarioConfig& cfg) {
    std::vector<Instance> out;
    std::ostringstream ss;
    switch (cfg.kind) {
        case ScenarioKind::orbit_set:
            ss << "orbit_set(N=" << cfg.N << ", group=" << group_kind_name(cfg.group) << ")";
            out.push_back({ss.str(), cfg.x, true});
            break;
        case ScenarioKind::gluskin:
            for (int k : cfg.k_list) {
                std::ostringstream s2;
                s2 << "gluskin(N=" << cfg.N << ", k=" << k << ")";
                out.push_back({s2.str(), gluskin_extreme(cfg.N, k), true});
            }
            break;
        case ScenarioKind::mixed_ball:
            ss << "mixed_ball(s=" << cfg.s << ", b=" << cfg.b << ", p1=" << fmt_exp(cfg.p1)
               << ", p2=" << fmt_exp(cfg.p2) << ")";
            out.push_back({ss.str(), Vec(), true});
            break;
        case ScenarioKind::matrix_polytope:
            ss << "matrix_polytope(N1=" << cfg.N1 << ", N2=" << cfg.N2 << ", k1=" << cfg.k1
               << ", k2=" << cfg.k2 << ")";
            out.push_back({ss.str(), Vec(), true});
            break;
        case ScenarioKind::independent:
            ss << "independent(N=" << cfg.N << ")";
            out.push_back({ss.str(), Vec(), false});
            break;
        case ScenarioKind::isotropic_check:
            ss << "isotropic_check(N=" << cfg.N << ")";
            out.push_back({ss.str(), cfg.x, false});
            break;
    }
    return out;
}

// Ensembles are built once, before the parallel section; mixed_ball depends
// on q (the ball's extreme point of maximal l_q norm does).
DiscreteEnsemble build_ensemble(const ScenarioConfig& cfg, const Instance& inst, double q) {
    switch (cfg.kind) {
        case ScenarioKind::orbit_set:
        case ScenarioKind::gluskin: {
            GroupSpec g{cfg.group, static_cast<int>(inst.x.size())};
            if (cfg.exact) return orbit_ensemble(inst.x, g);
            return orbit_ensemble_sampled(inst.x, g, cfg.samples, cfg.seed);
        }
        case ScenarioKind::mixed_ball: {
            Vec y = SymmetricNorm::lp(cfg.p1).lq_sup_on_ball(cfg.s, q).second;
            Vec z = SymmetricNorm::lp(cfg.p2).lq_sup_on_ball(cfg.b, q).second;
            if (cfg.exact) return mixed_product_ensemble(y, z);
            return mixed_product_ensemble_sampled(y, z, cfg.samples, cfg.seed);
        }
        case ScenarioKind::matrix_polytope: {
            Mat m = Mat::Zero(cfg.N1, cfg.N2);
            m.block(0, 0, cfg.k1, cfg.k2).setOnes();
            if (cfg.exact) return matrix_orbit_ensemble(m);
            return matrix_orbit_ensemble_sampled(m, cfg.samples, cfg.seed);
        }
        case ScenarioKind::independent:
            return independent_ensemble(cfg.laws);
        case ScenarioKind::isotropic_check: {
            GroupSpec g{cfg.group, static_cast<int>(inst.x.size())};
            return orbit_ensemble(inst.x, g);
        }
    }
    fail(errc::internal, "build_ensemble: bad kind");
}

Certificate certify_cell(const ScenarioConfig& cfg, const DiscreteEnsemble& e, double q,
                         int n) {
    switch (cfg.kind) {
        case ScenarioKind::orbit_set:
        case ScenarioKind::gluskin:
        case ScenarioKind::mixed_ball:
        case ScenarioKind::matrix_polytope:
            if (!cfg.exact) {
                fail(errc::unsupported_structure,
                     "certificates require exact mode (sampled atom sets lose the"
                     " structural guarantees)");
            }
            return certify_set_from_ensemble(e, q, n);
        case ScenarioKind::independent:
            return certify_ensemble(e, q, n);
        case ScenarioKind::isotropic_check:
            return certify_isotropic(e, q, n);
    }
    fail(errc::internal, "certify_cell: bad kind");
}

} // namespace

std::vector<ResultRow> run_scenario(const ScenarioConfig& cfg, int parts, int threads) {
    if (threads < 1) fail(errc::invalid_argument, "run_scenario: threads must be >= 1");
    if ((parts & run_all) == 0) fail(errc::invalid_argument, "run_scenario: empty parts mask");

    std::vector<Instance> instances = scenario_instances(cfg);

    // distinct (instance, q) ensembles, built sequentially
    struct Cell {
        size_t inst;
        size_t qi;
        size_t ni;
        const DiscreteEnsemble* ensemble;
    };
    std::vector<std::vector<DiscreteEnsemble>> ensembles(instances.size());
    std::vector<std::string> build_errors(instances.size());
    const bool q_dependent = (cfg.kind == ScenarioKind::mixed_ball);
    for (size_t i = 0; i < instances.size(); ++i) {
        try {
            if (q_dependent) {
                for (double q : cfg.q_list) {
                    ensembles[i].push_back(build_ensemble(cfg, instances[i], q));
                }
            } else {
                ensembles[i].push_back(build_ensemble(cfg, instances[i], cfg.q_list.front()));
            }
        } catch (const error& e) {
            build_errors[i] = e.what();
        }
    }

    std::vector<Cell> cells;
    for (size_t i = 0; i < instances.size(); ++i) {
        for (size_t qi = 0; qi < cfg.q_list.size(); ++qi) {
            for (size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
                const DiscreteEnsemble* e = nullptr;
                if (build_errors[i].empty()) {
                    e = q_dependent ? &ensembles[i][qi] : &ensembles[i][0];
                }
                cells.push_back(Cell{i, qi, ni, e});
            }
        }
    }

    std::vector<ResultRow> rows(cells.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            const Cell& cell = cells[idx];
            const Instance& inst = instances[cell.inst];
            ResultRow& row = rows[idx];
            row.scenario = inst.label;
            row.q = cfg.q_list[cell.qi];
            row.N = cfg.N;
            row.n = cfg.n_list[cell.ni];
            row.seed = cfg.seed;
            auto t0 = std::chrono::steady_clock::now();
            if (!build_errors[cell.inst].empty()) {
                row.error = build_errors[cell.inst];
                continue;
            }
            const DiscreteEnsemble& e = *cell.ensemble;
            std::optional<Certificate> cert;
            std::optional<WidthEstimate> est;
            try {
                if (parts & run_certify) {
                    cert = certify_cell(cfg, e, row.q, row.n);
                    row.lower_bound = cert->lower_bound;
                    row.sigma_upper = cert->sigma_upper;
                }
                if ((parts & run_estimate) && cfg.with_upper) {
                    OptimizerOptions opt = cfg.opt;
                    opt.seed = detail::splitmix_finalize(
                        cfg.seed ^ detail::fnv1a64(inst.label) ^
                        (cell.qi * 1009 + cell.ni + 1));
                    if (inst.set_semantics) {
                        std::vector<Vec> points;
                        points.reserve(e.atoms().size());
                        for (const auto& a : e.atoms()) points.push_back(a.point);
                        est = sup_width_upper(points, row.n, row.q, opt);
                    } else {
                        est = best_subspace_lq(e, row.n, row.q, opt);
                    }
                    row.upper_estimate = est->value;
                }
                if (cert && est) {
                    GapReport gap = gap_report(*cert, *est);
                    row.ratio = gap.ratio;
                    if (!gap.consistent) {
                        row.error = "inconsistent: estimate fell below the certificate";
                    }
                }
            } catch (const error& err) {
                row.error = err.what();
            }
            auto t1 = std::chrono::steady_clock::now();
            if (cfg.timings) {
                row.runtime_ms =
                    std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
            }
        }
    };

    if (threads == 1 || cells.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        int count = std::min<int>(threads, static_cast<int>(cells.size()));
        for (int t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

namespace {

std::string fmt_value(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out =
        "scenario,q,N,n,lower_bound,sigma_upper,upper_estimate,ratio,seed,runtime_ms,error\n";
    for (const auto& r : rows) {
        out += csv_escape(r.scenario);
        out += ',';
        out += fmt_value(r.q);
        out += ',';
        out += std::to_string(r.N);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += fmt_value(r.lower_bound);
        out += ',';
        out += fmt_value(r.sigma_upper);
        out += ',';
        out += fmt_value(r.upper_estimate);
        out += ',';
        out += fmt_value(r.ratio);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += std::to_string(r.runtime_ms);
        out += ',';
        out += csv_escape(r.error);
        out += '\n';
    }
    return out;
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    auto num_or_null = [](double v) -> nlohmann::ordered_json {
        if (std::isnan(v)) return nullptr;
        return v;
    };
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["scenario"] = r.scenario;
        j["q"] = r.q;
        j["N"] = r.N;
        j["n"] = r.n;
        j["lower_bound"] = num_or_null(r.lower_bound);
        j["sigma_upper"] = num_or_null(r.sigma_upper);
        j["upper_estimate"] = num_or_null(r.upper_estimate);
        j["ratio"] = num_or_null(r.ratio);
        j["seed"] = r.seed;
        j["runtime_ms"] = r.runtime_ms;
        j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

void emit_report(const std::vector<ResultRow>& rows, const std::string& path,
                 const std::string& format) {
    if (rows.empty()) fail(errc::invalid_argument, "emit_report: no rows to write");
    if (format != "csv" && format != "json") {
        fail(errc::invalid_argument, "emit_report: format must be csv or json");
    }
    std::string text = format == "csv" ? rows_to_csv(rows) : rows_to_json(rows);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_error, "emit_report: cannot open " + path + " for writing");
    out << text;
    if (!out) fail(errc::io_error, "emit_report: write failed for " + path);
}

} // namespace kw
