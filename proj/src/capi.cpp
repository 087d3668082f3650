#include "kwidth/kwidth.h"

#include <cstring>
#include <string>

#include "scenario.hpp"

// Handle types wrap the C++ core values; the C surface never exposes
// Eigen or STL types.
struct kw_ensemble {
    kw::DiscreteEnsemble value;
};

struct kw_certificate {
    kw::Certificate value;
};

struct kw_table {
    std::vector<kw::ResultRow> rows;
    std::string out_path;
    std::string out_format;
};

namespace {

thread_local std::string g_last_error;

kw_status status_of(kw::errc c) {
    using kw::errc;
    switch (c) {
        case errc::ok: return KW_OK;
        case errc::invalid_argument: return KW_ERR_INVALID_ARGUMENT;
        case errc::invalid_exponent: return KW_ERR_INVALID_EXPONENT;
        case errc::unsupported_exponent: return KW_ERR_UNSUPPORTED_EXPONENT;
        case errc::dimension_mismatch: return KW_ERR_DIMENSION_MISMATCH;
        case errc::group_too_large: return KW_ERR_GROUP_TOO_LARGE;
        case errc::size_overflow: return KW_ERR_SIZE_OVERFLOW;
        case errc::invalid_law: return KW_ERR_INVALID_LAW;
        case errc::degenerate_coordinate: return KW_ERR_DEGENERATE_COORDINATE;
        case errc::unsupported_structure: return KW_ERR_UNSUPPORTED_STRUCTURE;
        case errc::invalid_pair: return KW_ERR_INVALID_PAIR;
        case errc::solver_failure: return KW_ERR_SOLVER_FAILURE;
        case errc::incomparable: return KW_ERR_INCOMPARABLE;
        case errc::config_error: return KW_ERR_CONFIG;
        case errc::io_error: return KW_ERR_IO;
        case errc::internal: return KW_ERR_INTERNAL;
    }
    return KW_ERR_INTERNAL;
}

template <typename Fn>
kw_status guarded(Fn&& fn) {
    try {
        fn();
        return KW_OK;
    } catch (const kw::error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return KW_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return KW_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

kw_status require(bool cond, const char* msg) {
    if (cond) return KW_OK;
    g_last_error = msg;
    return KW_ERR_INVALID_ARGUMENT;
}

kw::Vec vec_of(const double* x, int32_t dim) {
    return Eigen::Map<const kw::Vec>(x, dim);
}

kw_status run_scenario_impl(kw::ScenarioConfig cfg, int32_t parts, int32_t threads,
                            int32_t has_seed_override, uint64_t seed_override,
                            kw_table** out) {
    return guarded([&] {
        if (has_seed_override) cfg.seed = seed_override;
        auto rows = kw::run_scenario(cfg, parts, threads < 1 ? 1 : threads);
        *out = new kw_table{std::move(rows), cfg.out_path, cfg.format};
    });
}

} // namespace

extern "C" {

const char* kw_version(void) { return "0.1.0"; }

const char* kw_last_error(void) { return g_last_error.c_str(); }

void kw_string_free(char* s) { delete[] s; }

kw_status kw_ensemble_orbit(const double* x, int32_t dim, const char* group_kind,
                            kw_ensemble** out) {
    if (kw_status s = require(x && group_kind && out && dim >= 1, "bad arguments")) return s;
    return guarded([&] {
        kw::GroupSpec g{kw::group_kind_from_name(group_kind), dim};
        *out = new kw_ensemble{kw::orbit_ensemble(vec_of(x, dim), g)};
    });
}

kw_status kw_ensemble_orbit_sampled(const double* x, int32_t dim, const char* group_kind,
                                    int64_t samples, uint64_t seed, kw_ensemble** out) {
    if (kw_status s = require(x && group_kind && out && dim >= 1, "bad arguments")) return s;
    return guarded([&] {
        kw::GroupSpec g{kw::group_kind_from_name(group_kind), dim};
        *out = new kw_ensemble{kw::orbit_ensemble_sampled(vec_of(x, dim), g, samples, seed)};
    });
}

kw_status kw_ensemble_rademacher(int32_t dim, kw_ensemble** out) {
    if (kw_status s = require(out && dim >= 1, "bad arguments")) return s;
    return guarded([&] { *out = new kw_ensemble{kw::rademacher_ensemble(dim)}; });
}

kw_status kw_ensemble_independent(int32_t dim, const double* values, const double* probs,
                                  const int32_t* support_sizes, kw_ensemble** out) {
    if (kw_status s = require(values && probs && support_sizes && out && dim >= 1,
                              "bad arguments")) {
        return s;
    }
    return guarded([&] {
        std::vector<kw::ScalarLaw> laws(dim);
        int64_t off = 0;
        for (int32_t i = 0; i < dim; ++i) {
            if (support_sizes[i] < 1) kw::fail(kw::errc::invalid_law, "empty law support");
            laws[i].values.assign(values + off, values + off + support_sizes[i]);
            laws[i].probs.assign(probs + off, probs + off + support_sizes[i]);
            off += support_sizes[i];
        }
        *out = new kw_ensemble{kw::independent_ensemble(laws)};
    });
}

kw_status kw_ensemble_mixed_product(const double* y, int32_t s, const double* z, int32_t b,
                                    kw_ensemble** out) {
    if (kw_status st = require(y && z && out && s >= 1 && b >= 1, "bad arguments")) return st;
    return guarded([&] {
        *out = new kw_ensemble{kw::mixed_product_ensemble(vec_of(y, s), vec_of(z, b))};
    });
}

kw_status kw_ensemble_matrix_orbit(const double* m, int32_t n1, int32_t n2,
                                   kw_ensemble** out) {
    if (kw_status s = require(m && out && n1 >= 1 && n2 >= 1, "bad arguments")) return s;
    return guarded([&] {
        kw::Mat mat = Eigen::Map<const kw::Mat>(m, n1, n2);
        *out = new kw_ensemble{kw::matrix_orbit_ensemble(mat)};
    });
}

kw_status kw_ensemble_from_json(const char* json_text, kw_ensemble** out) {
    if (kw_status s = require(json_text && out, "bad arguments")) return s;
    return guarded([&] { *out = new kw_ensemble{kw::DiscreteEnsemble::from_json(json_text)}; });
}

kw_status kw_ensemble_to_json(const kw_ensemble* e, char** out_json) {
    if (kw_status s = require(e && out_json, "bad arguments")) return s;
    return guarded([&] { *out_json = dup_string(e->value.to_json()); });
}

int32_t kw_ensemble_dim(const kw_ensemble* e) { return e ? e->value.dim() : 0; }

int64_t kw_ensemble_atom_count(const kw_ensemble* e) {
    return e ? static_cast<int64_t>(e->value.atoms().size()) : 0;
}

kw_status kw_ensemble_moment(const kw_ensemble* e, int32_t coord, double r, double* out) {
    if (kw_status s = require(e && out, "bad arguments")) return s;
    return guarded([&] { *out = e->value.moment(coord, r); });
}

kw_status kw_gluskin_extreme(int32_t dim, int32_t k, double* out_x) {
    if (kw_status s = require(out_x != nullptr, "bad arguments")) return s;
    return guarded([&] {
        kw::Vec x = kw::gluskin_extreme(dim, k);
        std::memcpy(out_x, x.data(), sizeof(double) * dim);
    });
}

void kw_ensemble_free(kw_ensemble* e) { delete e; }

kw_status kw_certify_ensemble(const kw_ensemble* e, double q, int32_t n,
                              kw_certificate** out) {
    if (kw_status s = require(e && out, "bad arguments")) return s;
    return guarded([&] { *out = new kw_certificate{kw::certify_ensemble(e->value, q, n)}; });
}

kw_status kw_certify_set(const double* x, int32_t dim, double q, int32_t n,
                         const char* group_kind, kw_certificate** out) {
    if (kw_status s = require(x && group_kind && out && dim >= 1, "bad arguments")) return s;
    return guarded([&] {
        kw::GroupSpec g{kw::group_kind_from_name(group_kind), dim};
        *out = new kw_certificate{kw::certify_set(vec_of(x, dim), q, n, g)};
    });
}

kw_status kw_certify_isotropic(const kw_ensemble* e, double q, int32_t n,
                               kw_certificate** out) {
    if (kw_status s = require(e && out, "bad arguments")) return s;
    return guarded([&] { *out = new kw_certificate{kw::certify_isotropic(e->value, q, n)}; });
}

double kw_certificate_lower_bound(const kw_certificate* c) {
    return c ? c->value.lower_bound : 0.0;
}

double kw_certificate_sigma_upper(const kw_certificate* c) {
    return c ? c->value.sigma_upper : 0.0;
}

int32_t kw_certificate_valid_for_original(const kw_certificate* c) {
    return c && c->value.valid_for_original ? 1 : 0;
}

const char* kw_certificate_method(const kw_certificate* c) {
    return c ? kw::cert_method_name(c->value.method) : "";
}

kw_status kw_certificate_to_json(const kw_certificate* c, char** out_json) {
    if (kw_status s = require(c && out_json, "bad arguments")) return s;
    return guarded([&] { *out_json = dup_string(c->value.to_json()); });
}

void kw_certificate_free(kw_certificate* c) { delete c; }

kw_status kw_run_scenario_text(const char* config_text, int32_t parts, int32_t threads,
                               int32_t has_seed_override, uint64_t seed_override,
                               kw_table** out) {
    if (kw_status s = require(config_text && out, "bad arguments")) return s;
    try {
        return run_scenario_impl(kw::ScenarioConfig::parse_text(config_text), parts, threads,
                                 has_seed_override, seed_override, out);
    } catch (const kw::error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    }
}

kw_status kw_run_scenario_file(const char* path, int32_t parts, int32_t threads,
                               int32_t has_seed_override, uint64_t seed_override,
                               kw_table** out) {
    if (kw_status s = require(path && out, "bad arguments")) return s;
    try {
        return run_scenario_impl(kw::ScenarioConfig::parse_file(path), parts, threads,
                                 has_seed_override, seed_override, out);
    } catch (const kw::error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    }
}

int64_t kw_table_row_count(const kw_table* t) {
    return t ? static_cast<int64_t>(t->rows.size()) : 0;
}

int64_t kw_table_error_count(const kw_table* t) {
    if (!t) return 0;
    int64_t n = 0;
    for (const auto& r : t->rows) {
        if (!r.error.empty()) ++n;
    }
    return n;
}

kw_status kw_table_to_csv(const kw_table* t, char** out_text) {
    if (kw_status s = require(t && out_text, "bad arguments")) return s;
    return guarded([&] { *out_text = dup_string(kw::rows_to_csv(t->rows)); });
}

kw_status kw_table_to_json(const kw_table* t, char** out_text) {
    if (kw_status s = require(t && out_text, "bad arguments")) return s;
    return guarded([&] { *out_text = dup_string(kw::rows_to_json(t->rows)); });
}

kw_status kw_table_write(const kw_table* t, const char* path, const char* format) {
    if (kw_status s = require(t && path && format, "bad arguments")) return s;
    return guarded([&] { kw::emit_report(t->rows, path, format); });
}

const char* kw_table_output_path(const kw_table* t) {
    return t ? t->out_path.c_str() : "";
}

const char* kw_table_output_format(const kw_table* t) {
    return t ? t->out_format.c_str() : "";
}

void kw_table_free(kw_table* t) { delete t; }

kw_status kw_selfcheck(int32_t* failures_out, char** report) {
    if (kw_status s = require(failures_out != nullptr, "bad arguments")) return s;
    return guarded([&] {
        kw::SelfcheckResult res = kw::selfcheck();
        *failures_out = res.failed;
        if (report) *report = dup_string(res.report);
    });
}

} // extern "C"
