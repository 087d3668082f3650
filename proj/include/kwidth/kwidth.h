/* kwidth: certified lower bounds and numerical upper bounds for Kolmogorov
 * widths of sets and discrete random vectors in l_q^N.
 *
 * C API over opaque handles. Every function that can fail returns a
 * kw_status; KW_OK is 0. On failure, kw_last_error() returns a thread-local
 * message describing what went wrong. Strings returned through char** are
 * owned by the caller and released with kw_string_free().
 */
#ifndef KWIDTH_H
#define KWIDTH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kw_status {
    KW_OK = 0,
    KW_ERR_INVALID_ARGUMENT = 1,
    KW_ERR_INVALID_EXPONENT = 2,
    KW_ERR_UNSUPPORTED_EXPONENT = 3,
    KW_ERR_DIMENSION_MISMATCH = 4,
    KW_ERR_GROUP_TOO_LARGE = 5,
    KW_ERR_SIZE_OVERFLOW = 6,
    KW_ERR_INVALID_LAW = 7,
    KW_ERR_DEGENERATE_COORDINATE = 8,
    KW_ERR_UNSUPPORTED_STRUCTURE = 9,
    KW_ERR_INVALID_PAIR = 10,
    KW_ERR_SOLVER_FAILURE = 11,
    KW_ERR_INCOMPARABLE = 12,
    KW_ERR_CONFIG = 13,
    KW_ERR_IO = 14,
    KW_ERR_INTERNAL = 15
} kw_status;

typedef struct kw_ensemble kw_ensemble;
typedef struct kw_certificate kw_certificate;
typedef struct kw_table kw_table;

const char* kw_version(void);
const char* kw_last_error(void);
void kw_string_free(char* s);

/* ---- ensembles ------------------------------------------------------- */

/* group_kind: "cyclic_signs" | "permutations_signs" | "signs_only" */
kw_status kw_ensemble_orbit(const double* x, int32_t dim, const char* group_kind,
                            kw_ensemble** out);
kw_status kw_ensemble_orbit_sampled(const double* x, int32_t dim, const char* group_kind,
                                    int64_t samples, uint64_t seed, kw_ensemble** out);
kw_status kw_ensemble_rademacher(int32_t dim, kw_ensemble** out);

/* `values`/`probs` hold the laws back to back; support_sizes[i] entries for
 * coordinate i. Every law must have mean zero. */
kw_status kw_ensemble_independent(int32_t dim, const double* values, const double* probs,
                                  const int32_t* support_sizes, kw_ensemble** out);
kw_status kw_ensemble_mixed_product(const double* y, int32_t s, const double* z, int32_t b,
                                    kw_ensemble** out);
/* m is column-major n1 x n2 */
kw_status kw_ensemble_matrix_orbit(const double* m, int32_t n1, int32_t n2,
                                   kw_ensemble** out);
kw_status kw_ensemble_from_json(const char* json_text, kw_ensemble** out);
kw_status kw_ensemble_to_json(const kw_ensemble* e, char** out_json);
int32_t kw_ensemble_dim(const kw_ensemble* e);
int64_t kw_ensemble_atom_count(const kw_ensemble* e);
/* E|xi_coord|^r */
kw_status kw_ensemble_moment(const kw_ensemble* e, int32_t coord, double r, double* out);
/* writes the 0/1 Gluskin extreme point into out_x (length dim) */
kw_status kw_gluskin_extreme(int32_t dim, int32_t k, double* out_x);
void kw_ensemble_free(kw_ensemble* e);

/* ---- certificates ----------------------------------------------------- */

/* Lower bound on d_n^avg(xi, l_q^N)_q, 1 < q <= 2; needs an unconditional,
 * independent-mean-zero, or block-unconditional exact ensemble. */
kw_status kw_certify_ensemble(const kw_ensemble* e, double q, int32_t n,
                              kw_certificate** out);
/* Lower bound on d_n(K, l_q^N) for any K containing x invariant under the
 * group and sign flips. */
kw_status kw_certify_set(const double* x, int32_t dim, double q, int32_t n,
                         const char* group_kind, kw_certificate** out);
/* Isotropic route, valid for every 1 < q < inf when q > 2. */
kw_status kw_certify_isotropic(const kw_ensemble* e, double q, int32_t n,
                               kw_certificate** out);
double kw_certificate_lower_bound(const kw_certificate* c);
double kw_certificate_sigma_upper(const kw_certificate* c);
/* 1 if the bound applies to the original ensemble, 0 if only to its
 * unit-moment rescaling */
int32_t kw_certificate_valid_for_original(const kw_certificate* c);
const char* kw_certificate_method(const kw_certificate* c);
kw_status kw_certificate_to_json(const kw_certificate* c, char** out_json);
void kw_certificate_free(kw_certificate* c);

/* ---- scenarios --------------------------------------------------------- */

enum {
    KW_RUN_CERTIFY = 1,
    KW_RUN_ESTIMATE = 2,
    KW_RUN_ALL = 3
};

/* `has_seed_override` != 0 replaces the config seed with seed_override. */
kw_status kw_run_scenario_text(const char* config_text, int32_t parts, int32_t threads,
                               int32_t has_seed_override, uint64_t seed_override,
                               kw_table** out);
kw_status kw_run_scenario_file(const char* path, int32_t parts, int32_t threads,
                               int32_t has_seed_override, uint64_t seed_override,
                               kw_table** out);
int64_t kw_table_row_count(const kw_table* t);
/* number of rows whose error field is nonempty */
int64_t kw_table_error_count(const kw_table* t);
kw_status kw_table_to_csv(const kw_table* t, char** out_text);
kw_status kw_table_to_json(const kw_table* t, char** out_text);
/* format: "csv" | "json" */
kw_status kw_table_write(const kw_table* t, const char* path, const char* format);
/* output path/format from the config ([output] table); empty string if the
 * config named none. Pointers live as long as the table. */
const char* kw_table_output_path(const kw_table* t);
const char* kw_table_output_format(const kw_table* t);
void kw_table_free(kw_table* t);

/* ---- selfcheck --------------------------------------------------------- */

/* Runs the fast acceptance subset. Returns KW_OK with *failures_out = 0 on
 * success; *report (optional) carries the pass/fail table. */
kw_status kw_selfcheck(int32_t* failures_out, char** report);

#ifdef __cplusplus
}
#endif

#endif /* KWIDTH_H */
