#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vecspace.hpp"

namespace kw {

struct Atom {
    double weight;  // > 0
    Vec point;
};

struct EnsembleFlags {
    bool unconditional = false;
    bool independent_mean_zero = false;
    std::optional<std::vector<int>> block_structure;
};

// Finitely supported random vector. Flags are guarantees: a set flag means
// the atom multiset provably has the property (sampled constructions leave
// them unset because the empirical law is only approximately invariant).
class DiscreteEnsemble {
public:
    DiscreteEnsemble(int dim, std::vector<Atom> atoms, EnsembleFlags flags,
                     std::string provenance);

    int dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const EnsembleFlags& flags() const { return flags_; }
    const std::string& provenance() const { return provenance_; }

    /// E |xi_i|^r, exact (compensated) sum over atoms.
    double moment(int coord, double r) const;
    Vec mean() const;
    Mat second_moment() const;  // E xi xi^T

    std::string to_json() const;
    static DiscreteEnsemble from_json(const std::string& text);

private:
    int dim_;
    std::vector<Atom> atoms_;
    EnsembleFlags flags_;
    std::string provenance_;
};

enum class GroupKind { cyclic_signs, permutations_signs, signs_only };

struct GroupSpec {
    GroupKind kind;
    int dim;
    // N * 2^N, N! * 2^N, or 2^N
    double order() const;
};

const char* group_kind_name(GroupKind k);
GroupKind group_kind_from_name(const std::string& name);

// Uniform distribution over the orbit {g x : g in G}, atoms deduplicated.
// Exact mode requires group order <= 1e7.
DiscreteEnsemble orbit_ensemble(const Vec& x, const GroupSpec& g);
DiscreteEnsemble orbit_ensemble_sampled(const Vec& x, const GroupSpec& g,
                                        long long samples, uint64_t seed);

// The 0/1 vector with k leading ones: a vertex of V_k^N = B_inf^N ∩ k B_1^N
// maximizing ||.||_q over it for every q in [1,2].
Vec gluskin_extreme(int N, int k);

// xi[j] = zeta_j * eta^j with zeta a signed-shift orbit of z in R^b and
// eta^j independent signed-shift orbits of y in R^s; dimension s*b.
DiscreteEnsemble mixed_product_ensemble(const Vec& y, const Vec& z);
DiscreteEnsemble mixed_product_ensemble_sampled(const Vec& y, const Vec& z,
                                                long long samples, uint64_t seed);

// Orbit of an N1 x N2 matrix under row/column permutations and whole-row /
// whole-column sign changes, flattened column-major (blocks = columns).
DiscreteEnsemble matrix_orbit_ensemble(const Mat& m);
DiscreteEnsemble matrix_orbit_ensemble_sampled(const Mat& m, long long samples,
                                               uint64_t seed);

struct ScalarLaw {
    std::vector<double> values;
    std::vector<double> probs;
};

// Product of finite mean-zero scalar laws.
DiscreteEnsemble independent_ensemble(const std::vector<ScalarLaw>& laws);
DiscreteEnsemble rademacher_ensemble(int dim);

// Independent per-block signed-shift orbits glued into one vector
// (cartesian-product construction); fully unconditional.
DiscreteEnsemble cartesian_orbit_ensemble(const std::vector<Vec>& block_points);

struct StructureReport {
    bool unconditional = false;
    bool independent_mean_zero = false;
    bool isotropic = false;
    bool exhaustive = false;  // false => randomized spot checks
    long long checks = 0;
};

// Verifies the structural properties against the atom multiset. Exhaustive
// for N <= 12, randomized spot checks (seeded) otherwise.
StructureReport check_structure(const DiscreteEnsemble& e, uint64_t seed = 0);

// Statement-style block-unconditionality: each block's marginal law is
// unconditional, and joint whole-block sign flips preserve the law.
bool check_block_unconditional(const DiscreteEnsemble& e);

// Random unconditional test ensemble: `base_atoms` random points symmetrized
// over all sign patterns, every coordinate guaranteed non-degenerate.
DiscreteEnsemble random_unconditional_ensemble(int dim, int base_atoms, uint64_t seed);

} // namespace kw
