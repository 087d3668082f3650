#pragma once

#include <string>

#include "ensembles.hpp"
#include "vecspace.hpp"

namespace kw {

enum class CertMethod {
    theorem2_q_le_2,
    theorem2_q_ge_2,
    lemma_per_subspace,
    set_rigidity,
};

const char* cert_method_name(CertMethod m);

// A provable lower bound on a width. `lower_bound` applies to the original
// input when valid_for_original is set, otherwise to its unit-q-moment
// rescaling (recorded in provenance).
struct Certificate {
    CertMethod method;
    double q = 0.0;
    int N = 0;
    int n = 0;
    double sigma_upper = 0.0;
    double lower_bound = 0.0;
    bool valid_for_original = true;
    std::string provenance;

    std::string to_json() const;
};

struct WeakMomentBracket {
    double p = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::string method_lower;
    std::string method_upper;
};

// Two ensembles on the same atom index set (identical weights), so bilinear
// expectations are exact atom sums.
struct CoupledPair {
    DiscreteEnsemble xi;
    DiscreteEnsemble eta;

    CoupledPair(DiscreteEnsemble xi_in, DiscreteEnsemble eta_in);
};

// phi(t) = |t|^{q-1} sign t applied per coordinate after rescaling every
// coordinate to unit q-th moment; eta_i = phi(xi_i) - E phi(xi_i).
// Requires 1 < q <= 2 and an unconditional / independent-mean-zero /
// block-unconditional input.
CoupledPair biorthogonal_dual(const DiscreteEnsemble& xi, double q);

// E xi_i eta_j, atom-exact; the identity matrix certifies biorthogonality.
Mat check_biorthogonal(const CoupledPair& pair);

// sigma_2(eta) = sqrt(lambda_max(E eta eta^T)), exact.
double weak_moment_exact2(const DiscreteEnsemble& eta);

struct WeakMomentWitness {
    double value = 0.0;
    Vec direction;
};

// Multistart fixed-point ascent for sigma_p on the unit sphere; the returned
// value is always a valid lower bound (the witness is explicit).
WeakMomentWitness weak_moment_lower(const DiscreteEnsemble& eta, double p,
                                    int restarts, uint64_t seed);

// Rigorous upper bound sigma_p(eta) <= C_p * D * max_i (E|eta_i|^p)^{1/p},
// C_p = sqrt(p-1), with D = 1 (unconditional), D = 2 (independent mean-zero
// via symmetrization), or C_p^2 * 1 for block-unconditional ensembles
// (type-2 step applied within and then across blocks).
double weak_moment_upper_rud(const DiscreteEnsemble& eta, double p);

WeakMomentBracket weak_moment_bracket(const DiscreteEnsemble& eta, double p,
                                      int restarts, uint64_t seed);

// Khintchine/type-2 constant sqrt(p-1) for p >= 2.
double khintchine_c(double p);

// d_n^avg(xi, l_q^N)_q >= (N-n)^{1/q} / sigma          for 1 < q <= 2,
//                      >= (N-n)^{1/2} N^{1/q-1/2} / sigma  for 2 <= q < inf.
Certificate theorem2_bound(int N, int n, double q, double sigma_upper);

// Per-subspace bound E<xi, P eta> / (E ||P eta||_{q'}^{q'})^{1/q'} on
// (E rho^q(xi,Q)_q)^{1/q}; the numerator equals N - dim(Q) for a
// biorthogonal pair.
double lemma_bound(const CoupledPair& pair, const Subspace& Q, double q);

// Full pipeline: rescale to unit q-moments, build the dual, bound sigma_{q'},
// apply theorem2_bound. Valid for the original ensemble when every
// coordinate q-moment is >= 1 (diagonal contraction argument).
Certificate certify_ensemble(const DiscreteEnsemble& xi, double q, int n);

// Lower bound on d_n(K, l_q^N) for every K containing x that is invariant
// under the group and sign flips; runs certify on the orbit ensemble and
// unwinds the moment normalization (m_min^{1/q} contraction).
Certificate certify_set(const Vec& x, double q, int n, const GroupSpec& group);

// Same unwinding applied to an already-built orbit-style ensemble whose
// convex hull is the certified set (e.g. matrix orbits, mixed products).
Certificate certify_set_from_ensemble(const DiscreteEnsemble& e, double q, int n);

// Isotropic route: (xi, xi) is biorthogonal; for q >= 2 the monotonicity
// sigma_{q'} <= sigma_2 = 1 gives a certificate for every 1 < q < inf with
// flags only needed when q < 2.
Certificate certify_isotropic(const DiscreteEnsemble& xi, double q, int n);

} // namespace kw
