#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "certify.hpp"
#include "ensembles.hpp"
#include "vecspace.hpp"

namespace kw {

enum class WidthKind { avg, sup };

// Heuristic upper bounds never claim to be lower bounds; only certificates
// from the certify module do.
struct WidthEstimate {
    WidthKind kind = WidthKind::avg;
    double q = 0.0;
    int n = 0;
    double value = 0.0;
    Subspace witness = Subspace::zero(1);
    std::string method;
    uint64_t rng_seed = 0;
    int iters = 0;
    int restarts = 0;
    double tol = 0.0;

    std::string to_json(bool include_basis = true) const;
};

struct OptimizerOptions {
    int iters = 200;
    int restarts = 8;
    double tol = 1e-8;
    uint64_t seed = 0;
};

// (sum_a w_a rho(x_a, Q)_q^q)^{1/q}: an upper bound on d_n^avg at n = dim Q
// (each per-atom distance is itself computed as a feasible upper bound).
double avg_width_at(const DiscreteEnsemble& e, const Subspace& Q, double q);

// Monte Carlo variant over `samples` seeded atom draws.
double avg_width_at_mc(const DiscreteEnsemble& e, const Subspace& Q, double q,
                       long long samples, uint64_t seed);

struct WidthBracket {
    double lower = 0.0;  // from per-atom dual certificates
    double upper = 0.0;
};

// Certified two-sided enclosure of (E rho^q)^{1/q} at a fixed subspace.
WidthBracket avg_width_bracket_at(const DiscreteEnsemble& e, const Subspace& Q, double q);

// Exact d_n^avg(xi, l_2^N)_2: spectral tail of the second-moment matrix.
WidthEstimate best_subspace_l2(const DiscreteEnsemble& e, int n);

// Alternating scheme for general 1 < q < inf: IRLS atom weights vs. weighted
// spectral subspace update, chained over k = 1..n so the value is monotone
// nonincreasing in n; always a valid upper bound (best evaluated iterate).
WidthEstimate best_subspace_lq(const DiscreteEnsemble& e, int n, double q,
                               const OptimizerOptions& opt);

// Upper bound on d_n(conv(points), l_q^N) via smoothed-max (log-sum-exp)
// alternation over the same subspace updates.
WidthEstimate sup_width_upper(const std::vector<Vec>& points, int n, double q,
                              const OptimizerOptions& opt);

struct GapReport {
    double ratio = 0.0;
    bool consistent = false;
};

// ratio = estimate / certificate; consistent when >= 1 - 1e-8. Requires
// matching (q, n, N) and matching targets (avg vs avg, set vs sup).
GapReport gap_report(const Certificate& cert, const WidthEstimate& est);

} // namespace kw
