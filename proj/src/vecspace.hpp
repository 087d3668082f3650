#pragma once

#include <Eigen/Dense>
#include <utility>

#include "errors.hpp"
#include "exponent.hpp"
#include "rng.hpp"

namespace kw {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// (sum |x_k|^q)^{1/q}; max |x_k| for q = inf.
double lq_norm(const Vec& x, double q);

// Symmetric norms admitted as block norms: l_p and top-k partial sums
// (sum of the k largest absolute entries).
class SymmetricNorm {
public:
    static SymmetricNorm lp(double p);
    static SymmetricNorm top_k_sum(int k);

    double value(const Vec& x) const;

    // max ||y||_q over the unit ball of the norm in R^dim, with a maximizer.
    // For these two families the maximum is attained on flat vectors
    // (m equal entries), so a scan over m = 1..dim is exact.
    std::pair<double, Vec> lq_sup_on_ball(int dim, double q) const;

    bool is_lp() const { return kind_ == Kind::lp; }
    double p() const { return p_; }
    int k() const { return k_; }

private:
    enum class Kind { lp, top_k };
    Kind kind_ = Kind::lp;
    double p_ = 2.0;
    int k_ = 1;
};

struct MixedNormSpec {
    int block_size;   // s
    int block_count;  // b
    double inner_p;   // p1
    double outer_p;   // p2
};

// Inner p1-norm per contiguous block, outer p2-norm of the block values.
double mixed_norm(const Vec& x, const MixedNormSpec& spec);

// An n-dimensional linear subspace of R^N held as a column-orthonormal basis.
// n = 0 is the zero subspace.
class Subspace {
public:
    static Subspace zero(int ambient_dim);
    static Subspace from_basis(Mat orthonormal_basis);  // validates B^T B = I

    int ambient_dim() const { return static_cast<int>(basis_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Mat& basis() const { return basis_; }

    // coefficients of the l2-projection of x onto the subspace
    Vec project_coeffs(const Vec& x) const { return basis_.transpose() * x; }

private:
    explicit Subspace(Mat basis) : basis_(std::move(basis)) {}
    Mat basis_;
};

// Rank-revealing orthonormalization (SVD); drops directions with singular
// value <= 1e-12 * sigma_max. Deterministic: each basis column is sign-fixed
// so its largest-magnitude entry is positive.
Subspace orthonormalize(const Mat& vectors);

// Haar-ish random subspace from an orthonormalized Gaussian frame.
Subspace random_subspace(int ambient_dim, int dim, rng_stream& rng);

// P = I - B B^T, the orthoprojector onto the orthogonal complement.
Mat residual_projector(const Subspace& Q);

struct DistanceResult {
    double value = 0.0;         // feasible objective: upper bound on rho
    double lower = 0.0;         // dual certificate value: lower bound on rho
    double kkt_residual = 0.0;
    int iterations = 0;
    bool certified = false;     // duality gap within tolerance
};

// rho(x, Q)_q = inf_{y in Q} ||x - y||_q.
//   q = 2      : closed form |P x|
//   q in {1,inf}: exact LP with a verified dual certificate
//   otherwise  : smoothed IRLS/Newton with a duality-gap certificate
DistanceResult distance_lq_detail(const Vec& x, const Subspace& Q, double q,
                                  double tol = 1e-10);

// Certified value; throws solver_failure (carrying the best upper bound and
// the KKT residual) if the duality gap cannot be closed.
double distance_lq(const Vec& x, const Subspace& Q, double q, double tol = 1e-10);

} // namespace kw
