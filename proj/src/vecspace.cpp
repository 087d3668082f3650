#include "vecspace.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ksum.hpp"
#include "lp.hpp"

namespace kw {

namespace {

void require_point(const Vec& x, const char* who) {
    if (x.size() < 1) fail(errc::invalid_argument, std::string(who) + ": empty vector");
    if (!x.allFinite()) fail(errc::invalid_argument, std::string(who) + ": non-finite coordinate");
}

// |t|^{q-1} sign t, the lq duality map (and the biorthogonal construction's phi)
inline double phi_q(double t, double q) {
    if (t == 0.0) return 0.0;
    double a = std::pow(std::abs(t), q - 1.0);
    return t > 0 ? a : -a;
}

} // namespace

double lq_norm(const Vec& x, double q) {
    require_exponent(q, "lq_norm");
    require_point(x, "lq_norm");
    if (is_inf_exponent(q)) return x.cwiseAbs().maxCoeff();
    if (q == 1.0) {
        ksum s;
        for (int i = 0; i < x.size(); ++i) s.add(std::abs(x(i)));
        return s.value();
    }
    if (q == 2.0) return x.norm();
    double m = x.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    ksum s;
    for (int i = 0; i < x.size(); ++i) s.add(std::pow(std::abs(x(i)) / m, q));
    return m * std::pow(s.value(), 1.0 / q);
}

SymmetricNorm SymmetricNorm::lp(double p) {
    require_exponent(p, "SymmetricNorm::lp");
    SymmetricNorm n;
    n.kind_ = Kind::lp;
    n.p_ = p;
    return n;
}

SymmetricNorm SymmetricNorm::top_k_sum(int k) {
    if (k < 1) fail(errc::invalid_argument, "SymmetricNorm::top_k_sum: k must be >= 1");
    SymmetricNorm n;
    n.kind_ = Kind::top_k;
    n.k_ = k;
    return n;
}

double SymmetricNorm::value(const Vec& x) const {
    if (kind_ == Kind::lp) return lq_norm(x, p_);
    std::vector<double> a(x.size());
    for (int i = 0; i < x.size(); ++i) a[i] = std::abs(x(i));
    int k = std::min<int>(k_, static_cast<int>(a.size()));
    std::partial_sort(a.begin(), a.begin() + k, a.end(), std::greater<double>());
    ksum s;
    for (int i = 0; i < k; ++i) s.add(a[i]);
    return s.value();
}

std::pair<double, Vec> SymmetricNorm::lq_sup_on_ball(int dim, double q) const {
    require_exponent(q, "lq_sup_on_ball");
    if (dim < 1) fail(errc::invalid_argument, "lq_sup_on_ball: dim must be >= 1");
    double best = -1.0;
    int best_m = 1;
    for (int m = 1; m <= dim; ++m) {
        Vec flat = Vec::Zero(dim);
        flat.head(m).setOnes();
        double nv = value(flat);
        double val = lq_norm(flat, q) / nv;
        if (val > best * (1.0 + 1e-15)) {
            best = val;
            best_m = m;
        }
    }
    Vec arg = Vec::Zero(dim);
    Vec flat = Vec::Zero(dim);
    flat.head(best_m).setOnes();
    arg.head(best_m).setConstant(1.0 / value(flat));
    return {best, arg};
}

double mixed_norm(const Vec& x, const MixedNormSpec& spec) {
    if (spec.block_size < 1 || spec.block_count < 1) {
        fail(errc::invalid_argument, "mixed_norm: block sizes must be >= 1");
    }
    require_exponent(spec.inner_p, "mixed_norm inner");
    require_exponent(spec.outer_p, "mixed_norm outer");
    if (x.size() != static_cast<long>(spec.block_size) * spec.block_count) {
        fail(errc::dimension_mismatch, "mixed_norm: len(x) != s*b");
    }
    Vec z(spec.block_count);
    for (int j = 0; j < spec.block_count; ++j) {
        z(j) = lq_norm(x.segment(static_cast<long>(j) * spec.block_size, spec.block_size),
                       spec.inner_p);
    }
    return lq_norm(z, spec.outer_p);
}

Subspace Subspace::zero(int ambient_dim) {
    if (ambient_dim < 1) fail(errc::invalid_argument, "Subspace::zero: ambient dim >= 1");
    return Subspace(Mat(ambient_dim, 0));
}

Subspace Subspace::from_basis(Mat basis) {
    if (basis.rows() < 1) fail(errc::invalid_argument, "Subspace: ambient dim >= 1");
    if (basis.cols() > basis.rows()) {
        fail(errc::invalid_argument, "Subspace: dim exceeds ambient dim");
    }
    if (basis.cols() > 0) {
        Mat g = basis.transpose() * basis;
        g.diagonal().array() -= 1.0;
        if (g.cwiseAbs().maxCoeff() > 1e-10) {
            fail(errc::invalid_argument, "Subspace: basis is not column-orthonormal");
        }
    }
    return Subspace(std::move(basis));
}

namespace {

void fix_column_signs(Mat& u) {
    for (int j = 0; j < u.cols(); ++j) {
        int idx = 0;
        u.col(j).cwiseAbs().maxCoeff(&idx);
        if (u(idx, j) < 0) u.col(j) = -u.col(j);
    }
}

} // namespace

Subspace orthonormalize(const Mat& vectors) {
    if (vectors.rows() < 1) fail(errc::invalid_argument, "orthonormalize: ambient dim >= 1");
    if (vectors.cols() > vectors.rows()) {
        fail(errc::invalid_argument, "orthonormalize: more vectors than ambient dim");
    }
    if (vectors.cols() == 0) return Subspace::zero(static_cast<int>(vectors.rows()));
    Eigen::JacobiSVD<Mat> svd(vectors, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-12 * smax) ++rank;
    }
    if (rank == 0) return Subspace::zero(static_cast<int>(vectors.rows()));
    Mat u = svd.matrixU().leftCols(rank);
    fix_column_signs(u);
    return Subspace::from_basis(std::move(u));
}

Subspace random_subspace(int ambient_dim, int dim, rng_stream& rng) {
    if (dim < 0 || dim > ambient_dim) {
        fail(errc::invalid_argument, "random_subspace: need 0 <= dim <= ambient dim");
    }
    if (dim == 0) return Subspace::zero(ambient_dim);
    for (int attempt = 0; attempt < 16; ++attempt) {
        Mat g(ambient_dim, dim);
        for (int j = 0; j < dim; ++j) {
            for (int i = 0; i < ambient_dim; ++i) g(i, j) = rng.normal();
        }
        Subspace q = orthonormalize(g);
        if (q.dim() == dim) return q;
    }
    fail(errc::internal, "random_subspace: degenerate Gaussian frame");
}

Mat residual_projector(const Subspace& Q) {
    const int n = Q.ambient_dim();
    Mat p = Mat::Identity(n, n);
    if (Q.dim() > 0) p -= Q.basis() * Q.basis().transpose();
    return p;
}

namespace {

DistanceResult distance_l2(const Vec& x, const Subspace& Q) {
    DistanceResult res;
    Vec r = x;
    if (Q.dim() > 0) r -= Q.basis() * Q.project_coeffs(x);
    res.value = r.norm();
    res.lower = res.value;
    res.certified = true;
    return res;
}

// rho(x, Q)_1 = min ||x - Ba||_1 as an LP over (a+, a-, t, s1, s2):
//   B a + t - s1 = x,  B a - t + s2 = x,  min sum t.
// The row duals recombine into z with B^T z = 0, ||z||_inf <= 1, <x,z> = rho.
DistanceResult distance_l1_lp(const Vec& x, const Subspace& Q) {
    const int N = static_cast<int>(x.size());
    const int n = Q.dim();
    const Mat& B = Q.basis();
    const int nv = 2 * n + 3 * N;
    Mat A = Mat::Zero(2 * N, nv);
    Vec b(2 * N), c = Vec::Zero(nv);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < n; ++j) {
            A(i, j) = B(i, j);
            A(i, n + j) = -B(i, j);
            A(N + i, j) = B(i, j);
            A(N + i, n + j) = -B(i, j);
        }
        A(i, 2 * n + i) = 1.0;          // +t_i
        A(N + i, 2 * n + i) = -1.0;     // -t_i
        A(i, 2 * n + N + i) = -1.0;     // -s1_i
        A(N + i, 2 * n + 2 * N + i) = 1.0;  // +s2_i
        b(i) = x(i);
        b(N + i) = x(i);
        c(2 * n + i) = 1.0;
    }
    LpResult lp = simplex_solve(A, b, c);
    if (!lp.feasible) fail(errc::internal, "distance_l1: LP infeasible");
    DistanceResult res;
    res.value = lp.objective;
    res.iterations = lp.pivots;
    Vec z = lp.y.head(N) + lp.y.tail(N);
    if (Q.dim() > 0) z -= B * (B.transpose() * z);  // enforce z in Q-perp exactly
    double zn = z.cwiseAbs().maxCoeff();            // dual norm for q=1 is l_inf
    res.lower = zn > 0 ? x.dot(z) / zn : 0.0;
    res.lower = std::min(res.lower, res.value);
    res.certified = (res.value - res.lower) <= 1e-9 * std::max(1.0, res.value);
    return res;
}

// rho(x, Q)_inf via min t s.t. -t <= x - Ba <= t; duals give z with
// B^T z = 0, ||z||_1 <= 1, <x,z> = rho.
DistanceResult distance_linf_lp(const Vec& x, const Subspace& Q) {
    const int N = static_cast<int>(x.size());
    const int n = Q.dim();
    const Mat& B = Q.basis();
    const int nv = 2 * n + 1 + 2 * N;
    Mat A = Mat::Zero(2 * N, nv);
    Vec b(2 * N), c = Vec::Zero(nv);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < n; ++j) {
            A(i, j) = B(i, j);
            A(i, n + j) = -B(i, j);
            A(N + i, j) = B(i, j);
            A(N + i, n + j) = -B(i, j);
        }
        A(i, 2 * n) = 1.0;
        A(N + i, 2 * n) = -1.0;
        A(i, 2 * n + 1 + i) = -1.0;
        A(N + i, 2 * n + 1 + N + i) = 1.0;
        b(i) = x(i);
        b(N + i) = x(i);
    }
    c(2 * n) = 1.0;
    LpResult lp = simplex_solve(A, b, c);
    if (!lp.feasible) fail(errc::internal, "distance_linf: LP infeasible");
    DistanceResult res;
    res.value = lp.objective;
    res.iterations = lp.pivots;
    Vec z = lp.y.head(N) + lp.y.tail(N);
    if (Q.dim() > 0) z -= B * (B.transpose() * z);
    double zn = lq_norm(z, 1.0);  // dual norm for q=inf
    res.lower = zn > 0 ? x.dot(z) / zn : 0.0;
    res.lower = std::min(res.lower, res.value);
    res.certified = (res.value - res.lower) <= 1e-9 * std::max(1.0, res.value);
    return res;
}

// Smoothed IRLS/Newton on the coefficients for 1 < q < inf, q != 2.
// Certification: any z in Q-perp gives rho >= <x,z>/||z||_{q'}; we take
// z = phi_q(r) projected onto Q-perp and close the duality gap against the
// feasible value ||r||_q.
DistanceResult distance_iterative(const Vec& x, const Subspace& Q, double q, double tol) {
    const Mat& B = Q.basis();
    const int n = Q.dim();
    const double qp = conjugate_exponent(q);
    const double xnorm = lq_norm(x, q);

    DistanceResult res;
    if (xnorm == 0.0) {
        res.certified = true;
        return res;
    }

    Vec a = Q.project_coeffs(x);
    Vec r = x - B * a;
    double eps0 = 0.5 * (r.cwiseAbs().maxCoeff() + 1e-300);
    double best_value = lq_norm(r, q);
    double best_lower = 0.0;
    double kkt = 0.0;

    auto smoothed_objective = [&](const Vec& rr, double eps) {
        ksum s;
        for (int i = 0; i < rr.size(); ++i) {
            s.add(std::pow(rr(i) * rr(i) + eps * eps, q / 2.0));
        }
        return s.value();
    };

    const int max_iter = 300;
    int it = 0;
    for (; it < max_iter; ++it) {
        double f = lq_norm(r, q);
        if (f < best_value) best_value = f;

        if (best_value <= tol * xnorm) {
            // x is in Q to working accuracy
            res.value = best_value;
            res.lower = 0.0;
            res.certified = true;
            res.iterations = it;
            return res;
        }

        // dual certificate from the current residual
        Vec z(x.size());
        for (int i = 0; i < x.size(); ++i) z(i) = phi_q(r(i), q);
        if (n > 0) z -= B * (B.transpose() * z);
        double zn = lq_norm(z, qp);
        double lower = zn > 0 ? x.dot(z) / zn : 0.0;
        if (lower > best_lower) best_lower = lower;
        if (n > 0) kkt = (B.transpose() * z).norm();

        if (best_value - best_lower <= tol * best_value) {
            res.value = best_value;
            res.lower = std::min(best_lower, best_value);
            res.kkt_residual = kkt;
            res.certified = true;
            res.iterations = it;
            return res;
        }

        double eps = std::max(1e-12, eps0 * std::pow(2.0, -static_cast<double>(it)));
        Vec w(x.size());
        for (int i = 0; i < x.size(); ++i) {
            w(i) = std::pow(r(i) * r(i) + eps * eps, (q - 2.0) / 2.0);
        }
        Mat m = B.transpose() * w.asDiagonal() * B;
        Vec rhs = B.transpose() * w.cwiseProduct(x);
        Vec a_ls = m.ldlt().solve(rhs);
        if (q <= 2.0) {
            // concave-majorization step: the WLS solve decreases the
            // smoothed objective without a line search
            a = a_ls;
        } else {
            Vec d = a_ls - a;
            double f0 = smoothed_objective(r, eps);
            double t = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                Vec cand = a + t * d;
                Vec rc = x - B * cand;
                if (smoothed_objective(rc, eps) < f0) {
                    a = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                // stationary for this smoothing level; sharpen eps and retry
                continue;
            }
        }
        r = x - B * a;
    }

    res.value = best_value;
    res.lower = std::min(best_lower, best_value);
    res.kkt_residual = kkt;
    res.certified = false;
    res.iterations = it;
    return res;
}

} // namespace

DistanceResult distance_lq_detail(const Vec& x, const Subspace& Q, double q, double tol) {
    require_exponent(q, "distance_lq");
    require_point(x, "distance_lq");
    if (x.size() != Q.ambient_dim()) {
        fail(errc::dimension_mismatch, "distance_lq: point/subspace dimension mismatch");
    }
    if (tol <= 0) fail(errc::invalid_argument, "distance_lq: tol must be positive");
    if (Q.dim() == 0) {
        DistanceResult res;
        res.value = lq_norm(x, q);
        res.lower = res.value;
        res.certified = true;
        return res;
    }
    if (q == 2.0) return distance_l2(x, Q);
    if (q == 1.0) return distance_l1_lp(x, Q);
    if (is_inf_exponent(q)) return distance_linf_lp(x, Q);
    return distance_iterative(x, Q, q, tol);
}

double distance_lq(const Vec& x, const Subspace& Q, double q, double tol) {
    DistanceResult res = distance_lq_detail(x, Q, q, tol);
    if (!res.certified) {
        throw solver_failure(
            "distance_lq: duality gap not closed within the iteration cap "
            "(value is only an upper bound)",
            res.value, res.kkt_residual);
    }
    return res.value;
}

} // namespace kw
