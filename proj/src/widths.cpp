#include "widths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ksum.hpp"

namespace kw {

namespace {

void require_finite_q(double q, const char* who) {
    require_exponent(q, who);
    if (is_inf_exponent(q)) {
        fail(errc::invalid_exponent, std::string(who) + ": q must be finite");
    }
}

std::vector<double> atom_distances(const std::vector<Atom>& atoms, const Subspace& Q,
                                   double q, double tol) {
    std::vector<double> rho(atoms.size());
    for (size_t a = 0; a < atoms.size(); ++a) {
        rho[a] = distance_lq_detail(atoms[a].point, Q, q, tol).value;
    }
    return rho;
}

Mat weighted_second_moment(const std::vector<Atom>& atoms, const std::vector<double>& w,
                           int dim) {
    Mat m = Mat::Zero(dim, dim);
    for (size_t a = 0; a < atoms.size(); ++a) {
        m.selfadjointView<Eigen::Lower>().rankUpdate(atoms[a].point, w[a]);
    }
    return Mat(m.selfadjointView<Eigen::Lower>());
}

Subspace top_eigen_subspace(const Mat& m, int k) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    const int n = static_cast<int>(m.rows());
    Mat basis(n, k);
    for (int j = 0; j < k; ++j) basis.col(j) = es.eigenvectors().col(n - 1 - j);
    // re-orthonormalize to wash out fp drift and fix signs deterministically
    Subspace s = orthonormalize(basis);
    if (s.dim() == k) return s;
    // degenerate spectrum tail: pad with unit vectors
    Mat padded(n, k);
    padded.setZero();
    padded.leftCols(s.dim()) = s.basis();
    int have = s.dim();
    for (int i = 0; i < n && have < k; ++i) {
        Vec e = Vec::Unit(n, i);
        Vec r = e - padded.leftCols(have) * (padded.leftCols(have).transpose() * e);
        if (r.norm() > 1e-8) {
            padded.col(have++) = r / r.norm();
        }
    }
    return Subspace::from_basis(padded.leftCols(have));
}

} // namespace

std::string WidthEstimate::to_json(bool include_basis) const {
    nlohmann::ordered_json j;
    j["kind"] = kind == WidthKind::avg ? "avg" : "sup";
    j["q"] = q;
    j["N"] = witness.ambient_dim();
    j["n"] = n;
    j["value"] = value;
    j["method"] = method;
    j["rng_seed"] = rng_seed;
    j["iters"] = iters;
    j["restarts"] = restarts;
    j["tol"] = tol;
    if (include_basis) {
        nlohmann::ordered_json cols = nlohmann::ordered_json::array();
        for (int c = 0; c < witness.dim(); ++c) {
            cols.push_back(std::vector<double>(witness.basis().col(c).data(),
                                               witness.basis().col(c).data() +
                                                   witness.ambient_dim()));
        }
        j["subspace"] = std::move(cols);
    }
    return j.dump();
}

double avg_width_at(const DiscreteEnsemble& e, const Subspace& Q, double q) {
    require_finite_q(q, "avg_width_at");
    if (Q.ambient_dim() != e.dim()) {
        fail(errc::dimension_mismatch, "avg_width_at: subspace dimension mismatch");
    }
    ksum s;
    for (const auto& a : e.atoms()) {
        double rho = distance_lq_detail(a.point, Q, q, 1e-10).value;
        s.add(a.weight * std::pow(rho, q));
    }
    return std::pow(std::max(0.0, s.value()), 1.0 / q);
}

double avg_width_at_mc(const DiscreteEnsemble& e, const Subspace& Q, double q,
                       long long samples, uint64_t seed) {
    require_finite_q(q, "avg_width_at_mc");
    if (samples < 1) fail(errc::invalid_argument, "avg_width_at_mc: samples >= 1");
    std::vector<double> cum(e.atoms().size());
    double acc = 0.0;
    for (size_t a = 0; a < e.atoms().size(); ++a) {
        acc += e.atoms()[a].weight;
        cum[a] = acc;
    }
    rng_stream rng(seed, "avg_width_mc");
    ksum s;
    for (long long t = 0; t < samples; ++t) {
        double u = rng.uniform() * acc;
        size_t a = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        if (a >= e.atoms().size()) a = e.atoms().size() - 1;
        double rho = distance_lq_detail(e.atoms()[a].point, Q, q, 1e-10).value;
        s.add(std::pow(rho, q));
    }
    return std::pow(s.value() / static_cast<double>(samples), 1.0 / q);
}

WidthBracket avg_width_bracket_at(const DiscreteEnsemble& e, const Subspace& Q, double q) {
    require_finite_q(q, "avg_width_bracket_at");
    ksum lo, hi;
    for (const auto& a : e.atoms()) {
        DistanceResult r = distance_lq_detail(a.point, Q, q, 1e-10);
        lo.add(a.weight * std::pow(std::max(0.0, r.lower), q));
        hi.add(a.weight * std::pow(r.value, q));
    }
    WidthBracket b;
    b.lower = std::pow(std::max(0.0, lo.value()), 1.0 / q);
    b.upper = std::pow(std::max(0.0, hi.value()), 1.0 / q);
    return b;
}

WidthEstimate best_subspace_l2(const DiscreteEnsemble& e, int n) {
    if (n < 0 || n > e.dim()) fail(errc::invalid_argument, "best_subspace_l2: bad n");
    Eigen::SelfAdjointEigenSolver<Mat> es(e.second_moment());
    ksum tail;
    for (int i = 0; i < e.dim() - n; ++i) tail.add(std::max(0.0, es.eigenvalues()(i)));
    WidthEstimate est;
    est.kind = WidthKind::avg;
    est.q = 2.0;
    est.n = n;
    est.value = std::sqrt(std::max(0.0, tail.value()));
    est.witness = n > 0 ? top_eigen_subspace(e.second_moment(), n) : Subspace::zero(e.dim());
    est.method = "spectral_exact";
    return est;
}

namespace {

struct Candidate {
    double value;
    Subspace basis;
};

// One alternation run; returns the best evaluated iterate (value never
// worse than the evaluation of the starting basis).
Candidate alternate_avg(const DiscreteEnsemble& e, Subspace B, int k, double q,
                        const OptimizerOptions& opt) {
    Candidate best{avg_width_at(e, B, q), B};
    if (k == 0) return best;
    double eps0 = 0.5 * best.value + 1e-12;
    int stall = 0;
    double prev = best.value;
    std::vector<double> w(e.atoms().size());
    for (int t = 0; t < opt.iters; ++t) {
        std::vector<double> rho = atom_distances(e.atoms(), B, q, opt.tol);
        double eps = std::max(1e-12, eps0 * std::pow(2.0, -t));
        for (size_t a = 0; a < w.size(); ++a) {
            w[a] = e.atoms()[a].weight *
                   std::pow(rho[a] * rho[a] + eps * eps, (q - 2.0) / 2.0);
        }
        B = top_eigen_subspace(weighted_second_moment(e.atoms(), w, e.dim()), k);
        double val = avg_width_at(e, B, q);
        if (val < best.value) best = {val, B};
        if (std::abs(val - prev) <= 1e-12 * std::max(1.0, val)) {
            if (++stall >= 2) break;
        } else {
            stall = 0;
        }
        prev = val;
    }
    return best;
}

Subspace extend_by_residual_direction(const DiscreteEnsemble& e, const Subspace& B) {
    const int dim = e.dim();
    Mat proj = residual_projector(B);
    Mat m = Mat::Zero(dim, dim);
    for (const auto& a : e.atoms()) {
        Vec r = proj * a.point;
        m.selfadjointView<Eigen::Lower>().rankUpdate(r, a.weight);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(m.selfadjointView<Eigen::Lower>()));
    Vec dir = es.eigenvectors().col(dim - 1);
    dir -= B.basis() * (B.basis().transpose() * dir);
    if (dir.norm() < 1e-10) {
        // ensemble already inside span(B); extend with any complement vector
        for (int i = 0; i < dim; ++i) {
            Vec r = Vec::Unit(dim, i) - B.basis() * (B.basis().transpose() * Vec::Unit(dim, i));
            if (r.norm() > 1e-8) {
                dir = r;
                break;
            }
        }
    }
    Mat wide(dim, B.dim() + 1);
    wide.leftCols(B.dim()) = B.basis();
    wide.col(B.dim()) = dir / dir.norm();
    return orthonormalize(wide);
}

} // namespace

WidthEstimate best_subspace_lq(const DiscreteEnsemble& e, int n, double q,
                               const OptimizerOptions& opt) {
    require_finite_q(q, "best_subspace_lq");
    if (q == 1.0) fail(errc::invalid_exponent, "best_subspace_lq: need 1 < q < inf");
    if (n < 0 || n > e.dim()) fail(errc::invalid_argument, "best_subspace_lq: bad n");

    Candidate best{avg_width_at(e, Subspace::zero(e.dim()), q), Subspace::zero(e.dim())};
    Mat plain = e.second_moment();
    // chain over k: extending the previous best can only shrink distances,
    // which makes the returned value monotone nonincreasing in n
    for (int k = 1; k <= n; ++k) {
        std::vector<Subspace> starts;
        if (best.basis.dim() == k - 1) starts.push_back(extend_by_residual_direction(e, best.basis));
        starts.push_back(top_eigen_subspace(plain, k));
        for (int r = 0; r < opt.restarts; ++r) {
            rng_stream rng(opt.seed, "best_subspace_lq", static_cast<uint64_t>(k) * 1000 + r);
            starts.push_back(random_subspace(e.dim(), k, rng));
        }
        Candidate local{std::numeric_limits<double>::infinity(), Subspace::zero(e.dim())};
        for (const Subspace& s0 : starts) {
            Candidate c = alternate_avg(e, s0, k, q, opt);
            if (c.value < local.value) local = c;
        }
        best = local;
    }

    WidthEstimate est;
    est.kind = WidthKind::avg;
    est.q = q;
    est.n = n;
    est.value = best.value;
    est.witness = best.basis;
    est.method = "irls_alternating_chain";
    est.rng_seed = opt.seed;
    est.iters = opt.iters;
    est.restarts = opt.restarts;
    est.tol = opt.tol;
    return est;
}

namespace {

// Equal-diagonal orthonormal frame from Fourier vectors: the constant
// vector, the alternating vector (N even), and cos/sin pairs all have
// constant squared entries, so any n of them (pairs whole) give a projector
// with equal diagonal -- the optimal structure for symmetric point sets.
Mat fourier_frame(int dim, int n) {
    std::vector<Vec> singles;
    singles.push_back(Vec::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
    if (dim % 2 == 0) {
        Vec alt(dim);
        for (int i = 0; i < dim; ++i) alt(i) = (i % 2 == 0 ? 1.0 : -1.0);
        singles.push_back(alt / alt.norm());
    }
    const double tau = 6.283185307179586476925286766559;
    std::vector<std::pair<Vec, Vec>> pairs;
    int max_freq = (dim - 1) / 2;
    for (int f = 1; f <= max_freq; ++f) {
        Vec c(dim), s(dim);
        for (int i = 0; i < dim; ++i) {
            c(i) = std::cos(tau * f * i / dim);
            s(i) = std::sin(tau * f * i / dim);
        }
        pairs.emplace_back(c / c.norm(), s / s.norm());
    }
    Mat frame(dim, n);
    int col = 0;
    int need_singles = n % 2;
    if (n / 2 > static_cast<int>(pairs.size())) {
        need_singles = n - 2 * static_cast<int>(pairs.size());
    }
    for (int i = 0; i < need_singles && col < n; ++i) frame.col(col++) = singles.at(i);
    for (const auto& [c, s] : pairs) {
        if (col >= n) break;
        frame.col(col++) = c;
        if (col >= n) break;
        frame.col(col++) = s;
    }
    return frame;
}

double max_distance(const std::vector<Vec>& points, const Subspace& Q, double q,
                    double tol) {
    double m = 0.0;
    for (const Vec& x : points) {
        m = std::max(m, distance_lq_detail(x, Q, q, tol).value);
    }
    return m;
}

} // namespace

WidthEstimate sup_width_upper(const std::vector<Vec>& points, int n, double q,
                              const OptimizerOptions& opt) {
    require_finite_q(q, "sup_width_upper");
    if (points.empty()) fail(errc::invalid_argument, "sup_width_upper: no points");
    const int dim = static_cast<int>(points.front().size());
    for (const Vec& x : points) {
        if (x.size() != dim || !x.allFinite()) {
            fail(errc::invalid_argument, "sup_width_upper: inconsistent point list");
        }
    }
    if (n < 0 || n > dim) fail(errc::invalid_argument, "sup_width_upper: bad n");

    WidthEstimate est;
    est.kind = WidthKind::sup;
    est.q = q;
    est.n = n;
    est.method = "softmax_alternating";
    est.rng_seed = opt.seed;
    est.iters = opt.iters;
    est.restarts = opt.restarts;
    est.tol = opt.tol;

    if (n == 0) {
        double m = 0.0;
        for (const Vec& x : points) m = std::max(m, lq_norm(x, q));
        est.value = m;
        est.witness = Subspace::zero(dim);
        return est;
    }

    std::vector<Subspace> starts;
    starts.push_back(orthonormalize(fourier_frame(dim, n)));
    Mat second = Mat::Zero(dim, dim);
    for (const Vec& x : points) {
        second.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / points.size());
    }
    starts.push_back(top_eigen_subspace(Mat(second.selfadjointView<Eigen::Lower>()), n));
    for (int r = 0; r < opt.restarts; ++r) {
        rng_stream rng(opt.seed, "sup_width", r);
        starts.push_back(random_subspace(dim, n, rng));
    }

    double best_val = std::numeric_limits<double>::infinity();
    Subspace best_basis = Subspace::zero(dim);
    std::vector<double> rho(points.size()), w(points.size());
    for (const Subspace& s0 : starts) {
        Subspace B = s0;
        double val = max_distance(points, B, q, opt.tol);
        if (val < best_val) {
            best_val = val;
            best_basis = B;
        }
        double beta = 8.0 / std::max(val, 1e-12);
        const int inner = std::max(4, opt.iters / 10);
        for (int epoch = 0; epoch < 12; ++epoch) {
            double prev = std::numeric_limits<double>::infinity();
            for (int t = 0; t < inner; ++t) {
                double rmax = 0.0;
                for (size_t a = 0; a < points.size(); ++a) {
                    rho[a] = distance_lq_detail(points[a], B, q, opt.tol).value;
                    rmax = std::max(rmax, rho[a]);
                }
                double eps = std::max(1e-12, 0.05 * rmax);
                for (size_t a = 0; a < points.size(); ++a) {
                    w[a] = std::exp(beta * (rho[a] - rmax)) *
                           std::pow(rho[a] * rho[a] + eps * eps, (q - 2.0) / 2.0);
                }
                Mat m = Mat::Zero(dim, dim);
                for (size_t a = 0; a < points.size(); ++a) {
                    m.selfadjointView<Eigen::Lower>().rankUpdate(points[a], w[a]);
                }
                B = top_eigen_subspace(Mat(m.selfadjointView<Eigen::Lower>()), n);
                double cur = max_distance(points, B, q, opt.tol);
                if (cur < best_val) {
                    best_val = cur;
                    best_basis = B;
                }
                if (std::abs(cur - prev) <= 1e-12 * std::max(1.0, cur)) break;
                prev = cur;
            }
            // smoothed-max vs max gap controls the temperature schedule
            double rmax = 0.0;
            ksum lse;
            for (size_t a = 0; a < points.size(); ++a) {
                rho[a] = distance_lq_detail(points[a], B, q, opt.tol).value;
                rmax = std::max(rmax, rho[a]);
            }
            for (size_t a = 0; a < points.size(); ++a) {
                lse.add(std::exp(beta * (rho[a] - rmax)));
            }
            double gap = std::log(std::max(1.0, lse.value())) / beta;
            if (gap < 1e-4 * std::max(rmax, 1e-12)) break;
            beta *= 2.0;
        }
    }
    est.value = best_val;
    est.witness = best_basis;
    return est;
}

GapReport gap_report(const Certificate& cert, const WidthEstimate& est) {
    WidthKind expected =
        cert.method == CertMethod::set_rigidity ? WidthKind::sup : WidthKind::avg;
    if (est.kind != expected) {
        fail(errc::incomparable, "gap_report: certificate and estimate target different widths");
    }
    if (est.q != cert.q || est.n != cert.n || est.witness.ambient_dim() != cert.N) {
        fail(errc::incomparable, "gap_report: (q, N, n) keys do not match");
    }
    GapReport r;
    r.ratio = est.value / cert.lower_bound;
    r.consistent = r.ratio >= 1.0 - 1e-8;
    return r;
}

} // namespace kw
