#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "scenario.hpp"

namespace kw {

namespace {

struct Check {
    const char* name;
    std::function<std::string()> run;  // empty string = pass
};

std::string check_rademacher_exact() {
    DiscreteEnsemble e = rademacher_ensemble(8);
    rng_stream rng(7, "selfcheck_subspaces");
    for (int n : {0, 2, 4, 6}) {
        Certificate cert = certify_ensemble(e, 2.0, n);
        double want = std::sqrt(8.0 - n);
        if (std::abs(cert.lower_bound - want) > 1e-9) {
            return "certificate at n=" + std::to_string(n) + " is " +
                   std::to_string(cert.lower_bound) + ", want sqrt(8-n)";
        }
        for (int t = 0; t < 25; ++t) {
            Subspace Q = random_subspace(8, n, rng);
            double w = avg_width_at(e, Q, 2.0);
            if (std::abs(w - want) > 1e-9) {
                return "avg width off at n=" + std::to_string(n) + ": " + std::to_string(w);
            }
        }
        WidthEstimate est = best_subspace_l2(e, n);
        GapReport gap = gap_report(cert, est);
        if (std::abs(gap.ratio - 1.0) > 1e-8) {
            return "gap ratio " + std::to_string(gap.ratio) + " != 1 at n=" + std::to_string(n);
        }
    }
    return "";
}

std::string check_octahedron() {
    OptimizerOptions opt;
    opt.iters = 60;
    opt.restarts = 2;
    opt.seed = 11;
    for (int N : {4, 6}) {
        std::vector<Vec> points;
        for (int i = 0; i < N; ++i) {
            points.push_back(Vec::Unit(N, i));
            points.push_back(-Vec::Unit(N, i));
        }
        for (int n = 0; n <= N; ++n) {
            double want = std::sqrt(1.0 - static_cast<double>(n) / N);
            double got = sup_width_upper(points, n, 2.0, opt).value;
            if (std::abs(got - want) > 1e-6) {
                return "N=" + std::to_string(N) + " n=" + std::to_string(n) + ": " +
                       std::to_string(got) + " vs " + std::to_string(want);
            }
        }
    }
    return "";
}

// The soundness canary: certificates must stay below exactly computable or
// certified width values. A perturbed Khintchine constant (test hook) makes
// this fail.
std::string check_soundness_mini() {
    rng_stream rng(23, "selfcheck_soundness");
    // exact tight case first: Rademacher q=2 widths are subspace-independent
    DiscreteEnsemble rad = rademacher_ensemble(5);
    for (int n : {1, 4}) {
        Certificate cert = certify_ensemble(rad, 2.0, n);
        Subspace Q = random_subspace(5, n, rng);
        double width = avg_width_at(rad, Q, 2.0);
        if (width < cert.lower_bound - 1e-8) {
            return "Rademacher q=2 n=" + std::to_string(n) + ": width " +
                   std::to_string(width) + " < bound " + std::to_string(cert.lower_bound);
        }
    }
    for (int inst = 0; inst < 8; ++inst) {
        int N = 3 + static_cast<int>(rng.integer(3));
        DiscreteEnsemble e =
            random_unconditional_ensemble(N, 2, 1000 + inst);
        // scale so every coordinate q-moment is >= 1 for both tested q
        for (double q : {1.5, 2.0}) {
            double minm = std::numeric_limits<double>::infinity();
            for (int i = 0; i < N; ++i) minm = std::min(minm, e.moment(i, q));
            double c = 1.1 * std::pow(minm, -1.0 / q);
            std::vector<Atom> atoms = e.atoms();
            for (auto& a : atoms) a.point *= c;
            DiscreteEnsemble scaled(N, std::move(atoms), e.flags(), e.provenance());
            for (int n : {1, N - 1}) {
                Certificate cert = certify_ensemble(scaled, q, n);
                if (!cert.valid_for_original) return "expected a certificate for the original";
                for (int t = 0; t < 20; ++t) {
                    Subspace Q = random_subspace(N, n, rng);
                    WidthBracket w = avg_width_bracket_at(scaled, Q, q);
                    if (w.lower < cert.lower_bound - 1e-8) {
                        return "violation: (E rho^q)^{1/q} >= " + std::to_string(w.lower) +
                               " < certificate " + std::to_string(cert.lower_bound);
                    }
                }
            }
        }
    }
    return "";
}

std::string check_orbit_moments() {
    rng_stream rng(31, "selfcheck_orbit");
    for (int inst = 0; inst < 5; ++inst) {
        int N = 3 + static_cast<int>(rng.integer(6));
        Vec x(N);
        for (int i = 0; i < N; ++i) x(i) = 2.0 * rng.uniform() - 1.0;
        DiscreteEnsemble e = orbit_ensemble(x, GroupSpec{GroupKind::cyclic_signs, N});
        for (double q : {1.0, 1.5, 2.0}) {
            double want = std::pow(lq_norm(x, q), q) / N;
            for (int i = 0; i < N; ++i) {
                if (std::abs(e.moment(i, q) - want) > 1e-12) {
                    return "moment identity off by " +
                           std::to_string(std::abs(e.moment(i, q) - want));
                }
            }
        }
    }
    return "";
}

std::string check_mixed_norms() {
    for (double q : {1.5, 2.0}) {
        for (double p1 : {1.0, 2.0, inf_exponent}) {
            for (double p2 : {1.0, 2.0, inf_exponent}) {
                const int s = 2, b = 2;
                auto [sy, y] = SymmetricNorm::lp(p1).lq_sup_on_ball(s, q);
                auto [sz, z] = SymmetricNorm::lp(p2).lq_sup_on_ball(b, q);
                double want = std::pow(s, std::max(0.0, 1.0 / q - 1.0 / p1)) *
                              std::pow(b, std::max(0.0, 1.0 / q - 1.0 / p2));
                if (std::abs(sy * sz - want) > 1e-9) {
                    return "sup formula off for p1=" + std::to_string(p1) +
                           " p2=" + std::to_string(p2);
                }
                DiscreteEnsemble e = mixed_product_ensemble(y, z);
                double factor = (std::pow(lq_norm(z, q), q) / b) *
                                (std::pow(lq_norm(y, q), q) / s);
                for (int i = 0; i < e.dim(); ++i) {
                    if (std::abs(e.moment(i, q) - factor) > 1e-12) {
                        return "moment factorization off";
                    }
                }
            }
        }
    }
    return "";
}

std::string check_weak_moment_bracket() {
    for (int inst = 0; inst < 5; ++inst) {
        DiscreteEnsemble e = random_unconditional_ensemble(3, 2, 500 + inst);
        for (double p : {2.0, 4.0}) {
            WeakMomentBracket b = weak_moment_bracket(e, p, 16, 99 + inst);
            if (b.lower > b.upper + 1e-12) return "bracket inverted";
            if (p == 2.0) {
                double exact = weak_moment_exact2(e);
                if (std::abs(b.lower - exact) > 1e-6) {
                    return "p=2 ascent missed the eigenvalue by " +
                           std::to_string(std::abs(b.lower - exact));
                }
            }
        }
    }
    return "";
}

std::string check_determinism() {
    const std::string cfg_text =
        "scenario = orbit_set\n"
        "seed = 5\n"
        "[ensemble]\n"
        "N = 4\n"
        "x = ones\n"
        "[grid]\n"
        "q = 2\n"
        "n = 0, 2\n"
        "[optimizer]\n"
        "iters = 20\n"
        "restarts = 2\n";
    ScenarioConfig cfg = ScenarioConfig::parse_text(cfg_text);
    std::string a = rows_to_csv(run_scenario(cfg, run_all, 1));
    std::string b = rows_to_csv(run_scenario(cfg, run_all, 2));
    if (a != b) return "CSV bytes differ between runs";
    for (const auto& row : run_scenario(cfg, run_all, 1)) {
        if (!row.error.empty()) return "row error: " + row.error;
        if (!(row.ratio >= 1.0 - 1e-8)) return "ratio below 1";
    }
    return "";
}

} // namespace

SelfcheckResult selfcheck() {
    std::vector<Check> checks = {
        {"rademacher_exactness", check_rademacher_exact},
        {"octahedron_identity", check_octahedron},
        {"certificate_soundness", check_soundness_mini},
        {"orbit_moment_identity", check_orbit_moments},
        {"mixed_norm_formulas", check_mixed_norms},
        {"weak_moment_bracket", check_weak_moment_bracket},
        {"run_determinism", check_determinism},
    };
    SelfcheckResult res;
    std::ostringstream out;
    for (const auto& c : checks) {
        auto t0 = std::chrono::steady_clock::now();
        std::string msg;
        try {
            msg = c.run();
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        if (msg.empty()) {
            ++res.passed;
            out << "[PASS] " << c.name << " (" << ms << " ms)\n";
        } else {
            ++res.failed;
            out << "[FAIL] " << c.name << ": " << msg << " (" << ms << " ms)\n";
        }
    }
    out << res.passed << " passed, " << res.failed << " failed\n";
    res.report = out.str();
    return res;
}

} // namespace kw
