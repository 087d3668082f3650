#include "ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ksum.hpp"

namespace kw {

namespace {

using PointMap = std::map<std::vector<double>, double>;  // point -> weight

std::vector<double> key_of(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

// Spread `weight` uniformly over all sign flips of `base`. Flips act only on
// the nonzero support; patterns touching zeros collapse to the same point.
void add_signed_variants(PointMap& map, const Vec& base, double weight) {
    std::vector<int> support;
    for (int i = 0; i < base.size(); ++i) {
        if (base(i) != 0.0) support.push_back(i);
    }
    const int nnz = static_cast<int>(support.size());
    const double w = weight / std::pow(2.0, nnz);
    Vec point = base;
    const uint64_t patterns = uint64_t{1} << nnz;
    for (uint64_t mask = 0; mask < patterns; ++mask) {
        for (int b = 0; b < nnz; ++b) {
            double mag = std::abs(base(support[b]));
            point(support[b]) = (mask >> b) & 1 ? -mag : mag;
        }
        map[key_of(point)] += w;
    }
}

std::vector<Atom> map_to_atoms(const PointMap& map, int dim) {
    std::vector<Atom> atoms;
    atoms.reserve(map.size());
    for (const auto& [key, w] : map) {
        Atom a;
        a.weight = w;
        a.point = Eigen::Map<const Vec>(key.data(), dim);
        atoms.push_back(std::move(a));
    }
    return atoms;
}

void require_vector(const Vec& x, const char* who) {
    if (x.size() < 1) fail(errc::invalid_argument, std::string(who) + ": empty vector");
    if (!x.allFinite()) fail(errc::invalid_argument, std::string(who) + ": non-finite entry");
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

constexpr double kExactCap = 1e7;

} // namespace

DiscreteEnsemble::DiscreteEnsemble(int dim, std::vector<Atom> atoms,
                                   EnsembleFlags flags, std::string provenance)
    : dim_(dim),
      atoms_(std::move(atoms)),
      flags_(std::move(flags)),
      provenance_(std::move(provenance)) {
    if (dim_ < 1) fail(errc::invalid_argument, "DiscreteEnsemble: dim must be >= 1");
    if (atoms_.empty()) fail(errc::invalid_argument, "DiscreteEnsemble: no atoms");
    ksum total;
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0)) {
            fail(errc::invalid_argument, "DiscreteEnsemble: atom weight must be > 0");
        }
        if (a.point.size() != dim_) {
            fail(errc::dimension_mismatch, "DiscreteEnsemble: atom dimension mismatch");
        }
        if (!a.point.allFinite()) {
            fail(errc::invalid_argument, "DiscreteEnsemble: non-finite atom");
        }
        total.add(a.weight);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        fail(errc::invalid_argument, "DiscreteEnsemble: weights sum to " +
                                         std::to_string(total.value()) + ", expected 1");
    }
    if (flags_.block_structure) {
        long sum = 0;
        for (int s : *flags_.block_structure) {
            if (s < 1) fail(errc::invalid_argument, "DiscreteEnsemble: block size must be >= 1");
            sum += s;
        }
        if (sum != dim_) {
            fail(errc::dimension_mismatch, "DiscreteEnsemble: block sizes must sum to dim");
        }
    }
}

double DiscreteEnsemble::moment(int coord, double r) const {
    if (coord < 0 || coord >= dim_) {
        fail(errc::invalid_argument, "moment: coordinate out of range");
    }
    if (r < 1.0 || std::isnan(r)) {
        fail(errc::invalid_exponent, "moment: exponent must be >= 1");
    }
    ksum s;
    for (const auto& a : atoms_) {
        s.add(a.weight * std::pow(std::abs(a.point(coord)), r));
    }
    return s.value();
}

Vec DiscreteEnsemble::mean() const {
    Vec m(dim_);
    for (int i = 0; i < dim_; ++i) {
        ksum s;
        for (const auto& a : atoms_) s.add(a.weight * a.point(i));
        m(i) = s.value();
    }
    return m;
}

Mat DiscreteEnsemble::second_moment() const {
    Mat m(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = i; j < dim_; ++j) {
            ksum s;
            for (const auto& a : atoms_) s.add(a.weight * a.point(i) * a.point(j));
            m(i, j) = s.value();
            m(j, i) = m(i, j);
        }
    }
    return m;
}

double GroupSpec::order() const {
    double two_n = std::pow(2.0, dim);
    switch (kind) {
        case GroupKind::cyclic_signs: return dim * two_n;
        case GroupKind::permutations_signs: return factorial(dim) * two_n;
        case GroupKind::signs_only: return two_n;
    }
    fail(errc::internal, "GroupSpec::order: bad kind");
}

const char* group_kind_name(GroupKind k) {
    switch (k) {
        case GroupKind::cyclic_signs: return "cyclic_signs";
        case GroupKind::permutations_signs: return "permutations_signs";
        case GroupKind::signs_only: return "signs_only";
    }
    return "?";
}

GroupKind group_kind_from_name(const std::string& name) {
    if (name == "cyclic_signs") return GroupKind::cyclic_signs;
    if (name == "permutations_signs") return GroupKind::permutations_signs;
    if (name == "signs_only") return GroupKind::signs_only;
    fail(errc::invalid_argument, "unknown group kind: " + name);
}

DiscreteEnsemble orbit_ensemble(const Vec& x, const GroupSpec& g) {
    require_vector(x, "orbit_ensemble");
    const int n = static_cast<int>(x.size());
    if (g.dim != n) fail(errc::dimension_mismatch, "orbit_ensemble: group dim != vector dim");
    if (g.order() > kExactCap) {
        fail(errc::group_too_large,
             "orbit_ensemble: group order exceeds the exact-mode cap; use sampling");
    }
    PointMap map;
    switch (g.kind) {
        case GroupKind::signs_only:
            add_signed_variants(map, x, 1.0);
            break;
        case GroupKind::cyclic_signs: {
            Vec shifted(n);
            for (int k = 0; k < n; ++k) {
                for (int i = 0; i < n; ++i) shifted(i) = x((i + k) % n);
                add_signed_variants(map, shifted, 1.0 / n);
            }
            break;
        }
        case GroupKind::permutations_signs: {
            std::vector<double> vals(x.data(), x.data() + n);
            std::sort(vals.begin(), vals.end());
            long long count = 0;
            std::vector<double> tmp = vals;
            do { ++count; } while (std::next_permutation(tmp.begin(), tmp.end()));
            do {
                Vec p = Eigen::Map<const Vec>(vals.data(), n);
                add_signed_variants(map, p, 1.0 / static_cast<double>(count));
            } while (std::next_permutation(vals.begin(), vals.end()));
            break;
        }
    }
    EnsembleFlags flags;
    flags.unconditional = true;
    flags.independent_mean_zero = (g.kind == GroupKind::signs_only);
    std::ostringstream prov;
    prov << "orbit(" << group_kind_name(g.kind) << ", N=" << n << ", exact)";
    return DiscreteEnsemble(n, map_to_atoms(map, n), flags, prov.str());
}

DiscreteEnsemble orbit_ensemble_sampled(const Vec& x, const GroupSpec& g,
                                        long long samples, uint64_t seed) {
    require_vector(x, "orbit_ensemble_sampled");
    const int n = static_cast<int>(x.size());
    if (g.dim != n) fail(errc::dimension_mismatch, "orbit_ensemble: group dim != vector dim");
    if (samples < 1) fail(errc::invalid_argument, "orbit_ensemble_sampled: samples >= 1");
    rng_stream rng(seed, "orbit_sample");
    PointMap map;
    std::vector<int> perm(n);
    const double w = 1.0 / static_cast<double>(samples);
    for (long long s = 0; s < samples; ++s) {
        std::iota(perm.begin(), perm.end(), 0);
        if (g.kind == GroupKind::cyclic_signs) {
            int k = static_cast<int>(rng.integer(n));
            for (int i = 0; i < n; ++i) perm[i] = (i + k) % n;
        } else if (g.kind == GroupKind::permutations_signs) {
            for (int i = n - 1; i > 0; --i) {
                int j = static_cast<int>(rng.integer(i + 1));
                std::swap(perm[i], perm[j]);
            }
        }
        Vec p(n);
        for (int i = 0; i < n; ++i) {
            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            p(i) = sign * x(perm[i]);
        }
        map[key_of(p)] += w;
    }
    // flags stay unset: the empirical atom multiset is only approximately
    // sign/shift invariant
    std::ostringstream prov;
    prov << "orbit(" << group_kind_name(g.kind) << ", N=" << n << ", sampled m=" << samples
         << ", seed=" << seed << ")";
    return DiscreteEnsemble(n, map_to_atoms(map, n), EnsembleFlags{}, prov.str());
}

Vec gluskin_extreme(int N, int k) {
    if (N < 1) fail(errc::invalid_argument, "gluskin_extreme: N must be >= 1");
    if (k < 1 || k > N) fail(errc::invalid_argument, "gluskin_extreme: need 1 <= k <= N");
    Vec x = Vec::Zero(N);
    x.head(k).setOnes();
    return x;
}

namespace {

// All elements of the signed-shift group on R^n, as explicit vectors g(x).
std::vector<Vec> signed_shift_elements(const Vec& x) {
    const int n = static_cast<int>(x.size());
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(n) << n);
    Vec shifted(n), p(n);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) shifted(i) = x((i + k) % n);
        for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
            for (int i = 0; i < n; ++i) {
                p(i) = (mask >> i) & 1 ? -shifted(i) : shifted(i);
            }
            out.push_back(p);
        }
    }
    return out;
}

} // namespace

DiscreteEnsemble mixed_product_ensemble(const Vec& y, const Vec& z) {
    require_vector(y, "mixed_product_ensemble");
    require_vector(z, "mixed_product_ensemble");
    const int s = static_cast<int>(y.size());
    const int b = static_cast<int>(z.size());
    const double inner = s * std::pow(2.0, s);
    const double outer = b * std::pow(2.0, b);
    const double total = outer * std::pow(inner, b);
    if (total > kExactCap) {
        fail(errc::size_overflow,
             "mixed_product_ensemble: exact enumeration too large; use sampling");
    }
    std::vector<Vec> zetas = signed_shift_elements(z);
    std::vector<Vec> etas = signed_shift_elements(y);
    const long long m = static_cast<long long>(etas.size());
    PointMap map;
    const double w = 1.0 / total;
    std::vector<long long> idx(b, 0);
    Vec point(s * b);
    for (const Vec& zeta : zetas) {
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            for (int j = 0; j < b; ++j) {
                point.segment(static_cast<long>(j) * s, s) = zeta(j) * etas[idx[j]];
            }
            map[key_of(point)] += w;
            int j = 0;
            while (j < b && ++idx[j] == m) {
                idx[j] = 0;
                ++j;
            }
            if (j == b) break;
        }
    }
    EnsembleFlags flags;
    flags.unconditional = true;
    flags.block_structure = std::vector<int>(b, s);
    std::ostringstream prov;
    prov << "mixed_product(s=" << s << ", b=" << b << ", exact)";
    return DiscreteEnsemble(s * b, map_to_atoms(map, s * b), flags, prov.str());
}

DiscreteEnsemble mixed_product_ensemble_sampled(const Vec& y, const Vec& z,
                                                long long samples, uint64_t seed) {
    require_vector(y, "mixed_product_ensemble_sampled");
    require_vector(z, "mixed_product_ensemble_sampled");
    if (samples < 1) fail(errc::invalid_argument, "mixed_product_ensemble_sampled: samples >= 1");
    const int s = static_cast<int>(y.size());
    const int b = static_cast<int>(z.size());
    rng_stream rng(seed, "mixed_product_sample");
    auto signed_shift_draw = [&rng](const Vec& base) {
        const int n = static_cast<int>(base.size());
        int k = static_cast<int>(rng.integer(n));
        Vec p(n);
        for (int i = 0; i < n; ++i) {
            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            p(i) = sign * base((i + k) % n);
        }
        return p;
    };
    PointMap map;
    const double w = 1.0 / static_cast<double>(samples);
    Vec point(s * b);
    for (long long t = 0; t < samples; ++t) {
        Vec zeta = signed_shift_draw(z);
        for (int j = 0; j < b; ++j) {
            point.segment(static_cast<long>(j) * s, s) = zeta(j) * signed_shift_draw(y);
        }
        map[key_of(point)] += w;
    }
    std::ostringstream prov;
    prov << "mixed_product(s=" << s << ", b=" << b << ", sampled m=" << samples
         << ", seed=" << seed << ")";
    return DiscreteEnsemble(s * b, map_to_atoms(map, s * b), EnsembleFlags{}, prov.str());
}

DiscreteEnsemble matrix_orbit_ensemble(const Mat& m) {
    const int n1 = static_cast<int>(m.rows());
    const int n2 = static_cast<int>(m.cols());
    if (n1 < 1 || n2 < 1) fail(errc::invalid_argument, "matrix_orbit_ensemble: empty matrix");
    if (!m.allFinite()) fail(errc::invalid_argument, "matrix_orbit_ensemble: non-finite entry");
    const double total = factorial(n1) * factorial(n2) * std::pow(2.0, n1 + n2);
    if (total > kExactCap) {
        fail(errc::size_overflow,
             "matrix_orbit_ensemble: exact enumeration too large; use sampling");
    }
    const int dim = n1 * n2;
    PointMap map;
    const double w = 1.0 / total;
    std::vector<int> pr(n1), pc(n2);
    std::iota(pr.begin(), pr.end(), 0);
    Vec point(dim);
    do {
        std::iota(pc.begin(), pc.end(), 0);
        do {
            for (uint64_t rs = 0; rs < (uint64_t{1} << n1); ++rs) {
                for (uint64_t cs = 0; cs < (uint64_t{1} << n2); ++cs) {
                    for (int j = 0; j < n2; ++j) {
                        double colsign = (cs >> j) & 1 ? -1.0 : 1.0;
                        for (int i = 0; i < n1; ++i) {
                            double rowsign = (rs >> i) & 1 ? -1.0 : 1.0;
                            point(j * n1 + i) = rowsign * colsign * m(pr[i], pc[j]);
                        }
                    }
                    map[key_of(point)] += w;
                }
            }
        } while (std::next_permutation(pc.begin(), pc.end()));
    } while (std::next_permutation(pr.begin(), pr.end()));
    EnsembleFlags flags;
    flags.block_structure = std::vector<int>(n2, n1);
    std::ostringstream prov;
    prov << "matrix_orbit(N1=" << n1 << ", N2=" << n2 << ", exact)";
    return DiscreteEnsemble(dim, map_to_atoms(map, dim), flags, prov.str());
}

DiscreteEnsemble matrix_orbit_ensemble_sampled(const Mat& m, long long samples,
                                               uint64_t seed) {
    const int n1 = static_cast<int>(m.rows());
    const int n2 = static_cast<int>(m.cols());
    if (n1 < 1 || n2 < 1) fail(errc::invalid_argument, "matrix_orbit_ensemble: empty matrix");
    if (samples < 1) fail(errc::invalid_argument, "matrix_orbit_ensemble_sampled: samples >= 1");
    rng_stream rng(seed, "matrix_orbit_sample");
    const int dim = n1 * n2;
    PointMap map;
    const double w = 1.0 / static_cast<double>(samples);
    std::vector<int> pr(n1), pc(n2);
    Vec point(dim);
    for (long long t = 0; t < samples; ++t) {
        std::iota(pr.begin(), pr.end(), 0);
        std::iota(pc.begin(), pc.end(), 0);
        for (int i = n1 - 1; i > 0; --i) std::swap(pr[i], pr[rng.integer(i + 1)]);
        for (int j = n2 - 1; j > 0; --j) std::swap(pc[j], pc[rng.integer(j + 1)]);
        std::vector<double> rowsign(n1), colsign(n2);
        for (int i = 0; i < n1; ++i) rowsign[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (int j = 0; j < n2; ++j) colsign[j] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (int j = 0; j < n2; ++j) {
            for (int i = 0; i < n1; ++i) {
                point(j * n1 + i) = rowsign[i] * colsign[j] * m(pr[i], pc[j]);
            }
        }
        map[key_of(point)] += w;
    }
    std::ostringstream prov;
    prov << "matrix_orbit(N1=" << n1 << ", N2=" << n2 << ", sampled m=" << samples
         << ", seed=" << seed << ")";
    return DiscreteEnsemble(dim, map_to_atoms(map, dim), EnsembleFlags{}, prov.str());
}

DiscreteEnsemble independent_ensemble(const std::vector<ScalarLaw>& laws) {
    const int n = static_cast<int>(laws.size());
    if (n < 1) fail(errc::invalid_argument, "independent_ensemble: no laws");
    double total = 1.0;
    bool all_symmetric = true;
    for (int i = 0; i < n; ++i) {
        const auto& law = laws[i];
        if (law.values.empty() || law.values.size() != law.probs.size()) {
            fail(errc::invalid_law, "independent_ensemble: malformed law " + std::to_string(i));
        }
        ksum psum, mean;
        std::map<double, double> merged;
        for (size_t j = 0; j < law.values.size(); ++j) {
            if (!(law.probs[j] > 0.0)) {
                fail(errc::invalid_law, "independent_ensemble: probabilities must be > 0");
            }
            if (!std::isfinite(law.values[j])) {
                fail(errc::invalid_law, "independent_ensemble: non-finite support value");
            }
            psum.add(law.probs[j]);
            mean.add(law.probs[j] * law.values[j]);
            merged[law.values[j]] += law.probs[j];
        }
        if (std::abs(psum.value() - 1.0) > 1e-12) {
            fail(errc::invalid_law,
                 "independent_ensemble: law " + std::to_string(i) + " probabilities sum != 1");
        }
        if (std::abs(mean.value()) > 1e-12) {
            fail(errc::invalid_law,
                 "independent_ensemble: law " + std::to_string(i) + " has nonzero mean");
        }
        for (const auto& [v, p] : merged) {
            auto it = merged.find(-v);
            if (it == merged.end() || std::abs(it->second - p) > 1e-12) {
                all_symmetric = false;
            }
        }
        total *= static_cast<double>(law.values.size());
        if (total > kExactCap) {
            fail(errc::size_overflow, "independent_ensemble: product support too large");
        }
    }
    PointMap map;
    std::vector<size_t> idx(n, 0);
    Vec point(n);
    for (;;) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            point(i) = laws[i].values[idx[i]];
            w *= laws[i].probs[idx[i]];
        }
        map[key_of(point)] += w;
        int i = 0;
        while (i < n && ++idx[i] == laws[i].values.size()) {
            idx[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
    EnsembleFlags flags;
    flags.independent_mean_zero = true;
    flags.unconditional = all_symmetric;
    std::ostringstream prov;
    prov << "independent(N=" << n << ")";
    return DiscreteEnsemble(n, map_to_atoms(map, n), flags, prov.str());
}

DiscreteEnsemble rademacher_ensemble(int dim) {
    std::vector<ScalarLaw> laws(dim, ScalarLaw{{-1.0, 1.0}, {0.5, 0.5}});
    return independent_ensemble(laws);
}

DiscreteEnsemble cartesian_orbit_ensemble(const std::vector<Vec>& block_points) {
    if (block_points.empty()) {
        fail(errc::invalid_argument, "cartesian_orbit_ensemble: no blocks");
    }
    std::vector<DiscreteEnsemble> blocks;
    std::vector<int> sizes;
    double total = 1.0;
    int dim = 0;
    for (const Vec& y : block_points) {
        require_vector(y, "cartesian_orbit_ensemble");
        GroupSpec g{GroupKind::cyclic_signs, static_cast<int>(y.size())};
        blocks.push_back(orbit_ensemble(y, g));
        sizes.push_back(static_cast<int>(y.size()));
        dim += sizes.back();
        total *= static_cast<double>(blocks.back().atoms().size());
        if (total > kExactCap) {
            fail(errc::size_overflow, "cartesian_orbit_ensemble: product too large");
        }
    }
    const int b = static_cast<int>(blocks.size());
    PointMap map;
    std::vector<size_t> idx(b, 0);
    Vec point(dim);
    for (;;) {
        double w = 1.0;
        int off = 0;
        for (int j = 0; j < b; ++j) {
            const Atom& a = blocks[j].atoms()[idx[j]];
            point.segment(off, sizes[j]) = a.point;
            w *= a.weight;
            off += sizes[j];
        }
        map[key_of(point)] += w;
        int j = 0;
        while (j < b && ++idx[j] == blocks[j].atoms().size()) {
            idx[j] = 0;
            ++j;
        }
        if (j == b) break;
    }
    EnsembleFlags flags;
    flags.unconditional = true;  // independent unconditional blocks
    flags.block_structure = sizes;
    std::ostringstream prov;
    prov << "cartesian_orbit(b=" << b << ")";
    return DiscreteEnsemble(dim, map_to_atoms(map, dim), flags, prov.str());
}

namespace {

int support_size(const std::vector<double>& key) {
    int nnz = 0;
    for (double v : key) {
        if (v != 0.0) ++nnz;
    }
    return nnz;
}

// Sign-invariance of a weighted point set via canonical |.| classes: the set
// is closed under flips iff every class holds exactly 2^{nnz} points of equal
// weight.
bool sign_invariant(const PointMap& pts) {
    struct ClassInfo {
        long long count = 0;
        double wmin = std::numeric_limits<double>::infinity();
        double wmax = 0.0;
    };
    std::map<std::vector<double>, ClassInfo> classes;
    for (const auto& [key, w] : pts) {
        std::vector<double> abskey(key.size());
        for (size_t i = 0; i < key.size(); ++i) abskey[i] = std::abs(key[i]);
        auto& c = classes[abskey];
        ++c.count;
        c.wmin = std::min(c.wmin, w);
        c.wmax = std::max(c.wmax, w);
    }
    for (const auto& [abskey, c] : classes) {
        int nnz = support_size(abskey);
        if (nnz > 62) return false;  // cannot certify closure at this size
        if (c.count != (1LL << nnz)) return false;
        if (c.wmax - c.wmin > 1e-12 * std::max(1.0, c.wmax)) return false;
    }
    return true;
}

} // namespace

StructureReport check_structure(const DiscreteEnsemble& e, uint64_t /*seed*/) {
    StructureReport rep;
    PointMap merged;
    for (const auto& a : e.atoms()) merged[key_of(a.point)] += a.weight;
    rep.checks = static_cast<long long>(merged.size());
    rep.exhaustive = true;  // the class decomposition certifies closure at any size
    rep.unconditional = sign_invariant(merged);

    // independence: the joint weights must factor through the marginals
    const int n = e.dim();
    std::vector<std::map<double, double>> marginals(n);
    for (const auto& [key, w] : merged) {
        for (int i = 0; i < n; ++i) marginals[i][key[i]] += w;
    }
    bool indep = true;
    for (int i = 0; i < n && indep; ++i) {
        ksum mean;
        for (const auto& [v, p] : marginals[i]) mean.add(v * p);
        if (std::abs(mean.value()) > 1e-12) indep = false;
    }
    if (indep) {
        double expected_atoms = 1.0;
        for (int i = 0; i < n; ++i) expected_atoms *= static_cast<double>(marginals[i].size());
        if (expected_atoms != static_cast<double>(merged.size())) indep = false;
    }
    if (indep) {
        for (const auto& [key, w] : merged) {
            double prod = 1.0;
            for (int i = 0; i < n; ++i) prod *= marginals[i][key[i]];
            if (std::abs(prod - w) > 1e-9 * std::max(prod, w)) {
                indep = false;
                break;
            }
        }
    }
    rep.independent_mean_zero = indep;

    Mat sm = e.second_moment();
    sm.diagonal().array() -= 1.0;
    rep.isotropic = sm.cwiseAbs().maxCoeff() <= 1e-9;
    return rep;
}

bool check_block_unconditional(const DiscreteEnsemble& e) {
    if (!e.flags().block_structure) {
        fail(errc::invalid_argument, "check_block_unconditional: ensemble has no block structure");
    }
    const auto& sizes = *e.flags().block_structure;
    const int b = static_cast<int>(sizes.size());
    std::vector<int> offsets(b, 0);
    for (int j = 1; j < b; ++j) offsets[j] = offsets[j - 1] + sizes[j - 1];

    PointMap merged;
    for (const auto& a : e.atoms()) merged[key_of(a.point)] += a.weight;

    // condition 1: each block's marginal law is unconditional
    for (int j = 0; j < b; ++j) {
        PointMap marginal;
        for (const auto& [key, w] : merged) {
            std::vector<double> block(key.begin() + offsets[j],
                                      key.begin() + offsets[j] + sizes[j]);
            marginal[block] += w;
        }
        if (!sign_invariant(marginal)) return false;
    }

    // condition 2: joint whole-block sign flips preserve the law; canonical
    // form fixes each nonzero block's first nonzero entry positive
    struct ClassInfo {
        long long count = 0;
        double wmin = std::numeric_limits<double>::infinity();
        double wmax = 0.0;
    };
    std::map<std::vector<double>, ClassInfo> classes;
    for (const auto& [key, w] : merged) {
        std::vector<double> canon = key;
        int active = 0;
        for (int j = 0; j < b; ++j) {
            double lead = 0.0;
            for (int i = 0; i < sizes[j]; ++i) {
                if (canon[offsets[j] + i] != 0.0) {
                    lead = canon[offsets[j] + i];
                    break;
                }
            }
            if (lead == 0.0) continue;
            ++active;
            if (lead < 0.0) {
                for (int i = 0; i < sizes[j]; ++i) canon[offsets[j] + i] = -canon[offsets[j] + i];
            }
        }
        auto& c = classes[canon];
        ++c.count;
        c.wmin = std::min(c.wmin, w);
        c.wmax = std::max(c.wmax, w);
        if (active > 62) return false;
    }
    for (const auto& [canon, c] : classes) {
        int active = 0;
        for (int j = 0; j < b; ++j) {
            for (int i = 0; i < sizes[j]; ++i) {
                if (canon[offsets[j] + i] != 0.0) {
                    ++active;
                    break;
                }
            }
        }
        // recount blocks with a nonzero entry
        if (c.count != (1LL << active)) return false;
        if (c.wmax - c.wmin > 1e-12 * std::max(1.0, c.wmax)) return false;
    }
    return true;
}

DiscreteEnsemble random_unconditional_ensemble(int dim, int base_atoms, uint64_t seed) {
    if (dim < 1 || base_atoms < 1) {
        fail(errc::invalid_argument, "random_unconditional_ensemble: bad sizes");
    }
    rng_stream rng(seed, "random_unconditional");
    PointMap map;
    std::vector<double> base_weights(base_atoms);
    double wsum = 0.0;
    for (int a = 0; a < base_atoms; ++a) {
        base_weights[a] = 0.2 + rng.uniform();
        wsum += base_weights[a];
    }
    for (int a = 0; a < base_atoms; ++a) {
        Vec p(dim);
        for (int i = 0; i < dim; ++i) {
            double v = 0.0;
            while (v == 0.0) v = 3.0 * (rng.uniform() - 0.5);
            p(i) = v;
        }
        add_signed_variants(map, p, base_weights[a] / wsum);
    }
    EnsembleFlags flags;
    flags.unconditional = true;
    std::ostringstream prov;
    prov << "random_unconditional(N=" << dim << ", base=" << base_atoms << ", seed=" << seed
         << ")";
    return DiscreteEnsemble(dim, map_to_atoms(map, dim), flags, prov.str());
}

std::string DiscreteEnsemble::to_json() const {
    nlohmann::ordered_json j;
    j["N"] = dim_;
    nlohmann::ordered_json flags;
    flags["unconditional"] = flags_.unconditional;
    flags["independent_mean_zero"] = flags_.independent_mean_zero;
    if (flags_.block_structure) {
        flags["block_structure"] = *flags_.block_structure;
    } else {
        flags["block_structure"] = nullptr;
    }
    j["flags"] = std::move(flags);
    j["provenance"] = provenance_;
    nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
    for (const auto& a : atoms_) {
        nlohmann::ordered_json ja;
        ja["w"] = a.weight;
        ja["point"] = std::vector<double>(a.point.data(), a.point.data() + a.point.size());
        atoms.push_back(std::move(ja));
    }
    j["atoms"] = std::move(atoms);
    return j.dump();
}

DiscreteEnsemble DiscreteEnsemble::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        fail(errc::invalid_argument, std::string("ensemble JSON parse error: ") + e.what());
    }
    try {
        int dim = j.at("N").get<int>();
        EnsembleFlags flags;
        const auto& jf = j.at("flags");
        flags.unconditional = jf.at("unconditional").get<bool>();
        flags.independent_mean_zero = jf.at("independent_mean_zero").get<bool>();
        if (jf.contains("block_structure") && !jf.at("block_structure").is_null()) {
            flags.block_structure = jf.at("block_structure").get<std::vector<int>>();
        }
        std::string prov = j.value("provenance", std::string());
        std::vector<Atom> atoms;
        for (const auto& ja : j.at("atoms")) {
            Atom a;
            a.weight = ja.at("w").get<double>();
            auto pt = ja.at("point").get<std::vector<double>>();
            a.point = Eigen::Map<const Vec>(pt.data(), static_cast<long>(pt.size()));
            atoms.push_back(std::move(a));
        }
        return DiscreteEnsemble(dim, std::move(atoms), flags, prov);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::invalid_argument, std::string("ensemble JSON schema error: ") + e.what());
    }
}

} // namespace kw
