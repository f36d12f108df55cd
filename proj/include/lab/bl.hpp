#pragma once

// Brascamp-Lieb data built from surface points, the kernel-vector identities,
// the scaling and dimension conditions, and the wedge transversality
// predicate.

#include <optional>

#include "lab/rng.hpp"
#include "lab/surface.hpp"

namespace lab {

struct BLDatum {
    std::vector<RMat> maps;  // L_j : R^d -> R^{d_j}, each d_j x d, onto
    RVec exponents;          // p_j >= 0
    int ambient_dim = 0;     // d

    void validate() const {
        if (maps.size() != exponents.size()) throw std::invalid_argument("BLDatum: maps/exponents length mismatch");
        for (const RMat& L : maps) {
            if (L.cols() != ambient_dim) throw std::invalid_argument("BLDatum: ambient dimension mismatch");
            if (numerical_rank(L, 1e-10) < L.rows()) throw std::invalid_argument("BLDatum: map not surjective");
        }
        for (double p : exponents)
            if (!(p >= 0.0)) throw std::invalid_argument("BLDatum: negative exponent");
    }
};

struct SubspaceSample {
    RMat basis;  // d x m, orthonormal columns
    int dim() const { return basis.cols(); }
};

inline SubspaceSample random_subspace(int d, int m, Rng& rng) {
    RMat g(d, m);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = rng.normal();
    RMat q = orthonormal_columns(g, 1e-12);
    while (q.cols() < m) {  // essentially impossible for Gaussian draws; retry keeps the contract
        RMat g2(d, m);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < m; ++j) g2(i, j) = rng.normal();
        q = orthonormal_columns(g2, 1e-12);
    }
    return {q};
}

// Kernel vectors of L_j as displayed: built from the real partials of
// phi1, phi2 with trailing (-1, 0) and (0, -1). The second reproduces the
// Cauchy-Riemann rewriting of the first.
inline std::pair<RVec, RVec> kernel_basis(const HolomorphicPolynomial& phi, const CVec& a) {
    const int v = phi.vars();
    const CVec g = cgrad(phi, a);
    RVec v1(2 * v + 2, 0.0), v2(2 * v + 2, 0.0);
    for (int j = 0; j < v; ++j) {
        v1[2 * j] = g[j].real();        // d phi1 / dx_j
        v1[2 * j + 1] = -g[j].imag();   // d phi1 / dy_j
        v2[2 * j] = g[j].imag();        // d phi2 / dx_j
        v2[2 * j + 1] = g[j].real();    // d phi2 / dy_j
    }
    v1[2 * v] = -1.0;
    v2[2 * v + 1] = -1.0;
    return {std::move(v1), std::move(v2)};
}

// Datum of the k-linear setup on the graph of phi: L_j is the real
// parametrization map at a_j and p_j = 1/(m-1) (which is 1/(n-1) in the
// n-point case).
inline BLDatum surface_bl_datum(const HolomorphicPolynomial& phi, const std::vector<CVec>& points) {
    if (points.size() < 2) throw std::invalid_argument("surface_bl_datum: need at least 2 points");
    BLDatum d;
    d.ambient_dim = 2 * phi.vars() + 2;
    const double p = 1.0 / (static_cast<double>(points.size()) - 1.0);
    for (const CVec& a : points) {
        d.maps.push_back(real_parametrization_map(phi, a));
        d.exponents.push_back(p);
    }
    d.validate();
    return d;
}

// sum p_j d_j == d
inline bool bl_scaling_check(const BLDatum& datum) {
    double s = 0.0;
    for (size_t j = 0; j < datum.maps.size(); ++j) s += datum.exponents[j] * datum.maps[j].rows();
    return std::abs(s - datum.ambient_dim) <= 1e-12 * std::max(1.0, std::abs(static_cast<double>(datum.ambient_dim)));
}

struct BLViolation {
    int dimension = 0;
    RMat basis;
    double lhs = 0.0;  // dim V
    double rhs = 0.0;  // sum p_j dim(L_j V)
    std::string source;  // "kernel" or "random"
};

struct BLDimensionReport {
    bool pass = true;
    int trials = 0;
    uint64_t seed = 0;
    std::optional<BLViolation> violation;
};

namespace detail {

inline std::optional<BLViolation> check_subspace(const BLDatum& datum, const SubspaceSample& v,
                                                 const std::string& source) {
    const double lhs = v.dim();
    double rhs = 0.0;
    for (size_t j = 0; j < datum.maps.size(); ++j)
        rhs += datum.exponents[j] * numerical_rank(datum.maps[j] * v.basis, 1e-8);
    if (lhs <= rhs + 1e-9) return std::nullopt;
    BLViolation viol;
    viol.dimension = v.dim();
    viol.basis = v.basis;
    viol.lhs = lhs;
    viol.rhs = rhs;
    viol.source = source;
    return viol;
}

inline RMat kernel_of(const RMat& L) {
    // orthonormal basis of ker L = complement of the row span
    const RMat rows = orthonormal_columns(L.transpose(), 1e-10);
    return orthonormal_complement(rows);
}

}  // namespace detail

// Monte-Carlo search for a violating subspace of the dimension condition,
// plus the deterministic kernel-subspace family (single kernels and their
// pairwise sums), which is where degeneracies show up.
inline BLDimensionReport bl_dimension_check_mc(const BLDatum& datum, int trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("bl_dimension_check_mc: trials must be >= 1");
    BLDimensionReport rep;
    rep.trials = trials;
    rep.seed = seed;

    const size_t m = datum.maps.size();
    std::vector<RMat> kernels;
    kernels.reserve(m);
    for (const RMat& L : datum.maps) kernels.push_back(detail::kernel_of(L));
    for (size_t j = 0; j < m && !rep.violation; ++j) {
        if (kernels[j].cols() == 0) continue;
        if (auto v = detail::check_subspace(datum, {kernels[j]}, "kernel")) rep.violation = v;
    }
    for (size_t i = 0; i < m && !rep.violation; ++i)
        for (size_t j = i + 1; j < m && !rep.violation; ++j) {
            RMat both(datum.ambient_dim, kernels[i].cols() + kernels[j].cols());
            for (int c = 0; c < kernels[i].cols(); ++c) both.set_col(c, kernels[i].col(c));
            for (int c = 0; c < kernels[j].cols(); ++c) both.set_col(kernels[i].cols() + c, kernels[j].col(c));
            const RMat q = orthonormal_columns(both, 1e-10);
            if (q.cols() == 0) continue;
            if (auto v = detail::check_subspace(datum, {q}, "kernel")) rep.violation = v;
        }

    Rng rng(seed, 0xB1);
    for (int t = 0; t < trials && !rep.violation; ++t) {
        const int dim = rng.uniform_int(1, datum.ambient_dim);
        const SubspaceSample v = random_subspace(datum.ambient_dim, dim, rng);
        if (auto viol = detail::check_subspace(datum, v, "random")) rep.violation = viol;
    }
    rep.pass = !rep.violation.has_value();
    return rep;
}

// Exact kernel/normal determinant identity:
//   |det(v_{1,1} ... v_{1,n}  v_{2,1} ... v_{2,n})| = |det(n(phi,a_1) ... n(phi,a_n))|^2
struct VMatrixResult {
    double lhs;
    double rhs;
};

inline VMatrixResult vmatrix_identity_check(const HolomorphicPolynomial& phi, const std::vector<CVec>& points) {
    const int n = static_cast<int>(points.size());
    if (n != phi.vars() + 1)
        throw std::invalid_argument("vmatrix_identity_check: need n points on a surface over C^{n-1}");
    RMat kv(2 * n, 2 * n);
    CMat nm(n, n);
    for (int j = 0; j < n; ++j) {
        auto [v1, v2] = kernel_basis(phi, points[j]);
        RVec c1(2 * n), c2(2 * n);
        for (int i = 0; i < 2 * n; ++i) {
            c1[i] = v1[i];
            c2[i] = v2[i];
        }
        kv.set_col(j, c1);
        kv.set_col(n + j, c2);
        const NormalVector nv = normal(phi, points[j]);
        for (int i = 0; i < n; ++i) nm(i, j) = nv.raw[i];
    }
    return {std::abs(det_lu(kv)), std::norm(det_lu(nm))};
}

// Wedge transversality of unit normals against a threshold.
inline bool transversal(const HolomorphicPolynomial& phi, const std::vector<CVec>& points, double c) {
    const size_t k = points.size();
    const size_t n = static_cast<size_t>(phi.vars()) + 1;
    if (k < 2 || k > n) throw std::invalid_argument("transversal: need 2 <= k <= n points");
    std::vector<CVec> normals;
    normals.reserve(k);
    for (const CVec& a : points) normals.push_back(normal(phi, a).unit);
    return wedge(normals) > c;
}

// Kernel-count form of the dimension inequality on sampled subspaces:
//   sum_j (2n - dim ker(L_j|_V)) >= 2n^2 - dim V   for dim V >= 1.
// (dim V = 0 is vacuous and excluded.)
struct HahaReport {
    bool pass = true;
    int checked = 0;
    std::optional<BLViolation> violation;
};

inline HahaReport haha_inequality_check(const BLDatum& datum, const std::vector<SubspaceSample>& subspaces) {
    const int n = static_cast<int>(datum.maps.size());
    const int d = datum.ambient_dim;
    if (d != 2 * n) throw std::invalid_argument("haha_inequality_check: expects an n-point datum in R^{2n}");
    HahaReport rep;
    for (const SubspaceSample& v : subspaces) {
        if (v.dim() == 0) continue;  // vacuous boundary case
        ++rep.checked;
        double lhs = 0.0;
        for (const RMat& L : datum.maps) {
            const int rank = numerical_rank(L * v.basis, 1e-8);
            const int ker = v.dim() - rank;  // dim ker(L_j|_V)
            lhs += 2.0 * n - ker;
        }
        const double rhs = 2.0 * n * n - v.dim();
        if (lhs + 1e-9 < rhs) {
            rep.pass = false;
            BLViolation viol;
            viol.dimension = v.dim();
            viol.basis = v.basis;
            viol.lhs = lhs;
            viol.rhs = rhs;
            viol.source = "haha";
            rep.violation = viol;
            break;
        }
    }
    return rep;
}

}  // namespace lab
