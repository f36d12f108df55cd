#pragma once

// Linear almost complex structures on R^{2m}: validation (J^2 = -id,
// orthogonal, skew-symmetric), seeded random generation, reduction to the
// standard block structure J0, and the graph condition grad phi2 = J grad phi1
// (which at J = J0 is the Cauchy-Riemann system).

#include <functional>

#include "lab/rng.hpp"
#include "lab/surface.hpp"

namespace lab {

inline RMat standard_j0(int m) {
    RMat j(2 * m, 2 * m);
    for (int b = 0; b < m; ++b) {
        j(2 * b, 2 * b + 1) = -1.0;
        j(2 * b + 1, 2 * b) = 1.0;
    }
    return j;
}

inline bool is_acs(const RMat& j, std::string* why = nullptr) {
    auto fail = [&](const char* msg) {
        if (why) *why = msg;
        return false;
    };
    if (j.rows() != j.cols()) return fail("not square");
    if (j.rows() % 2 != 0) return fail("odd size");
    const int d = j.rows();
    const RMat jt = j.transpose();
    if ((j * j + RMat::identity(d)).frobenius() > 1e-10) return fail("J^2 != -I");
    if ((jt * j - RMat::identity(d)).frobenius() > 1e-10) return fail("not orthogonal");
    if ((jt + j).frobenius() > 1e-10) return fail("not skew-symmetric");
    if (why) why->clear();
    return true;
}

inline RMat random_orthogonal(int d, Rng& rng) {
    RMat g(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) g(i, k) = rng.normal();
    RMat q = orthonormal_columns(g, 1e-12);
    while (q.cols() < d) {
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) g(i, k) = rng.normal();
        q = orthonormal_columns(g, 1e-12);
    }
    return q;
}

inline RMat random_acs(int m, uint64_t seed) {
    if (m < 1) throw std::invalid_argument("random_acs: m must be >= 1");
    Rng rng(seed, 0xAC5);
    const RMat q = random_orthogonal(2 * m, rng);
    return q.transpose() * standard_j0(m) * q;
}

struct ReductionResult {
    RMat L;          // invertible, L^{-1} J L = J0
    double residual; // Frobenius norm of L^{-1} J L - J0
};

// Build L from pairs (x, Jx): picking each new x orthonormal to the span of
// the previous pairs makes L orthogonal, and J c_{2j} = Jx_j, J(Jx_j) = -x_j
// realizes the standard blocks. In eigenvector terms the columns are
// (v + conj v)/2 and (v - conj v)/(2i) for the eigenvectors v = x - i Jx.
inline ReductionResult reduce_to_standard(const RMat& j) {
    std::string why;
    if (!is_acs(j, &why)) throw std::invalid_argument("reduce_to_standard: not an almost complex structure: " + why);
    const int d = j.rows();
    const int m = d / 2;
    RMat L(d, d);
    std::vector<RVec> span;  // orthonormal list of accepted x_i and J x_i
    int placed = 0;
    for (int e = 0; e < d && placed < m; ++e) {
        RVec x(d, 0.0);
        x[e] = 1.0;
        for (int rep = 0; rep < 2; ++rep) {
            for (const RVec& b : span) {
                double dot = 0.0;
                for (int i = 0; i < d; ++i) dot += b[i] * x[i];
                for (int i = 0; i < d; ++i) x[i] -= dot * b[i];
            }
        }
        double nrm = 0.0;
        for (double v : x) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-6) continue;
        for (double& v : x) v /= nrm;
        RVec jx(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) jx[i] += j(i, l) * x[l];
        for (int i = 0; i < d; ++i) {
            L(i, 2 * placed) = x[i];
            L(i, 2 * placed + 1) = jx[i];
        }
        span.push_back(x);
        span.push_back(jx);
        ++placed;
    }
    if (placed < m) throw std::runtime_error("reduce_to_standard: failed to complete the basis");
    const RMat reduced = lu_solve(L, j * L);
    const double residual = (reduced - standard_j0(m)).frobenius();
    return {L, residual};
}

// Max over samples of |grad phi2 - J grad phi1|, gradients by central
// differences on the real surface map R^{2n-2} -> R^2.
inline double acs_graph_residual(const std::function<std::array<double, 2>(const RVec&)>& f, const RMat& j,
                                 const std::vector<RVec>& samples, double step = 1e-4) {
    const int d = j.rows();
    double worst = 0.0;
    for (const RVec& x : samples) {
        if (static_cast<int>(x.size()) != d)
            throw std::invalid_argument("acs_graph_residual: sample dimension mismatch");
        RVec g1(d), g2(d);
        for (int a = 0; a < d; ++a) {
            RVec xp = x, xm = x;
            xp[a] += step;
            xm[a] -= step;
            const auto fp = f(xp), fm = f(xm);
            g1[a] = (fp[0] - fm[0]) / (2 * step);
            g2[a] = (fp[1] - fm[1]) / (2 * step);
        }
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            double ja = 0.0;
            for (int l = 0; l < d; ++l) ja += j(a, l) * g1[l];
            s += (g2[a] - ja) * (g2[a] - ja);
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

inline double acs_graph_residual(const HolomorphicPolynomial& phi, const RMat& j, const std::vector<CVec>& samples,
                                 double step = 1e-4) {
    std::vector<RVec> pts;
    pts.reserve(samples.size());
    for (const CVec& z : samples) pts.push_back(realify(z));
    return acs_graph_residual([&](const RVec& x) { return surface_real_values(phi, x); }, j, pts, step);
}

}  // namespace lab
