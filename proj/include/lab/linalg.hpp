#pragma once

// Small dense linear algebra for the experiment suite: complex/real
// matrices, pivoted LU determinants, Jacobi eigen/SVD, rank-revealing
// orthonormalization, the realification pairing, the block-determinant
// identity, the wedge transversality quantity and the Takagi
// factorization of complex symmetric matrices.
//
// Everything here is sized for desk-scale experiments (dimensions <= 32);
// clarity and determinism take priority over speed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lab {

using cplx = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<cplx>;

inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <class T>
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, T{}) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative dimension");
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    std::vector<T> col(int j) const {
        std::vector<T> c(rows_);
        for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }
    void set_col(int j, const std::vector<T>& c) {
        for (int i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

    double frobenius() const {
        double s = 0.0;
        for (const T& v : a_) s += std::norm(std::complex<double>(v));
        return std::sqrt(s);
    }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("Mat multiply: size mismatch");
        Mat c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int l = 0; l < a.cols_; ++l) {
                const T aik = a(i, l);
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(l, j);
            }
        return c;
    }
    friend Mat operator+(const Mat& a, const Mat& b) {
        Mat c(a.rows_, a.cols_);
        for (size_t i = 0; i < a.a_.size(); ++i) c.a_[i] = a.a_[i] + b.a_[i];
        return c;
    }
    friend Mat operator-(const Mat& a, const Mat& b) {
        Mat c(a.rows_, a.cols_);
        for (size_t i = 0; i < a.a_.size(); ++i) c.a_[i] = a.a_[i] - b.a_[i];
        return c;
    }
    friend std::vector<T> operator*(const Mat& a, const std::vector<T>& x) {
        if (a.cols_ != static_cast<int>(x.size())) throw std::invalid_argument("Mat*vec: size mismatch");
        std::vector<T> y(a.rows_, T{});
        for (int i = 0; i < a.rows_; ++i) {
            T s{};
            for (int j = 0; j < a.cols_; ++j) s += a(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> a_;
};

using RMat = Mat<double>;
using CMat = Mat<cplx>;

inline CMat conj_transpose(const CMat& m) {
    CMat t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = std::conj(m(i, j));
    return t;
}

// Determinant by partially pivoted LU; sizes here are <= 32 so the
// product-of-pivots form is stable enough.
template <class T>
T det_lu(Mat<T> m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("det_lu: matrix not square");
    const int n = m.rows();
    T det = T(1);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(m(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(m(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best == 0.0) return T(0);
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            det = -det;
        }
        det *= m(k, k);
        for (int i = k + 1; i < n; ++i) {
            const T f = m(i, k) / m(k, k);
            for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
        }
    }
    return det;
}

// Solve A X = B in place of a copy (Gaussian elimination, partial pivot).
template <class T>
Mat<T> lu_solve(Mat<T> a, Mat<T> b) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw std::invalid_argument("lu_solve: size mismatch");
    const int n = a.rows(), m = b.cols();
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best == 0.0) throw std::runtime_error("lu_solve: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (int j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
        }
        for (int i = k + 1; i < n; ++i) {
            const T f = a(i, k) / a(k, k);
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (int j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j < m; ++j) {
            T s = b(k, j);
            for (int i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
            b(k, j) = s / a(k, k);
        }
    }
    return b;
}

template <class T>
Mat<T> inverse(const Mat<T>& a) { return lu_solve(a, Mat<T>::identity(a.rows())); }

// --- Jacobi eigen-decomposition of a real symmetric matrix -----------------

struct SymEig {
    RVec values;   // descending
    RMat vectors;  // columns are the corresponding orthonormal eigenvectors
};

inline SymEig jacobi_sym_eig(RMat a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("jacobi_sym_eig: matrix not square");
    const int n = a.rows();
    RMat v = RMat::identity(n);
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-30 * std::max(1.0, a.frobenius() * a.frobenius())) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
    SymEig out;
    out.values.resize(n);
    out.vectors = RMat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = a(idx[j], idx[j]);
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, idx[j]);
    }
    return out;
}

// --- one-sided Jacobi SVD ---------------------------------------------------
//
// Orthogonalizes the columns by plane rotations; works for real and complex
// matrices without squaring the condition number, which matters because rank
// decisions use a 1e-8 relative threshold.

template <class T>
struct Svd {
    RVec singular_values;  // descending
    Mat<T> left;           // normalized columns (zero where sigma == 0)
};

template <class T>
Svd<T> one_sided_jacobi_svd(Mat<T> a) {
    const int m = a.rows(), n = a.cols();
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0;
                std::complex<double> apq(0.0, 0.0);
                for (int i = 0; i < m; ++i) {
                    const std::complex<double> x(a(i, p)), y(a(i, q));
                    app += std::norm(x);
                    aqq += std::norm(y);
                    apq += std::conj(x) * y;
                }
                if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || std::abs(apq) < 1e-300) continue;
                rotated = true;
                // rotate the (phase-aligned) pair
                const std::complex<double> phase = apq / std::abs(apq);
                const double g = std::abs(apq);
                const double zeta = (aqq - app) / (2.0 * g);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const std::complex<double> x(a(i, p));
                    const std::complex<double> y = std::complex<double>(a(i, q)) * std::conj(phase);
                    const std::complex<double> xp = c * x - s * y;
                    const std::complex<double> yp = s * x + c * y;
                    if constexpr (std::is_same_v<T, double>) {
                        a(i, p) = xp.real();
                        a(i, q) = yp.real();
                    } else {
                        a(i, p) = xp;
                        a(i, q) = yp * phase;
                    }
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> norms(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::norm(std::complex<double>(a(i, j)));
        norms[j] = std::sqrt(s);
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return norms[i] > norms[j]; });
    Svd<T> out;
    out.singular_values.resize(n);
    out.left = Mat<T>(m, n);
    for (int j = 0; j < n; ++j) {
        out.singular_values[j] = norms[idx[j]];
        if (norms[idx[j]] > 0.0)
            for (int i = 0; i < m; ++i) out.left(i, j) = a(i, idx[j]) / T(norms[idx[j]]);
    }
    return out;
}

template <class T>
RVec singular_values(const Mat<T>& a) { return one_sided_jacobi_svd(a).singular_values; }

// Numerical rank with the project-wide 1e-8 relative tolerance. The absolute
// floor keeps exactly-annihilated products (all singular values at roundoff
// level) at rank zero.
template <class T>
int numerical_rank(const Mat<T>& a, double tol_rel = 1e-8, double tol_abs = 1e-12) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    const RVec sv = singular_values(a);
    if (sv.empty() || sv[0] == 0.0) return 0;
    const double cutoff = std::max(tol_rel * sv[0], tol_abs);
    int r = 0;
    for (double s : sv)
        if (s > cutoff) ++r;
    return r;
}

template <class T>
double operator_norm(const Mat<T>& a) {
    const RVec sv = singular_values(a);
    return sv.empty() ? 0.0 : sv[0];
}

// Modified Gram-Schmidt with rank revealing: returns an orthonormal basis of
// the column span. Columns whose residual falls below tol_rel times the
// largest input column norm are dropped.
template <class T>
Mat<T> orthonormal_columns(const Mat<T>& a, double tol_rel = 1e-10) {
    const int m = a.rows(), n = a.cols();
    double maxnorm = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::norm(std::complex<double>(a(i, j)));
        maxnorm = std::max(maxnorm, std::sqrt(s));
    }
    std::vector<std::vector<T>> basis;
    for (int j = 0; j < n; ++j) {
        std::vector<T> v = a.col(j);
        for (int rep = 0; rep < 2; ++rep) {
            for (const auto& b : basis) {
                std::complex<double> dot(0.0, 0.0);
                for (int i = 0; i < m; ++i) dot += std::conj(std::complex<double>(b[i])) * std::complex<double>(v[i]);
                for (int i = 0; i < m; ++i) {
                    if constexpr (std::is_same_v<T, double>) v[i] -= (dot.real()) * b[i];
                    else v[i] -= T(dot) * b[i];
                }
            }
        }
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::norm(std::complex<double>(v[i]));
        s = std::sqrt(s);
        if (s > tol_rel * std::max(maxnorm, 1e-300)) {
            for (int i = 0; i < m; ++i) v[i] = v[i] / T(s);
            basis.push_back(std::move(v));
        }
    }
    Mat<T> q(m, static_cast<int>(basis.size()));
    for (int j = 0; j < static_cast<int>(basis.size()); ++j) q.set_col(j, basis[j]);
    return q;
}

// Completes an orthonormal set (columns of q) to an orthonormal basis of the
// ambient space by sweeping the standard basis vectors.
template <class T>
Mat<T> orthonormal_complement(const Mat<T>& q) {
    const int m = q.rows(), r = q.cols();
    std::vector<std::vector<T>> basis;
    for (int j = 0; j < r; ++j) basis.push_back(q.col(j));
    std::vector<std::vector<T>> extra;
    for (int e = 0; e < m && static_cast<int>(extra.size()) < m - r; ++e) {
        std::vector<T> v(m, T{});
        v[e] = T(1);
        for (int rep = 0; rep < 2; ++rep) {
            for (const auto& b : basis) {
                std::complex<double> dot(0.0, 0.0);
                for (int i = 0; i < m; ++i) dot += std::conj(std::complex<double>(b[i])) * std::complex<double>(v[i]);
                for (int i = 0; i < m; ++i) {
                    if constexpr (std::is_same_v<T, double>) v[i] -= dot.real() * b[i];
                    else v[i] -= T(dot) * b[i];
                }
            }
        }
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::norm(std::complex<double>(v[i]));
        s = std::sqrt(s);
        if (s > 0.5) {  // standard basis candidates are either mostly inside or mostly outside
            for (int i = 0; i < m; ++i) v[i] = v[i] / T(s);
            basis.push_back(v);
            extra.push_back(std::move(v));
        }
    }
    // rare fall-through: lower the acceptance threshold
    for (int e = 0; e < m && static_cast<int>(extra.size()) < m - r; ++e) {
        std::vector<T> v(m, T{});
        v[e] = T(1);
        for (int rep = 0; rep < 3; ++rep) {
            for (const auto& b : basis) {
                std::complex<double> dot(0.0, 0.0);
                for (int i = 0; i < m; ++i) dot += std::conj(std::complex<double>(b[i])) * std::complex<double>(v[i]);
                for (int i = 0; i < m; ++i) {
                    if constexpr (std::is_same_v<T, double>) v[i] -= dot.real() * b[i];
                    else v[i] -= T(dot) * b[i];
                }
            }
        }
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += std::norm(std::complex<double>(v[i]));
        s = std::sqrt(s);
        if (s > 1e-8) {
            for (int i = 0; i < m; ++i) v[i] = v[i] / T(s);
            basis.push_back(v);
            extra.push_back(std::move(v));
        }
    }
    Mat<T> c(m, static_cast<int>(extra.size()));
    for (int j = 0; j < static_cast<int>(extra.size()); ++j) c.set_col(j, extra[j]);
    return c;
}

// Largest principal angle between the column spans of two orthonormal bases.
inline double max_principal_angle(const RMat& q1, const RMat& q2) {
    if (q1.rows() != q2.rows()) throw std::invalid_argument("max_principal_angle: ambient dimension mismatch");
    const RMat g = q1.transpose() * q2;
    RVec sv = singular_values(g);
    double smin = 1.0;
    const int p = std::min(q1.cols(), q2.cols());
    for (int i = 0; i < p; ++i) smin = std::min(smin, std::clamp(sv[i], -1.0, 1.0));
    return std::acos(std::clamp(smin, -1.0, 1.0));
}

// --- the pairing, realification, and the exact identities -------------------

// Real part of the Hermitian inner product; symmetric and R-bilinear.
inline double pairing(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pairing: dimension mismatch");
    double s = 0.0;
    for (size_t j = 0; j < a.size(); ++j) s += (a[j] * std::conj(b[j])).real();
    return s;
}

// Interleaves real and imaginary parts: (a1+ib1, ...) -> (a1, b1, ...).
inline RVec realify(const CVec& v) {
    RVec r(2 * v.size());
    for (size_t j = 0; j < v.size(); ++j) {
        r[2 * j] = v[j].real();
        r[2 * j + 1] = v[j].imag();
    }
    return r;
}

inline CVec times_i(const CVec& v) {
    CVec w(v.size());
    for (size_t j = 0; j < v.size(); ++j) w[j] = cplx(0.0, 1.0) * v[j];
    return w;
}

struct BlockDetResult {
    double lhs;  // det [[B, D], [-D, B]]
    double rhs;  // |det(B + iD)|^2
};

inline BlockDetResult block_det_identity(const RMat& b, const RMat& d) {
    if (b.rows() != b.cols() || d.rows() != d.cols() || b.rows() != d.rows())
        throw std::invalid_argument("block_det_identity: size mismatch");
    const int m = b.rows();
    if (m > 8) throw std::invalid_argument("block_det_identity: size > 8");
    RMat block(2 * m, 2 * m);
    CMat c(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            block(i, j) = b(i, j);
            block(i, j + m) = d(i, j);
            block(i + m, j) = -d(i, j);
            block(i + m, j + m) = b(i, j);
            c(i, j) = cplx(b(i, j), d(i, j));
        }
    return {det_lu(block), std::norm(det_lu(c))};
}

// |v1 ^ ... ^ vk|: absolute determinant of the realified 2k columns together
// with an orthonormal basis of the orthogonal complement of their real span.
// Returns 0 when that span has dimension < 2k.
inline double wedge(const std::vector<CVec>& vs) {
    if (vs.empty()) throw std::invalid_argument("wedge: no vectors");
    const size_t n = vs[0].size();
    const size_t k = vs.size();
    if (k > n) throw std::invalid_argument("wedge: more vectors than complex dimension");
    for (const auto& v : vs)
        if (v.size() != n) throw std::invalid_argument("wedge: dimension mismatch");
    const int d = static_cast<int>(2 * n);
    RMat raw(d, static_cast<int>(2 * k));
    for (size_t j = 0; j < k; ++j) {
        raw.set_col(static_cast<int>(2 * j), realify(vs[j]));
        raw.set_col(static_cast<int>(2 * j + 1), realify(times_i(vs[j])));
    }
    const RMat q = orthonormal_columns(raw, 1e-10);
    if (q.cols() < static_cast<int>(2 * k)) return 0.0;
    const RMat w = orthonormal_complement(q);
    RMat full(d, d);
    for (int j = 0; j < static_cast<int>(2 * k); ++j) full.set_col(j, raw.col(j));
    for (int j = 0; j < w.cols(); ++j) full.set_col(static_cast<int>(2 * k) + j, w.col(j));
    return std::abs(det_lu(full));
}

// --- Takagi factorization ----------------------------------------------------
//
// A = U^t diag(D) U for complex symmetric A, with unitary U and D the
// singular values in descending order. Computed through the real symmetric
// embedding [[B, C], [C, -B]] (A = B + iC): a unit eigenvector (x; y) with
// eigenvalue sigma >= 0 yields u = x + iy with A conj(u) = sigma u, and the
// nonnegative half of the spectrum assembles the factor.

struct TakagiFactorization {
    CMat U;  // unitary, A = U^t diag(D) U
    RVec D;  // nonnegative, descending
};

inline TakagiFactorization takagi(const CMat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("takagi: matrix not square");
    const int m = a.rows();
    if (m > 16) throw std::invalid_argument("takagi: size > 16");
    double scale = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) scale = std::max(scale, std::abs(a(i, j)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, scale))
                throw std::invalid_argument("takagi: input not symmetric");

    RMat emb(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double br = 0.5 * (a(i, j).real() + a(j, i).real());
            const double ci = 0.5 * (a(i, j).imag() + a(j, i).imag());
            emb(i, j) = br;
            emb(i, j + m) = ci;
            emb(i + m, j) = ci;
            emb(i + m, j + m) = -br;
        }
    const SymEig eig = jacobi_sym_eig(emb);

    // Greedily pick m eigenvectors (descending eigenvalue) whose complex
    // versions stay orthonormal; for each accepted (x; y) the companion
    // (-y; x) carries eigenvalue -sigma and is excluded by the projection.
    std::vector<RVec> chosen;            // accepted (x; y)
    std::vector<RVec> blocked;           // accepted and their companions
    CMat ucols(m, m);
    RVec sigma(m, 0.0);
    int taken = 0;
    for (int j = 0; j < 2 * m && taken < m; ++j) {
        RVec w(2 * m);
        for (int i = 0; i < 2 * m; ++i) w[i] = eig.vectors(i, j);
        for (int rep = 0; rep < 2; ++rep) {
            for (const auto& b : blocked) {
                double dot = 0.0;
                for (int i = 0; i < 2 * m; ++i) dot += b[i] * w[i];
                for (int i = 0; i < 2 * m; ++i) w[i] -= dot * b[i];
            }
        }
        double nrm = 0.0;
        for (double x : w) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm < 0.5) continue;
        for (double& x : w) x /= nrm;
        RVec companion(2 * m);
        for (int i = 0; i < m; ++i) {
            companion[i] = -w[i + m];
            companion[i + m] = w[i];
        }
        for (int i = 0; i < m; ++i) ucols(i, taken) = cplx(w[i], w[i + m]);
        sigma[taken] = std::max(0.0, eig.values[j]);
        blocked.push_back(w);
        blocked.push_back(companion);
        ++taken;
    }
    if (taken < m) throw std::runtime_error("takagi: failed to assemble a complex-orthonormal basis");

    TakagiFactorization out;
    out.D = sigma;                 // eigenvalues were already descending
    out.U = ucols.transpose();     // A = U^t diag(D) U
    return out;
}

}  // namespace lab
