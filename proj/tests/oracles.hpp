#pragma once

// Test-only independent oracles. These deliberately avoid the library's code
// paths: determinants via modified Gram-Schmidt QR (the library uses pivoted
// LU), polynomial evaluation by naive repeated multiplication (the library
// uses power tables), derivatives by finite differences, and closed forms
// where they exist.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "lab/linalg.hpp"
#include "lab/surface.hpp"

namespace oracles {

using lab::cplx;
using lab::CMat;
using lab::CVec;
using lab::RMat;
using lab::RVec;

// |det| as the product of MGS column residual norms.
template <class T>
double absdet_qr(const lab::Mat<T>& a) {
    const int n = a.rows();
    std::vector<std::vector<T>> cols;
    double prod = 1.0;
    for (int j = 0; j < n; ++j) {
        std::vector<T> v = a.col(j);
        for (const auto& q : cols) {
            std::complex<double> dot(0.0);
            for (int i = 0; i < n; ++i) dot += std::conj(std::complex<double>(q[i])) * std::complex<double>(v[i]);
            for (int i = 0; i < n; ++i) {
                if constexpr (std::is_same_v<T, double>) v[i] -= dot.real() * q[i];
                else v[i] -= T(dot) * q[i];
            }
        }
        double nrm = 0.0;
        for (const T& x : v) nrm += std::norm(std::complex<double>(x));
        nrm = std::sqrt(nrm);
        prod *= nrm;
        if (nrm == 0.0) return 0.0;
        for (T& x : v) x = x / T(nrm);
        cols.push_back(std::move(v));
    }
    return prod;
}

// cofactor expansion, exact control for tiny sizes
template <class T>
T det_cofactor(const lab::Mat<T>& a) {
    const int n = a.rows();
    if (n == 1) return a(0, 0);
    T s{};
    for (int j = 0; j < n; ++j) {
        lab::Mat<T> minor(n - 1, n - 1);
        for (int i = 1; i < n; ++i) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(i - 1, cc++) = a(i, c);
            }
        }
        const T term = a(0, j) * det_cofactor(minor);
        s += (j % 2 == 0) ? term : -term;
    }
    return s;
}

// naive polynomial evaluation: term-by-term, repeated multiplication
inline cplx naive_poly_eval(const lab::HolomorphicPolynomial& p, const CVec& z) {
    cplx s(0.0);
    for (const auto& [a, c] : p.terms()) {
        cplx t = c;
        for (int v = 0; v < p.vars(); ++v)
            for (int e = 0; e < a[v]; ++e) t *= z[v];
        s += t;
    }
    return s;
}

// central finite differences of a holomorphic polynomial along a complex axis
inline cplx fd_complex_derivative(const lab::HolomorphicPolynomial& p, const CVec& z, int var, double h = 1e-5) {
    CVec zp = z, zm = z;
    zp[var] += h;
    zm[var] -= h;
    return (p.eval(zp) - p.eval(zm)) / (2.0 * h);
}

// closed-form Fourier transform of a gaussian amplitude over all of R^d:
//   int exp(i <u, x>) exp(-|x - c|^2 / (2 s^2)) dx
inline cplx gaussian_ft(const RVec& u, const RVec& c, double sigma, int d) {
    double u2 = 0.0, uc = 0.0;
    for (int i = 0; i < d; ++i) {
        u2 += u[i] * u[i];
        uc += u[i] * (c.empty() ? 0.0 : c[i]);
    }
    const double amp = std::pow(2.0 * 3.14159265358979323846 * sigma * sigma, d / 2.0) *
                       std::exp(-sigma * sigma * u2 / 2.0);
    return amp * cplx(std::cos(uc), std::sin(uc));
}

// adaptive Simpson quadrature for 1-d complex integrands
inline cplx simpson_rec(const std::function<cplx(double)>& f, double a, double b, cplx fa, cplx fb, cplx fm,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const cplx flm = f(lm), frm = f(rm);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, fm, flm, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, fb, frm, tol / 2, depth - 1);
}

inline cplx integrate_1d(const std::function<cplx(double)>& f, double a, double b, double tol = 1e-10) {
    const cplx fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson_rec(f, a, b, fa, fb, fm, tol, 28);
}

// singular values via eigenvalues of A^H A (squares the condition number;
// test-only cross-check). The complex Gram matrix is handled through its
// real Hermitian embedding, where every eigenvalue appears twice.
template <class T>
RVec singular_values_gram(const lab::Mat<T>& a) {
    const int n = a.cols();
    std::vector<std::vector<std::complex<double>>> g(n, std::vector<std::complex<double>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::complex<double> s(0.0);
            for (int r = 0; r < a.rows(); ++r)
                s += std::conj(std::complex<double>(a(r, i))) * std::complex<double>(a(r, j));
            g[i][j] = s;
        }
    if constexpr (std::is_same_v<T, double>) {
        RMat gm(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gm(i, j) = g[i][j].real();
        const lab::SymEig eig = lab::jacobi_sym_eig(gm);
        RVec sv(n);
        for (int i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, eig.values[i]));
        return sv;
    } else {
        RMat emb(2 * n, 2 * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                emb(i, j) = g[i][j].real();
                emb(i, j + n) = -g[i][j].imag();
                emb(i + n, j) = g[i][j].imag();
                emb(i + n, j + n) = g[i][j].real();
            }
        const lab::SymEig eig = lab::jacobi_sym_eig(emb);
        RVec sv(n);
        for (int i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, eig.values[2 * i]));
        return sv;
    }
}

}  // namespace oracles
