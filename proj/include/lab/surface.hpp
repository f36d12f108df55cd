#pragma once

// Holomorphic surface generators phi: C^{n-1} -> C represented as multi-index
// polynomials, their exact complex calculus (gradient, Hessian), normals,
// the real parametrization map, the Hessian determinant identity, the
// normalized surface class F(delta0, r) and Takagi-based renormalization.
//
// Cube convention: Q(a, r) is the cube centered at a with SIDE LENGTH r,
// matching the grids used by the decomposition experiments.

#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "lab/linalg.hpp"

namespace lab {

using MultiIndex = std::vector<int>;

inline int multi_degree(const MultiIndex& a) {
    int s = 0;
    for (int e : a) s += e;
    return s;
}

class HolomorphicPolynomial {
public:
    static constexpr int kDegreeCap = 8;

    explicit HolomorphicPolynomial(int vars = 1) : vars_(vars) {
        if (vars < 0) throw std::invalid_argument("HolomorphicPolynomial: negative variable count");
    }

    int vars() const { return vars_; }

    void set(MultiIndex alpha, cplx c) {
        if (static_cast<int>(alpha.size()) != vars_)
            throw std::invalid_argument("HolomorphicPolynomial::set: multi-index length mismatch");
        for (int e : alpha)
            if (e < 0) throw std::invalid_argument("HolomorphicPolynomial::set: negative exponent");
        if (multi_degree(alpha) > kDegreeCap)
            throw std::invalid_argument("HolomorphicPolynomial::set: degree cap exceeded");
        if (!finite(c)) throw std::invalid_argument("HolomorphicPolynomial::set: non-finite coefficient");
        if (c == cplx(0.0, 0.0)) coef_.erase(alpha);
        else coef_[std::move(alpha)] = c;
    }

    void add(const MultiIndex& alpha, cplx c) {
        auto it = coef_.find(alpha);
        const cplx v = (it == coef_.end() ? cplx(0.0) : it->second) + c;
        set(alpha, v);
    }

    cplx coeff(const MultiIndex& alpha) const {
        auto it = coef_.find(alpha);
        return it == coef_.end() ? cplx(0.0) : it->second;
    }

    const std::map<MultiIndex, cplx>& terms() const { return coef_; }

    int degree() const {
        int d = 0;
        for (const auto& [a, c] : coef_) d = std::max(d, multi_degree(a));
        return d;
    }

    cplx eval(const cplx* z, int nz) const {
        if (nz != vars_) throw std::invalid_argument("HolomorphicPolynomial::eval: dimension mismatch");
        // per-variable power tables, then multi-index accumulation
        std::array<std::array<cplx, kDegreeCap + 1>, 8> pw;
        if (vars_ > 8) throw std::invalid_argument("HolomorphicPolynomial::eval: too many variables");
        for (int v = 0; v < vars_; ++v) {
            pw[v][0] = cplx(1.0);
            for (int e = 1; e <= kDegreeCap; ++e) pw[v][e] = pw[v][e - 1] * z[v];
        }
        cplx s(0.0);
        for (const auto& [a, c] : coef_) {
            cplx t = c;
            for (int v = 0; v < vars_; ++v) t *= pw[v][a[v]];
            s += t;
        }
        return s;
    }
    cplx eval(const CVec& z) const { return eval(z.data(), static_cast<int>(z.size())); }

    HolomorphicPolynomial derivative(int var) const {
        HolomorphicPolynomial d(vars_);
        for (const auto& [a, c] : coef_) {
            if (a[var] == 0) continue;
            MultiIndex b = a;
            b[var] -= 1;
            d.add(b, c * static_cast<double>(a[var]));
        }
        return d;
    }

    HolomorphicPolynomial derivative(const MultiIndex& alpha) const {
        HolomorphicPolynomial d = *this;
        for (int v = 0; v < vars_; ++v)
            for (int rep = 0; rep < alpha[v]; ++rep) d = d.derivative(v);
        return d;
    }

    friend HolomorphicPolynomial operator*(const HolomorphicPolynomial& p, const HolomorphicPolynomial& q) {
        if (p.vars_ != q.vars_) throw std::invalid_argument("polynomial multiply: dimension mismatch");
        HolomorphicPolynomial r(p.vars_);
        for (const auto& [a, ca] : p.coef_)
            for (const auto& [b, cb] : q.coef_) {
                MultiIndex s(a);
                for (int v = 0; v < p.vars_; ++v) s[v] += b[v];
                r.add(s, ca * cb);
            }
        return r;
    }
    friend HolomorphicPolynomial operator+(const HolomorphicPolynomial& p, const HolomorphicPolynomial& q) {
        HolomorphicPolynomial r = p;
        for (const auto& [a, c] : q.coef_) r.add(a, c);
        return r;
    }
    friend HolomorphicPolynomial operator-(const HolomorphicPolynomial& p, const HolomorphicPolynomial& q) {
        HolomorphicPolynomial r = p;
        for (const auto& [a, c] : q.coef_) r.add(a, -c);
        return r;
    }
    friend HolomorphicPolynomial operator*(cplx s, const HolomorphicPolynomial& p) {
        HolomorphicPolynomial r(p.vars_);
        for (const auto& [a, c] : p.coef_) r.set(a, s * c);
        return r;
    }

private:
    int vars_;
    std::map<MultiIndex, cplx> coef_;
};

inline cplx eval(const HolomorphicPolynomial& phi, const CVec& z) { return phi.eval(z); }

inline CVec cgrad(const HolomorphicPolynomial& phi, const CVec& z) {
    CVec g(phi.vars());
    for (int v = 0; v < phi.vars(); ++v) g[v] = phi.derivative(v).eval(z);
    return g;
}

inline CMat chessian(const HolomorphicPolynomial& phi, const CVec& z) {
    const int v = phi.vars();
    CMat h(v, v);
    for (int i = 0; i < v; ++i) {
        const HolomorphicPolynomial di = phi.derivative(i);
        for (int j = i; j < v; ++j) {
            const cplx hij = di.derivative(j).eval(z);
            h(i, j) = hij;
            h(j, i) = hij;
        }
    }
    return h;
}

// Substitute z_i -> sum_j A(i,j) w_j + b_i. Linear substitution keeps the
// degree, so the cap is preserved.
inline HolomorphicPolynomial compose_affine(const HolomorphicPolynomial& p, const CMat& a, const CVec& b) {
    const int v = p.vars();
    if (a.rows() != v || a.cols() != v || static_cast<int>(b.size()) != v)
        throw std::invalid_argument("compose_affine: size mismatch");
    std::vector<HolomorphicPolynomial> subs;
    subs.reserve(v);
    for (int i = 0; i < v; ++i) {
        HolomorphicPolynomial s(v);
        MultiIndex zero(v, 0);
        s.set(zero, b[i]);
        for (int j = 0; j < v; ++j) {
            MultiIndex e(v, 0);
            e[j] = 1;
            s.add(e, a(i, j));
        }
        subs.push_back(std::move(s));
    }
    HolomorphicPolynomial out(v);
    for (const auto& [alpha, c] : p.terms()) {
        HolomorphicPolynomial term(v);
        term.set(MultiIndex(v, 0), c);
        for (int i = 0; i < v; ++i)
            for (int e = 0; e < alpha[i]; ++e) term = term * subs[i];
        out = out + term;
    }
    return out;
}

// phi(z) = z^t M z for symmetric nonsingular M.
struct QuadraticSurface {
    CMat M;
    explicit QuadraticSurface(CMat m) : M(std::move(m)) {
        if (M.rows() != M.cols()) throw std::invalid_argument("QuadraticSurface: M not square");
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j)
                if (std::abs(M(i, j) - M(j, i)) > 1e-12)
                    throw std::invalid_argument("QuadraticSurface: M not symmetric");
        if (std::abs(det_lu(M)) <= 1e-10) throw std::invalid_argument("QuadraticSurface: M singular");
    }
    HolomorphicPolynomial polynomial() const {
        HolomorphicPolynomial p(M.rows());
        for (int i = 0; i < M.rows(); ++i)
            for (int j = 0; j < M.cols(); ++j) {
                MultiIndex a(M.rows(), 0);
                a[i] += 1;
                a[j] += 1;
                p.add(a, M(i, j));
            }
        return p;
    }
};

// Normal to the graph of phi with respect to the Hermitian inner product:
// raw = (conj d1 phi, ..., conj d_{n-1} phi, -1).
struct NormalVector {
    CVec raw;
    CVec unit;
};

inline NormalVector normal(const HolomorphicPolynomial& phi, const CVec& a) {
    const CVec g = cgrad(phi, a);
    CVec raw(g.size() + 1);
    for (size_t j = 0; j < g.size(); ++j) raw[j] = std::conj(g[j]);
    raw[g.size()] = cplx(-1.0, 0.0);
    double nrm = 0.0;
    for (const cplx& z : raw) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    CVec unit(raw.size());
    for (size_t j = 0; j < raw.size(); ++j) unit[j] = raw[j] / nrm;
    return {std::move(raw), std::move(unit)};
}

// L = (d Sigma(a))^*: the (2n-2) x 2n matrix [ I_{2n-2} | grad phi1 | grad phi2 ]
// in interleaved real coordinates (x1, y1, ..., x_{n-1}, y_{n-1}).
// Real partials come from the complex gradient via Cauchy-Riemann.
inline RMat real_parametrization_map(const HolomorphicPolynomial& phi, const CVec& a) {
    const int v = phi.vars();
    const CVec g = cgrad(phi, a);
    RMat L(2 * v, 2 * v + 2);
    for (int i = 0; i < 2 * v; ++i) L(i, i) = 1.0;
    for (int j = 0; j < v; ++j) {
        // d phi1 / dx_j = Re g_j,  d phi1 / dy_j = -Im g_j
        // d phi2 / dx_j = Im g_j,  d phi2 / dy_j =  Re g_j
        L(2 * j, 2 * v) = g[j].real();
        L(2 * j + 1, 2 * v) = -g[j].imag();
        L(2 * j, 2 * v + 1) = g[j].imag();
        L(2 * j + 1, 2 * v + 1) = g[j].real();
    }
    return L;
}

// Max Cauchy-Riemann defect of a real map R^{2n-2} -> R^2, by central
// differences. The holomorphic wrapper below should report ~0.
inline double cauchy_riemann_residual(const std::function<std::array<double, 2>(const RVec&)>& f,
                                      const std::vector<RVec>& samples, double step = 1e-4) {
    double worst = 0.0;
    for (const RVec& x : samples) {
        const int d = static_cast<int>(x.size());
        for (int j = 0; j + 1 < d; j += 2) {
            RVec xp = x, xm = x, yp = x, ym = x;
            xp[j] += step;
            xm[j] -= step;
            yp[j + 1] += step;
            ym[j + 1] -= step;
            const auto fxp = f(xp), fxm = f(xm), fyp = f(yp), fym = f(ym);
            const double p1x = (fxp[0] - fxm[0]) / (2 * step);
            const double p2x = (fxp[1] - fxm[1]) / (2 * step);
            const double p1y = (fyp[0] - fym[0]) / (2 * step);
            const double p2y = (fyp[1] - fym[1]) / (2 * step);
            worst = std::max(worst, std::abs(p1x - p2y) + std::abs(p1y + p2x));
        }
    }
    return worst;
}

inline std::array<double, 2> surface_real_values(const HolomorphicPolynomial& phi, const RVec& x) {
    CVec z(phi.vars());
    for (int v = 0; v < phi.vars(); ++v) z[v] = cplx(x[2 * v], x[2 * v + 1]);
    const cplx w = phi.eval(z);
    return {w.real(), w.imag()};
}

inline double cauchy_riemann_residual(const HolomorphicPolynomial& phi, const std::vector<CVec>& samples,
                                      double step = 1e-4) {
    std::vector<RVec> pts;
    pts.reserve(samples.size());
    for (const CVec& z : samples) pts.push_back(realify(z));
    return cauchy_riemann_residual([&](const RVec& x) { return surface_real_values(phi, x); }, pts, step);
}

// det identity: |det Hess_{x,y}(s phi1 + t phi2)| = (s^2+t^2)^{n-1} |det Hphi|^2.
// The real Hessian is assembled analytically from the complex one: with
// H = (s - it) Hphi the blocks are [[Re H, -Im H], [-Im H, -Re H]].
struct HessianIdentityResult {
    double lhs;
    double rhs;
};

inline HessianIdentityResult hessian_identity_check(const HolomorphicPolynomial& phi, const CVec& z,
                                                    double s, double t) {
    const int v = phi.vars();
    const CMat h = chessian(phi, z);
    const cplx c(s, -t);
    RMat real_hess(2 * v, 2 * v);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < v; ++j) {
            const cplx hc = c * h(i, j);
            real_hess(i, j) = hc.real();
            real_hess(i, j + v) = -hc.imag();
            real_hess(i + v, j) = -hc.imag();
            real_hess(i + v, j + v) = -hc.real();
        }
    const double lhs = std::abs(det_lu(real_hess));
    const double rhs = std::pow(s * s + t * t, v) * std::norm(det_lu(h));
    return {lhs, rhs};
}

// --- the class F(delta0, r) and renormalization ------------------------------

struct SurfaceClassSpec {
    double delta0 = 0.01;
    double r = 1.0;
    int order_cap;  // derivative orders 2 .. order_cap are bounded

    SurfaceClassSpec(double d0, double rr, int n) : delta0(d0), r(rr), order_cap(2 * n + 2) {
        if (!(d0 > 0.0 && d0 < 1.0)) throw std::invalid_argument("SurfaceClassSpec: delta0 outside (0,1)");
        if (!(rr > 0.0 && rr <= 2.0)) throw std::invalid_argument("SurfaceClassSpec: r outside (0,2]");
    }
};

inline HolomorphicPolynomial half_z_dot_z(int vars) {
    HolomorphicPolynomial p(vars);
    for (int v = 0; v < vars; ++v) {
        MultiIndex a(vars, 0);
        a[v] = 2;
        p.set(a, cplx(0.5, 0.0));
    }
    return p;
}

struct ClassCheckResult {
    bool pass;
    double max_deviation;
    std::string reason;  // empty when pass
};

// Enumerate multi-indices of the given length with total degree in [lo, hi].
inline void enumerate_multi_indices(int vars, int lo, int hi, std::vector<MultiIndex>& out) {
    MultiIndex cur(vars, 0);
    std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == vars) {
            if (used >= lo) out.push_back(cur);
            return;
        }
        for (int e = 0; used + e <= hi; ++e) {
            cur[pos] = e;
            rec(pos + 1, used + e);
        }
        cur[pos] = 0;
    };
    rec(0, 0);
}

// Membership check for F(delta0, r): g(0) = 0 and grad g(0) = 0 exactly on
// coefficients; |d^alpha (g - z.z/2)| < delta0 for 2 <= |alpha| <= 2n+2,
// bounded by exact coefficient differentiation sampled on a grid over the
// closed cube Q(0, r). Grid sampling gives a lower bound on the true sup.
inline ClassCheckResult class_check(const HolomorphicPolynomial& g, const SurfaceClassSpec& spec) {
    const int v = g.vars();
    if (g.coeff(MultiIndex(v, 0)) != cplx(0.0)) return {false, 0.0, "g(0) != 0"};
    for (int j = 0; j < v; ++j) {
        MultiIndex e(v, 0);
        e[j] = 1;
        if (g.coeff(e) != cplx(0.0)) return {false, 0.0, "grad g(0) != 0"};
    }
    const HolomorphicPolynomial dev = g - half_z_dot_z(v);

    int pts_per_axis = 5;
    while (std::pow(pts_per_axis, 2 * v) > 1e5 && pts_per_axis > 2) pts_per_axis -= 2;
    const double half = spec.r / 2.0;
    std::vector<double> axis(pts_per_axis);
    for (int i = 0; i < pts_per_axis; ++i)
        axis[i] = (pts_per_axis == 1) ? 0.0 : -half + 2.0 * half * i / (pts_per_axis - 1);

    std::vector<MultiIndex> alphas;
    enumerate_multi_indices(v, 2, std::min(spec.order_cap, HolomorphicPolynomial::kDegreeCap), alphas);

    double worst = 0.0;
    const long long total = static_cast<long long>(std::pow(pts_per_axis, 2 * v));
    for (const MultiIndex& alpha : alphas) {
        const HolomorphicPolynomial da = dev.derivative(alpha);
        if (da.terms().empty()) continue;
        for (long long flat = 0; flat < total; ++flat) {
            long long rem = flat;
            CVec z(v);
            for (int c = 0; c < 2 * v; ++c) {
                const double x = axis[rem % pts_per_axis];
                rem /= pts_per_axis;
                if (c % 2 == 0) z[c / 2] = cplx(x, 0.0);
                else z[c / 2] += cplx(0.0, x);
            }
            worst = std::max(worst, std::abs(da.eval(z)));
        }
    }
    // orders above the polynomial degree vanish identically
    if (worst < spec.delta0) return {true, worst, ""};
    return {false, worst, "derivative deviation exceeds delta0"};
}

// Blow-up of g at z0 with scale eps, then the Takagi change of variables
// that makes the quadratic part z.z/2 exactly:
//   g_eps(z) = eps^{-2} (g(eps z + z0) - g(z0) - grad g(z0) . eps z)
//   result(z) = g_eps((sqrt(D) U)^{-1} z)     with Hg(z0) = U^t D U.
inline HolomorphicPolynomial normalize_at(const HolomorphicPolynomial& g, const CVec& z0, double eps) {
    const int v = g.vars();
    if (static_cast<int>(z0.size()) != v) throw std::invalid_argument("normalize_at: dimension mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("normalize_at: eps must be positive");
    const CMat h = chessian(g, z0);
    if (std::abs(det_lu(h)) <= 1e-8) throw std::invalid_argument("normalize_at: Hessian singular at z0");

    CMat eps_id(v, v);
    for (int i = 0; i < v; ++i) eps_id(i, i) = cplx(eps, 0.0);
    HolomorphicPolynomial shifted = compose_affine(g, eps_id, z0);  // g(eps z + z0)
    shifted.add(MultiIndex(v, 0), -g.eval(z0));
    const CVec grad0 = cgrad(g, z0);
    for (int j = 0; j < v; ++j) {
        MultiIndex e(v, 0);
        e[j] = 1;
        shifted.add(e, -grad0[j] * eps);
    }
    HolomorphicPolynomial g_eps = cplx(1.0 / (eps * eps), 0.0) * shifted;

    const TakagiFactorization tak = takagi(h);
    CMat sqrt_d_u(v, v);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < v; ++j) sqrt_d_u(i, j) = std::sqrt(tak.D[i]) * tak.U(i, j);
    const CMat t = inverse(sqrt_d_u);
    HolomorphicPolynomial out = compose_affine(g_eps, t, CVec(v, cplx(0.0)));

    // contract: constant and linear parts vanish, quadratic part is z.z/2
    const HolomorphicPolynomial quad_dev = out - half_z_dot_z(v);
    for (const auto& [a, c] : quad_dev.terms()) {
        if (multi_degree(a) <= 2 && std::abs(c) > 1e-10)
            throw std::runtime_error("normalize_at: quadratic normalization failed");
    }
    return out;
}

// --- fixture serialization ---------------------------------------------------
//
// One line per monomial: "i1 i2 ... id re im"; '#' starts a comment.

inline void save_surface(std::ostream& os, const HolomorphicPolynomial& p) {
    os << "# surface coefficients: multi-index re im (" << p.vars() << " complex variables)\n";
    for (const auto& [a, c] : p.terms()) {
        for (int e : a) os << e << ' ';
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g %.17g", c.real(), c.imag());
        os << buf << '\n';
    }
}

inline void save_surface(const std::string& path, const HolomorphicPolynomial& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_surface: cannot open " + path);
    save_surface(os, p);
}

inline HolomorphicPolynomial load_surface(std::istream& is) {
    std::vector<std::pair<MultiIndex, cplx>> rows;
    int vars = -1;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> nums;
        double x;
        while (ls >> x) nums.push_back(x);
        if (nums.empty()) continue;
        if (nums.size() < 3) throw std::runtime_error("load_surface: malformed line: " + line);
        const int nv = static_cast<int>(nums.size()) - 2;
        if (vars == -1) vars = nv;
        else if (vars != nv) throw std::runtime_error("load_surface: inconsistent multi-index length");
        MultiIndex a(vars);
        for (int i = 0; i < vars; ++i) {
            a[i] = static_cast<int>(nums[i]);
            if (a[i] != nums[i] || a[i] < 0) throw std::runtime_error("load_surface: bad exponent in: " + line);
        }
        rows.emplace_back(std::move(a), cplx(nums[vars], nums[vars + 1]));
    }
    if (vars == -1) throw std::runtime_error("load_surface: empty file");
    HolomorphicPolynomial p(vars);
    for (auto& [a, c] : rows) p.add(a, c);
    return p;
}

inline HolomorphicPolynomial load_surface(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_surface: cannot open " + path);
    return load_surface(is);
}

// Common fixtures.
inline HolomorphicPolynomial monomial_surface(int vars, int var, int power, cplx c = cplx(1.0)) {
    HolomorphicPolynomial p(vars);
    MultiIndex a(vars, 0);
    a[var] = power;
    p.set(a, c);
    return p;
}

inline HolomorphicPolynomial sum_of_squares(int vars) {
    HolomorphicPolynomial p(vars);
    for (int v = 0; v < vars; ++v) {
        MultiIndex a(vars, 0);
        a[v] = 2;
        p.set(a, cplx(1.0));
    }
    return p;
}

}  // namespace lab
