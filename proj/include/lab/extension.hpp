#pragma once

// Numerical evaluation of the extension operator
//   E_D^phi f(w) = int_D e^{i w . (z, phi(z))} f(z) dz
// (with the realified pairing in the phase), stationary-phase decay
// measurement, and the parabolic-rescaling identity check.
//
// Quadrature is a tensor rule (midpoint or Gauss-Legendre) whose resolution
// must satisfy a Nyquist-style invariant tied to |w| and sup |grad phi|;
// under-resolved requests are refused, not silently accepted. Sums are
// chunked and reduced in fixed order, so results are reproducible for any
// worker count.

#include <cstdio>

#include "lab/parallel.hpp"
#include "lab/surface.hpp"

namespace lab {

struct DomainBox {
    RVec center;       // in R^{2n-2}
    RVec half_widths;  // positive, each <= 2

    int dim() const { return static_cast<int>(center.size()); }

    static DomainBox cube(int dim, double side, RVec center = {}) {
        DomainBox d;
        d.center = center.empty() ? RVec(dim, 0.0) : std::move(center);
        d.half_widths.assign(dim, side / 2.0);
        d.validate();
        return d;
    }

    void validate() const {
        if (center.size() != half_widths.size()) throw std::invalid_argument("DomainBox: size mismatch");
        for (double h : half_widths)
            if (!(h > 0.0 && h <= 2.0)) throw std::invalid_argument("DomainBox: half-widths must be in (0, 2]");
    }

    double volume() const {
        double v = 1.0;
        for (double h : half_widths) v *= 2.0 * h;
        return v;
    }
};

class Amplitude {
public:
    enum class Kind { indicator, gaussian, polynomial, tabulated };

    static Amplitude indicator() {
        Amplitude a;
        a.kind_ = Kind::indicator;
        return a;
    }
    static Amplitude gaussian(double sigma, RVec center = {}) {
        if (!(sigma > 0.0)) throw std::invalid_argument("Amplitude::gaussian: sigma must be positive");
        Amplitude a;
        a.kind_ = Kind::gaussian;
        a.sigma_ = sigma;
        a.center_ = std::move(center);
        return a;
    }
    // real polynomial in the real coordinates of the domain
    static Amplitude polynomial(std::vector<std::pair<MultiIndex, double>> coeffs) {
        Amplitude a;
        a.kind_ = Kind::polynomial;
        a.poly_ = std::move(coeffs);
        return a;
    }
    // values on a tensor midpoint grid over `box`, nearest-cell lookup
    static Amplitude tabulated(DomainBox box, int pts_per_axis, RVec values) {
        const size_t expect = static_cast<size_t>(std::pow(pts_per_axis, box.dim()));
        if (values.size() != expect) throw std::invalid_argument("Amplitude::tabulated: value count mismatch");
        Amplitude a;
        a.kind_ = Kind::tabulated;
        a.tab_box_ = std::move(box);
        a.tab_pts_ = pts_per_axis;
        a.tab_values_ = std::move(values);
        return a;
    }

    // f_{a,r}: x -> scale * f(a + r x), with a given in real coordinates
    Amplitude rescaled(const RVec& shift, double r, double scale) const {
        Amplitude a = *this;
        if (a.affine_) {
            // compose with the existing map y -> s0 f(a0 + r0 y)
            for (size_t i = 0; i < shift.size(); ++i) a.shift_[i] += a.scale_r_ * shift[i];
            a.scale_r_ *= r;
            a.scale_ *= scale;
        } else {
            a.affine_ = true;
            a.shift_ = shift;
            a.scale_r_ = r;
            a.scale_ = scale;
        }
        return a;
    }

    double eval(const double* x, int d) const {
        thread_local RVec buf;
        const double* p = x;
        if (affine_) {
            buf.resize(d);
            for (int i = 0; i < d; ++i) buf[i] = shift_[i] + scale_r_ * x[i];
            p = buf.data();
        }
        return scale_ * eval_base(p, d);
    }
    double eval(const RVec& x) const { return eval(x.data(), static_cast<int>(x.size())); }

    Kind kind() const { return kind_; }

    // Gaussian and indicator amplitudes factor across axes; the quadrature
    // folds their per-axis factors into the weights and skips per-point
    // amplitude evaluation entirely.
    bool separable() const { return kind_ == Kind::indicator || kind_ == Kind::gaussian; }

    double axis_factor(int axis, double x) const {
        const double overall = axis == 0 ? scale_ : 1.0;  // applied once
        if (kind_ == Kind::indicator) return overall;
        const double y = affine_ ? shift_[axis] + scale_r_ * x : x;
        const double c = center_.empty() ? 0.0 : center_[axis];
        return overall * std::exp(-(y - c) * (y - c) / (2.0 * sigma_ * sigma_));
    }

    // Minimum points per axis needed to resolve the amplitude itself over an
    // axis of the given length (the Nyquist invariant only covers the phase).
    int resolution_hint(double side) const {
        const double eff_side = affine_ ? side * scale_r_ : side;
        switch (kind_) {
            case Kind::indicator:
                return 1;
            case Kind::gaussian:
                return static_cast<int>(std::ceil(6.0 * eff_side / sigma_));
            case Kind::polynomial: {
                int deg = 0;
                for (const auto& [a, c] : poly_) {
                    (void)c;
                    deg = std::max(deg, multi_degree(a));
                }
                return deg + 1;
            }
            case Kind::tabulated:
                return 2 * tab_pts_;
        }
        return 1;
    }

private:
    double eval_base(const double* x, int d) const {
        switch (kind_) {
            case Kind::indicator:
                return 1.0;
            case Kind::gaussian: {
                double s = 0.0;
                for (int i = 0; i < d; ++i) {
                    const double c = center_.empty() ? 0.0 : center_[i];
                    s += (x[i] - c) * (x[i] - c);
                }
                return std::exp(-s / (2.0 * sigma_ * sigma_));
            }
            case Kind::polynomial: {
                double s = 0.0;
                for (const auto& [a, c] : poly_) {
                    double t = c;
                    for (int i = 0; i < d; ++i)
                        for (int e = 0; e < a[i]; ++e) t *= x[i];
                    s += t;
                }
                return s;
            }
            case Kind::tabulated: {
                size_t idx = 0;
                for (int i = 0; i < d; ++i) {
                    const double lo = tab_box_.center[i] - tab_box_.half_widths[i];
                    const double frac = (x[i] - lo) / (2.0 * tab_box_.half_widths[i]);
                    int cell = static_cast<int>(frac * tab_pts_);
                    cell = std::clamp(cell, 0, tab_pts_ - 1);
                    idx = idx * tab_pts_ + cell;
                }
                return tab_values_[idx];
            }
        }
        return 0.0;
    }

    Kind kind_ = Kind::indicator;
    double sigma_ = 1.0;
    RVec center_;
    std::vector<std::pair<MultiIndex, double>> poly_;
    DomainBox tab_box_;
    int tab_pts_ = 0;
    RVec tab_values_;
    // affine reparametrization (parabolic rescaling)
    bool affine_ = false;
    RVec shift_;
    double scale_r_ = 1.0;
    double scale_ = 1.0;
};

struct QuadratureSpec {
    enum class Rule { midpoint, gauss_legendre };
    int points_per_axis = 0;  // 0 = choose the minimum admissible resolution
    Rule rule = Rule::midpoint;
    double nyquist_factor = 8.0;

    void validate() const {
        if (!(nyquist_factor >= 4.0)) throw std::invalid_argument("QuadratureSpec: nyquist factor must be >= 4");
        if (points_per_axis < 0) throw std::invalid_argument("QuadratureSpec: negative points-per-axis");
    }
};

// Flattened polynomial for the quadrature hot loop.
struct CompiledPoly {
    struct Term {
        std::array<int, 8> e{};
        cplx c;
    };
    int vars = 0;
    std::array<int, 8> max_deg{};
    std::vector<Term> terms;

    explicit CompiledPoly(const HolomorphicPolynomial& p) : vars(p.vars()) {
        if (vars > 8) throw std::invalid_argument("CompiledPoly: too many variables");
        for (const auto& [a, c] : p.terms()) {
            Term t;
            t.c = c;
            for (int v = 0; v < vars; ++v) {
                t.e[v] = a[v];
                max_deg[v] = std::max(max_deg[v], a[v]);
            }
            terms.push_back(t);
        }
    }

    cplx eval(const cplx* z) const {
        cplx pw[8][HolomorphicPolynomial::kDegreeCap + 1];
        for (int v = 0; v < vars; ++v) {
            pw[v][0] = cplx(1.0);
            for (int e = 1; e <= max_deg[v]; ++e) pw[v][e] = pw[v][e - 1] * z[v];
        }
        cplx s(0.0);
        for (const Term& t : terms) {
            cplx x = t.c;
            for (int v = 0; v < vars; ++v) x *= pw[v][t.e[v]];
            s += x;
        }
        return s;
    }

    // Coefficients of the polynomial viewed as a polynomial in the last
    // variable, with the other variables fixed: out[k] for k = 0..max_deg_last.
    void last_var_coeffs(const cplx* z, cplx* out) const {
        cplx pw[8][HolomorphicPolynomial::kDegreeCap + 1];
        for (int v = 0; v < vars - 1; ++v) {
            pw[v][0] = cplx(1.0);
            for (int e = 1; e <= max_deg[v]; ++e) pw[v][e] = pw[v][e - 1] * z[v];
        }
        for (int k = 0; k <= max_deg[vars - 1]; ++k) out[k] = cplx(0.0);
        for (const Term& t : terms) {
            cplx x = t.c;
            for (int v = 0; v < vars - 1; ++v) x *= pw[v][t.e[v]];
            out[t.e[vars - 1]] += x;
        }
    }
};

// Sampled sup of |grad phi| over the box (exact at corners for quadratics,
// a documented lower-bound estimate otherwise, inflated by 5%).
inline double gradient_sup(const HolomorphicPolynomial& phi, const DomainBox& box) {
    const int d = box.dim();
    const int per_axis = 5;
    const long long total = static_cast<long long>(std::pow(per_axis, d));
    std::vector<HolomorphicPolynomial> derivs;
    derivs.reserve(phi.vars());
    for (int v = 0; v < phi.vars(); ++v) derivs.push_back(phi.derivative(v));
    double worst = 0.0;
    for (long long flat = 0; flat < total; ++flat) {
        long long rem = flat;
        CVec z(phi.vars());
        for (int a = 0; a < d; ++a) {
            const int i = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            const double x = box.center[a] + box.half_widths[a] * (-1.0 + 2.0 * i / (per_axis - 1));
            if (a % 2 == 0) z[a / 2] = cplx(x, 0.0);
            else z[a / 2] += cplx(0.0, x);
        }
        double s = 0.0;
        for (const auto& dv : derivs) s += std::norm(dv.eval(z));
        worst = std::max(worst, std::sqrt(s));
    }
    return 1.05 * worst;
}

inline double vec_norm(const CVec& w) {
    double s = 0.0;
    for (const cplx& x : w) s += std::norm(x);
    return std::sqrt(s);
}

// Minimum admissible points for one axis of `box` at frequency w.
inline int required_points_per_axis(double w_norm, double grad_sup_value, double nyquist, double side) {
    const double per_unit = nyquist * (1.0 + w_norm * (1.0 + grad_sup_value)) / (2.0 * 3.14159265358979323846);
    return std::max(3, static_cast<int>(std::ceil(per_unit * side)));
}

namespace detail {

inline void gauss_legendre_nodes(int n, RVec& x, RVec& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess
        double t = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            if (n == 1) { p1 = t; }
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

struct Axis {
    RVec nodes;
    RVec weights;
};

inline Axis build_axis(const QuadratureSpec& q, double center, double half, int pts) {
    Axis ax;
    if (q.rule == QuadratureSpec::Rule::midpoint) {
        ax.nodes.resize(pts);
        ax.weights.assign(pts, 2.0 * half / pts);
        for (int i = 0; i < pts; ++i) ax.nodes[i] = center - half + (i + 0.5) * (2.0 * half / pts);
    } else {
        RVec x, w;
        gauss_legendre_nodes(pts, x, w);
        ax.nodes.resize(pts);
        ax.weights.resize(pts);
        for (int i = 0; i < pts; ++i) {
            ax.nodes[i] = center + half * x[i];
            ax.weights[i] = half * w[i];
        }
    }
    return ax;
}

}  // namespace detail

struct ExtendResult {
    cplx value;
    double abs_integral;  // same rule applied to |f|, for the trivial bound
};

inline ExtendResult extend_full(const HolomorphicPolynomial& phi, const DomainBox& box, const Amplitude& f,
                                const CVec& w, const QuadratureSpec& quad, int workers = 1,
                                double grad_sup_hint = -1.0) {
    quad.validate();
    box.validate();
    const int nv = phi.vars();
    if (nv < 1) throw std::invalid_argument("extend: surface needs at least one complex variable");
    const int d = box.dim();
    if (d != 2 * nv) throw std::invalid_argument("extend: domain dimension mismatch");
    if (static_cast<int>(w.size()) != nv + 1) throw std::invalid_argument("extend: frequency dimension mismatch");

    const double gsup = grad_sup_hint >= 0.0 ? grad_sup_hint : gradient_sup(phi, box);
    const double wn = vec_norm(w);
    std::vector<detail::Axis> axes(d);
    std::vector<int> counts(d);
    for (int a = 0; a < d; ++a) {
        const int req = required_points_per_axis(wn, gsup, quad.nyquist_factor, 2.0 * box.half_widths[a]);
        if (quad.points_per_axis > 0 && quad.points_per_axis < req) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "extend: under-resolved quadrature: %d points per axis requested, %d required at |w|=%.3g",
                          quad.points_per_axis, req, wn);
            throw std::runtime_error(msg);
        }
        // auto mode also resolves the amplitude's own scale
        counts[a] = quad.points_per_axis > 0
                        ? quad.points_per_axis
                        : std::max(req, f.resolution_hint(2.0 * box.half_widths[a]));
        axes[a] = detail::build_axis(quad, box.center[a], box.half_widths[a], counts[a]);
    }

    const CompiledPoly poly(phi);
    RVec linc(d);
    for (int j = 0; j < nv; ++j) {
        linc[2 * j] = w[j].real();
        linc[2 * j + 1] = w[j].imag();
    }
    const double wn_re = w[nv].real(), wn_im = w[nv].imag();

    // separable amplitudes fold into the axis weights (always nonnegative)
    const bool folded = f.separable();
    if (folded) {
        for (int a = 0; a < d; ++a)
            for (int i = 0; i < counts[a]; ++i) axes[a].weights[i] *= f.axis_factor(a, axes[a].nodes[i]);
    }

    // chunk over rows of the innermost axis
    const int inner = counts[d - 1];
    int64_t rows = 1;
    for (int a = 0; a < d - 1; ++a) rows *= counts[a];
    const int64_t rows_per_chunk = std::max<int64_t>(1, (1 << 14) / inner);
    const int64_t nchunks = (rows + rows_per_chunk - 1) / rows_per_chunk;

    struct Partial {
        cplx sum;
        double abs_sum;
    };
    const int last_deg = poly.vars > 0 ? poly.max_deg[nv - 1] : 0;
    auto chunk_fn = [&](int64_t chunk) -> Partial {
        Partial p{cplx(0.0), 0.0};
        const int64_t row_lo = chunk * rows_per_chunk;
        const int64_t row_hi = std::min(rows, row_lo + rows_per_chunk);
        RVec x(d);
        CVec z(nv);
        cplx rc[HolomorphicPolynomial::kDegreeCap + 1];
        const double* in_nodes = axes[d - 1].nodes.data();
        const double* in_wts = axes[d - 1].weights.data();
        for (int64_t row = row_lo; row < row_hi; ++row) {
            int64_t rem = row;
            double wrow = 1.0;
            for (int a = d - 2; a >= 0; --a) {
                const int i = static_cast<int>(rem % counts[a]);
                rem /= counts[a];
                x[a] = axes[a].nodes[i];
                wrow *= axes[a].weights[i];
            }
            for (int j = 0; j + 1 < nv; ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
            const double re_last = x[d - 2];
            double base_lin = 0.0;
            for (int a = 0; a < d - 1; ++a) base_lin += linc[a] * x[a];
            // the phase polynomial restricted to the inner axis (Horner form)
            z[nv - 1] = cplx(re_last, 0.0);
            poly.last_var_coeffs(z.data(), rc);
            for (int i = 0; i < inner; ++i) {
                const double xi = in_nodes[i];
                const cplx zl(re_last, xi);
                cplx ph = rc[last_deg];
                for (int k = last_deg - 1; k >= 0; --k) ph = ph * zl + rc[k];
                const double phase = base_lin + linc[d - 1] * xi + wn_re * ph.real() + wn_im * ph.imag();
                double wt = wrow * in_wts[i];
                if (!folded) {
                    x[d - 1] = xi;
                    const double fv = f.eval(x.data(), d);
                    p.abs_sum += wt * std::abs(fv);
                    wt *= fv;
                } else {
                    p.abs_sum += wt;
                }
                p.sum += wt * cplx(std::cos(phase), std::sin(phase));
            }
        }
        return p;
    };

    const auto partials = parallel_map_chunks<Partial>(nchunks, workers, chunk_fn);
    ExtendResult out{cplx(0.0), 0.0};
    for (const Partial& p : partials) {
        out.value += p.sum;
        out.abs_integral += p.abs_sum;
    }
    return out;
}

inline cplx extend(const HolomorphicPolynomial& phi, const DomainBox& box, const Amplitude& f, const CVec& w,
                   const QuadratureSpec& quad, int workers = 1, double grad_sup_hint = -1.0) {
    return extend_full(phi, box, f, w, quad, workers, grad_sup_hint).value;
}

// --- stationary-phase decay fit ----------------------------------------------

struct DecayFitResult {
    double exponent = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS residual of the log-log fit
    RVec t_values;
    bool degenerate_surface = false;  // |det Hphi| fell below 1e-6 somewhere on D
};

inline DecayFitResult decay_fit(const HolomorphicPolynomial& phi, const DomainBox& box, const Amplitude& f,
                                std::array<double, 2> ray, const RVec& ts, const QuadratureSpec& quad,
                                int workers = 1) {
    if (ts.size() < 6) throw std::invalid_argument("decay_fit: need at least 6 magnitudes for a stable fit");
    const double rn = std::hypot(ray[0], ray[1]);
    if (std::abs(rn - 1.0) > 1e-9) throw std::invalid_argument("decay_fit: ray must be a unit 2-vector");
    const int nv = phi.vars();

    DecayFitResult out;
    out.t_values = ts;
    // nondegeneracy scan (recorded, not fatal: the degenerate run is the contrast experiment)
    {
        const int per_axis = 3;
        const long long total = static_cast<long long>(std::pow(per_axis, box.dim()));
        double mind = 1e300;
        for (long long flat = 0; flat < total; ++flat) {
            long long rem = flat;
            CVec z(nv);
            for (int a = 0; a < box.dim(); ++a) {
                const int i = static_cast<int>(rem % per_axis);
                rem /= per_axis;
                const double x = box.center[a] + box.half_widths[a] * (i - 1.0);
                if (a % 2 == 0) z[a / 2] = cplx(x, 0.0);
                else z[a / 2] += cplx(0.0, x);
            }
            mind = std::min(mind, std::abs(det_lu(chessian(phi, z))));
        }
        out.degenerate_surface = mind < 1e-6;
    }

    const double gsup = gradient_sup(phi, box);
    RVec logt, logm;
    for (double t : ts) {
        CVec w(nv + 1, cplx(0.0));
        w[nv] = cplx(t * ray[0], t * ray[1]);
        const double mag = std::abs(extend(phi, box, f, w, quad, workers, gsup));
        if (mag < 1e-13) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "decay_fit: magnitude below 1e-13 at t=%.6g, fit unstable", t);
            throw std::runtime_error(msg);
        }
        logt.push_back(std::log(t));
        logm.push_back(std::log(mag));
    }
    const int n = static_cast<int>(logt.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += logt[i];
        sy += logm[i];
        sxx += logt[i] * logt[i];
        sxy += logt[i] * logm[i];
    }
    const double denom = n * sxx - sx * sx;
    out.exponent = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.exponent * sx) / n;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = logm[i] - (out.intercept + out.exponent * logt[i]);
        rss += e * e;
    }
    out.residual = std::sqrt(rss / n);
    return out;
}

// --- parabolic rescaling ------------------------------------------------------
//
// For psi(z) = z^t M z and f supported on Q(a, r) inside Q(0, 1):
//   |E_{Q(a,r)} f(w)| = |E_{Q(0,1)} f_{a,r}( r (w' + w_n conj(grad psi(a))), r^2 w_n )|
// with f_{a,r}(z) = r^{2n-2} f(a + r z). The conjugate on grad psi comes from
// the pairing convention (the second slot is conjugated).

struct RescaleCheckResult {
    double lhs;
    double rhs;
};

inline RescaleCheckResult parabolic_rescale_check(const CMat& m, const Amplitude& f, const CVec& a, double r,
                                                  const CVec& w, const QuadratureSpec& quad, int workers = 1) {
    const QuadraticSurface surf(m);
    const HolomorphicPolynomial psi = surf.polynomial();
    const int nv = m.rows();
    if (static_cast<int>(a.size()) != nv || static_cast<int>(w.size()) != nv + 1)
        throw std::invalid_argument("parabolic_rescale_check: size mismatch");
    const double d = 2.0 * nv;
    const double bound = 1.0 / (std::sqrt(d) * (1.0 + 2.0 * operator_norm(m)));
    bool a_zero = true;
    for (const cplx& ai : a)
        if (ai != cplx(0.0)) a_zero = false;
    if (!(r < bound) && !(a_zero && r <= 1.0))
        throw std::invalid_argument("parabolic_rescale_check: r too large for the rescaling hypothesis");

    const DomainBox small_box = DomainBox::cube(2 * nv, r, realify(a));
    const double lhs = std::abs(extend(psi, small_box, f, w, quad, workers));

    CVec grad_psi = cgrad(psi, a);  // 2 M a
    CVec w_tilde(nv + 1);
    for (int j = 0; j < nv; ++j) w_tilde[j] = r * (w[j] + w[nv] * std::conj(grad_psi[j]));
    w_tilde[nv] = r * r * w[nv];
    const Amplitude f_ar = f.rescaled(realify(a), r, std::pow(r, 2.0 * nv));
    const DomainBox unit_box = DomainBox::cube(2 * nv, 1.0);
    const double rhs = std::abs(extend(psi, unit_box, f_ar, w_tilde, quad, workers));
    return {lhs, rhs};
}

}  // namespace lab
