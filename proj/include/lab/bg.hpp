#pragma once

// Desk-scale replay of the broad/narrow decomposition: cap grid over Q(0,1)
// in frequency parameters, box grid over Q(0,R) in physical space, mollified
// cap coefficients C_q^Q, the small/large split at K^{2-2n} max, the
// broad/narrow classification by wedge search and complex subspace fitting,
// the narrow-cap count sweep, and the exponent threshold arithmetic.

#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>

#include "lab/extension.hpp"
#include "lab/rng.hpp"

namespace lab {

// --- exact rational arithmetic for the exponent thresholds -------------------

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }
};

// max( 2(n-k+2)/(n-k+1), 2k/(k-1) )
inline Rational exponent_threshold_rational(int n, int k) {
    if (!(2 <= k && k <= n - 1)) throw std::invalid_argument("exponent_threshold: need 2 <= k <= n-1");
    const Rational a(2LL * (n - k + 2), n - k + 1);
    const Rational b(2LL * k, k - 1);
    return a < b ? b : a;
}

inline double exponent_threshold(int n, int k) { return exponent_threshold_rational(n, k).value(); }

inline int optimal_k(int n) {
    if (n < 3) throw std::invalid_argument("optimal_k: need n >= 3");
    if (n % 2 == 0) return n / 2 + 1;
    int best = 2;
    Rational best_v = exponent_threshold_rational(n, 2);
    for (int k = 3; k <= n - 1; ++k) {
        const Rational v = exponent_threshold_rational(n, k);
        if (v < best_v) {
            best_v = v;
            best = k;
        }
    }
    return best;
}

// --- grids --------------------------------------------------------------------

struct Cap {
    RVec center;  // in R^{2n-2}
    double side;
};

struct CapGrid {
    int K = 0;
    int dim = 0;  // 2n-2
    std::vector<Cap> caps;
};

struct PhysBox {
    RVec center;  // in R^{2n}
    double side;
};

struct BoxGrid {
    double R = 0.0;
    int K = 0;
    int dim = 0;  // 2n
    int per_axis = 0;
    int64_t count = 0;

    PhysBox box(int64_t idx) const {
        PhysBox b;
        b.side = K;
        b.center.resize(dim);
        for (int a = dim - 1; a >= 0; --a) {
            const int i = static_cast<int>(idx % per_axis);
            idx /= per_axis;
            b.center[a] = -R / 2.0 + (i + 0.5) * K;
        }
        return b;
    }
};

inline std::pair<CapGrid, BoxGrid> build_grids(int n, int K, double R) {
    if (K < 4) throw std::invalid_argument("build_grids: K must be >= 4");
    if (!(R >= K)) throw std::invalid_argument("build_grids: R must be >= K");
    const double ratio = R / K;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) throw std::invalid_argument("build_grids: R must be a multiple of K");
    const int d_caps = 2 * n - 2;
    if (std::pow(K, d_caps) > 1e4) throw std::invalid_argument("build_grids: cap budget K^{2n-2} <= 1e4 exceeded");

    CapGrid cg;
    cg.K = K;
    cg.dim = d_caps;
    const long long ncaps = static_cast<long long>(std::pow(K, d_caps));
    for (long long flat = 0; flat < ncaps; ++flat) {
        long long rem = flat;
        Cap c;
        c.side = 1.0 / K;
        c.center.resize(d_caps);
        for (int a = d_caps - 1; a >= 0; --a) {
            const int i = static_cast<int>(rem % K);
            rem /= K;
            c.center[a] = -0.5 + (i + 0.5) / K;
        }
        cg.caps.push_back(std::move(c));
    }
    BoxGrid bg;
    bg.R = R;
    bg.K = K;
    bg.dim = 2 * n;
    bg.per_axis = static_cast<int>(std::round(ratio));
    bg.count = 1;
    for (int a = 0; a < bg.dim; ++a) bg.count *= bg.per_axis;
    return {std::move(cg), bg};
}

// --- mollifier pair (eta, zeta) -------------------------------------------------
//
// eta-hat is a radial bump: 1 on |w| <= 1, 0 on |w| >= 2, with a C^10
// polynomial smoothstep transition (high order so |eta|^{1/n} stays
// integrable). eta itself comes from the radial inverse Fourier transform
// (a Hankel integral), tabulated once per dimension;
// zeta(x) = max_{|x'| <= sqrt(d)} |eta(x + x')|^{1/n} reduces, by radial
// symmetry, to a running max of the eta table over [r - sqrt(d), r + sqrt(d)].

class Mollifier {
public:
    static const Mollifier& instance(int n) {
        static std::map<int, Mollifier> cache;
        static std::mutex mu;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, Mollifier(n)).first;
        return it->second;
    }

    double eta_abs(double r) const { return std::abs(interp(eta_, r)); }
    double zeta(double r) const { return interp(zeta_, r); }
    double tail_bound() const { return zeta_.back(); }

private:
    explicit Mollifier(int n) : n_(n), d_(2 * n) {
        // smoothstep of order 10: s(0)=0, s(1)=1, C^10 at both ends
        auto smoothstep = [](double x) {
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            const int N = 10;
            double acc = 0.0;
            for (int k = 0; k <= N; ++k) {
                double c = 1.0;
                for (int i = 1; i <= k; ++i) c *= static_cast<double>(N + i) / i;  // binom(N+k, k)
                double c2 = 1.0;
                for (int i = 1; i <= N - k; ++i)
                    c2 *= static_cast<double>(N + k + 1 + i) / i;  // binom(2N+1, N-k)
                acc += c * c2 * std::pow(-x, k);
            }
            return std::pow(x, N + 1) * acc;
        };
        auto cutoff = [&](double rho) {
            if (rho <= 1.0) return 1.0;
            if (rho >= 2.0) return 0.0;
            return 1.0 - smoothstep(rho - 1.0);
        };
        // Gauss-Legendre nodes on [0, 2] for the Hankel integral
        RVec gx, gw;
        detail::gauss_legendre_nodes(240, gx, gw);
        const double nu = d_ / 2.0 - 1.0;
        const double pref = std::pow(2.0 * 3.14159265358979323846, -d_ / 2.0);
        const int npts = static_cast<int>(r_max_ / step_) + 2;
        eta_.resize(npts);
        for (int i = 0; i < npts; ++i) {
            const double r = std::max(i * step_, 1e-9);
            double s = 0.0;
            for (int g = 0; g < 240; ++g) {
                const double rho = 1.0 + gx[g];  // [0, 2]
                const double w = gw[g];
                s += w * cutoff(rho) * std::cyl_bessel_j(nu, r * rho) * std::pow(rho, d_ / 2.0);
            }
            eta_[i] = pref * std::pow(r, 1.0 - d_ / 2.0) * s;
        }
        // zeta table: windowed max of |eta|^{1/n}
        const double sqrt_d = std::sqrt(static_cast<double>(d_));
        const int win = static_cast<int>(sqrt_d / step_) + 1;
        zeta_.resize(npts);
        for (int i = 0; i < npts; ++i) {
            double m = 0.0;
            for (int j = std::max(0, i - win); j < std::min(npts, i + win + 1); ++j)
                m = std::max(m, std::abs(eta_[j]));
            zeta_[i] = std::pow(m, 1.0 / n_);
        }
    }

    double interp(const RVec& tab, double r) const {
        if (r < 0.0) r = -r;
        const double u = r / step_;
        const int i = static_cast<int>(u);
        if (i + 1 >= static_cast<int>(tab.size())) return 0.0;
        const double f = u - i;
        return (1.0 - f) * tab[i] + f * tab[i + 1];
    }

    int n_, d_;
    double r_max_ = 24.0;
    double step_ = 1.0 / 128.0;
    RVec eta_, zeta_;
};

// --- cap coefficients ------------------------------------------------------------

enum class CapCoeffMode { exact, proxy };

inline CVec unrealify(const RVec& x) {
    CVec z(x.size() / 2);
    for (size_t j = 0; j < z.size(); ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
    return z;
}

// C_q^Q = K^{-2n^2} ( int |E f_q(w_Q - s)|^{1/n} zeta(s/K) ds )^n, with the
// s-integral truncated to |s| <= 8K (the zeta tail bound is recorded by the
// mollifier). The proxy mode takes max |E f_q| over 3^{2n} samples of Q;
// both modes are degree-1 homogeneous in f.
struct CapCoeffParams {
    int s_points_per_axis = 13;
    double s_truncation_factor = 8.0;  // integrate over |s| <= factor * K
};

inline double cap_coefficient(const HolomorphicPolynomial& phi, const Amplitude& f, const Cap& cap,
                              const PhysBox& box, int n, int K, const QuadratureSpec& quad, CapCoeffMode mode,
                              int workers = 1, const CapCoeffParams& params = {}) {
    const DomainBox cap_box = DomainBox::cube(2 * n - 2, cap.side, cap.center);
    const double gsup = gradient_sup(phi, cap_box);

    if (mode == CapCoeffMode::proxy) {
        const int per_axis = 3;
        const int d = 2 * n;
        int64_t total = 1;
        for (int a = 0; a < d; ++a) total *= per_axis;
        auto fn = [&](int64_t flat) -> double {
            int64_t rem = flat;
            RVec w(d);
            for (int a = d - 1; a >= 0; --a) {
                const int i = static_cast<int>(rem % per_axis);
                rem /= per_axis;
                w[a] = box.center[a] + box.side * (i - 1.0) / 3.0;
            }
            return std::abs(extend(phi, cap_box, f, unrealify(w), quad, 1, gsup));
        };
        const auto vals = parallel_map_chunks<double>(total, workers, fn);
        double m = 0.0;
        for (double v : vals) m = std::max(m, v);
        return m;
    }

    const Mollifier& moll = Mollifier::instance(n);
    const int d = 2 * n;
    const double half = params.s_truncation_factor * K;
    const int ns = params.s_points_per_axis;
    const double h = 2.0 * half / ns;
    int64_t total = 1;
    for (int a = 0; a < d; ++a) total *= ns;

    // budget gate: estimated work = s-points inside the ball x cap-quadrature cost
    {
        const double wmax = vec_norm(unrealify(box.center)) + std::sqrt(static_cast<double>(d)) * (half + box.side);
        const int req = required_points_per_axis(wmax, gsup, quad.nyquist_factor, cap.side);
        const double est = 0.4 * static_cast<double>(total) * std::pow(req, 2 * n - 2);
        if (est > 5e8)
            throw std::runtime_error("cap_coefficient: exact-mode budget exceeded; use proxy mode");
    }

    auto fn = [&](int64_t flat) -> double {
        int64_t rem = flat;
        RVec s(d);
        double s2 = 0.0;
        for (int a = d - 1; a >= 0; --a) {
            const int i = static_cast<int>(rem % ns);
            rem /= ns;
            s[a] = -half + (i + 0.5) * h;
            s2 += s[a] * s[a];
        }
        if (s2 > half * half) return 0.0;
        RVec w(d);
        for (int a = 0; a < d; ++a) w[a] = box.center[a] - s[a];
        const double mag = std::abs(extend(phi, cap_box, f, unrealify(w), quad, 1, gsup));
        return std::pow(mag, 1.0 / n) * moll.zeta(std::sqrt(s2) / K);
    };
    const auto vals = parallel_map_chunks<double>(total, workers, fn);
    double integral = 0.0;
    for (double v : vals) integral += v;
    integral *= std::pow(h, d);
    return std::pow(static_cast<double>(K), -2.0 * n * n) * std::pow(integral, n);
}

// Split at K^{2-2n} max: ties (equality) go to the large set.
inline std::pair<std::vector<int>, std::vector<int>> split_caps(const RVec& coeffs, int K, int n) {
    double mx = 0.0;
    for (double c : coeffs) mx = std::max(mx, c);
    const double threshold = std::pow(static_cast<double>(K), 2.0 - 2.0 * n) * mx;
    std::vector<int> small, large;
    for (int i = 0; i < static_cast<int>(coeffs.size()); ++i) {
        if (coeffs[i] < threshold) small.push_back(i);
        else large.push_back(i);
    }
    return {std::move(small), std::move(large)};
}

struct Classification {
    bool broad = false;
    std::vector<int> witness;      // cap indices (into the grid) when broad
    double witness_wedge = 0.0;
    CMat narrow_basis;             // n x (k-1), orthonormal columns, when narrow
    double narrow_max_distance = 0.0;
    bool exhaustive = true;        // which search path ran
};

// Broad: some k-tuple of large caps has wedge of unit normals (at cap
// centers) above c / K^{2k}. Narrow otherwise: fit the best (k-1)-dim
// complex subspace by singular-vector truncation and report the max
// distance of the unit normals to it.
inline Classification classify(const HolomorphicPolynomial& phi, const CapGrid& grid, const std::vector<int>& ql,
                               int k, double c, int K, uint64_t seed = 1) {
    const int n = phi.vars() + 1;
    if (!(2 <= k && k <= n)) throw std::invalid_argument("classify: need 2 <= k <= n");
    Classification out;
    const int m = static_cast<int>(ql.size());
    std::vector<CVec> normals(m);
    for (int i = 0; i < m; ++i) normals[i] = normal(phi, unrealify(grid.caps[ql[i]].center)).unit;
    const double threshold = c / std::pow(static_cast<double>(K), 2.0 * k);

    if (m >= k) {
        auto try_tuple = [&](const std::vector<int>& idx) -> bool {
            std::vector<CVec> vs;
            vs.reserve(idx.size());
            for (int i : idx) vs.push_back(normals[i]);
            const double wv = wedge(vs);
            if (wv > threshold) {
                out.broad = true;
                out.witness.clear();
                for (int i : idx) out.witness.push_back(ql[i]);
                out.witness_wedge = wv;
                return true;
            }
            return false;
        };
        if (m <= 24) {
            out.exhaustive = true;
            std::vector<int> idx(k);
            std::function<bool(int, int)> rec = [&](int pos, int start) -> bool {
                if (pos == k) return try_tuple(idx);
                for (int i = start; i < m; ++i) {
                    idx[pos] = i;
                    if (rec(pos + 1, i + 1)) return true;
                }
                return false;
            };
            rec(0, 0);
        } else {
            out.exhaustive = false;
            // greedy seed tuple: repeatedly add the normal with the largest wedge gain
            std::vector<int> idx{0};
            while (static_cast<int>(idx.size()) < k) {
                int best = -1;
                double best_w = -1.0;
                for (int i = 0; i < m; ++i) {
                    if (std::find(idx.begin(), idx.end(), i) != idx.end()) continue;
                    std::vector<CVec> vs;
                    for (int q : idx) vs.push_back(normals[q]);
                    vs.push_back(normals[i]);
                    const double wv = wedge(vs);
                    if (wv > best_w) {
                        best_w = wv;
                        best = i;
                    }
                }
                idx.push_back(best);
            }
            if (!try_tuple(idx)) {
                Rng rng(seed, 0xBE);
                for (int t = 0; t < 10000 && !out.broad; ++t) {
                    std::vector<int> pick;
                    while (static_cast<int>(pick.size()) < k) {
                        const int i = rng.uniform_int(0, m - 1);
                        if (std::find(pick.begin(), pick.end(), i) == pick.end()) pick.push_back(i);
                    }
                    try_tuple(pick);
                }
            }
        }
    }
    if (out.broad) return out;

    // narrow: best (k-1)-dimensional complex subspace through the normals
    if (m == 0) {
        out.narrow_basis = CMat(n, 0);
        return out;
    }
    CMat nm(n, m);
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < n; ++r) nm(r, i) = normals[i][r];
    const Svd<cplx> svd = one_sided_jacobi_svd(nm);
    const int dim = std::min(k - 1, std::min(n, m));
    CMat basis(n, dim);
    for (int j = 0; j < dim; ++j)
        for (int r = 0; r < n; ++r) basis(r, j) = svd.left(r, j);
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        CVec proj(n, cplx(0.0));
        for (int j = 0; j < dim; ++j) {
            cplx dot(0.0);
            for (int r = 0; r < n; ++r) dot += std::conj(basis(r, j)) * normals[i][r];
            for (int r = 0; r < n; ++r) proj[r] += dot * basis(r, j);
        }
        double dist2 = 0.0;
        for (int r = 0; r < n; ++r) dist2 += std::norm(normals[i][r] - proj[r]);
        worst = std::max(worst, std::sqrt(dist2));
    }
    out.narrow_basis = basis;
    out.narrow_max_distance = worst;
    return out;
}

// #Q_l <= C K^{2k-4} across a K-sweep: reports the measured C and checks the
// log-log slope against 2k-4 + 0.5. Empty counts pass vacuously.
struct NarrowCountReport {
    bool pass = true;
    double measured_constant = 0.0;  // max over K of count / K^{2k-4}
    double slope = 0.0;
    double slope_bound = 0.0;
    bool fitted = false;
};

inline NarrowCountReport narrow_count_check(const std::vector<int>& ks, const std::vector<int>& max_counts, int k) {
    if (ks.size() != max_counts.size()) throw std::invalid_argument("narrow_count_check: length mismatch");
    NarrowCountReport rep;
    rep.slope_bound = 2.0 * k - 4.0 + 0.5;
    for (size_t i = 0; i < ks.size(); ++i)
        rep.measured_constant = std::max(
            rep.measured_constant, max_counts[i] / std::pow(static_cast<double>(ks[i]), 2.0 * k - 4.0));
    if (ks.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int m = static_cast<int>(ks.size());
        for (int i = 0; i < m; ++i) {
            const double x = std::log(static_cast<double>(ks[i]));
            const double y = std::log(static_cast<double>(std::max(max_counts[i], 1)));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        rep.fitted = true;
        rep.pass = rep.slope <= rep.slope_bound;
    }
    return rep;
}

// --- the per-box pipeline ----------------------------------------------------

struct BGBoxReport {
    int64_t box_index = 0;
    int small_count = 0;
    int large_count = 0;
    Classification classification;
};

struct BGPipelineResult {
    int n = 0, K = 0, k = 0;
    double R = 0.0, c = 0.0;
    std::vector<BGBoxReport> boxes;
    int narrow_boxes = 0;
    int max_narrow_large_count = 0;  // max #Q_l over narrow-classified boxes
    uint64_t seed = 0;
};

inline BGPipelineResult run_bg_pipeline(const HolomorphicPolynomial& phi, int n, int K, double R,
                                        const Amplitude& f, int k, double c, const QuadratureSpec& quad,
                                        uint64_t seed, int workers = 1) {
    auto [caps, boxes] = build_grids(n, K, R);
    BGPipelineResult out;
    out.n = n;
    out.K = K;
    out.k = k;
    out.R = R;
    out.c = c;
    out.seed = seed;

    const int64_t ncaps = static_cast<int64_t>(caps.caps.size());
    const int64_t pairs = ncaps * boxes.count;
    auto fn = [&](int64_t pair) -> double {
        const int64_t b = pair / ncaps;
        const int64_t q = pair % ncaps;
        return cap_coefficient(phi, f, caps.caps[q], boxes.box(b), n, K, quad, CapCoeffMode::proxy, 1);
    };
    const auto coeffs = parallel_map_chunks<double>(pairs, workers, fn);

    for (int64_t b = 0; b < boxes.count; ++b) {
        RVec cb(coeffs.begin() + b * ncaps, coeffs.begin() + (b + 1) * ncaps);
        auto [small, large] = split_caps(cb, K, n);
        BGBoxReport rep;
        rep.box_index = b;
        rep.small_count = static_cast<int>(small.size());
        rep.large_count = static_cast<int>(large.size());
        rep.classification = classify(phi, caps, large, k, c, K, seed + static_cast<uint64_t>(b));
        if (!rep.classification.broad) {
            ++out.narrow_boxes;
            out.max_narrow_large_count = std::max(out.max_narrow_large_count, rep.large_count);
        }
        out.boxes.push_back(std::move(rep));
    }
    return out;
}

// Comparability measurement: the ratio max_{w in Q} |E f_q(w)| / C_q^Q on a
// seeded subsample of (cap, box) pairs, with C in exact mode.
struct ComparabilityReport {
    std::vector<double> ratios;
    double max_ratio = 0.0;
};

inline ComparabilityReport bg_comparability(const HolomorphicPolynomial& phi, const Amplitude& f, int n, int K,
                                            double R, const QuadratureSpec& quad, int pairs, uint64_t seed,
                                            int workers = 1) {
    auto [caps, boxes] = build_grids(n, K, R);
    ComparabilityReport rep;
    Rng rng(seed, 0xCA11);
    for (int p = 0; p < pairs; ++p) {
        const int q = rng.uniform_int(0, static_cast<int>(caps.caps.size()) - 1);
        const int64_t b = rng.uniform_int(0, static_cast<int>(boxes.count) - 1);
        const double proxy =
            cap_coefficient(phi, f, caps.caps[q], boxes.box(b), n, K, quad, CapCoeffMode::proxy, workers);
        const double exact =
            cap_coefficient(phi, f, caps.caps[q], boxes.box(b), n, K, quad, CapCoeffMode::exact, workers);
        if (exact <= 0.0) continue;  // no mass on this cap
        const double ratio = proxy / exact;
        rep.ratios.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

}  // namespace lab
