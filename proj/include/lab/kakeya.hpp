#pragma once

// Monte-Carlo simulator for multilinear Kakeya overlap integrals over
// delta-neighborhoods of affine complex lines:
//   I = int_{[-1,1]^{2n}} prod_j (sum_i chi_{U_{i,j}})^{1/(k-1)}
// with the normalized constant C(delta) = I / (delta^{2n} prod #U_j^{1/(k-1)}).
//
// Tubes are unbounded and clipped by the integration box. Sampling uses
// counter-based substreams per fixed-size chunk, merged in chunk order, so
// estimates are bit-reproducible for any worker count.

#include "lab/linalg.hpp"
#include "lab/parallel.hpp"
#include "lab/rng.hpp"

namespace lab {

struct ComplexLineTube {
    CVec direction;  // unit vector in C^n
    RVec anchor;     // in R^{2n}
    double radius;   // delta
    RMat plane;      // 2n x 2: orthonormal basis I(v), I(iv) of the real 2-plane

    static ComplexLineTube make(CVec dir, RVec anchor, double radius) {
        double nrm = 0.0;
        for (const cplx& z : dir) nrm += std::norm(z);
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0)) throw std::invalid_argument("ComplexLineTube: zero direction");
        for (cplx& z : dir) z /= nrm;
        if (!(radius > 0.0 && radius <= 1.0)) throw std::invalid_argument("ComplexLineTube: radius outside (0, 1]");
        ComplexLineTube t;
        t.direction = std::move(dir);
        t.radius = radius;
        t.anchor = std::move(anchor);
        const int d = static_cast<int>(t.anchor.size());
        if (d != 2 * static_cast<int>(t.direction.size()))
            throw std::invalid_argument("ComplexLineTube: anchor dimension mismatch");
        t.plane = RMat(d, 2);
        t.plane.set_col(0, realify(t.direction));
        t.plane.set_col(1, realify(times_i(t.direction)));
        return t;
    }
};

// Distance from x to the affine plane anchor + span{I(v), I(iv)}.
inline bool tube_contains(const ComplexLineTube& t, const RVec& x) {
    const int d = static_cast<int>(x.size());
    double r2 = 0.0, p1 = 0.0, p2 = 0.0;
    for (int i = 0; i < d; ++i) {
        const double r = x[i] - t.anchor[i];
        r2 += r * r;
        p1 += r * t.plane(i, 0);
        p2 += r * t.plane(i, 1);
    }
    return r2 - p1 * p1 - p2 * p2 <= t.radius * t.radius;
}

struct TubeFamily {
    std::vector<ComplexLineTube> tubes;
    CVec base;  // unit base direction
    double nu = 0.0;
};

// Directions are drawn in the tangent plane at the base line: rotate the base
// by angle nu*u (u uniform in [0,1]) toward a Gaussian tangent direction, so
// the largest principal angle to the base complex line is exactly bounded
// by nu. Anchors are uniform in [-1,1]^{2n}.
inline TubeFamily sample_tube_family(const CVec& base, double nu, int count, double delta, uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_tube_family: count must be >= 1");
    if (!(nu >= 0.0 && nu <= 0.5)) throw std::invalid_argument("sample_tube_family: nu outside [0, 0.5]");
    const size_t n = base.size();
    double bn = 0.0;
    for (const cplx& z : base) bn += std::norm(z);
    bn = std::sqrt(bn);
    if (!(bn > 0.0)) throw std::invalid_argument("sample_tube_family: zero base direction");
    CVec b(base);
    for (cplx& z : b) z /= bn;

    TubeFamily fam;
    fam.base = b;
    fam.nu = nu;
    Rng rng(seed, 0x7B);
    for (int i = 0; i < count; ++i) {
        CVec dir = b;
        if (nu > 0.0) {
            CVec g(n);
            for (size_t j = 0; j < n; ++j) g[j] = rng.cnormal();
            cplx gb(0.0);
            for (size_t j = 0; j < n; ++j) gb += g[j] * std::conj(b[j]);
            double qn = 0.0;
            for (size_t j = 0; j < n; ++j) {
                g[j] -= gb * b[j];
                qn += std::norm(g[j]);
            }
            qn = std::sqrt(qn);
            const double theta = nu * rng.uniform();
            if (qn > 1e-12) {
                for (size_t j = 0; j < n; ++j) dir[j] = std::cos(theta) * b[j] + std::sin(theta) * (g[j] / qn);
            }
        }
        RVec anchor(2 * n);
        for (size_t j = 0; j < 2 * n; ++j) anchor[j] = rng.uniform(-1.0, 1.0);
        fam.tubes.push_back(ComplexLineTube::make(std::move(dir), std::move(anchor), delta));
    }
    return fam;
}

inline double max_principal_angle_to_base(const TubeFamily& fam) {
    RMat base_plane(static_cast<int>(2 * fam.base.size()), 2);
    base_plane.set_col(0, realify(fam.base));
    base_plane.set_col(1, realify(times_i(fam.base)));
    double worst = 0.0;
    for (const ComplexLineTube& t : fam.tubes)
        worst = std::max(worst, max_principal_angle(base_plane, t.plane));
    return worst;
}

struct MCEstimate {
    double estimate = 0.0;
    double stderr_est = 0.0;
    int64_t samples = 0;
};

// Uniform Monte-Carlo over [-1,1]^{2n} of prod_j count_j^{1/(k-1)}.
inline MCEstimate kakeya_integral(const std::vector<TubeFamily>& families, int64_t samples, uint64_t seed,
                                  int workers = 1) {
    const int k = static_cast<int>(families.size());
    if (k < 2) throw std::invalid_argument("kakeya_integral: need k >= 2 families");
    if (samples < 10000) throw std::invalid_argument("kakeya_integral: need at least 1e4 samples");
    const int n = static_cast<int>(families[0].base.size());
    const int d = 2 * n;
    for (const TubeFamily& f : families)
        if (static_cast<int>(f.base.size()) != n) throw std::invalid_argument("kakeya_integral: dimension mismatch");

    // flat tube data: per tube, anchor | q1 | q2 (3d doubles)
    std::vector<std::vector<double>> flat(k);
    for (int j = 0; j < k; ++j) {
        flat[j].reserve(families[j].tubes.size() * 3 * d);
        for (const ComplexLineTube& t : families[j].tubes) {
            for (int i = 0; i < d; ++i) flat[j].push_back(t.anchor[i]);
            for (int i = 0; i < d; ++i) flat[j].push_back(t.plane(i, 0));
            for (int i = 0; i < d; ++i) flat[j].push_back(t.plane(i, 1));
        }
    }
    std::vector<double> radius2(k);
    for (int j = 0; j < k; ++j)
        radius2[j] = families[j].tubes.empty() ? 0.0 : families[j].tubes[0].radius * families[j].tubes[0].radius;
    for (int j = 0; j < k; ++j)
        for (const ComplexLineTube& t : families[j].tubes)
            if (std::abs(t.radius * t.radius - radius2[j]) > 1e-15)
                throw std::invalid_argument("kakeya_integral: mixed radii within a family");

    const int64_t chunk_size = 1 << 14;
    const int64_t nchunks = (samples + chunk_size - 1) / chunk_size;
    const double inv_expo = 1.0 / (k - 1.0);

    struct Partial {
        double s = 0.0, s2 = 0.0;
        int64_t count = 0;
    };
    auto fn = [&](int64_t chunk) -> Partial {
        Rng rng(seed, 0xC0FFEE00ULL + static_cast<uint64_t>(chunk));
        const int64_t lo = chunk * chunk_size;
        const int64_t hi = std::min(samples, lo + chunk_size);
        Partial p;
        double x[16];
        for (int64_t s = lo; s < hi; ++s) {
            for (int i = 0; i < d; ++i) x[i] = rng.uniform(-1.0, 1.0);
            double g = 1.0;
            for (int j = 0; j < k && g > 0.0; ++j) {
                const double* tube = flat[j].data();
                const int ntubes = static_cast<int>(flat[j].size() / (3 * d));
                int count = 0;
                for (int t = 0; t < ntubes; ++t, tube += 3 * d) {
                    double r2 = 0.0, p1 = 0.0, p2 = 0.0;
                    for (int i = 0; i < d; ++i) {
                        const double r = x[i] - tube[i];
                        r2 += r * r;
                        p1 += r * tube[d + i];
                        p2 += r * tube[2 * d + i];
                    }
                    if (r2 - p1 * p1 - p2 * p2 <= radius2[j]) ++count;
                }
                if (count == 0) g = 0.0;
                else if (k == 2) g *= count;
                else g *= std::pow(static_cast<double>(count), inv_expo);
            }
            p.s += g;
            p.s2 += g * g;
            ++p.count;
        }
        return p;
    };

    const auto partials = parallel_map_chunks<Partial>(nchunks, workers, fn);
    double s = 0.0, s2 = 0.0;
    for (const Partial& p : partials) {
        s += p.s;
        s2 += p.s2;
    }
    const double vol = std::pow(2.0, d);
    const double mean = s / samples;
    const double var = std::max(0.0, s2 / samples - mean * mean);
    MCEstimate out;
    out.estimate = vol * mean;
    out.stderr_est = vol * std::sqrt(var / samples);
    out.samples = samples;
    return out;
}

struct KakeyaReport {
    int k = 0, n = 0;
    double delta = 0.0;
    std::vector<int> family_sizes;
    double integral = 0.0;
    double stderr_est = 0.0;
    double constant = 0.0;  // C(delta) = integral / (delta^{2n} prod sizes^{1/(k-1)})
    int64_t samples = 0;
    uint64_t seed = 0;
};

inline KakeyaReport measure_constant(const std::vector<TubeFamily>& families, double delta, int64_t samples,
                                     uint64_t seed, int workers = 1) {
    KakeyaReport rep;
    rep.k = static_cast<int>(families.size());
    rep.n = families.empty() ? 0 : static_cast<int>(families[0].base.size());
    rep.delta = delta;
    rep.samples = samples;
    rep.seed = seed;
    double denom = std::pow(delta, 2.0 * rep.n);
    for (const TubeFamily& f : families) {
        rep.family_sizes.push_back(static_cast<int>(f.tubes.size()));
        denom *= std::pow(static_cast<double>(f.tubes.size()), 1.0 / (rep.k - 1.0));
    }
    const MCEstimate mc = kakeya_integral(families, samples, seed, workers);
    rep.integral = mc.estimate;
    rep.stderr_est = mc.stderr_est;
    rep.constant = denom > 0.0 ? mc.estimate / denom : 0.0;
    return rep;
}

struct KakeyaSweepResult {
    std::vector<KakeyaReport> rows;
    bool has_fit = false;
    double epsilon_hat = 0.0;  // slope of log C vs log(1/delta)
    double fit_residual = 0.0;
};

// Sweeps delta, measuring C(delta) for freshly sampled transversal families.
// Bases must satisfy wedge(bases) >= c_floor; sampled direction tuples are
// spot-checked against the same floor.
inline KakeyaSweepResult kakeya_sweep(int k, int n, const RVec& deltas, int tubes_per_family, double nu,
                                      double c_floor, const std::vector<CVec>& bases, int64_t samples,
                                      uint64_t seed, int workers = 1) {
    if (static_cast<int>(bases.size()) != k) throw std::invalid_argument("kakeya_sweep: need k base directions");
    for (const CVec& b : bases)
        if (static_cast<int>(b.size()) != n) throw std::invalid_argument("kakeya_sweep: base dimension mismatch");
    KakeyaSweepResult out;
    if (deltas.empty()) return out;
    if (wedge(bases) < c_floor) throw std::invalid_argument("kakeya_sweep: base directions below transversality floor");

    for (size_t di = 0; di < deltas.size(); ++di) {
        const double delta = deltas[di];
        std::vector<TubeFamily> fams;
        fams.reserve(k);
        for (int j = 0; j < k; ++j)
            fams.push_back(sample_tube_family(bases[j], nu, tubes_per_family,
                                              delta, mix64(seed + 1000003ULL * di + j)));
        // spot-check sampled tuples against the floor
        Rng tup(seed, 0x7UL + di);
        const int checks = std::min(200, tubes_per_family);
        for (int t = 0; t < checks; ++t) {
            std::vector<CVec> dirs;
            std::vector<int> idx;
            for (int j = 0; j < k; ++j) {
                idx.push_back(tup.uniform_int(0, tubes_per_family - 1));
                dirs.push_back(fams[j].tubes[idx.back()].direction);
            }
            if (wedge(dirs) < c_floor) {
                std::string msg = "kakeya_sweep: sampled direction tuple below transversality floor:";
                for (int j : idx) msg += " " + std::to_string(j);
                throw std::runtime_error(msg);
            }
        }
        out.rows.push_back(measure_constant(fams, delta, samples, mix64(seed + 7919ULL * di), workers));
    }
    if (out.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int m = static_cast<int>(out.rows.size());
        for (const KakeyaReport& r : out.rows) {
            const double x = std::log(1.0 / r.delta);
            const double y = std::log(std::max(r.constant, 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        out.epsilon_hat = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double intercept = (sy - out.epsilon_hat * sx) / m;
        double rss = 0.0;
        for (const KakeyaReport& r : out.rows) {
            const double e = std::log(std::max(r.constant, 1e-300)) -
                             (intercept + out.epsilon_hat * std::log(1.0 / r.delta));
            rss += e * e;
        }
        out.fit_residual = std::sqrt(rss / m);
        out.has_fit = true;
    }
    return out;
}

struct InductionRatioResult {
    double lhs;  // C at scale delta, direction spread nu
    double rhs;  // C at scale delta/nu after the enlargement replacement
};

// Scale comparison behind the induction on scales: the enlarged tubes
// (same anchors and directions, radius delta/nu) play the role of the
// straightened per-cube replacement at the coarser scale.
inline InductionRatioResult induction_ratio(double delta, double nu, const std::vector<TubeFamily>& families,
                                            int64_t samples, uint64_t seed, int workers = 1) {
    if (!(nu > 0.0 && delta / nu <= 1.0)) throw std::invalid_argument("induction_ratio: need delta/nu <= 1");
    bool empty = families.empty();
    for (const TubeFamily& f : families) {
        if (f.tubes.empty()) empty = true;
        for (const ComplexLineTube& t : f.tubes)
            if (std::abs(t.radius - delta) > 1e-15)
                throw std::invalid_argument("induction_ratio: family radius does not match delta");
    }
    if (empty) return {0.0, 0.0};

    const KakeyaReport lhs = measure_constant(families, delta, samples, seed, workers);
    std::vector<TubeFamily> enlarged = families;
    for (TubeFamily& f : enlarged)
        for (ComplexLineTube& t : f.tubes) t.radius = delta / nu;
    const KakeyaReport rhs = measure_constant(enlarged, delta / nu, samples, seed, workers);
    return {lhs.constant, rhs.constant};
}

}  // namespace lab
