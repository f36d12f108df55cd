#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lab/kakeya.hpp"

using namespace lab;

namespace {

CVec e1_line() { return CVec{cplx(1, 0), cplx(0, 0)}; }
CVec e2_line() { return CVec{cplx(0, 0), cplx(1, 0)}; }

TubeFamily single_tube_family(const CVec& dir, double delta) {
    TubeFamily f;
    f.base = dir;
    f.nu = 0.0;
    f.tubes.push_back(ComplexLineTube::make(dir, RVec(2 * dir.size(), 0.0), delta));
    return f;
}

// membership count over [-1,1]^{2n} on a slightly offset grid (the offset
// breaks alignment between cell centers and the tube boundary circles)
double grid_oracle(const std::vector<TubeFamily>& fams, int pts_per_axis) {
    const int d = static_cast<int>(2 * fams[0].base.size());
    int64_t total = 1;
    for (int a = 0; a < d; ++a) total *= pts_per_axis;
    const double h = 2.0 / pts_per_axis;
    double sum = 0.0;
    for (int64_t flat = 0; flat < total; ++flat) {
        int64_t rem = flat;
        RVec x(d);
        for (int a = 0; a < d; ++a) {
            x[a] = -1.0 + (rem % pts_per_axis + 0.3183098861837907 + 0.1 * a) * h;
            rem /= pts_per_axis;
        }
        double g = 1.0;
        for (const TubeFamily& f : fams) {
            int count = 0;
            for (const ComplexLineTube& t : f.tubes)
                if (tube_contains(t, x)) ++count;
            g *= count;  // k = 2 below
            if (count == 0) break;
        }
        sum += g;
    }
    return sum * std::pow(h, d);
}

}  // namespace

TEST_CASE("tube membership geometry") {
    const ComplexLineTube t = ComplexLineTube::make(e1_line(), RVec{0.1, 0.2, 0.0, 0.0}, 0.25);
    CHECK(tube_contains(t, RVec{0.1, 0.2, 0.0, 0.0}));  // the anchor
    // half a radius off the plane: inside; two radii: outside
    CHECK(tube_contains(t, RVec{0.1, 0.2, 0.125, 0.0}));
    CHECK_FALSE(tube_contains(t, RVec{0.1, 0.2, 0.5, 0.0}));
    // unbounded along the plane
    CHECK(tube_contains(t, RVec{10.1, 0.2, 0.0, 0.0}));
    CHECK(tube_contains(t, RVec{0.1, 10.2, 0.1, 0.2}));
    CHECK_THROWS_AS(ComplexLineTube::make(CVec{cplx(0, 0), cplx(0, 0)}, RVec(4, 0.0), 0.1),
                    std::invalid_argument);
}

TEST_CASE("tube family sampling") {
    SUBCASE("nu = 0 keeps the base direction") {
        const TubeFamily f = sample_tube_family(e1_line(), 0.0, 20, 0.1, 5);
        for (const ComplexLineTube& t : f.tubes)
            for (size_t i = 0; i < t.direction.size(); ++i)
                CHECK(std::abs(t.direction[i] - f.base[i]) < 1e-15);
    }
    SUBCASE("reproducible for a fixed seed") {
        const TubeFamily a = sample_tube_family(e1_line(), 0.2, 50, 0.1, 99);
        const TubeFamily b = sample_tube_family(e1_line(), 0.2, 50, 0.1, 99);
        for (int i = 0; i < 50; ++i) {
            CHECK(a.tubes[i].anchor == b.tubes[i].anchor);
            for (size_t j = 0; j < a.tubes[i].direction.size(); ++j)
                CHECK(a.tubes[i].direction[j] == b.tubes[i].direction[j]);
        }
    }
    SUBCASE("max principal angle stays below nu") {
        const double nu = 0.3;
        const TubeFamily f = sample_tube_family(e1_line(), nu, 1000, 0.1, 7);
        CHECK(max_principal_angle_to_base(f) <= nu + 1e-9);
        const TubeFamily g = sample_tube_family(e1_line(), 0.05, 1000, 0.1, 8);
        CHECK(max_principal_angle_to_base(g) <= 0.05 + 1e-9);
    }
}

TEST_CASE("kakeya integral: degenerate and analytic cases") {
    SUBCASE("an empty family kills the product") {
        TubeFamily empty;
        empty.base = e1_line();
        const std::vector<TubeFamily> fams = {single_tube_family(e1_line(), 0.125), empty};
        const MCEstimate mc = kakeya_integral(fams, 20000, 3);
        CHECK(mc.estimate == 0.0);
    }
    SUBCASE("coincident single tubes reproduce the cylinder volume") {
        const double delta = 0.125;
        const std::vector<TubeFamily> fams = {single_tube_family(e1_line(), delta),
                                              single_tube_family(e1_line(), delta)};
        const MCEstimate mc = kakeya_integral(fams, 400000, 11);
        const double expected = 4.0 * 3.14159265358979323846 * delta * delta;
        CHECK(std::abs(mc.estimate - expected) <= 3.0 * mc.stderr_est);
    }
    SUBCASE("orthogonal single tubes against the fine-grid oracle") {
        const double delta = 0.125;
        const std::vector<TubeFamily> fams = {single_tube_family(e1_line(), delta),
                                              single_tube_family(e2_line(), delta)};
        const MCEstimate mc = kakeya_integral(fams, 2000000, 12);
        const double exact = std::pow(3.14159265358979323846 * delta * delta, 2);
        const double grid = grid_oracle(fams, 96);
        CHECK(std::abs(mc.estimate - exact) <= 3.0 * mc.stderr_est);
        CHECK(std::abs(grid - exact) <= 0.05 * exact);  // grid quantization level
        CHECK(std::abs(mc.estimate - grid) <= 3.0 * mc.stderr_est + 0.05 * exact);
    }
    SUBCASE("deterministic across worker counts") {
        const std::vector<TubeFamily> fams = {sample_tube_family(e1_line(), 0.05, 10, 0.125, 21),
                                              sample_tube_family(e2_line(), 0.05, 10, 0.125, 22)};
        const MCEstimate a = kakeya_integral(fams, 100000, 5, 1);
        const MCEstimate b = kakeya_integral(fams, 100000, 5, 2);
        CHECK(a.estimate == b.estimate);
        CHECK(a.stderr_est == b.stderr_est);
    }
    SUBCASE("monotone under adding a tube") {
        std::vector<TubeFamily> fams = {sample_tube_family(e1_line(), 0.05, 12, 0.125, 31),
                                        sample_tube_family(e2_line(), 0.05, 12, 0.125, 32)};
        const MCEstimate before = kakeya_integral(fams, 400000, 6);
        fams[0].tubes.push_back(ComplexLineTube::make(e1_line(), RVec{0.3, -0.2, 0.1, 0.0}, 0.125));
        const MCEstimate after = kakeya_integral(fams, 400000, 6);
        CHECK(after.estimate >= before.estimate - 3.0 * (before.stderr_est + after.stderr_est));
    }
    SUBCASE("invariant under a cube-preserving unitary rotation") {
        // (z1, z2) -> (i z2, z1) realifies to a signed permutation of R^4,
        // so the sampling box is preserved exactly.
        auto rotate_vec = [](const CVec& v) { return CVec{cplx(0, 1) * v[1], v[0]}; };
        auto rotate_real = [&](const RVec& x) {
            const CVec z = rotate_vec(CVec{cplx(x[0], x[1]), cplx(x[2], x[3])});
            return realify(z);
        };
        std::vector<TubeFamily> fams = {sample_tube_family(e1_line(), 0.1, 15, 0.125, 41),
                                        sample_tube_family(e2_line(), 0.1, 15, 0.125, 42)};
        std::vector<TubeFamily> rotated = fams;
        for (TubeFamily& f : rotated) {
            f.base = rotate_vec(f.base);
            for (ComplexLineTube& t : f.tubes)
                t = ComplexLineTube::make(rotate_vec(t.direction), rotate_real(t.anchor), t.radius);
        }
        const MCEstimate a = kakeya_integral(fams, 600000, 9);
        const MCEstimate b = kakeya_integral(rotated, 600000, 10);
        CHECK(std::abs(a.estimate - b.estimate) <= 3.0 * (a.stderr_est + b.stderr_est));
    }
}

TEST_CASE("kakeya report normalization is recomputable") {
    const std::vector<TubeFamily> fams = {sample_tube_family(e1_line(), 0.05, 10, 0.25, 51),
                                          sample_tube_family(e2_line(), 0.05, 10, 0.25, 52)};
    const KakeyaReport rep = measure_constant(fams, 0.25, 50000, 53);
    double denom = std::pow(0.25, 4);
    for (int s : rep.family_sizes) denom *= static_cast<double>(s);
    CHECK(rep.constant == doctest::Approx(rep.integral / denom).epsilon(1e-15));
    CHECK(rep.k == 2);
    CHECK(rep.n == 2);
}

TEST_CASE("kakeya sweep") {
    const std::vector<CVec> bases = {e1_line(), e2_line()};
    SUBCASE("empty delta list: empty table, no fit") {
        const KakeyaSweepResult res = kakeya_sweep(2, 2, {}, 10, 0.05, 0.5, bases, 50000, 1);
        CHECK(res.rows.empty());
        CHECK_FALSE(res.has_fit);
    }
    SUBCASE("small sweep produces a finite fit") {
        const KakeyaSweepResult res =
            kakeya_sweep(2, 2, {0.25, 0.125}, 15, 0.05, 0.5, bases, 200000, 17, 2);
        CHECK(res.rows.size() == 2);
        CHECK(res.has_fit);
        CHECK(std::isfinite(res.epsilon_hat));
        for (const KakeyaReport& r : res.rows) CHECK(r.constant > 0.0);
    }
    SUBCASE("coincident bases violate the floor") {
        CHECK_THROWS_AS(kakeya_sweep(2, 2, {0.25}, 5, 0.0, 0.5, {e1_line(), e1_line()}, 50000, 1),
                        std::invalid_argument);
    }
    SUBCASE("nu = 0 axis-parallel families keep C(delta) within a factor 4") {
        const KakeyaSweepResult res =
            kakeya_sweep(2, 2, {0.25, 0.125, 0.0625}, 15, 0.0, 0.5, bases, 1500000, 19, 2);
        double lo = 1e300, hi = 0.0;
        for (const KakeyaReport& r : res.rows) {
            lo = std::min(lo, r.constant);
            hi = std::max(hi, r.constant);
        }
        CHECK(hi <= 4.0 * lo);
    }
}

TEST_CASE("induction ratio") {
    SUBCASE("nu = 1 is the identity replacement") {
        const std::vector<TubeFamily> fams = {sample_tube_family(e1_line(), 0.1, 10, 0.25, 61),
                                              sample_tube_family(e2_line(), 0.1, 10, 0.25, 62)};
        const auto [lhs, rhs] = induction_ratio(0.25, 1.0, fams, 50000, 63);
        CHECK(lhs == rhs);
    }
    SUBCASE("zero tubes give (0, 0)") {
        TubeFamily empty;
        empty.base = e1_line();
        const auto [lhs, rhs] = induction_ratio(0.1, 0.5, {empty, empty}, 50000, 64);
        CHECK(lhs == 0.0);
        CHECK(rhs == 0.0);
    }
    SUBCASE("coarse-scale replacement controls the fine scale") {
        const double delta = 1.0 / 16, nu = 0.25;
        const std::vector<TubeFamily> fams = {sample_tube_family(e1_line(), nu, 25, delta, 65),
                                              sample_tube_family(e2_line(), nu, 25, delta, 66)};
        const auto [lhs, rhs] = induction_ratio(delta, nu, fams, 2000000, 67, 2);
        CHECK(rhs > 0.0);
        CHECK(lhs <= 8.0 * rhs);
    }
    SUBCASE("delta/nu above 1 is refused") {
        const std::vector<TubeFamily> fams = {single_tube_family(e1_line(), 0.5),
                                              single_tube_family(e2_line(), 0.5)};
        CHECK_THROWS_AS(induction_ratio(0.5, 0.25, fams, 50000, 68), std::invalid_argument);
    }
}
