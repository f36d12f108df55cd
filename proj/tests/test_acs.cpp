#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lab/acs.hpp"
#include "lab/rng.hpp"

using namespace lab;

TEST_CASE("is_acs: standard structure, identity, conjugation invariance") {
    CHECK(is_acs(standard_j0(1)));
    CHECK(is_acs(standard_j0(4)));
    CHECK_FALSE(is_acs(RMat::identity(4)));
    std::string why;
    CHECK_FALSE(is_acs(RMat::identity(3), &why));
    CHECK(why == "odd size");

    Rng rng(71);
    for (int t = 0; t < 100; ++t) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 4);
        const RMat q = random_orthogonal(2 * m, rng);
        CHECK(is_acs(q.transpose() * standard_j0(m) * q));
        CHECK(is_acs(q.transpose() * RMat::identity(2 * m) * q) == is_acs(RMat::identity(2 * m)));
    }
}

TEST_CASE("random structures") {
    SUBCASE("reproducible") {
        const RMat a = random_acs(3, 42);
        const RMat b = random_acs(3, 42);
        CHECK((a - b).frobenius() == 0.0);
    }
    SUBCASE("m = 1 is plus or minus the standard block") {
        for (uint64_t s = 1; s <= 20; ++s) {
            const RMat j = random_acs(1, s);
            const RMat p = standard_j0(1);
            const double d1 = (j - p).frobenius();
            const double d2 = (j + p).frobenius();
            CHECK(std::min(d1, d2) < 1e-12);
        }
    }
    SUBCASE("all draws pass is_acs") {
        for (uint64_t s = 100; s < 200; ++s) CHECK(is_acs(random_acs(1 + s % 6, s)));
    }
}

TEST_CASE("eigenvalue structure of accepted structures") {
    // eigenvalues are exactly {+i, -i} with equal multiplicities: J^2 = -I
    // pins the spectrum to {+-i}, the trace balances the multiplicities, and
    // the +i eigenspace has complex dimension m.
    Rng rng(72);
    for (int t = 0; t < 20; ++t) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 6);
        const RMat j = random_acs(m, 1000 + t);
        double tr = 0.0;
        for (int i = 0; i < 2 * m; ++i) tr += j(i, i);
        CHECK(std::abs(tr) <= 1e-9);
        CHECK((j * j + RMat::identity(2 * m)).frobenius() <= 1e-9);
        CMat shifted(2 * m, 2 * m);
        for (int r = 0; r < 2 * m; ++r)
            for (int c = 0; c < 2 * m; ++c) shifted(r, c) = cplx(j(r, c), r == c ? -1.0 : 0.0);
        CHECK(numerical_rank(shifted) == m);  // rank(J - iI) = 2m - m
    }
}

TEST_CASE("reduction to the standard structure") {
    SUBCASE("J0 reduces to itself") {
        const ReductionResult r = reduce_to_standard(standard_j0(3));
        CHECK(r.residual <= 1e-12);
        CHECK(std::abs(std::abs(det_lu(r.L))) > 1e-10);
    }
    SUBCASE("random structures up to size 12") {
        for (int m = 1; m <= 6; ++m) {
            for (uint64_t s = 0; s < 20; ++s) {
                const RMat j = random_acs(m, 31 * m + s);
                const ReductionResult r = reduce_to_standard(j);
                CHECK(r.residual <= 1e-9);
                // verify the conjugation property directly
                const RMat back = lu_solve(r.L, j * r.L);
                CHECK((back - standard_j0(m)).frobenius() <= 1e-9);
            }
        }
    }
    SUBCASE("conjugated structures reduce equally well") {
        Rng rng(73);
        const RMat j = random_acs(3, 7);
        const RMat q = random_orthogonal(6, rng);
        const ReductionResult r1 = reduce_to_standard(j);
        const ReductionResult r2 = reduce_to_standard(q.transpose() * j * q);
        CHECK(r1.residual <= 1e-9);
        CHECK(r2.residual <= 1e-9);
    }
    SUBCASE("non-structures are refused") {
        CHECK_THROWS_AS(reduce_to_standard(RMat::identity(4)), std::invalid_argument);
    }
}

TEST_CASE("graph condition residual") {
    SUBCASE("holomorphic surfaces satisfy it at J0") {
        const HolomorphicPolynomial phi = sum_of_squares(2);
        std::vector<CVec> samples;
        Rng rng(74);
        for (int i = 0; i < 10; ++i)
            samples.push_back(CVec{cplx(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)),
                                   cplx(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))});
        CHECK(acs_graph_residual(phi, standard_j0(2), samples) <= 1e-6);
    }
    SUBCASE("pullback by L^t satisfies the conjugated structure") {
        // if grad phi2 = J0 grad phi1, then psi(x) = phi(L^t x) satisfies
        // grad psi2 = (L J0 L^{-1}) grad psi1
        const HolomorphicPolynomial phi = sum_of_squares(2);
        const RMat j = random_acs(2, 77);
        const ReductionResult red = reduce_to_standard(j);
        const RMat lt = red.L.transpose();
        auto psi = [&](const RVec& x) {
            RVec y(4, 0.0);
            for (int i = 0; i < 4; ++i)
                for (int l = 0; l < 4; ++l) y[i] += lt(i, l) * x[l];
            return surface_real_values(phi, y);
        };
        Rng rng(75);
        std::vector<RVec> samples;
        for (int i = 0; i < 10; ++i) {
            RVec x(4);
            for (double& v : x) v = rng.uniform(-0.3, 0.3);
            samples.push_back(x);
        }
        CHECK(acs_graph_residual(psi, j, samples) <= 1e-6);
    }
    SUBCASE("a graph with phi2 = 0 and varying phi1 fails") {
        auto f = [](const RVec& x) { return std::array<double, 2>{x[0] * x[0] + x[1], 0.0}; };
        std::vector<RVec> samples = {{0.5, 0.25}};
        const double res = acs_graph_residual(f, standard_j0(1), samples);
        CHECK(res > 0.9);  // |grad phi1| at the sample
    }
}
