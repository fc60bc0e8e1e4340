#include <catch2/catch.hpp>

#include <cmath>

#include "nildist/nestdist.hpp"
#include "test_helpers.hpp"

using namespace nildist;
using testutil::randomMatrix;
using testutil::strictUpperRandom;

namespace {
const double kSqrt2Inv = std::sqrt(0.5);

Flag rotatedFlag2() {
    CMatrix b{{kSqrt2Inv, kSqrt2Inv}, {kSqrt2Inv, -kSqrt2Inv}};
    return {b};
}
}  // namespace

TEST_CASE("cornerNorms reads off lower-left submatrices") {
    const CMatrix a = CMatrix::diagonal({1.0, 0.0});
    const auto standard = cornerNorms(a, Flag::standard(2));
    REQUIRE(standard.size() == 2);
    CHECK(standard[0] == Approx(1.0).margin(1e-14));
    CHECK(standard[1] == Approx(0.0).margin(1e-14));

    Rng rng(5);
    const CMatrix nilp = strictUpperRandom(rng, 5);
    for (double c : cornerNorms(nilp, Flag::standard(5))) CHECK(c == 0.0);

    const auto rotated = cornerNorms(a, rotatedFlag2());
    CHECK(rotated[0] == Approx(kSqrt2Inv).margin(1e-12));
    CHECK(rotated[1] == Approx(kSqrt2Inv).margin(1e-12));
}

TEST_CASE("flagObjective values and equivariance") {
    const CMatrix a = CMatrix::diagonal({1.0, 0.0});
    CHECK(flagObjective(a, Flag::standard(2)) == Approx(1.0).margin(1e-14));
    CHECK(flagObjective(a, rotatedFlag2()) == Approx(kSqrt2Inv).margin(1e-12));

    Rng rng(17);
    const CMatrix nilp = strictUpperRandom(rng, 4);
    CHECK(flagObjective(nilp, Flag::standard(4)) == 0.0);

    SECTION("unitary equivariance and scaling") {
        for (int rep = 0; rep < 6; ++rep) {
            const std::size_t n = 3 + rep % 3;
            const CMatrix m = randomMatrix(rng, n);
            const CMatrix u = haarUnitary(n, 600 + rep);
            const Flag f{haarUnitary(n, 700 + rep)};
            const Flag uf{u * f.basis};
            CHECK(flagObjective(u * m * u.adjoint(), uf) ==
                  Approx(flagObjective(m, f)).margin(1e-9));
            CHECK(flagObjective(m * Complex(-2.5, 1.0), f) ==
                  Approx(std::abs(Complex(-2.5, 1.0)) * flagObjective(m, f)).margin(1e-10));
        }
    }
}

TEST_CASE("partialFlagObjective") {
    Rng rng(23);
    SECTION("complete ranks reduce to flagObjective") {
        const CMatrix a = randomMatrix(rng, 4);
        const Flag f{haarUnitary(4, 11)};
        CHECK(partialFlagObjective(a, PartialFlag::fromFlag(f)) ==
              Approx(flagObjective(a, f)).margin(1e-12));
    }
    SECTION("length-1 chain gives the norm") {
        const CMatrix a = randomMatrix(rng, 5);
        PartialFlag p{haarUnitary(5, 12), {0, 5}};
        CHECK(partialFlagObjective(a, p) == Approx(operatorNorm(a)).margin(1e-11));
    }
    SECTION("truncated identity corners") {
        PartialFlag p{CMatrix::identity(3), {0, 2, 3}};
        CHECK(partialFlagObjective(CMatrix::identity(3), p) == Approx(1.0).margin(1e-14));
    }
    SECTION("invalid ranks rejected") {
        PartialFlag bad{CMatrix::identity(3), {0, 2, 1, 3}};
        CHECK_THROWS_AS(partialFlagObjective(CMatrix::identity(3), bad), InputError);
        PartialFlag bad2{CMatrix::identity(3), {1, 3}};
        CHECK_THROWS_AS(partialFlagObjective(CMatrix::identity(3), bad2), InputError);
    }
}

TEST_CASE("parrottMin canonical examples") {
    SECTION("all-ones blocks") {
        const CMatrix one{{1.0}};
        const ParrottResult pr = parrottMin(one, one, one);
        CHECK(pr.gamma == Approx(std::sqrt(2.0)).margin(1e-12));
        CHECK(std::abs(pr.x(0, 0) - Complex(-1.0)) < 1e-9);
        const CMatrix full{{1.0, pr.x(0, 0)}, {1.0, 1.0}};
        CHECK(operatorNorm(full) <= pr.gamma + 1e-9 * (1.0 + pr.gamma));
    }
    SECTION("zero coupling block") {
        Rng rng(3);
        const CMatrix a11 = randomMatrix(rng, 2);
        const CMatrix a22 = randomMatrix(rng, 2);
        const ParrottResult pr = parrottMin(a11, CMatrix(2, 2), a22);
        CHECK(pr.gamma == Approx(std::max(operatorNorm(a11), operatorNorm(a22))).margin(1e-12));
        CHECK(pr.x.maxAbs() < 1e-12);
    }
    SECTION("shape mismatch") {
        CHECK_THROWS_AS(parrottMin(CMatrix(1, 2), CMatrix(2, 3), CMatrix(2, 1)), InputError);
    }
}

TEST_CASE("parrottMin achieves the two-block level on random input") {
    Rng rng(77);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t p = 1 + rep % 3, q = 1 + (rep / 3) % 3;
        const std::size_t r = 1 + (rep / 9) % 3, s = 1 + rep % 2;
        CMatrix a11 = rng.ginibre(p, q), a21 = rng.ginibre(r, q), a22 = rng.ginibre(r, s);
        const ParrottResult pr = parrottMin(a11, a21, a22);
        CMatrix full(p + r, q + s);
        full.setBlock(0, 0, a11);
        full.setBlock(0, q, pr.x);
        full.setBlock(p, 0, a21);
        full.setBlock(p, q, a22);
        CHECK(operatorNorm(full) <= pr.gamma + 1e-9 * (1.0 + pr.gamma));
    }
}

TEST_CASE("parrottMin is optimal against a dense grid (1x1 blocks)") {
    Rng rng(99);
    for (int rep = 0; rep < 4; ++rep) {
        const CMatrix a11 = rng.ginibre(1, 1), a21 = rng.ginibre(1, 1), a22 = rng.ginibre(1, 1);
        const ParrottResult pr = parrottMin(a11, a21, a22);
        double best = 1e300;
        const double lim = std::abs(a11(0, 0)) + std::abs(a22(0, 0)) + 1.0;
        for (int re = -24; re <= 24; ++re) {
            for (int im = -24; im <= 24; ++im) {
                const Complex x(lim * re / 24.0, lim * im / 24.0);
                const CMatrix full{{a11(0, 0), x}, {a21(0, 0), a22(0, 0)}};
                best = std::min(best, operatorNorm(full));
            }
        }
        CHECK(best >= pr.gamma - 1e-6);
    }
}

TEST_CASE("nearestFlagNilpotent basic cases") {
    Rng rng(31);
    SECTION("strictly upper input is its own certificate") {
        const CMatrix a = strictUpperRandom(rng, 4);
        const CertifiedUpperBound ub = nearestFlagNilpotent(a, Flag::standard(4));
        CHECK(ub.value == 0.0);
        CHECK(operatorNorm(a - ub.certificate) < 1e-12);
    }
    SECTION("diag(1,0) in the standard flag") {
        const CMatrix a = CMatrix::diagonal({1.0, 0.0});
        const CertifiedUpperBound ub = nearestFlagNilpotent(a, Flag::standard(2));
        CHECK(ub.value == Approx(1.0).margin(1e-12));
        CHECK(ub.certificate.maxAbs() < 1e-9);
        CHECK(ub.residual < 1e-10);
    }
}

TEST_CASE("nearestFlagNilpotent certifies random matrices against random flags") {
    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + rep % 5;
        const CMatrix a = randomMatrix(rng, n);
        const Flag f{haarUnitary(n, 8000 + rep)};
        const CertifiedUpperBound ub = nearestFlagNilpotent(a, f);
        CHECK(ub.value == Approx(flagObjective(a, f)).margin(1e-12));
        CHECK(operatorNorm(a - ub.certificate) <= ub.value + 1e-8 * (1.0 + operatorNorm(a)));
        CHECK(ub.nilpotencyDefect < 1e-12);
        CHECK(isNilpotent(ub.certificate, 1e-8));
    }
}

TEST_CASE("per-flag certificate beats any strictly upper grid point (n = 2, 3)") {
    Rng rng(53);
    SECTION("n = 2") {
        const CMatrix a = randomMatrix(rng, 2);
        const Flag f = Flag::standard(2);
        const double value = nearestFlagNilpotent(a, f).value;
        double best = 1e300;
        for (int re = -20; re <= 20; ++re)
            for (int im = -20; im <= 20; ++im) {
                CMatrix nil(2, 2);
                nil(0, 1) = Complex(re / 8.0, im / 8.0);
                best = std::min(best, operatorNorm(a - nil));
            }
        CHECK(best >= value - 1e-3);
    }
    SECTION("n = 3, coarse grid") {
        const CMatrix a = randomMatrix(rng, 3);
        const Flag f = Flag::standard(3);
        const double value = nearestFlagNilpotent(a, f).value;
        double best = 1e300;
        const int g = 6;
        for (int a01 = -g; a01 <= g; ++a01)
            for (int b01 = -g; b01 <= g; ++b01)
                for (int a02 = -g; a02 <= g; ++a02)
                    for (int b02 = -g; b02 <= g; ++b02)
                        for (int a12 = -g; a12 <= g; ++a12)
                            for (int b12 = -g; b12 <= g; ++b12) {
                                CMatrix nil(3, 3);
                                nil(0, 1) = Complex(a01 / 4.0, b01 / 4.0);
                                nil(0, 2) = Complex(a02 / 4.0, b02 / 4.0);
                                nil(1, 2) = Complex(a12 / 4.0, b12 / 4.0);
                                const double d = operatorNorm(a - nil);
                                if (d < best) best = d;
                            }
        CHECK(best >= value - 1e-3);
    }
}

TEST_CASE("nearestPartialFlagNilpotent produces order-n certificates") {
    Rng rng(67);
    const std::size_t d = 5;
    const CMatrix a = randomMatrix(rng, d);
    PartialFlag p{haarUnitary(d, 444), {0, 2, 3, 5}};
    const CertifiedUpperBound ub = nearestPartialFlagNilpotent(a, p);
    CHECK(ub.value == Approx(partialFlagObjective(a, p)).margin(1e-12));
    CHECK(operatorNorm(a - ub.certificate) <= ub.value + 1e-8 * (1.0 + operatorNorm(a)));
    // Chain length 3: N^3 must vanish.
    const CMatrix n3 = ub.certificate * ub.certificate * ub.certificate;
    CHECK(operatorNorm(n3) < 1e-12);
}

TEST_CASE("schurUpperBound") {
    Rng rng(71);
    SECTION("strictly upper input: distance zero, certificate is the input") {
        const CMatrix a = strictUpperRandom(rng, 5);
        const CertifiedUpperBound ub = schurUpperBound(a);
        CHECK(ub.value < 1e-12);
        CHECK(operatorNorm(a - ub.certificate) < 1e-10);
    }
    SECTION("identity: distance one, zero certificate") {
        const CertifiedUpperBound ub = schurUpperBound(CMatrix::identity(4));
        CHECK(ub.value == Approx(1.0).margin(1e-10));
        CHECK(ub.certificate.maxAbs() < 1e-10);
    }
    SECTION("normal matrices with unimodular spectrum") {
        for (int rep = 0; rep < 4; ++rep) {
            const std::size_t n = 4 + rep;
            Rng prng(200 + rep);
            std::vector<Complex> eigs;
            for (std::size_t i = 0; i < n; ++i) {
                const double th = 2.0 * 3.14159265358979323846 * prng.uniform();
                eigs.emplace_back(std::cos(th), std::sin(th));
            }
            const CMatrix u = haarUnitary(n, 300 + rep);
            const CMatrix a = u * CMatrix::diagonal(eigs) * u.adjoint();
            const CertifiedUpperBound ub = schurUpperBound(a);
            CHECK(ub.value == Approx(1.0).margin(1e-9));
            CHECK(std::abs(operatorNorm(a - ub.certificate) - spectralRadius(a)) < 1e-9);
        }
    }
}
