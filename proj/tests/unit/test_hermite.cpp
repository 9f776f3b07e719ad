#include <gtest/gtest.h>

#include <cmath>

#include "nlwlab/chaos.hpp"
#include "nlwlab/hermite.hpp"
#include "nlwlab/wick.hpp"

using namespace nlw;

namespace {

// Coefficient of x^{k-2m} in H_k(x; sigma) read off the generating function e^{tx - sigma t^2/2}.
double generating_coeff(int k, int m, double sigma) {
    return factorial(k) / (factorial(m) * factorial(k - 2 * m)) * std::pow(-sigma / 2.0, m);
}

}  // namespace

TEST(Hermite, ListedValues) {
    EXPECT_DOUBLE_EQ(hermite_eval(2, 2.0, 1.0), 3.0);
    EXPECT_DOUBLE_EQ(hermite_eval(1, 5.0, 7.0), 5.0);
    EXPECT_DOUBLE_EQ(hermite_eval(3, 2.0, 4.0), -16.0);
    EXPECT_DOUBLE_EQ(hermite_eval(0, 3.7, 2.0), 1.0);
}

TEST(Hermite, NegativeVarianceRejected) {
    EXPECT_THROW(hermite_eval(2, 1.0, -0.1), DomainError);
    EXPECT_THROW(HermitePoly(3, -1.0), DomainError);
    EXPECT_THROW(hermite_eval(17, 1.0, 1.0), DomainError);
}

TEST(Hermite, ZeroVarianceIsMonomial) {
    for (int k = 0; k <= 10; ++k) EXPECT_DOUBLE_EQ(hermite_eval(k, 1.7, 0.0), std::pow(1.7, k));
}

TEST(Hermite, CoefficientsMatchGeneratingFunction) {
    for (double sigma : {0.0, 0.5, 1.0, 3.0})
        for (int k = 0; k <= 12; ++k) {
            HermitePoly h(k, sigma);
            const auto& c = h.coefficients();
            ASSERT_EQ(static_cast<int>(c.size()), k + 1);
            EXPECT_DOUBLE_EQ(c[k], 1.0);
            for (int p = 0; p <= k; ++p) {
                const double expect = (k - p) % 2 == 0 ? generating_coeff(k, (k - p) / 2, sigma) : 0.0;
                EXPECT_NEAR(c[p], expect, 1e-9 * std::max(1.0, std::abs(expect))) << "k=" << k << " p=" << p;
            }
        }
}

TEST(Hermite, PolyAgreesWithRecurrence) {
    for (int k = 0; k <= 8; ++k) {
        HermitePoly h(k, 1.3);
        for (double x = -3; x <= 3; x += 0.25) EXPECT_NEAR(h(x), hermite_eval(k, x, 1.3), 1e-9);
    }
}

TEST(Hermite, ScalingIdentity) {
    double worst = 0.0;
    for (double sigma : {0.1, 1.0, 10.0})
        for (int k = 0; k <= 8; ++k)
            for (int i = 0; i <= 80; ++i) {
                const double x = -10.0 + 0.25 * i;
                const double lhs = hermite_eval(k, x, sigma);
                const double rhs = std::pow(sigma, k / 2.0) * hermite_eval(k, x / std::sqrt(sigma), 1.0);
                const double scale = std::max({std::abs(lhs), std::pow(sigma, k / 2.0), 1e-300});
                worst = std::max(worst, std::abs(lhs - rhs) / scale);
            }
    EXPECT_LT(worst, 1e-12);
}

TEST(Hermite, AdditionIdentity) {
    auto [l1, r1] = hermite_addition_check(2, 1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(l1, 3.0);
    EXPECT_DOUBLE_EQ(r1, 3.0);
    auto [l0, r0] = hermite_addition_check(0, 0.3, -2.0, 5.0);
    EXPECT_DOUBLE_EQ(l0, 1.0);
    EXPECT_DOUBLE_EQ(r0, 1.0);
    auto [l3, r3] = hermite_addition_check(3, 0.0, 0.77, 1.0);
    EXPECT_DOUBLE_EQ(l3, hermite_eval(3, 0.77, 1.0));
    EXPECT_DOUBLE_EQ(r3, l3);
    for (int k = 0; k <= 8; ++k) {
        auto [l, r] = hermite_addition_check(k, 0.7, -1.3, 2.5);
        EXPECT_NEAR(l, r, 1e-10 * std::max(1.0, std::abs(l)));
    }
    EXPECT_THROW(hermite_addition_check(9, 0, 0, 1), DomainError);
}

TEST(Hermite, OrthogonalitySmallSample) {
    auto rep = hermite_orthogonality(4, 200000, 11);
    for (int k = 0; k <= 4; ++k)
        for (int m = 0; m <= 4; ++m) EXPECT_LT(std::abs(rep.z_score(k, m)), 5.0) << k << "," << m;
}

TEST(WickSubstitute, VanishingResidualGivesTopPower) {
    Lattice lat(2, 4);
    SpectralField z(lat);
    z.set_pair({1, 0}, {0.5, 0.2});
    z.set_pair({0, 2}, {-0.3, 0.1});
    const auto w = wick_powers(z, 0.7, 3);
    const auto out = wick_substitute(3, w, SpectralField(lat));
    EXPECT_LT(max_abs_diff(out, w.power(3)), 1e-14);
}

TEST(WickSubstitute, VanishingNoiseGivesCube) {
    Lattice lat(2, 4);
    SpectralField v(lat);
    v.set_pair({1, 1}, {0.4, -0.1});
    v.set_pair({0, 1}, {0.2, 0.0});
    std::vector<SpectralField> zp{SpectralField::constant(lat, 1.0), SpectralField(lat), SpectralField(lat),
                                  SpectralField(lat)};
    const auto out = wick_substitute(3, zp, v);
    EXPECT_LT(max_abs_diff(out, dealiased_cube(v)), 1e-14);
}

TEST(WickSubstitute, ConstantNoiseWithoutRenormalizationIsShiftedCube) {
    Lattice lat(2, 2);
    SpectralField v(lat);
    v.set_pair({1, 0}, {0.3, 0.1});
    v.set_pair({1, -1}, {-0.2, 0.05});
    const double c = 0.6;
    const auto w = wick_powers(SpectralField::constant(lat, c), 0.0, 3);
    const auto out = wick_substitute(3, w, v);
    // (c + v)^3 by exact coefficient convolution, restricted to the lattice
    SpectralField cv = v;
    cv[lat.zero_index()] += c;
    const auto cube = embed(convolve_exact(convolve_exact(cv, cv), cv), lat);
    EXPECT_LT(max_abs_diff(out, cube), 1e-13);
}

TEST(WickSubstitute, ExpansionTermByTerm) {
    // with monomial inputs z^l the substitution is the binomial expansion of (z + v)^3
    Lattice lat(1, 3);
    SpectralField z(lat), v(lat);
    z.set_pair({1, 0}, {0.5, 0.0});
    v.set_pair({2, 0}, {0.0, 0.25});
    std::vector<SpectralField> zp{SpectralField::constant(lat, 1.0), z, dealiased_product(z, z), dealiased_cube(z)};
    const auto out = wick_substitute(3, zp, v);
    EXPECT_LT(max_abs_diff(out, dealiased_cube(z + v)), 1e-14);
}

TEST(WickSubstitute, LatticeMismatch) {
    std::vector<SpectralField> zp(4, SpectralField(Lattice(2, 3)));
    EXPECT_THROW(wick_substitute(3, zp, SpectralField(Lattice(2, 4))), ShapeError);
}
