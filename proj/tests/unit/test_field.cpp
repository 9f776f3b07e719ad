#include <gtest/gtest.h>

#include <cmath>

#include "nlwlab/field.hpp"
#include "nlwlab/mollifier.hpp"
#include "nlwlab/rng.hpp"
#include "nlwlab/transform.hpp"
#include "nlwlab/wick.hpp"

using namespace nlw;

namespace {

SpectralField random_field(const Lattice& lat, std::uint64_t seed, double decay = 1.0) {
    SpectralField f(lat);
    Stream rng(seed);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode n = lat.mode(i);
        if (n[1] < 0 || (n[1] == 0 && n[0] < 0)) continue;
        const double s = std::pow(lat.bracket(i), -decay);
        f.set_pair(n, {s * rng.normal(), s * rng.normal()});
    }
    return f;
}

// Brute-force O(M^{2d}) product on the lattice.
SpectralField brute_product(const SpectralField& f, const SpectralField& g) {
    const Lattice& lat = f.lattice();
    SpectralField h(lat);
    for (std::size_t i = 0; i < lat.size(); ++i)
        for (std::size_t j = 0; j < lat.size(); ++j) {
            const Mode a = lat.mode(i), b = lat.mode(j);
            const Mode c{a[0] + b[0], a[1] + b[1]};
            if (lat.contains(c)) h[lat.index(c)] += f[i] * g[j];
        }
    return h;
}

}  // namespace

TEST(Lattice, Basics) {
    Lattice lat(2, 3);
    EXPECT_EQ(lat.size(), 49u);
    EXPECT_DOUBLE_EQ(lat.bracket(lat.zero_index()), 1.0);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode n = lat.mode(i);
        EXPECT_EQ(lat.index(n), i);
        const Mode m = lat.mode(lat.mirror(i));
        EXPECT_EQ(m[0], -n[0]);
        EXPECT_EQ(m[1], -n[1]);
    }
    EXPECT_THROW(Lattice(3, 2), ShapeError);
    Lattice l1(1, 4);
    EXPECT_EQ(l1.size(), 9u);
    EXPECT_FALSE(l1.contains({0, 1}));
}

TEST(SpectralField, SobolevExamples) {
    Lattice lat(2, 4);
    EXPECT_DOUBLE_EQ(sobolev_norm(SpectralField::constant(lat, 1.0), -3.0), 1.0);
    EXPECT_DOUBLE_EQ(sobolev_norm(SpectralField::constant(lat, 1.0), 2.0), 1.0);
    SpectralField f(lat);
    f.set_pair({1, 0}, 0.5);
    EXPECT_NEAR(sobolev_norm(f, 0.0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SpectralField, FourierLebesgueExamples) {
    Lattice lat(2, 4);
    EXPECT_DOUBLE_EQ(fourier_lebesgue_norm(SpectralField::constant(lat, 1.0), 0.0, 1.0), 1.0);
    SpectralField f(lat);
    const double R = 2.5;
    f.set_pair({1, 0}, {R, 0.0});
    f.set_pair({0, 3}, {0.0, R});
    EXPECT_NEAR(fourier_lebesgue_norm(f, 0.0, 1.0), 4 * R, 1e-14);
    EXPECT_NEAR(fourier_lebesgue_norm(f, 0.0, INFINITY), R, 1e-14);
    EXPECT_NEAR(fourier_lebesgue_norm(f, 0.0, 2.0), sobolev_norm(f, 0.0), 1e-14);
    EXPECT_THROW(fourier_lebesgue_norm(f, 0.0, 0.5), DomainError);
}

TEST(SpectralField, MultiplierExamples) {
    Lattice lat(2, 5);
    const auto f = random_field(lat, 3);
    EXPECT_LT(max_abs_diff(multiplier_apply(f, [](const Mode&, std::size_t) { return 1.0; }), f), 0.0 + 1e-300);
    SpectralField e(lat);
    e.set_pair({1, 0}, 1.0);
    const auto g = bessel_potential(e, -1.0);
    EXPECT_NEAR(g.at({1, 0}).real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(g.at({-1, 0}).real(), 1.0 / std::sqrt(2.0), 1e-15);
    // ball projection matches the indicator multiplier
    const auto p = project(f, 3.0);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const bool in = lat.norm2(i) <= 9;
        EXPECT_EQ(p[i], in ? f[i] : cplx(0, 0));
    }
    EXPECT_TRUE(p.is_hermitian());
}

TEST(SpectralField, DealiasedProductExamples) {
    Lattice lat(2, 4);
    const auto g = random_field(lat, 5);
    EXPECT_LT(max_abs_diff(dealiased_product(SpectralField::constant(lat, 1.0), g), g), 1e-15);
    SpectralField c(lat);
    c.set_pair({1, 0}, 1.0);
    const auto sq = dealiased_product(c, c);
    EXPECT_NEAR(sq.at({0, 0}).real(), 2.0, 1e-14);
    EXPECT_NEAR(sq.at({2, 0}).real(), 1.0, 1e-14);
    EXPECT_NEAR(sq.at({-2, 0}).real(), 1.0, 1e-14);
    double other = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode n = lat.mode(i);
        if (n[1] == 0 && (n[0] == 0 || std::abs(n[0]) == 2)) continue;
        other = std::max(other, std::abs(sq[i]));
    }
    EXPECT_LT(other, 1e-15);
}

TEST(SpectralField, DealiasedProductMatchesBruteForce) {
    for (int d : {1, 2})
        for (int M : {1, 3, 8}) {
            Lattice lat(d, M);
            const auto f = random_field(lat, 10 + M), g = random_field(lat, 20 + M);
            const auto fast = dealiased_product(f, g);
            EXPECT_LT(max_abs_diff(fast, brute_product(f, g)), 1e-13) << "d=" << d << " M=" << M;
            EXPECT_LT(max_abs_diff(fast, dealiased_product(g, f)), 1e-15);
            EXPECT_LT(max_abs_diff(dealiased_product(2.0 * f + g, g), 2.0 * fast + dealiased_product(g, g)), 1e-13);
            EXPECT_TRUE(fast.is_hermitian());
        }
}

TEST(SpectralField, CubeMatchesExactConvolution) {
    Lattice lat(2, 6);
    const auto f = random_field(lat, 77);
    const auto exact = embed(convolve_exact(convolve_exact(f, f), f), lat);
    EXPECT_LT(max_abs_diff(dealiased_cube(f), exact), 1e-12);
}

TEST(SpectralField, Plancherel) {
    for (int d : {1, 2}) {
        Lattice lat(d, 12);
        const auto f = random_field(lat, 9, 0.5);
        const double l2 = sobolev_norm(f, 0.0);
        for (int G : {25, 32, 81}) {
            const double ms = grid_mean_square(f, G);
            EXPECT_NEAR(ms, l2 * l2, 1e-10 * l2 * l2);
        }
        auto tr = transform_for(lat, 40);
        const auto back = tr->from_grid(tr->to_grid(f));
        EXPECT_LT(max_abs_diff(back, f), 1e-14);
    }
}

TEST(SpectralField, GridSup) {
    Lattice lat(2, 4);
    SpectralField f(lat);
    f.set_pair({1, 0}, 0.5);  // cos(x): sup 1 attained on the grid
    EXPECT_NEAR(grid_sup(f), 1.0, 1e-14);
    EXPECT_NEAR(grid_sup(SpectralField::constant(lat, -2.0)), 2.0, 1e-14);
}

TEST(SpectralField, ShapeErrors) {
    SpectralField a(Lattice(2, 3)), b(Lattice(2, 4));
    EXPECT_THROW(a += b, ShapeError);
    EXPECT_THROW(dealiased_product(a, b), ShapeError);
    EXPECT_THROW(l2_distance(a, b), ShapeError);
}

TEST(SpectralField, IntegerCubeConvolutionLowerBound) {
    // (1_{a+Q_A} * 1_{b+Q_A})(xi) >= A^d / 4 on a + b + Q_A in d = 2
    for (int A : {2, 4, 8}) {
        const int M = 3 * A;
        Lattice lat(2, M);
        SpectralField fa(Lattice(2, M)), fb(Lattice(2, M));
        const Mode a{A, 0}, b{-A / 2, A};
        for (int x = -A / 2; x < A / 2; ++x)
            for (int y = -A / 2; y < A / 2; ++y) {
                fa[lat.index({a[0] + x, a[1] + y})] = 1.0;
                fb[lat.index({b[0] + x, b[1] + y})] = 1.0;
            }
        const auto conv = convolve_exact(fa, fb);
        const Lattice& lc = conv.lattice();
        double worst = INFINITY;
        for (int x = -A / 2; x < A / 2; ++x)
            for (int y = -A / 2; y < A / 2; ++y) {
                const Mode xi{a[0] + b[0] + x, a[1] + b[1] + y};
                worst = std::min(worst, conv[lc.index(xi)].real() / (A * A));
            }
        EXPECT_GE(worst, 0.25) << "A=" << A;
    }
}

TEST(Mollifier, ZeroModeAndDomain) {
    Lattice lat(2, 6);
    SpectralField f(lat);
    f[lat.zero_index()] = 3.0;
    f.set_pair({2, 1}, {1.0, -1.0});
    for (Kernel k : {Kernel::GaussianBump, Kernel::Fejer, Kernel::Tent}) {
        EXPECT_DOUBLE_EQ(rho_hat(k, 0.0, 0.0), 1.0);
        const auto g = mollify(f, k, 0.3);
        EXPECT_EQ(g[lat.zero_index()], f[lat.zero_index()]);
        EXPECT_TRUE(g.is_hermitian());
        EXPECT_THROW(mollify(f, k, 0.0), DomainError);
        EXPECT_THROW(mollify(f, k, 1.5), DomainError);
    }
    EXPECT_THROW(parse_kernel("box"), DomainError);
    EXPECT_EQ(parse_kernel("fejer"), Kernel::Fejer);
}

TEST(Mollifier, MeanValueBound) {
    // |rho(dn) - rho(d'n)| <= C min(1, |d - d'| |n|)
    for (Kernel k : {Kernel::GaussianBump, Kernel::Fejer, Kernel::Tent}) {
        const double C = std::max(1.0, rho_hat_lipschitz(k));
        double worst = 0.0;
        for (int a = -20; a <= 20; ++a)
            for (int b = -20; b <= 20; b += 3)
                for (double d : {0.05, 0.1, 0.2, 0.5, 1.0})
                    for (double e : {0.04, 0.1, 0.33, 0.9}) {
                        const Mode n{a, b};
                        const double lhs = std::abs(rho_hat(k, d, n) - rho_hat(k, e, n));
                        const double rhs = std::min(1.0, std::abs(d - e) * std::hypot(a, b));
                        worst = std::max(worst, lhs / std::max(rhs, 1e-300));
                    }
        EXPECT_LE(worst, C) << kernel_name(k);
    }
}

TEST(Mollifier, FejerTableDecays) {
    const int N = 16;
    double prev = 1.0;
    for (int n = 0; n <= N; ++n) {
        const double v = rho_hat(Kernel::Fejer, 1.0 / N, {n, 0});
        EXPECT_NEAR(v, 1.0 - static_cast<double>(n) / N, 1e-15);
        EXPECT_LE(v, prev);
        prev = v;
    }
    EXPECT_EQ(rho_hat(Kernel::Fejer, 1.0 / N, {N + 3, 0}), 0.0);
}
