#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <string>

#include "nlwlab/duhamel.hpp"
#include "nlwlab/solver.hpp"
#include "nlwlab/trees.hpp"

using namespace nlw;

namespace {

// A preorder code is valid iff the pending-slot counter stays positive and ends at zero.
bool valid_code(const std::string& s) {
    long slots = 1;
    for (char c : s) {
        if (slots <= 0) return false;
        slots += (c == '1') ? 2 : -1;
    }
    return slots == 0;
}

std::set<std::string> brute_force_codes(int j) {
    const int len = 3 * j + 1;
    std::set<std::string> out;
    for (unsigned long bits = 0; bits < (1ul << len); ++bits) {
        if (__builtin_popcountl(bits) != j) continue;
        std::string s(len, '0');
        for (int k = 0; k < len; ++k)
            if (bits >> k & 1) s[len - 1 - k] = '1';
        if (valid_code(s)) out.insert(s);
    }
    return out;
}

double xi1_constant(double c, double t) {
    return -c * c * c * (3 * t * std::sin(t) / 8 - (std::cos(3 * t) - std::cos(t)) / 32);
}

FieldPair constant_data(const Lattice& lat, double c) {
    FieldPair d(lat);
    d.pos[lat.zero_index()] = c;
    return d;
}

FieldPair small_data(const Lattice& lat, double amp) {
    FieldPair d(lat);
    d.pos.set_pair({1, 0}, {amp, 0.2 * amp});
    d.pos.set_pair({0, 1}, {0.5 * amp, 0.0});
    d.vel.set_pair({1, 1}, {0.0, 0.4 * amp});
    return d;
}

}  // namespace

TEST(Trees, CountsMatchBruteForce) {
    const std::size_t expect[] = {1, 1, 3, 12, 55, 273, 1428};
    for (int j = 0; j <= kMaxTreeGenerations; ++j) {
        EXPECT_EQ(tree_count(j), expect[j]);
        const auto trees = enumerate_trees(j);
        ASSERT_EQ(trees.size(), expect[j]);
        std::set<std::string> codes;
        for (const auto& t : trees) {
            EXPECT_EQ(t.generations(), j);
            EXPECT_EQ(t.terminals(), static_cast<std::size_t>(2 * j + 1));
            codes.insert(t.code());
        }
        EXPECT_EQ(codes, brute_force_codes(j));
    }
    EXPECT_THROW(enumerate_trees(7), SizeError);
}

TEST(Trees, StructureAccessors) {
    const TernaryTree t("1100000");
    EXPECT_EQ(t.generations(), 2);
    EXPECT_EQ(t.children(0), (std::array<int, 3>{1, 5, 6}));
    EXPECT_EQ(t.parent(2), 1);
    EXPECT_TRUE(t.is_terminal(6));
    const auto subs = t.subtrees();
    ASSERT_EQ(subs.size(), 3u);
    EXPECT_EQ(subs[0].code(), "1000");
    EXPECT_EQ(TernaryTree::join(subs[0], subs[1], subs[2]), t);
    EXPECT_THROW(TernaryTree("10"), DomainError);
}

TEST(Trees, FirstGenerationConstantData) {
    Lattice lat(2, 2);
    for (double c : {0.3, 1.0}) {
        PicardEvaluator ev(constant_data(lat, c), {0.5, 1.0, 2.0});
        const auto x = ev.xi(1);
        for (std::size_t r = 0; r < x.times.size(); ++r)
            EXPECT_NEAR(x.values[r][lat.zero_index()].real(), xi1_constant(c, x.times[r]), 1e-8);
    }
}

TEST(Trees, LeftCombIsDuhamelOfProduct) {
    Lattice lat(2, 2);
    const double c = 0.7, t = 1.5;
    PicardEvaluator ev(constant_data(lat, c), {t});
    const auto comb = ev.evaluate_term(TernaryTree("1100000"));
    const auto ref = duhamel(
        [&](double s) { return SpectralField::constant(lat, xi1_constant(c, s) * c * c * std::cos(s) * std::cos(s)); },
        t);
    EXPECT_NEAR(comb.values[0][lat.zero_index()].real(), ref[lat.zero_index()].real(), 1e-9);
    // constant data: the three placements of the inner node agree
    for (const char* code : {"1010000", "1001000"})
        EXPECT_NEAR(ev.evaluate_term(TernaryTree(code)).values[0][lat.zero_index()].real(),
                    comb.values[0][lat.zero_index()].real(), 1e-12);
}

TEST(Trees, Multilinearity) {
    Lattice lat(2, 3);
    const auto d = small_data(lat, 0.6);
    for (int j : {1, 2, 3}) {
        const double lam = 1.7;
        const auto a = xi_sum(j, d, 0.8);
        const auto b = xi_sum(j, lam * d, 0.8);
        const double scale = std::pow(lam, 2 * j + 1);
        EXPECT_LT(fourier_lebesgue_norm(b - scale * a, 0, 1), 1e-10 * fourier_lebesgue_norm(b, 0, 1));
    }
}

TEST(Trees, FixedPointDefectOrder) {
    Lattice lat(2, 3);
    const int J = 2;
    auto defect = [&](double amp) {
        PicardEvaluator ev(small_data(lat, amp), {1.0});
        return fourier_lebesgue_norm(ev.fixed_point_defect(J).values[0], 0, 1);
    };
    const double d1 = defect(0.1), d2 = defect(0.05);
    EXPECT_NEAR(std::log2(d1 / d2), 2 * J + 3, 0.05);
}

TEST(Trees, PartialSumsApproachSolver) {
    Lattice lat(2, 3);
    const auto d = small_data(lat, 0.3);
    const double t = 1.0;
    const auto u = solve(EquationSpec::plain_cubic(), d, t, 0.01).final_state.pos;
    PicardEvaluator ev(d, {t});
    SpectralField partial = linear_flow(d, t).pos;
    double prev = fourier_lebesgue_norm(u - partial, 0, 1);
    for (int j = 1; j <= 3; ++j) {
        partial += ev.xi(j).values[0];
        const double err = fourier_lebesgue_norm(u - partial, 0, 1);
        EXPECT_LT(err, 0.2 * prev) << "j=" << j;
        prev = err;
    }
}

TEST(Trees, GenerationBound) {
    // ||Xi_j(t)||_{FL^{0,1}} <= C_j A^{2j+1} (t^2/2)^j, A = ||S(.)phi||_{FL^{0,1}} sup bound
    Lattice lat(2, 4);
    const auto d = small_data(lat, 1.0);
    const double A = fourier_lebesgue_norm(d, 0, 1);
    for (double t : {0.25, 0.5}) {
        PicardEvaluator ev(d, {t});
        for (int j = 1; j <= 4; ++j) {
            const double lhs = fourier_lebesgue_norm(ev.xi(j).values[0], 0, 1);
            const double rhs = tree_count(j) * std::pow(A, 2 * j + 1) * std::pow(t * t / 2, j);
            EXPECT_LE(lhs, rhs) << "t=" << t << " j=" << j;
        }
    }
}

TEST(Trees, RefinementReportsOrder) {
    Lattice lat(2, 2);
    PicardEvaluator ev(constant_data(lat, 0.5), {1.0});
    const auto x = ev.xi(2);
    EXPECT_GE(x.order, 16);
    EXPECT_LE(x.last_change, 1e-9);
    PicardOptions tight;
    tight.tol = 1e-30;
    tight.max_nodes = 16;
    PicardEvaluator ev2(constant_data(lat, 0.5), {1.0}, tight);
    EXPECT_THROW(ev2.xi(1), AccuracyError);
}
