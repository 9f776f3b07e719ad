#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "nlwlab/duhamel.hpp"
#include "nlwlab/gff.hpp"
#include "nlwlab/lwp.hpp"
#include "nlwlab/solver.hpp"

using namespace nlw;

namespace {

// Classical RK4 for u'' = f(u), used as an independent ODE oracle.
template <class F>
double rk4_scalar(double u0, double v0, double t_end, int steps, F f) {
    double u = u0, v = v0;
    const double h = t_end / steps;
    for (int k = 0; k < steps; ++k) {
        const double k1u = v, k1v = f(u);
        const double k2u = v + 0.5 * h * k1v, k2v = f(u + 0.5 * h * k1u);
        const double k3u = v + 0.5 * h * k2v, k3v = f(u + 0.5 * h * k2u);
        const double k4u = v + h * k3v, k4v = f(u + h * k3u);
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return u;
}

FieldPair smooth_data(const Lattice& lat, double amp = 0.5) {
    FieldPair d(lat);
    d.pos.set_pair({1, 0}, {amp, 0.1});
    d.pos.set_pair({0, 1}, {0.3 * amp, -0.2 * amp});
    d.pos.set_pair({1, -1}, {0.1 * amp, 0.0});
    d.vel.set_pair({2, 1}, {0.0, 0.2 * amp});
    return d;
}

}  // namespace

TEST(Duhamel, ZeroAndConstantSource) {
    Lattice lat(2, 3);
    const auto zero = duhamel([&](double) { return SpectralField(lat); }, 1.0);
    EXPECT_EQ(fourier_lebesgue_norm(zero, 0, 1), 0.0);
    for (double t : {0.1, 1.0, 3.0}) {
        const auto r = duhamel([&](double) { return SpectralField::constant(lat, 1.0); }, t);
        EXPECT_NEAR(r[lat.zero_index()].real(), -(1 - std::cos(t)), 1e-10);
    }
}

TEST(Duhamel, AbsoluteKernelBound) {
    for (double w : {1.0, 1.5, 7.3, 100.0}) {
        for (double t : {0.01, 0.4, 1.0}) {
            const double closed = duhamel_abs_kernel_integral(w, t);
            EXPECT_NEAR(closed, duhamel_abs_kernel_quadrature(w, t), 1e-12);
            EXPECT_LE(closed, t * t / 2 + 1e-15);
        }
    }
}

TEST(Solver, ZeroDataStaysZero) {
    Lattice lat(2, 4);
    const auto tr = solve(EquationSpec::plain_cubic(), FieldPair(lat), 1.0, 0.1);
    EXPECT_EQ(fourier_lebesgue_norm(tr.final_state, 0, 1), 0.0);
}

TEST(Solver, ConstantDataMatchesOde) {
    Lattice lat(2, 2);
    FieldPair d(lat);
    d.pos[lat.zero_index()] = 0.5;
    ObserveSpec obs;
    const auto tr = solve(EquationSpec::plain_cubic(), d, 1.0, 0.0, obs);
    const double ref = rk4_scalar(0.5, 0.0, 1.0, 20000, [](double u) { return -u - u * u * u; });
    EXPECT_NEAR(tr.final_state.pos[lat.zero_index()].real(), ref, 1e-8);
    EXPECT_DOUBLE_EQ(tr.energy.front(), 0.5 * 0.25 + 0.25 * 0.0625);
}

TEST(Solver, TruncatedWickZeroModeMatchesOde) {
    Lattice lat(2, 2);
    FieldPair d(lat);
    d.pos[lat.zero_index()] = 0.8;
    const auto spec = EquationSpec::truncated_wick(0, 2);
    EXPECT_DOUBLE_EQ(spec.sigma, 1.0);
    const auto tr = solve(spec, d, 1.0, 0.01);
    const double ref = rk4_scalar(0.8, 0.0, 1.0, 20000, [](double u) { return -u - (u * u * u - 3 * u); });
    EXPECT_NEAR(tr.final_state.pos[lat.zero_index()].real(), ref, 1e-8);
}

TEST(Solver, EnergyConservation) {
    Lattice lat(2, 8);
    const auto d = smooth_data(lat);
    ObserveSpec obs;
    const auto tr = solve(EquationSpec::plain_cubic(), d, 1.0, 0.0, obs);
    double drift = 0.0;
    for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()) / tr.energy.front());
    EXPECT_LT(drift, 1e-6);
}

TEST(Solver, LinearLimitIsExact) {
    Lattice lat(2, 6);
    const auto d = sample_gff(lat, 4);
    const auto tr = solve(EquationSpec::linear(), d, 1.3, 0.1);
    const auto ref = linear_flow(d, 1.3);
    EXPECT_LT(max_abs_diff(tr.final_state.pos, ref.pos), 1e-12);
    EXPECT_LT(max_abs_diff(tr.final_state.vel, ref.vel), 1e-12);
}

TEST(Solver, TimeReversal) {
    Lattice lat(2, 6);
    auto d = smooth_data(lat);
    d.vel = SpectralField(lat);
    const auto fwd = solve(EquationSpec::plain_cubic(), d, 0.7, 0.02);
    const auto bwd = solve(EquationSpec::plain_cubic(), d, -0.7, 0.02);
    EXPECT_LT(max_abs_diff(fwd.final_state.pos, bwd.final_state.pos), 1e-12);
}

TEST(Solver, SelfConvergenceOrder) {
    Lattice lat(2, 6);
    const auto d = smooth_data(lat, 1.5);
    StepperOptions opt;
    opt.nodes = 1;  // midpoint collocation: second order
    auto end = [&](double dt) { return solve(EquationSpec::plain_cubic(), d, 1.0, dt, {}, opt).final_state.pos; };
    const auto a = end(0.1), b = end(0.05), c = end(0.025), ref = end(0.003125);
    const double e1 = l2_distance(a, ref), e2 = l2_distance(b, ref), e3 = l2_distance(c, ref);
    EXPECT_GE(std::log2(e1 / e2), 1.8);
    EXPECT_GE(std::log2(e2 / e3), 1.8);
    // default three nodes: superconvergent, order well above four
    auto end3 = [&](double dt) { return solve(EquationSpec::plain_cubic(), d, 1.0, dt).final_state.pos; };
    const auto r3 = end3(0.00625);
    const double f1 = l2_distance(end3(0.1), r3), f2 = l2_distance(end3(0.05), r3);
    EXPECT_GE(std::log2(f1 / f2), 4.5);
}

TEST(Solver, ResidualMatchesTruncatedWick) {
    Lattice lat(2, 8);
    const int N = 3;
    const auto z0 = 0.4 * project(sample_gff(lat, 31), N);
    const double sigma = 0.16 * sigma_truncated(N, 2);
    const auto direct = solve(EquationSpec::truncated_wick(N, 2, sigma), z0, 1.0, 0.02);
    WickSource src{z0, static_cast<double>(N), sigma};
    const auto resid = solve(EquationSpec::residual_wick(src), FieldPair(lat), 1.0, 0.02);
    const auto u = linear_flow(z0, 1.0).pos + resid.final_state.pos;
    EXPECT_LT(max_abs_diff(u, direct.final_state.pos), 1e-8);
}

TEST(Solver, ResidualWithoutNoiseIsPlainCubic) {
    Lattice lat(2, 6);
    const auto d = smooth_data(lat);
    ObserveSpec obs;
    obs.keep_positions = true;
    const auto a = solve(EquationSpec::plain_cubic(), d, 0.5, 0.05, obs);
    const auto b = solve(EquationSpec::residual_wick(WickSource{FieldPair(lat), -1.0, 0.0}), d, 0.5, 0.05, obs);
    EXPECT_LT(approximation_gap(a, b), 1e-13);
    EXPECT_EQ(approximation_gap(a, a), 0.0);
    auto c = solve(EquationSpec::plain_cubic(), d, 0.5, 0.1, obs);
    EXPECT_THROW(approximation_gap(a, c), ShapeError);
}

TEST(Solver, SigmaRenormalizedReducesToTruncatedWick) {
    // z = free evolution of P_N data, sigma(t) constant: H_3(z + v; sigma) is the residual forcing
    Lattice lat(2, 6);
    const int N = 2;
    const auto z0 = 0.3 * project(sample_gff(lat, 8), N);
    const double sigma = 0.09 * sigma_truncated(N, 2);
    SmoothSource sm{z0, [sigma](double) { return sigma; }};
    const auto a = solve(EquationSpec::sigma_renormalized(sm, 3), FieldPair(lat), 0.8, 0.02);
    const auto b = solve(EquationSpec::residual_wick(WickSource{z0, -1.0, sigma}), FieldPair(lat), 0.8, 0.02);
    EXPECT_LT(max_abs_diff(a.final_state.pos, b.final_state.pos), 1e-13);
    EXPECT_THROW(EquationSpec::sigma_renormalized(sm, 4), DomainError);
    EXPECT_NO_THROW(solve(EquationSpec::sigma_renormalized(sm, 5), FieldPair(lat), 0.2, 0.02));
}

TEST(Solver, BlowupGuardTruncates) {
    Lattice lat(1, 4);
    FieldPair d(lat);
    d.pos[lat.zero_index()] = 2.0;
    StepperOptions opt;
    opt.blowup_guard = 1.0;
    const auto tr = solve(EquationSpec::plain_cubic(), d, 1.0, 0.1, {}, opt);
    EXPECT_TRUE(tr.blowup);
    EXPECT_EQ(tr.blowup_time, 0.0);
    EXPECT_EQ(tr.times.size(), 1u);
}

TEST(Solver, CsvExport) {
    Lattice lat(2, 3);
    ObserveSpec obs;
    obs.sobolev = {-1.0, 0.0};
    obs.fourier_lebesgue = {{0.0, 1.0}};
    const auto tr = solve(EquationSpec::plain_cubic(), smooth_data(lat), 0.2, 0.1, obs);
    const auto csv = tr.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,energy,Hs[-1],Hs[0],FL[0;1]");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Lwp, WienerTime) {
    Lattice lat(2, 4);
    const auto d = smooth_data(lat);
    EXPECT_NEAR(wiener_lwp_time(2.0 * d), wiener_lwp_time(d) / 2, 1e-15);
    EXPECT_TRUE(std::isinf(wiener_lwp_time(FieldPair(lat))));
}

TEST(Lwp, StepperToWienerTimeIsConverged) {
    Lattice lat(2, 6);
    const auto d = smooth_data(lat, 2.0);
    const double T = wiener_lwp_time(d);
    StepperOptions opt;
    opt.fixed_corrections = 10;
    const auto a = solve(EquationSpec::plain_cubic(), d, T, 0.0, {}, opt).final_state.pos;
    const auto b = solve(EquationSpec::plain_cubic(), d, T, default_dt(d) / 2, {}, opt).final_state.pos;
    EXPECT_LT(fourier_lebesgue_norm(a - b, 0, 1), 1e-6);
}

TEST(Lwp, PerturbedEstimate) {
    Lattice lat(2, 4);
    const auto zero = perturbed_lwp_estimate(FieldPair(lat), 5.0, 0.1);
    EXPECT_NEAR(zero.T_guaranteed, kWienerLwpConstant / 5.0, 1e-15);
    EXPECT_STREQ(zero.binding(), "wick-bound");
    const auto d = smooth_data(lat, 3.0);
    const auto e1 = perturbed_lwp_estimate(d, 2.0, 0.2);
    const auto e2 = perturbed_lwp_estimate(d, 4.0, 0.2);
    EXPECT_GE(e2.T_guaranteed, e1.T_guaranteed / 2 - 1e-15);
    EXPECT_LE(e2.T_guaranteed, e1.T_guaranteed);
    EXPECT_THROW(perturbed_lwp_estimate(d, 1.0, 0.3), DomainError);
}

TEST(Lwp, WickSupBoundIsFinite) {
    Lattice lat(2, 8);
    WickSource src{sample_gff(lat, 2), -1.0, sigma_lattice(lat)};
    const double K = wick_sup_bound(src, 0.1, {0.0, 0.5});
    EXPECT_GT(K, 0.0);
    EXPECT_TRUE(std::isfinite(K));
}
