#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>

#include "errors.hpp"
#include "field.hpp"
#include "mollifier.hpp"
#include "rng.hpp"

namespace nlw {

// Standard complex Gaussian attached to (seed, component j, mode n). The draw depends
// only on these keys, so lattices of different size see the same coefficients.
inline cplx gaussian_coefficient(std::uint64_t seed, int j, const Mode& n) {
    const bool zero = n[0] == 0 && n[1] == 0;
    // canonical representative of {n, -n}
    const bool flip = n[1] < 0 || (n[1] == 0 && n[0] < 0);
    const Mode r = flip ? Mode{-n[0], -n[1]} : n;
    auto [a, b] = normal_pair(hash_key(seed, j, r[0], r[1]));
    if (zero) return {a, 0.0};
    const cplx g(a * std::numbers::sqrt2 / 2.0, b * std::numbers::sqrt2 / 2.0);
    return flip ? std::conj(g) : g;
}

// (g_0, g_1) as coefficient fields.
inline FieldPair sample_gaussians(const Lattice& lat, std::uint64_t seed) {
    FieldPair g(lat);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode n = lat.mode(i);
        g.pos[i] = gaussian_coefficient(seed, 0, n);
        g.vel[i] = gaussian_coefficient(seed, 1, n);
    }
    return g;
}

// u0 = sum g_0n / <n> e_n, u1 = sum g_1n e_n.
inline FieldPair sample_gff(const Lattice& lat, std::uint64_t seed) {
    FieldPair p = sample_gaussians(lat, seed);
    for (std::size_t i = 0; i < lat.size(); ++i) p.pos[i] /= lat.bracket(i);
    return p;
}

// sum_{|n| <= N} <n>^{-2}, Euclidean ball in Z^d.
inline double sigma_truncated(int N, int d) {
    if (N < 0) throw DomainError("sigma_truncated: negative N");
    if (d != 1 && d != 2) throw DomainError("sigma_truncated: d must be 1 or 2");
    const long n2max = static_cast<long>(N) * N;
    double acc = 0.0;
    if (d == 1) {
        for (int n = -N; n <= N; ++n) acc += 1.0 / (1.0 + static_cast<double>(n) * n);
        return acc;
    }
    for (int a = -N; a <= N; ++a) {
        const long a2 = static_cast<long>(a) * a;
        const int bmax = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n2max - a2)) + 1e-9));
        for (int b = -bmax; b <= bmax; ++b) acc += 1.0 / (1.0 + static_cast<double>(a2) + static_cast<double>(b) * b);
    }
    return acc;
}

// Variance of z restricted to an arbitrary multiplier w(n): sum w(n)^2 <n>^{-2} over the lattice.
template <class Fn>
double sigma_weighted(const Lattice& lat, Fn&& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const double a = w(lat.mode(i));
        acc += a * a / (lat.bracket(i) * lat.bracket(i));
    }
    return acc;
}

inline double sigma_mollified(const Lattice& lat, Kernel k, double delta) {
    return sigma_weighted(lat, [&](const Mode& n) { return rho_hat(k, delta, n); });
}

inline double sigma_lattice(const Lattice& lat) {
    return sigma_weighted(lat, [](const Mode&) { return 1.0; });
}

// sigma(t) for randomized smooth data: sum cos^2(t<n>)|phi0|^2 + sin^2(t<n>)<n>^{-2}|phi1|^2.
inline double sigma_smooth(const FieldPair& phi, double t, double mass = 1.0) {
    const Lattice& lat = phi.lattice();
    double acc = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const double w = std::sqrt(mass + static_cast<double>(lat.norm2(i)));
        const double c = std::cos(t * w), s = std::sin(t * w) / w;
        acc += c * c * std::norm(phi.pos[i]) + s * s * std::norm(phi.vel[i]);
    }
    return acc;
}

// Wiener randomization of deterministic data: phi_j-hat(n) g_{j,n}.
inline FieldPair randomize(const FieldPair& phi, std::uint64_t seed) {
    const Lattice& lat = phi.lattice();
    FieldPair out(lat);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode n = lat.mode(i);
        out.pos[i] = std::abs(phi.pos[i]) * gaussian_coefficient(seed, 0, n);
        out.vel[i] = std::abs(phi.vel[i]) * gaussian_coefficient(seed, 1, n);
    }
    return out;
}

}  // namespace nlw
