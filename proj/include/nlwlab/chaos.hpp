#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include "covariance.hpp"
#include "errors.hpp"
#include "field.hpp"
#include "gff.hpp"
#include "hermite.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "wick.hpp"

namespace nlw {

// E[H_k(g) H_m(g)] for a standard Gaussian g, k, m <= kmax.
struct OrthogonalityReport {
    int kmax = 0;
    std::size_t samples = 0;
    std::vector<std::vector<RunningStats>> stats;  // [k][m]

    double exact(int k, int m) const { return k == m ? factorial(k) : 0.0; }
    double z_score(int k, int m) const {
        const auto& s = stats[k][m];
        const double se = s.std_error();
        return se > 0 ? (s.mean() - exact(k, m)) / se : (s.mean() == exact(k, m) ? 0.0 : INFINITY);
    }
};

inline OrthogonalityReport hermite_orthogonality(int kmax, std::size_t samples, std::uint64_t seed) {
    OrthogonalityReport r;
    r.kmax = kmax;
    r.samples = samples;
    r.stats.assign(kmax + 1, std::vector<RunningStats>(kmax + 1));
    Stream rng(seed);
    std::vector<double> h(kmax + 1);
    for (std::size_t s = 0; s < samples; ++s) {
        hermite_all(kmax, rng.normal(), 1.0, h.data());
        for (int k = 0; k <= kmax; ++k)
            for (int m = 0; m <= kmax; ++m) r.stats[k][m].add(h[k] * h[m]);
    }
    return r;
}

struct PairingReport {
    int k = 0;
    double t1 = 0.0, t2 = 0.0;
    double J = 0.0;       // sum f-hat conj(h-hat) cos((t1-t2)<n>)
    double exact = 0.0;   // k! J^k
    double empirical = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    double z_score() const { return std_error > 0 ? (empirical - exact) / std_error : (empirical == exact ? 0.0 : INFINITY); }
};

// E[H_k(W_f^{t1}) H_k(W_h^{t2})] with W_f^t = sum f-hat(n) conj(g_n^t) and
// g^t = cos(t<n>) g_0 + sin(t<n>) g_1.
inline PairingReport white_noise_pairing_check(const SpectralField& f, const SpectralField& h, int k, double t1,
                                               double t2, std::size_t samples, std::uint64_t seed = 1) {
    f.check_same(h, "white_noise_pairing_check");
    auto l2 = [](const SpectralField& x) { return sobolev_norm(x, 0.0); };
    if (std::abs(l2(f) - 1.0) > 1e-10 || std::abs(l2(h) - 1.0) > 1e-10)
        throw PreconditionError("white_noise_pairing_check: inputs must have unit L2 norm");
    const Lattice& lat = f.lattice();
    PairingReport r;
    r.k = k;
    r.t1 = t1;
    r.t2 = t2;
    r.samples = samples;
    struct Term {
        cplx fh, hh;
        double c1, s1, c2, s2;
        bool zero;
    };
    std::vector<Term> terms;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode n = lat.mode(i);
        const double b = lat.bracket(i);
        r.J += (f[i] * std::conj(h[i])).real() * std::cos((t1 - t2) * b);
        const bool canonical = n[1] > 0 || (n[1] == 0 && n[0] >= 0);
        if (!canonical || (f[i] == cplx(0, 0) && h[i] == cplx(0, 0))) continue;
        terms.push_back({f[i], h[i], std::cos(t1 * b), std::sin(t1 * b), std::cos(t2 * b), std::sin(t2 * b),
                         n[0] == 0 && n[1] == 0});
    }
    r.exact = factorial(k) * std::pow(r.J, k);
    Stream rng(seed);
    RunningStats st;
    const double is2 = std::numbers::sqrt2 / 2.0;
    for (std::size_t s = 0; s < samples; ++s) {
        double wf = 0.0, wh = 0.0;
        for (const auto& t : terms) {
            cplx g0, g1;
            if (t.zero) {
                g0 = rng.normal();
                g1 = rng.normal();
            } else {
                g0 = cplx(rng.normal() * is2, rng.normal() * is2);
                g1 = cplx(rng.normal() * is2, rng.normal() * is2);
            }
            const cplx ga = t.c1 * g0 + t.s1 * g1;
            const cplx gb = t.c2 * g0 + t.s2 * g1;
            const double mult = t.zero ? 1.0 : 2.0;
            wf += mult * (t.fh * std::conj(ga)).real();
            wh += mult * (t.hh * std::conj(gb)).real();
        }
        st.add(hermite_eval(k, wf, 1.0) * hermite_eval(k, wh, 1.0));
    }
    r.empirical = st.mean();
    r.std_error = st.std_error();
    return r;
}

// Orbit of n under n -> -n and the symmetries of the square; all members share one exact moment.
inline Mode orbit_key(const Mode& n) {
    int a = std::abs(n[0]), b = std::abs(n[1]);
    if (a < b) std::swap(a, b);
    return {a, b};
}

struct WickMomentCell {
    int l = 0;
    int N = 0;
    Mode key{};            // orbit representative
    int orbit_size = 0;
    RunningStats stats;    // orbit-averaged |<:z_N^l:, e_n>|^2 per sample
    double exact = 0.0;
};

// Monte Carlo of E|<:z_N^l:, e_n>|^2 for all |n| <= radius (Euclidean), orbit-pooled.
// z_N = P_N u_0 is formed on the square lattice of cutoff max(radius, N).
inline std::vector<WickMomentCell> wick_moment_ensemble(int d, const std::vector<int>& Ns, int lmax, int radius,
                                                        std::size_t seeds, std::uint64_t master) {
    int M = radius;
    for (int N : Ns) M = std::max(M, N);
    Lattice lat(d, M);
    std::map<std::tuple<int, int, int, int>, std::size_t> where;
    std::vector<WickMomentCell> cells;
    std::vector<std::vector<std::size_t>> members;  // per cell: lattice indices
    for (int N : Ns)
        for (int l = 1; l <= lmax; ++l)
            for (std::size_t i = 0; i < lat.size(); ++i) {
                if (lat.norm2(i) > static_cast<long>(radius) * radius) continue;
                const Mode key = orbit_key(lat.mode(i));
                auto k = std::make_tuple(N, l, key[0], key[1]);
                auto it = where.find(k);
                if (it == where.end()) {
                    WickMomentCell c;
                    c.l = l;
                    c.N = N;
                    c.key = key;
                    c.exact = covariance_oracle(l, key, d, N).moment;
                    where[k] = cells.size();
                    cells.push_back(c);
                    members.emplace_back();
                    it = where.find(k);
                }
                members[it->second].push_back(i);
            }
    for (std::size_t c = 0; c < cells.size(); ++c) cells[c].orbit_size = static_cast<int>(members[c].size());
    std::vector<double> sigmas;
    for (int N : Ns) sigmas.push_back(sigma_truncated(N, d));
    for (std::size_t s = 0; s < seeds; ++s) {
        const FieldPair data = sample_gff(lat, derive_seed(master, "wick-moment/" + std::to_string(s)));
        std::vector<WickStack> stacks;
        for (std::size_t q = 0; q < Ns.size(); ++q) stacks.push_back(wick_powers(project(data.pos, Ns[q]), sigmas[q], lmax));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::size_t q = std::find(Ns.begin(), Ns.end(), cells[c].N) - Ns.begin();
            const SpectralField& X = stacks[q].power(cells[c].l);
            double acc = 0.0;
            for (std::size_t i : members[c]) acc += std::norm(X[i]);
            cells[c].stats.add(acc / static_cast<double>(members[c].size()));
        }
    }
    return cells;
}

struct ChaosMomentRow {
    int p = 0;
    double moment = 0.0;    // E|X|^p
    double bound = 0.0;     // (p-1)^{lp/2} (E|X|^2)^{p/2}
    double std_error = 0.0;
};

// Hypercontractivity of the l-th chaos, sampled on the mode n of :z_N^l:.
inline std::vector<ChaosMomentRow> wiener_chaos_moment_check(int d, int l, int N, const Mode& n,
                                                             const std::vector<int>& ps, std::size_t samples,
                                                             std::uint64_t master) {
    Lattice lat(d, std::max(N, std::max(std::abs(n[0]), std::abs(n[1]))));
    const double sigma = sigma_truncated(N, d);
    std::vector<RunningStats> st(ps.size());
    RunningStats second;
    for (std::size_t s = 0; s < samples; ++s) {
        const FieldPair data = sample_gff(lat, derive_seed(master, "chaos/" + std::to_string(s)));
        const auto w = wick_powers(project(data.pos, N), sigma, l);
        const double a = std::abs(w.power(l).at(n));
        second.add(a * a);
        for (std::size_t q = 0; q < ps.size(); ++q) st[q].add(std::pow(a, ps[q]));
    }
    std::vector<ChaosMomentRow> rows;
    for (std::size_t q = 0; q < ps.size(); ++q) {
        ChaosMomentRow r;
        r.p = ps[q];
        r.moment = st[q].mean();
        r.std_error = st[q].std_error();
        r.bound = std::pow(ps[q] - 1.0, l * ps[q] / 2.0) * std::pow(second.mean(), ps[q] / 2.0);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace nlw
