#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "hermite.hpp"
#include "mollifier.hpp"
#include "stats.hpp"

namespace nlw {

// Fourier multiplier defining z from the free field: a sharp ball or a mollifier.
struct WeightSpec {
    enum class Kind { Truncation, Mollified };
    Kind kind = Kind::Truncation;
    double N = 0.0;
    Kernel kernel = Kernel::Tent;
    double delta = 1.0;
    int cutoff = 0;  // square cutoff of the lattice the mollified field lives on

    static WeightSpec truncation(double N) {
        WeightSpec w;
        w.kind = Kind::Truncation;
        w.N = N;
        return w;
    }
    static WeightSpec mollified(Kernel k, double delta, int cutoff) {
        WeightSpec w;
        w.kind = Kind::Mollified;
        w.kernel = k;
        w.delta = delta;
        w.cutoff = cutoff;
        return w;
    }

    double multiplier(const Mode& n) const {
        if (kind == Kind::Truncation)
            return static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1] <= N * N + 1e-9 ? 1.0 : 0.0;
        if (cutoff > 0 && (std::abs(n[0]) > cutoff || std::abs(n[1]) > cutoff)) return 0.0;
        return rho_hat(kernel, delta, n);
    }

    // Square cutoff outside of which the multiplier vanishes.
    int support() const {
        if (kind == Kind::Truncation) return static_cast<int>(std::floor(N + 1e-9));
        if (kernel == Kernel::Fejer) {
            const int k = static_cast<int>(std::ceil(1.0 / delta - 1e-12));
            return cutoff > 0 ? std::min(k, cutoff) : k;
        }
        if (cutoff <= 0) throw DomainError("WeightSpec: kernel without compact support needs a lattice cutoff");
        return cutoff;
    }
};

using ModeWeight = std::function<double(const Mode&)>;

inline double inv_bracket2(const Mode& n) {
    return 1.0 / (1.0 + static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1]);
}

// Visits every (n_1..n_l) with sum n and |n_j|_inf <= K.
template <class Fn>
void for_each_gamma(int l, const Mode& n, int d, int K, Fn&& fn) {
    if (l < 1 || l > 3) throw DomainError("for_each_gamma: l must lie in [1,3]");
    const int side = 2 * K + 1;
    const long per = d == 1 ? side : static_cast<long>(side) * side;
    long total = 1;
    for (int j = 1; j < l; ++j) total *= per;
    if (total > 50'000'000L) throw SizeError("for_each_gamma: enumeration too large");
    auto in_box = [&](const Mode& m) { return std::abs(m[0]) <= K && std::abs(m[1]) <= K; };
    auto decode = [&](long idx) -> Mode {
        if (d == 1) return {static_cast<int>(idx) - K, 0};
        return {static_cast<int>(idx / side) - K, static_cast<int>(idx % side) - K};
    };
    std::array<Mode, 3> ms{};
    if (l == 1) {
        ms[0] = n;
        if (in_box(n)) fn(ms.data());
        return;
    }
    for (long a = 0; a < per; ++a) {
        ms[0] = decode(a);
        if (l == 2) {
            ms[1] = {n[0] - ms[0][0], n[1] - ms[0][1]};
            if (in_box(ms[1])) fn(ms.data());
            continue;
        }
        for (long b = 0; b < per; ++b) {
            ms[1] = decode(b);
            ms[2] = {n[0] - ms[0][0] - ms[1][0], n[1] - ms[0][1] - ms[1][1]};
            if (in_box(ms[2])) fn(ms.data());
        }
    }
}

// sum over Gamma_l(n) of prod w(n_j), by exhaustive enumeration.
inline double gamma_sum_enumerate(int l, const Mode& n, int d, int K, const ModeWeight& w) {
    if (l == 3 && K > 16) throw SizeError("gamma_sum_enumerate: l = 3 needs |n_j| <= 16");
    long double acc = 0.0;  // extended accumulator: sums run over ~1e6 terms
    for_each_gamma(l, n, d, K, [&](const Mode* ms) {
        double p = 1.0;
        for (int j = 0; j < l; ++j) p *= w(ms[j]);
        acc += p;
    });
    return static_cast<double>(acc);
}

// Dense real table of w on the square lattice of cutoff K.
inline std::vector<double> weight_table(int d, int K, const ModeWeight& w) {
    Lattice lat(d, K);
    std::vector<double> t(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) t[i] = w(lat.mode(i));
    return t;
}

// w^{*l}(n) for each target via iterated direct convolution.
inline std::vector<double> gamma_sum_convolution(int l, const std::vector<Mode>& targets, int d, int K,
                                                 const ModeWeight& w) {
    if (l < 1 || l > 3) throw DomainError("gamma_sum_convolution: l must lie in [1,3]");
    Lattice lk(d, K);
    const auto base = weight_table(d, K, w);
    std::vector<double> out(targets.size(), 0.0);
    if (l == 1) {
        for (std::size_t t = 0; t < targets.size(); ++t)
            out[t] = lk.contains(targets[t]) ? base[lk.index(targets[t])] : 0.0;
        return out;
    }
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (base[i] != 0.0) nz.push_back(i);
    if (static_cast<double>(nz.size()) * static_cast<double>(nz.size()) > 6e9)
        throw SizeError("gamma_sum_convolution: convolution too large");
    Lattice l2(d, 2 * K);
    std::vector<long double> w2(l2.size(), 0.0L);
    for (std::size_t i : nz) {
        const Mode a = lk.mode(i);
        for (std::size_t j : nz) {
            const Mode b = lk.mode(j);
            w2[l2.index({a[0] + b[0], a[1] + b[1]})] += static_cast<long double>(base[i]) * base[j];
        }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const Mode n = targets[t];
        if (l == 2) {
            out[t] = l2.contains(n) ? static_cast<double>(w2[l2.index(n)]) : 0.0;
            continue;
        }
        long double acc = 0.0L;
        for (std::size_t i : nz) {
            const Mode a = lk.mode(i);
            const Mode m{n[0] - a[0], n[1] - a[1]};
            if (l2.contains(m)) acc += base[i] * w2[l2.index(m)];
        }
        out[t] = static_cast<double>(acc);
    }
    return out;
}

struct CovarianceValue {
    double gamma_sum = 0.0;  // sum over Gamma_l(n) of prod a_j^2 <n_j>^{-2}
    double moment = 0.0;     // l! * gamma_sum = E|<:z^l:, e_n>|^2
};

enum class OracleRoute { Enumerate, Convolution };

inline CovarianceValue covariance_oracle(int l, const Mode& n, int d, const WeightSpec& spec,
                                         OracleRoute route = OracleRoute::Enumerate) {
    const int K = spec.support();
    ModeWeight w = [&](const Mode& m) {
        const double a = spec.multiplier(m);
        return a * a * inv_bracket2(m);
    };
    CovarianceValue v;
    v.gamma_sum = route == OracleRoute::Enumerate ? gamma_sum_enumerate(l, n, d, K, w)
                                                  : gamma_sum_convolution(l, {n}, d, K, w)[0];
    v.moment = factorial(l) * v.gamma_sum;
    return v;
}

inline CovarianceValue covariance_oracle(int l, const Mode& n, int d, int N,
                                         OracleRoute route = OracleRoute::Enumerate) {
    return covariance_oracle(l, n, d, WeightSpec::truncation(N), route);
}

// E|<:z_a^l: - :z_b^l:, e_n>|^2 = l! sum_Gamma (prod a_j - prod b_j)^2 / prod <n_j>^2.
// Enumerate evaluates the squared difference per tuple; Convolution expands the square
// into three convolution powers.
inline double covariance_difference(int l, const Mode& n, int d, const WeightSpec& A, const WeightSpec& B,
                                    OracleRoute route = OracleRoute::Enumerate) {
    const int K = std::max(A.support(), B.support());
    if (route == OracleRoute::Enumerate) {
        long double acc = 0.0L;
        for_each_gamma(l, n, d, K, [&](const Mode* ms) {
            double pa = 1.0, pb = 1.0, pw = 1.0;
            for (int j = 0; j < l; ++j) {
                pa *= A.multiplier(ms[j]);
                pb *= B.multiplier(ms[j]);
                pw *= inv_bracket2(ms[j]);
            }
            acc += (pa - pb) * (pa - pb) * pw;
        });
        return factorial(l) * static_cast<double>(acc);
    }
    auto sum_with = [&](auto&& f) { return gamma_sum_convolution(l, {n}, d, K, f)[0]; };
    const double saa = sum_with([&](const Mode& m) { const double a = A.multiplier(m); return a * a * inv_bracket2(m); });
    const double sbb = sum_with([&](const Mode& m) { const double b = B.multiplier(m); return b * b * inv_bracket2(m); });
    const double sab = sum_with([&](const Mode& m) { return A.multiplier(m) * B.multiplier(m) * inv_bracket2(m); });
    return factorial(l) * (saa + sbb - 2.0 * sab);
}

// E|<:z_N^l:(t+h) - :z_N^l:(t), e_n>|^2 = 2 l! sum_Gamma [prod <n_j>^{-2} - prod cos(h<n_j>) <n_j>^{-2}].
inline double time_increment_moment(int l, const Mode& n, int d, int N, double h) {
    const WeightSpec spec = WeightSpec::truncation(N);
    long double acc = 0.0L;
    for_each_gamma(l, n, d, spec.support(), [&](const Mode* ms) {
        double p = 1.0, pc = 1.0;
        for (int j = 0; j < l; ++j) {
            const double a = spec.multiplier(ms[j]) * inv_bracket2(ms[j]);
            p *= a;
            pc *= a * std::cos(h * std::sqrt(1.0 / inv_bracket2(ms[j])));
        }
        acc += p - pc;
    });
    return 2.0 * factorial(l) * static_cast<double>(acc);
}

struct TimeModulusRow {
    Mode n{};
    double h = 0.0;
    double value = 0.0;
    double envelope_ratio = 0.0;  // value / (|h|^theta <n>^{theta-2})
};

struct TimeModulusReport {
    int l = 0, N = 0;
    double theta = 0.0;
    std::vector<TimeModulusRow> rows;
    std::vector<double> fitted_exponent;  // per n, slope of log value vs log h
    double max_envelope_ratio = 0.0;
};

inline TimeModulusReport time_modulus_check(int l, int d, int N, double theta, const std::vector<double>& hs,
                                            const std::vector<Mode>& ns) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("time_modulus_check: theta must lie in (0,1)");
    TimeModulusReport rep;
    rep.l = l;
    rep.N = N;
    rep.theta = theta;
    for (const Mode& n : ns) {
        std::vector<double> xs, ys;
        for (double h : hs) {
            TimeModulusRow r;
            r.n = n;
            r.h = h;
            r.value = time_increment_moment(l, n, d, N, h);
            const double env = std::pow(std::abs(h), theta) * std::pow(bracket(n), theta - 2.0);
            r.envelope_ratio = env > 0 ? r.value / env : 0.0;
            rep.max_envelope_ratio = std::max(rep.max_envelope_ratio, r.envelope_ratio);
            if (h > 0 && r.value > 0) {
                xs.push_back(h);
                ys.push_back(r.value);
            }
            rep.rows.push_back(r);
        }
        rep.fitted_exponent.push_back(xs.size() >= 2 ? fit_loglog(xs, ys).slope : 0.0);
    }
    return rep;
}

}  // namespace nlw
