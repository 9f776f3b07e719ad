#pragma once
// Mollified-data convergence toward the Wick-ordered solution, and decay rates of Wick-power
// covariance differences between two regularizations at a common scale.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nlwlab/covariance.hpp"
#include "nlwlab/errors.hpp"
#include "nlwlab/gff.hpp"
#include "nlwlab/lwp.hpp"
#include "nlwlab/mollifier.hpp"
#include "nlwlab/solver.hpp"
#include "nlwlab/stats.hpp"

namespace nlw {

struct ConvergenceOptions {
    int cutoff = 32;
    double dt = 0.01;
    double T = 0.5;
    double s0 = 0.75;
    double noise_scale = 1.0;  // 0 gives the degenerate z = 0 case
    double alpha = 0.1;        // for the reported local-time guarantee
    bool mesh_check = false;   // rerun the reference at twice the cutoff
};

struct ConvergenceRun {
    Kernel kernel = Kernel::Tent;
    std::vector<double> deltas;
    std::uint64_t seed = 0;
    int cutoff = 0;
    double dt = 0.0, T = 0.0, s0 = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> distance;  // [delta][time]
    std::vector<double> sup_distance;           // per delta
    double lwp_time = 0.0;                      // perturbed local-time guarantee for the seed
    bool within_guarantee = false;
    double mesh_gap = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    std::string failure;

    // number of ladder steps (delta_k -> delta_{k+1}) on which the sup distance decreases
    int decreasing_steps() const {
        int c = 0;
        for (std::size_t k = 1; k < sup_distance.size(); ++k) c += sup_distance[k] < sup_distance[k - 1];
        return c;
    }
};

namespace detail {

inline ObserveSpec convergence_observer() {
    ObserveSpec obs;
    obs.energy = false;
    obs.keep_positions = true;
    return obs;
}

inline FieldPair convergence_noise(const Lattice& lat, std::uint64_t seed, double scale) {
    return scale * sample_gff(lat, seed);
}

}  // namespace detail

// Residual Wick reference v: lattice-cutoff Wick powers of the free GFF evolution, v(0) = 0.
inline Trajectory convergence_reference(std::uint64_t seed, const ConvergenceOptions& opt) {
    const Lattice lat(2, opt.cutoff);
    const FieldPair z0 = detail::convergence_noise(lat, seed, opt.noise_scale);
    const WickSource src{z0, -1.0, opt.noise_scale * opt.noise_scale * sigma_lattice(lat)};
    return solve(EquationSpec::residual_wick(src), FieldPair(lat), opt.T, opt.dt, detail::convergence_observer());
}

inline ConvergenceRun run_convergence(Kernel kernel, const std::vector<double>& deltas, std::uint64_t seed,
                                      const Trajectory& reference, const ConvergenceOptions& opt = {}) {
    if (deltas.empty()) throw DomainError("run_convergence: empty delta ladder");
    if (!(opt.s0 > 0.5 && opt.s0 < 1.0)) throw DomainError("run_convergence: s0 must lie in (1/2, 1)");
    const Lattice lat(2, opt.cutoff);
    if (reference.positions.empty() || reference.positions.front().lattice() != lat)
        throw ShapeError("run_convergence: reference trajectory does not match the lattice");

    ConvergenceRun run;
    run.kernel = kernel;
    run.deltas = deltas;
    run.seed = seed;
    run.cutoff = opt.cutoff;
    run.dt = opt.dt;
    run.T = opt.T;
    run.s0 = opt.s0;
    run.times = reference.times;
    if (reference.blowup) {
        run.failed = true;
        run.failure = "reference: " + reference.blowup_message;
    }

    const FieldPair z0 = detail::convergence_noise(lat, seed, opt.noise_scale);
    if (opt.noise_scale > 0) {
        const WickSource src{z0, -1.0, opt.noise_scale * opt.noise_scale * sigma_lattice(lat)};
        const double K = wick_sup_bound(src, opt.alpha, default_wick_sample_times());
        run.lwp_time = perturbed_lwp_estimate(FieldPair(lat), K, opt.alpha).T_guaranteed;
    } else {
        run.lwp_time = std::numeric_limits<double>::infinity();
    }
    run.within_guarantee = opt.T <= run.lwp_time;

    for (double delta : deltas) {
        // the variance of the mollified free evolution is constant in time for GFF data
        const FieldPair zd = mollify(z0, kernel, delta);
        const double sd = opt.noise_scale * opt.noise_scale * sigma_mollified(lat, kernel, delta);
        SmoothSource src{zd, [sd](double) { return sd; }};
        const auto tr = solve(EquationSpec::sigma_renormalized(src, 3), FieldPair(lat), opt.T, opt.dt,
                              detail::convergence_observer());
        std::vector<double> dist;
        double sup = 0.0;
        if (tr.blowup || tr.times.size() != reference.times.size()) {
            run.failed = true;
            run.failure = "delta " + std::to_string(delta) + ": " + tr.blowup_message;
            sup = std::numeric_limits<double>::infinity();
        } else {
            for (std::size_t k = 0; k < tr.times.size(); ++k) {
                dist.push_back(sobolev_norm(reference.positions[k] - tr.positions[k], opt.s0));
                sup = std::max(sup, dist.back());
            }
        }
        run.distance.push_back(std::move(dist));
        run.sup_distance.push_back(sup);
    }

    if (opt.mesh_check) {
        auto fine = opt;
        fine.cutoff = 2 * opt.cutoff;
        fine.mesh_check = false;
        const auto ref2 = convergence_reference(seed, fine);
        double gap = 0.0;
        for (std::size_t k = 0; k < ref2.times.size() && k < reference.times.size(); ++k)
            gap = std::max(gap, sobolev_norm(reference.positions[k] - embed(ref2.positions[k], lat), opt.s0));
        run.mesh_gap = gap;
    }
    return run;
}

inline ConvergenceRun run_convergence(Kernel kernel, const std::vector<double>& deltas, std::uint64_t seed,
                                      const ConvergenceOptions& opt = {}) {
    return run_convergence(kernel, deltas, seed, convergence_reference(seed, opt), opt);
}

inline std::string convergence_csv_header() { return "seed,kernel,delta,T,sup_distance,t,distance"; }

inline std::string convergence_csv_rows(const ConvergenceRun& r) {
    std::string out;
    char buf[256];
    for (std::size_t j = 0; j < r.deltas.size(); ++j)
        for (std::size_t k = 0; k < r.distance[j].size(); ++k) {
            std::snprintf(buf, sizeof buf, "%llu,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          static_cast<unsigned long long>(r.seed), kernel_name(r.kernel), r.deltas[j], r.T,
                          r.sup_distance[j], r.times[k], r.distance[j][k]);
            out += buf;
        }
    return out;
}

// ---------------------------------------------------------------------------------------------

// A regularization at scale N: sharp truncation |n| <= N or a kernel at delta = 1/N.
struct ScaleFamily {
    bool truncation = true;
    Kernel kernel = Kernel::Fejer;

    static ScaleFamily parse(const std::string& name) {
        if (name == "truncation") return {};
        return {false, parse_kernel(name)};
    }
    std::string name() const { return truncation ? "truncation" : kernel_name(kernel); }
    WeightSpec at(int N, int cutoff) const {
        return truncation ? WeightSpec::truncation(N) : WeightSpec::mollified(kernel, 1.0 / N, cutoff);
    }
};

struct RateFit {
    int l = 1;
    std::vector<int> Ns;
    std::vector<double> differences;  // sum over |n| <= window of E|<:z_a^l: - :z_b^l:, e_n>|^2
    double gamma = 0.0;               // differences ~ N^{-gamma}
    double r2 = 0.0;
};

// cutoff: square cutoff used for kernels without compact support (0 picks 2 max N).
inline RateFit wick_convergence_rate(int l, int d, const ScaleFamily& a, const ScaleFamily& b,
                                     const std::vector<int>& Ns, int window, int cutoff = 0) {
    if (l < 1 || l > 3) throw DomainError("wick_convergence_rate: l must be 1, 2 or 3");
    if (Ns.size() < 2) throw DomainError("wick_convergence_rate: need at least two scales");
    if (window < 0) throw DomainError("wick_convergence_rate: negative window");
    int maxN = 0;
    for (int N : Ns) maxN = std::max(maxN, N);
    const int box = cutoff > 0 ? cutoff : 2 * maxN;

    std::vector<Mode> targets;
    for (int x = -window; x <= window; ++x)
        for (int y = (d == 2 ? -window : 0); y <= (d == 2 ? window : 0); ++y)
            if (x * x + y * y <= window * window) targets.push_back({x, y});

    RateFit fit;
    fit.l = l;
    fit.Ns = Ns;
    for (int N : Ns) {
        const WeightSpec A = a.at(N, box), B = b.at(N, box);
        const int K = std::max(A.support(), B.support());
        auto sum_with = [&](auto&& f) { return gamma_sum_convolution(l, targets, d, K, f); };
        const auto saa = sum_with([&](const Mode& m) { const double x = A.multiplier(m); return x * x * inv_bracket2(m); });
        const auto sbb = sum_with([&](const Mode& m) { const double x = B.multiplier(m); return x * x * inv_bracket2(m); });
        const auto sab = sum_with([&](const Mode& m) { return A.multiplier(m) * B.multiplier(m) * inv_bracket2(m); });
        long double total = 0.0L;
        for (std::size_t i = 0; i < targets.size(); ++i) total += saa[i] + sbb[i] - 2.0L * sab[i];
        fit.differences.push_back(factorial(l) * static_cast<double>(std::max(total, 0.0L)));
    }
    bool positive = true;
    for (double v : fit.differences) positive = positive && v > 0;
    if (positive) {
        std::vector<double> x(Ns.begin(), Ns.end());
        const auto lf = fit_loglog(x, fit.differences);
        fit.gamma = -lf.slope;
        fit.r2 = lf.r2;
    }
    return fit;
}

}  // namespace nlw
