#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "solver.hpp"
#include "transform.hpp"
#include "wick.hpp"

namespace nlw {

// Fixed point of S(t)u0 + I[u^3] on the ball of radius 2a in C_t FL^1, a = ||data||_{FL^{0,1}}:
// self-map needs 4 t^2 a^2 <= 1, contraction needs 6 t^2 a^2 < 1; t = c/a with c = 1/(2 sqrt 2) gives both.
inline constexpr double kWienerLwpConstant = 0.35355339059327373;

inline double wiener_lwp_time(const FieldPair& data) {
    const double a = fourier_lebesgue_norm(data, 0.0, 1.0);
    return a > 0 ? kWienerLwpConstant / a : std::numeric_limits<double>::infinity();
}

struct PerturbedLwpEstimate {
    double alpha = 0.0;
    double data_norm = 0.0;     // ||(phi0, phi1)||_{FL^{alpha, 1/(1-alpha)}}
    double K = 0.0;
    double data_branch = 0.0;   // ||phi||^{1/(1-alpha)}
    double wick_branch = 0.0;   // K (1 + ||phi||)
    double constant = kWienerLwpConstant;
    double T_guaranteed = 0.0;
    const char* binding() const { return data_branch >= wick_branch ? "data-norm" : "wick-bound"; }
};

// sup over the sample times of max_l grid-sup |<nabla>^{-alpha/2} :z^l:(t)|, l = 1..3.
inline double wick_sup_bound(const WickSource& src, double alpha, const std::vector<double>& times, double mass = 1.0) {
    double K = 0.0;
    for (double t : times) {
        SpectralField z = linear_flow(src.data, t, mass).pos;
        if (src.truncation >= 0) z = project(z, src.truncation);
        const auto w = wick_powers(z, src.sigma, 3);
        for (int l = 1; l <= 3; ++l) K = std::max(K, grid_sup(bessel_potential(w.power(l), -alpha / 2.0), 4));
    }
    return K;
}

inline std::vector<double> default_wick_sample_times() {
    std::vector<double> ts;
    for (int k = -4; k <= 4; ++k) ts.push_back(k / 4.0);
    return ts;
}

inline PerturbedLwpEstimate perturbed_lwp_estimate(const FieldPair& data, double K, double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.25)) throw DomainError("perturbed_lwp_estimate: alpha must lie in (0, 1/4]");
    if (K < 0) throw DomainError("perturbed_lwp_estimate: negative K");
    PerturbedLwpEstimate e;
    e.alpha = alpha;
    e.K = K;
    const double p = 1.0 / (1.0 - alpha);
    e.data_norm = fourier_lebesgue_norm(data, alpha, p);
    e.data_branch = std::pow(e.data_norm, p);
    e.wick_branch = K * (1.0 + e.data_norm);
    const double denom = std::max(e.data_branch, e.wick_branch);
    e.T_guaranteed = denom > 0 ? e.constant / denom : std::numeric_limits<double>::infinity();
    return e;
}

}  // namespace nlw
