#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "field.hpp"

namespace nlw {

enum class Kernel { GaussianBump, Fejer, Tent };

inline Kernel parse_kernel(std::string_view name) {
    if (name == "gaussian-bump") return Kernel::GaussianBump;
    if (name == "fejer") return Kernel::Fejer;
    if (name == "tent") return Kernel::Tent;
    throw DomainError("unknown mollifier kernel '" + std::string(name) + "'");
}

inline const char* kernel_name(Kernel k) {
    switch (k) {
        case Kernel::GaussianBump: return "gaussian-bump";
        case Kernel::Fejer: return "fejer";
        case Kernel::Tent: return "tent";
    }
    return "?";
}

namespace detail {
inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
}  // namespace detail

// rho-hat at xi (continuous frequency), normalized so rho-hat(0) = 1.
//   tent:          product of triangles of half-width 1/2, rho-hat = prod sinc^2(xi_i / 4)
//   fejer:         Cesaro multiplier prod (1 - |xi_i|)_+
//   gaussian-bump: Gaussian of width 1/8, essentially supported in the unit cell
inline double rho_hat(Kernel k, double xi0, double xi1 = 0.0) {
    switch (k) {
        case Kernel::Tent: {
            const double a = detail::sinc(xi0 / 4.0), b = detail::sinc(xi1 / 4.0);
            return a * a * b * b;
        }
        case Kernel::Fejer: return std::max(0.0, 1.0 - std::abs(xi0)) * std::max(0.0, 1.0 - std::abs(xi1));
        case Kernel::GaussianBump: return std::exp(-(xi0 * xi0 + xi1 * xi1) / 128.0);
    }
    return 0.0;
}

inline double rho_hat(Kernel k, double delta, const Mode& n) { return rho_hat(k, delta * n[0], delta * n[1]); }

// Lipschitz constant of rho-hat (per unit |xi|), used by the mean-value check.
inline double rho_hat_lipschitz(Kernel k) {
    switch (k) {
        case Kernel::Tent: return 0.32;
        case Kernel::Fejer: return std::sqrt(2.0);
        case Kernel::GaussianBump: return 0.076;
    }
    return 1.0;
}

inline SpectralField mollify(const SpectralField& f, Kernel k, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("mollify: delta must lie in (0,1]");
    return multiplier_apply(f, [&](const Mode& n, std::size_t) { return rho_hat(k, delta, n); });
}

inline FieldPair mollify(const FieldPair& p, Kernel k, double delta) {
    return {mollify(p.pos, k, delta), mollify(p.vel, k, delta)};
}

}  // namespace nlw
