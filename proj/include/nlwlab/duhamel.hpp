#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "errors.hpp"
#include "field.hpp"
#include "quadrature.hpp"

namespace nlw {

using FieldSource = std::function<SpectralField(double)>;

struct DuhamelQuadrature {
    int order = 8;        // Gauss-Legendre points per panel
    int panels = 1;       // initial panel count, doubled until converged
    int max_panels = 4096;
    double tol = 1e-12;   // FL^1 change between successive refinements
};

namespace detail {
inline SpectralField duhamel_panels(const FieldSource& f, double t, int order, int panels, double mass) {
    const auto g = gauss_legendre(order);
    SpectralField acc;
    bool first = true;
    const double h = t / panels;
    for (int p = 0; p < panels; ++p)
        for (int q = 0; q < order; ++q) {
            const double tp = (p + g.x[q]) * h;
            SpectralField ft = f(tp);
            const Lattice& lat = ft.lattice();
            if (first) {
                acc = SpectralField(lat);
                first = false;
            }
            for (std::size_t i = 0; i < lat.size(); ++i) {
                const double w = std::sqrt(mass + static_cast<double>(lat.norm2(i)));
                const double k = w > 0 ? std::sin((t - tp) * w) / w : (t - tp);
                acc[i] -= h * g.w[q] * k * ft[i];
            }
        }
    return acc;
}
}  // namespace detail

// -int_0^t sin((t-t')<nabla>)/<nabla> f(t') dt'
inline SpectralField duhamel(const FieldSource& f, double t, const DuhamelQuadrature& quad = {}, double mass = 1.0) {
    int panels = std::max(1, quad.panels);
    SpectralField prev = detail::duhamel_panels(f, t, quad.order, panels, mass);
    while (panels < quad.max_panels) {
        panels *= 2;
        SpectralField next = detail::duhamel_panels(f, t, quad.order, panels, mass);
        const double change = fourier_lebesgue_norm(next - prev, 0.0, 1.0);
        const double scale = std::max(1e-300, fourier_lebesgue_norm(next, 0.0, 1.0));
        prev = std::move(next);
        if (change <= quad.tol * std::max(1.0, scale)) return prev;
    }
    throw AccuracyError("duhamel: quadrature did not reach tolerance");
}

// int_0^t |sin((t-s) w)| / w ds in closed form: with w t = k pi + r, (2k + 1 - cos r) / w^2.
inline double duhamel_abs_kernel_integral(double w, double t) {
    if (w <= 0) throw DomainError("duhamel_abs_kernel_integral: frequency must be positive");
    const double x = w * t;
    const double k = std::floor(x / std::numbers::pi);
    const double r = x - k * std::numbers::pi;
    return (2.0 * k + 1.0 - std::cos(r)) / (w * w);
}

// Same integral by composite Gauss-Legendre on the half-periods of the integrand.
inline double duhamel_abs_kernel_quadrature(double w, double t, int order = 20) {
    const auto g = gauss_legendre(order);
    const double half = std::numbers::pi / w;
    double acc = 0.0;
    for (double a = 0.0; a < t; a += half) {
        const double b = std::min(t, a + half);
        for (int q = 0; q < order; ++q) {
            const double u = a + (b - a) * g.x[q];
            acc += (b - a) * g.w[q] * std::abs(std::sin(u * w)) / w;
        }
    }
    return acc;
}

}  // namespace nlw
