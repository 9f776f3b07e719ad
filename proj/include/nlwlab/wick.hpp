#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "hermite.hpp"
#include "mollifier.hpp"
#include "transform.hpp"

namespace nlw {

struct WickProvenance {
    enum class Kind { Truncated, Mollified, SmoothData, Lattice };
    Kind kind = Kind::Lattice;
    double N = 0.0;  // truncation radius
    Kernel kernel = Kernel::Tent;
    double delta = 0.0;
    double t = 0.0;

    std::string describe() const {
        switch (kind) {
            case Kind::Truncated: return "truncated(" + std::to_string(N) + ")";
            case Kind::Mollified: return std::string("mollified(") + kernel_name(kernel) + "," + std::to_string(delta) + ")";
            case Kind::SmoothData: return "smooth-data";
            case Kind::Lattice: return "lattice";
        }
        return "?";
    }
};

// z with its Wick powers; powers[0] is the constant 1 and powers[1] is z.
struct WickStack {
    std::vector<SpectralField> powers;
    double sigma = 0.0;
    WickProvenance provenance;

    const SpectralField& z() const { return powers.at(1); }
    const SpectralField& power(int l) const { return powers.at(static_cast<std::size_t>(l)); }
    int max_power() const { return static_cast<int>(powers.size()) - 1; }
};

// :z^l: = H_l(z(x); sigma) evaluated on a grid large enough that H_max_l(z) is alias-free, then projected.
inline WickStack wick_powers(const SpectralField& z, double sigma, int max_l, WickProvenance prov = {}) {
    if (max_l < 1 || max_l > 3) throw DomainError("wick_powers: max_l must lie in [1,3]");
    if (sigma < 0) throw DomainError("wick_powers: negative variance");
    WickStack w;
    w.sigma = sigma;
    w.provenance = prov;
    w.powers.push_back(SpectralField::constant(z.lattice(), 1.0));
    w.powers.push_back(z);
    if (max_l >= 2) {
        auto tr = transform_for_degree(z.lattice(), max_l);
        const auto g = tr->to_grid(z);
        std::vector<double> h(g.size());
        for (int l = 2; l <= max_l; ++l) {
            for (std::size_t x = 0; x < g.size(); ++x) h[x] = hermite_eval(l, g[x], sigma);
            w.powers.push_back(tr->from_grid(h));
        }
    }
    return w;
}

// Direct O(|supp|^2) convolution; result lives on the lattice with cutoff M_f + M_g.
inline SpectralField convolve_exact(const SpectralField& f, const SpectralField& g) {
    if (f.lattice().dim() != g.lattice().dim()) throw ShapeError("convolve_exact: dimension mismatch");
    const Lattice& lf = f.lattice();
    const Lattice& lg = g.lattice();
    Lattice out(lf.dim(), lf.cutoff() + lg.cutoff());
    SpectralField h(out);
    std::vector<std::size_t> sg;
    for (std::size_t j = 0; j < lg.size(); ++j)
        if (g[j] != cplx(0.0, 0.0)) sg.push_back(j);
    for (std::size_t i = 0; i < lf.size(); ++i) {
        if (f[i] == cplx(0.0, 0.0)) continue;
        const Mode a = lf.mode(i);
        for (std::size_t j : sg) {
            const Mode b = lg.mode(j);
            h[out.index({a[0] + b[0], a[1] + b[1]})] += f[i] * g[j];
        }
    }
    return h;
}

// Oracle path for small lattices: exact products in coefficient space.
inline WickStack wick_powers_exact(const SpectralField& z, double sigma, int max_l) {
    if (z.lattice().cutoff() > 16) throw SizeError("wick_powers_exact: cutoff above 16");
    if (max_l < 1 || max_l > 3) throw DomainError("wick_powers_exact: max_l must lie in [1,3]");
    const Lattice& lat = z.lattice();
    WickStack w;
    w.sigma = sigma;
    w.powers.push_back(SpectralField::constant(lat, 1.0));
    w.powers.push_back(z);
    if (max_l >= 2) {
        SpectralField z2 = convolve_exact(z, z);
        SpectralField h2 = embed(z2, lat);
        h2[lat.zero_index()] -= sigma;
        w.powers.push_back(h2);
        if (max_l >= 3) {
            SpectralField z3 = embed(convolve_exact(z2, z), lat);
            z3.axpy(-3.0 * sigma, z);
            w.powers.push_back(z3);
        }
    }
    return w;
}

// sum_l C(k,l) :z^l: v^{k-l}; z_powers[0] must be the constant one.
inline SpectralField wick_substitute(int k, std::span<const SpectralField> z_powers, const SpectralField& v) {
    if (k < 1 || k > kMaxHermiteDegree) throw DomainError("wick_substitute: k out of range");
    if (static_cast<int>(z_powers.size()) < k + 1) throw ShapeError("wick_substitute: need Wick powers 0..k");
    std::vector<const SpectralField*> in;
    for (int l = 0; l <= k; ++l) {
        z_powers[l].check_same(v, "wick_substitute");
        in.push_back(&z_powers[l]);
    }
    in.push_back(&v);
    std::vector<double> c(k + 1);
    for (int l = 0; l <= k; ++l) c[l] = binomial(k, l);
    return pointwise(std::span<const SpectralField* const>(in), k, [&](const double* x) {
        const double vv = x[k + 1];
        // Horner in v: sum_l c_l z_l v^{k-l}
        double acc = 0.0;
        for (int l = 0; l <= k; ++l) acc = acc * vv + c[l] * x[l];
        return acc;
    });
}

inline SpectralField wick_substitute(int k, const WickStack& w, const SpectralField& v) {
    return wick_substitute(k, std::span<const SpectralField>(w.powers), v);
}

}  // namespace nlw
