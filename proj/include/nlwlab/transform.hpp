#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "field.hpp"

namespace nlw {

// Smallest 7-smooth integer >= n.
inline int nice_fft_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

// A product of `degree` fields on lattice M has modes up to degree*M; keeping the
// aliases off the lattice needs G >= (degree+1) M + 1.
inline int grid_size_for(int M, int degree) { return nice_fft_size((degree + 1) * M + 1); }

namespace detail {

struct PlanPair {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    ~PlanPair() {
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }
};

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// FFTW_ESTIMATE keeps plans (and therefore rounding) identical from run to run.
inline std::shared_ptr<const PlanPair> plans_for(int d, int G) {
    static std::map<std::pair<int, int>, std::shared_ptr<PlanPair>> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto key = std::make_pair(d, G);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const std::size_t nreal = d == 1 ? G : static_cast<std::size_t>(G) * G;
    const std::size_t ncplx = d == 1 ? G / 2 + 1 : static_cast<std::size_t>(G) * (G / 2 + 1);
    double* r = fftw_alloc_real(nreal);
    fftw_complex* c = fftw_alloc_complex(ncplx);
    auto p = std::make_shared<PlanPair>();
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (d == 1) {
        p->r2c = fftw_plan_dft_r2c_1d(G, r, c, flags);
        p->c2r = fftw_plan_dft_c2r_1d(G, c, r, flags);
    } else {
        p->r2c = fftw_plan_dft_r2c_2d(G, G, r, c, flags);
        p->c2r = fftw_plan_dft_c2r_2d(G, G, c, r, flags);
    }
    fftw_free(r);
    fftw_free(c);
    cache[key] = p;
    return p;
}

}  // namespace detail

// Lattice <-> physical grid of G^d points, x_j = 2 pi j / G.
class GridTransform {
public:
    GridTransform(const Lattice& lat, int G) : lat_(lat), G_(G) {
        if (G < 2 * lat.cutoff() + 1) throw ShapeError("GridTransform: grid too coarse for the lattice");
        plans_ = detail::plans_for(lat.dim(), G);
        half_ = G / 2 + 1;
        npts_ = lat.dim() == 1 ? G : static_cast<std::size_t>(G) * G;
        nspec_ = lat.dim() == 1 ? half_ : static_cast<std::size_t>(G) * half_;
    }

    const Lattice& lattice() const { return lat_; }
    int grid() const { return G_; }
    std::size_t points() const { return npts_; }

    std::vector<double> to_grid(const SpectralField& f) const {
        std::vector<double> out(npts_);
        to_grid(f, out);
        return out;
    }

    void to_grid(const SpectralField& f, std::span<double> out) const {
        if (f.lattice() != lat_) throw ShapeError("to_grid: lattice mismatch");
        std::vector<cplx> spec(nspec_, cplx(0.0, 0.0));
        const int M = lat_.cutoff();
        if (lat_.dim() == 1) {
            for (int n = 0; n <= M; ++n) spec[n] = f[lat_.index({n, 0})];
        } else {
            for (int n0 = -M; n0 <= M; ++n0) {
                const std::size_t row = static_cast<std::size_t>((n0 % G_ + G_) % G_) * half_;
                for (int n1 = 0; n1 <= M; ++n1) spec[row + n1] = f[lat_.index({n0, n1})];
            }
        }
        fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(spec.data()), out.data());
    }

    // Forward transform followed by projection onto the lattice; result is exactly Hermitian.
    SpectralField from_grid(std::span<const double> in) const {
        std::vector<double> buf(in.begin(), in.end());
        std::vector<cplx> spec(nspec_);
        fftw_execute_dft_r2c(plans_->r2c, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
        SpectralField f(lat_);
        const int M = lat_.cutoff();
        const double scale = 1.0 / static_cast<double>(npts_);
        if (lat_.dim() == 1) {
            for (int n = 0; n <= M; ++n) f[lat_.index({n, 0})] = spec[n] * scale;
        } else {
            for (int n0 = -M; n0 <= M; ++n0) {
                const std::size_t row = static_cast<std::size_t>((n0 % G_ + G_) % G_) * half_;
                for (int n1 = 1; n1 <= M; ++n1) f[lat_.index({n0, n1})] = spec[row + n1] * scale;
            }
            for (int n0 = 0; n0 <= M; ++n0) f[lat_.index({n0, 0})] = spec[static_cast<std::size_t>(n0) * half_] * scale;
        }
        // mirror the non-negative half so that c(-n) = conj(c(n)) holds bit-exactly
        for (std::size_t i = 0; i < lat_.size(); ++i) {
            const Mode n = lat_.mode(i);
            if (n[1] < 0 || (n[1] == 0 && n[0] < 0)) f[i] = std::conj(f[lat_.mirror(i)]);
        }
        f[lat_.zero_index()] = cplx(f[lat_.zero_index()].real(), 0.0);
        return f;
    }

private:
    Lattice lat_;
    int G_;
    std::size_t half_ = 0, npts_ = 0, nspec_ = 0;
    std::shared_ptr<const detail::PlanPair> plans_;
};

inline std::shared_ptr<const GridTransform> transform_for(const Lattice& lat, int G) {
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const GridTransform>> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_tuple(lat.dim(), lat.cutoff(), G);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    auto t = std::make_shared<const GridTransform>(lat, G);
    cache[key] = t;
    return t;
}

inline std::shared_ptr<const GridTransform> transform_for_degree(const Lattice& lat, int degree) {
    return transform_for(lat, grid_size_for(lat.cutoff(), degree));
}

// Pointwise map of several fields: out(x) = fn(f_0(x), ..., f_{k-1}(x)), projected back.
// `degree` is the polynomial degree of fn, used to size the grid.
template <class Fn>
SpectralField pointwise(std::span<const SpectralField* const> inputs, int degree, Fn&& fn) {
    if (inputs.empty()) throw ShapeError("pointwise: no inputs");
    const Lattice& lat = inputs[0]->lattice();
    for (auto* f : inputs)
        if (f->lattice() != lat) throw ShapeError("pointwise: fields live on different lattices");
    auto tr = transform_for_degree(lat, std::max(degree, 1));
    const std::size_t np = tr->points();
    std::vector<std::vector<double>> grids;
    grids.reserve(inputs.size());
    for (auto* f : inputs) grids.push_back(tr->to_grid(*f));
    std::vector<double> out(np);
    std::vector<double> vals(inputs.size());
    for (std::size_t x = 0; x < np; ++x) {
        for (std::size_t k = 0; k < grids.size(); ++k) vals[k] = grids[k][x];
        out[x] = fn(static_cast<const double*>(vals.data()));
    }
    return tr->from_grid(out);
}

inline SpectralField dealiased_product(const SpectralField& f, const SpectralField& g) {
    f.check_same(g, "dealiased_product");
    const SpectralField* in[] = {&f, &g};
    return pointwise(std::span<const SpectralField* const>(in, 2), 2, [](const double* v) { return v[0] * v[1]; });
}

inline SpectralField dealiased_cube(const SpectralField& f) {
    const SpectralField* in[] = {&f};
    return pointwise(std::span<const SpectralField* const>(in, 1), 3, [](const double* v) { return v[0] * v[0] * v[0]; });
}

// Sup over a grid oversampled `factor` times relative to 2M+1 points per axis.
inline double grid_sup(const SpectralField& f, int factor = 4) {
    const int G = nice_fft_size(factor * (2 * f.lattice().cutoff() + 1));
    auto tr = transform_for(f.lattice(), G);
    auto v = tr->to_grid(f);
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Spatial mean of |f|^2 on the grid (Plancherel check).
inline double grid_mean_square(const SpectralField& f, int G) {
    auto tr = transform_for(f.lattice(), G);
    auto v = tr->to_grid(f);
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc / static_cast<double>(v.size());
}

}  // namespace nlw
