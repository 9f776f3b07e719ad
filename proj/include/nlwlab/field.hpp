#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nlw {

using cplx = std::complex<double>;
using Mode = std::array<int, 2>;  // second entry is 0 when d = 1

// Square lattice |n_i| <= M, d in {1,2}. Index is row-major in (n_0, n_1).
class Lattice {
public:
    Lattice() = default;
    Lattice(int d, int M) : d_(d), M_(M) {
        if (d != 1 && d != 2) throw ShapeError("Lattice: dimension must be 1 or 2");
        if (M < 0) throw ShapeError("Lattice: negative cutoff");
        if (M > 4096) throw SizeError("Lattice: cutoff above 4096");
        side_ = 2 * M + 1;
        size_ = d == 1 ? static_cast<std::size_t>(side_) : static_cast<std::size_t>(side_) * side_;
        auto br = std::make_shared<std::vector<double>>(size_);
        for (std::size_t i = 0; i < size_; ++i) (*br)[i] = std::sqrt(1.0 + static_cast<double>(norm2(i)));
        brackets_ = std::move(br);
    }

    int dim() const { return d_; }
    int cutoff() const { return M_; }
    int side() const { return side_; }
    std::size_t size() const { return size_; }

    Mode mode(std::size_t i) const {
        if (d_ == 1) return {static_cast<int>(i) - M_, 0};
        return {static_cast<int>(i / side_) - M_, static_cast<int>(i % side_) - M_};
    }
    bool contains(const Mode& n) const {
        if (std::abs(n[0]) > M_) return false;
        return d_ == 1 ? n[1] == 0 : std::abs(n[1]) <= M_;
    }
    std::size_t index(const Mode& n) const {
        if (d_ == 1) return static_cast<std::size_t>(n[0] + M_);
        return static_cast<std::size_t>(n[0] + M_) * side_ + static_cast<std::size_t>(n[1] + M_);
    }
    // Index of -n.
    std::size_t mirror(std::size_t i) const { return size_ - 1 - i; }
    std::size_t zero_index() const { return (size_ - 1) / 2; }

    long norm2(std::size_t i) const {
        const Mode n = mode(i);
        return static_cast<long>(n[0]) * n[0] + static_cast<long>(n[1]) * n[1];
    }
    double bracket(std::size_t i) const { return (*brackets_)[i]; }
    const std::vector<double>& brackets() const { return *brackets_; }

    bool operator==(const Lattice& o) const { return d_ == o.d_ && M_ == o.M_; }
    bool operator!=(const Lattice& o) const { return !(*this == o); }

private:
    int d_ = 1;
    int M_ = 0;
    int side_ = 1;
    std::size_t size_ = 1;
    std::shared_ptr<const std::vector<double>> brackets_ = std::make_shared<std::vector<double>>(1, 1.0);
};

inline double bracket(const Mode& n, double mass = 1.0) {
    return std::sqrt(mass + static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1]);
}

// Real field as Hermitian Fourier coefficients; u(x) = sum_n c_n e^{i n.x}.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const Lattice& lat) : lat_(lat), c_(lat.size(), cplx(0.0, 0.0)) {}

    static SpectralField constant(const Lattice& lat, double value) {
        SpectralField f(lat);
        f.c_[lat.zero_index()] = value;
        return f;
    }

    // e_n + e_{-n} style helper: sets c(n) = a and c(-n) = conj(a).
    void set_pair(const Mode& n, cplx a) {
        if (!lat_.contains(n)) throw ShapeError("set_pair: mode outside lattice");
        const std::size_t i = lat_.index(n);
        if (i == lat_.mirror(i)) {
            c_[i] = cplx(a.real(), 0.0);
        } else {
            c_[i] = a;
            c_[lat_.mirror(i)] = std::conj(a);
        }
    }

    const Lattice& lattice() const { return lat_; }
    std::size_t size() const { return c_.size(); }
    cplx& operator[](std::size_t i) { return c_[i]; }
    const cplx& operator[](std::size_t i) const { return c_[i]; }
    cplx at(const Mode& n) const { return lat_.contains(n) ? c_[lat_.index(n)] : cplx(0.0, 0.0); }
    std::vector<cplx>& coeffs() { return c_; }
    const std::vector<cplx>& coeffs() const { return c_; }

    bool is_hermitian(double tol = 0.0) const {
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (std::abs(c_[i] - std::conj(c_[lat_.mirror(i)])) > tol) return false;
        return true;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same(o, "operator+=");
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same(o, "operator-=");
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (auto& v : c_) v *= a;
        return *this;
    }
    // this += a * o
    SpectralField& axpy(double a, const SpectralField& o) {
        check_same(o, "axpy");
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * o.c_[i];
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

    void check_same(const SpectralField& o, const char* where) const {
        if (lat_ != o.lat_) throw ShapeError(std::string(where) + ": fields live on different lattices");
    }

private:
    Lattice lat_;
    std::vector<cplx> c_{cplx(0.0, 0.0)};
};

struct FieldPair {
    SpectralField pos;
    SpectralField vel;

    FieldPair() = default;
    FieldPair(SpectralField u, SpectralField v) : pos(std::move(u)), vel(std::move(v)) {
        if (pos.lattice() != vel.lattice()) throw ShapeError("FieldPair: components on different lattices");
    }
    explicit FieldPair(const Lattice& lat) : pos(lat), vel(lat) {}

    const Lattice& lattice() const { return pos.lattice(); }

    FieldPair& operator+=(const FieldPair& o) {
        pos += o.pos;
        vel += o.vel;
        return *this;
    }
    FieldPair& operator*=(double a) {
        pos *= a;
        vel *= a;
        return *this;
    }
    friend FieldPair operator+(FieldPair a, const FieldPair& b) { return a += b; }
    friend FieldPair operator*(double s, FieldPair a) { return a *= s; }
};

// Copy onto another lattice: modes outside the target are dropped, new modes are zero.
inline SpectralField embed(const SpectralField& f, const Lattice& target) {
    if (f.lattice().dim() != target.dim()) throw ShapeError("embed: dimension mismatch");
    SpectralField g(target);
    const Lattice& src = f.lattice();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Mode n = src.mode(i);
        if (target.contains(n)) g[target.index(n)] = f[i];
    }
    return g;
}

inline FieldPair embed(const FieldPair& p, const Lattice& target) {
    return {embed(p.pos, target), embed(p.vel, target)};
}

// ---- norms ----

inline double sobolev_norm(const SpectralField& f, double s) {
    const auto& br = f.lattice().brackets();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::norm(f[i]);
        if (a != 0.0) acc += std::pow(br[i], 2.0 * s) * a;
    }
    return std::sqrt(acc);
}

inline double fourier_lebesgue_norm(const SpectralField& f, double s, double p) {
    if (!(p >= 1.0)) throw DomainError("fourier_lebesgue_norm: p must be >= 1");
    const auto& br = f.lattice().brackets();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::pow(br[i], s) * std::abs(f[i]));
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        if (a == 0.0) continue;
        const double w = s == 0.0 ? a : std::pow(br[i], s) * a;
        acc += p == 1.0 ? w : std::pow(w, p);
    }
    return p == 1.0 ? acc : std::pow(acc, 1.0 / p);
}

// ||u0||_{H^s} and ||u1||_{H^{s-1}} combined in l^2.
inline double sobolev_norm(const FieldPair& p, double s) {
    const double a = sobolev_norm(p.pos, s), b = sobolev_norm(p.vel, s - 1.0);
    return std::sqrt(a * a + b * b);
}

inline double fourier_lebesgue_norm(const FieldPair& p, double s, double q) {
    return fourier_lebesgue_norm(p.pos, s, q) + fourier_lebesgue_norm(p.vel, s - 1.0, q);
}

inline double l2_distance(const SpectralField& a, const SpectralField& b) {
    a.check_same(b, "l2_distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc);
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    a.check_same(b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---- multipliers ----

// m is called as m(Mode, index) and returns a complex (or real) factor.
template <class Fn>
SpectralField multiplier_apply(const SpectralField& f, Fn&& m) {
    SpectralField g(f.lattice());
    const Lattice& lat = f.lattice();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] == cplx(0.0, 0.0)) continue;
        g[i] = f[i] * static_cast<cplx>(m(lat.mode(i), i));
    }
    return g;
}

// Euclidean ball |n| <= N.
inline SpectralField project(const SpectralField& f, double N) {
    const double n2 = N * N;
    return multiplier_apply(f, [&](const Mode&, std::size_t i) {
        return static_cast<double>(f.lattice().norm2(i)) <= n2 + 1e-9 ? 1.0 : 0.0;
    });
}

inline FieldPair project(const FieldPair& p, double N) { return {project(p.pos, N), project(p.vel, N)}; }

// <nabla>^alpha
inline SpectralField bessel_potential(const SpectralField& f, double alpha) {
    const auto& br = f.lattice().brackets();
    return multiplier_apply(f, [&](const Mode&, std::size_t i) { return std::pow(br[i], alpha); });
}

// (S(t) data, d/dt S(t) data) for u'' + (m - Lap) u = 0.
inline FieldPair linear_flow(const FieldPair& data, double t, double mass = 1.0) {
    const Lattice& lat = data.lattice();
    FieldPair out(lat);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const double w = std::sqrt(mass + static_cast<double>(lat.norm2(i)));
        const double c = std::cos(t * w);
        const double sw = w > 0 ? std::sin(t * w) / w : t;
        const double ws = w * std::sin(t * w);
        out.pos[i] = c * data.pos[i] + sw * data.vel[i];
        out.vel[i] = -ws * data.pos[i] + c * data.vel[i];
    }
    return out;
}

}  // namespace nlw
