#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace nlw {

struct GaussRule {
    std::vector<double> x;  // nodes on [0,1]
    std::vector<double> w;  // weights summing to 1
};

// Gauss-Legendre on [0,1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
    if (n < 1 || n > 256) throw DomainError("gauss_legendre: order out of range");
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 1.0 / ((1.0 - z * z) * dp * dp);
        r.x[i] = 0.5 * (1.0 - z);
        r.x[n - 1 - i] = 0.5 * (1.0 + z);
        r.w[i] = w;
        r.w[n - 1 - i] = w;
    }
    return r;
}

// Lagrange basis on the given nodes, evaluated at s (barycentric form).
class LagrangeBasis {
public:
    explicit LagrangeBasis(std::vector<double> nodes) : x_(std::move(nodes)), bw_(x_.size(), 1.0) {
        for (std::size_t j = 0; j < x_.size(); ++j)
            for (std::size_t k = 0; k < x_.size(); ++k)
                if (k != j) bw_[j] /= (x_[j] - x_[k]);
    }

    std::size_t size() const { return x_.size(); }

    std::vector<double> eval(double s) const {
        std::vector<double> out(x_.size(), 0.0);
        for (std::size_t j = 0; j < x_.size(); ++j)
            if (s == x_[j]) {
                out[j] = 1.0;
                return out;
            }
        double den = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            out[j] = bw_[j] / (s - x_[j]);
            den += out[j];
        }
        for (auto& v : out) v /= den;
        return out;
    }

    // int_0^tau l_p(s) ds for each p; exact (basis has degree n-1).
    std::vector<double> integrate_to(double tau) const {
        const auto g = gauss_legendre(static_cast<int>(x_.size()) / 2 + 2);
        std::vector<double> acc(x_.size(), 0.0);
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const auto v = eval(tau * g.x[q]);
            for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += tau * g.w[q] * v[p];
        }
        return acc;
    }

private:
    std::vector<double> x_, bw_;
};

}  // namespace nlw
