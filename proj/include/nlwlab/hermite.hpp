#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace nlw {

inline constexpr int kMaxHermiteDegree = 16;

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

// H_k(x; sigma) by H_k = x H_{k-1} - (k-1) sigma H_{k-2}.
template <class T>
T hermite_eval(int k, T x, double sigma) {
    if (k < 0 || k > kMaxHermiteDegree) throw DomainError("hermite_eval: degree out of range");
    if (sigma < 0) throw DomainError("hermite_eval: negative variance");
    if (k == 0) return T(1);
    T hm1 = T(1), h = x;
    for (int j = 2; j <= k; ++j) {
        T next = x * h - static_cast<double>(j - 1) * sigma * hm1;
        hm1 = h;
        h = next;
    }
    return h;
}

// All H_0..H_kmax at one point; out must hold kmax+1 entries.
template <class T>
void hermite_all(int kmax, T x, double sigma, T* out) {
    out[0] = T(1);
    if (kmax >= 1) out[1] = x;
    for (int j = 2; j <= kmax; ++j) out[j] = x * out[j - 1] - static_cast<double>(j - 1) * sigma * out[j - 2];
}

// Coefficients in powers of x, lowest first.
class HermitePoly {
public:
    HermitePoly(int degree, double sigma) : degree_(degree), sigma_(sigma) {
        if (degree < 0 || degree > kMaxHermiteDegree) throw DomainError("HermitePoly: degree out of range");
        if (sigma < 0) throw DomainError("HermitePoly: negative variance");
        std::vector<double> prev{1.0}, cur{1.0};
        if (degree >= 1) cur = {0.0, 1.0};
        for (int j = 2; j <= degree; ++j) {
            std::vector<double> next(j + 1, 0.0);
            for (int i = 0; i < j; ++i) next[i + 1] += cur[i];
            for (int i = 0; i + 1 < j; ++i) next[i] -= (j - 1) * sigma * prev[i];
            prev = std::move(cur);
            cur = std::move(next);
        }
        coeffs_ = std::move(cur);
    }

    int degree() const { return degree_; }
    double sigma() const { return sigma_; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    double operator()(double x) const {
        double r = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) r = r * x + *it;
        return r;
    }

private:
    int degree_;
    double sigma_;
    std::vector<double> coeffs_;
};

// (H_k(x+y), sum_l C(k,l) H_l(y) x^{k-l}).
inline std::pair<double, double> hermite_addition_check(int k, double x, double y, double sigma) {
    if (k < 0 || k > 8) throw DomainError("hermite_addition_check: k must lie in [0,8]");
    const double lhs = hermite_eval(k, x + y, sigma);
    double rhs = 0.0;
    for (int l = 0; l <= k; ++l) rhs += binomial(k, l) * hermite_eval(l, y, sigma) * std::pow(x, k - l);
    return {lhs, rhs};
}

}  // namespace nlw
