#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "gff.hpp"
#include "hermite.hpp"
#include "quadrature.hpp"
#include "transform.hpp"

namespace nlw {

enum class Variant { Linear, PlainCubic, TruncatedWick, ResidualWick, SigmaRenormalized };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Linear: return "linear";
        case Variant::PlainCubic: return "plain-cubic";
        case Variant::TruncatedWick: return "truncated-wick";
        case Variant::ResidualWick: return "residual-wick";
        case Variant::SigmaRenormalized: return "sigma-renormalized";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    for (Variant v : {Variant::Linear, Variant::PlainCubic, Variant::TruncatedWick, Variant::ResidualWick,
                      Variant::SigmaRenormalized})
        if (s == variant_name(v)) return v;
    throw DomainError("unknown equation variant '" + s + "'");
}

// Free evolution z(t) = S(t) data (optionally ball-truncated) with its Wick variance.
struct WickSource {
    FieldPair data;
    double truncation = -1.0;  // Euclidean radius; negative keeps the whole lattice
    double sigma = 0.0;
};

// Randomized smooth data for the sigma(t)-renormalized equation.
struct SmoothSource {
    FieldPair realization;
    std::function<double(double)> sigma;
};

struct EquationSpec {
    Variant variant = Variant::PlainCubic;
    double mass = 1.0;
    int power = 3;
    double truncation = 0.0;  // N of the truncated Wick equation
    double sigma = 0.0;       // sigma_N of the truncated Wick equation
    std::shared_ptr<const WickSource> wick;
    std::shared_ptr<const SmoothSource> smooth;

    static EquationSpec linear(double mass = 1.0) {
        EquationSpec e;
        e.variant = Variant::Linear;
        e.mass = mass;
        return e;
    }
    static EquationSpec plain_cubic(double mass = 1.0) {
        EquationSpec e;
        e.mass = mass;
        return e;
    }
    // sigma < 0 selects sigma_N of the Euclidean ball.
    static EquationSpec truncated_wick(double N, int d, double sigma = -1.0) {
        EquationSpec e;
        e.variant = Variant::TruncatedWick;
        e.truncation = N;
        e.sigma = sigma >= 0 ? sigma : sigma_truncated(static_cast<int>(N), d);
        return e;
    }
    static EquationSpec residual_wick(WickSource src) {
        EquationSpec e;
        e.variant = Variant::ResidualWick;
        e.wick = std::make_shared<const WickSource>(std::move(src));
        return e;
    }
    static EquationSpec sigma_renormalized(SmoothSource src, int k = 3) {
        if (k < 3 || k % 2 == 0 || k > 15) throw DomainError("sigma_renormalized: k must be odd and >= 3");
        EquationSpec e;
        e.variant = Variant::SigmaRenormalized;
        e.power = k;
        e.smooth = std::make_shared<const SmoothSource>(std::move(src));
        return e;
    }
};

// Evaluates the nonlinearity F(u, t) of u'' + (m - Lap) u + F = 0 on one lattice.
class Nonlinearity {
public:
    Nonlinearity(const EquationSpec& spec, const Lattice& lat, double guard)
        : spec_(spec), lat_(lat), guard_(guard) {
        const int degree = spec.variant == Variant::SigmaRenormalized ? spec.power : 3;
        tr_ = transform_for_degree(lat, degree);
        if (spec.variant == Variant::ResidualWick) {
            if (!spec.wick) throw PreconditionError("residual-wick needs a Wick source");
            if (spec.wick->data.lattice() != lat) throw ShapeError("residual-wick: source on another lattice");
        }
        if (spec.variant == Variant::SigmaRenormalized) {
            if (!spec.smooth) throw PreconditionError("sigma-renormalized needs a smooth source");
            if (spec.smooth->realization.lattice() != lat) throw ShapeError("sigma-renormalized: source on another lattice");
        }
    }

    bool is_zero() const { return spec_.variant == Variant::Linear; }

    SpectralField operator()(const SpectralField& u, double t) {
        switch (spec_.variant) {
            case Variant::Linear: return SpectralField(lat_);
            case Variant::PlainCubic: {
                auto g = grid_of(u, t);
                for (double& x : g) x = x * x * x;
                return tr_->from_grid(g);
            }
            case Variant::TruncatedWick: {
                auto g = grid_of(project(u, spec_.truncation), t);
                for (double& x : g) x = hermite_eval(3, x, spec_.sigma);
                return project(tr_->from_grid(g), spec_.truncation);
            }
            case Variant::ResidualWick: {
                const auto& wk = wick_grids(t);
                auto g = grid_of(u, t);
                for (std::size_t x = 0; x < g.size(); ++x) {
                    const double v = g[x];
                    g[x] = wk[3][x] + 3.0 * wk[2][x] * v + 3.0 * wk[1][x] * v * v + v * v * v;
                }
                SpectralField F = tr_->from_grid(g);
                return spec_.wick->truncation >= 0 ? project(F, spec_.wick->truncation) : F;
            }
            case Variant::SigmaRenormalized: {
                const auto& zg = smooth_grid(t);
                const double sig = spec_.smooth->sigma(t);
                auto g = grid_of(u, t);
                for (std::size_t x = 0; x < g.size(); ++x) g[x] = hermite_eval(spec_.power, zg[x] + g[x], sig);
                return tr_->from_grid(g);
            }
        }
        return SpectralField(lat_);
    }

    // Conserved energy where one exists; NaN for the forced (time-dependent) variants.
    double energy(const FieldPair& s) const {
        double quad = 0.0;
        for (std::size_t i = 0; i < lat_.size(); ++i)
            quad += (spec_.mass + static_cast<double>(lat_.norm2(i))) * std::norm(s.pos[i]) + std::norm(s.vel[i]);
        quad *= 0.5;
        switch (spec_.variant) {
            case Variant::Linear: return quad;
            case Variant::PlainCubic: return quad + 0.25 * grid_mean(s.pos, [](double x) { return x * x * x * x; });
            case Variant::TruncatedWick: {
                const double sig = spec_.sigma;
                return quad + 0.25 * grid_mean(project(s.pos, spec_.truncation),
                                               [sig](double x) { return hermite_eval(4, x, sig); });
            }
            default: return std::numeric_limits<double>::quiet_NaN();
        }
    }

    const EquationSpec& spec() const { return spec_; }

private:
    std::vector<double> grid_of(const SpectralField& u, double t) const {
        auto g = tr_->to_grid(u);
        for (double x : g)
            if (!(std::abs(x) <= guard_)) {
                std::ostringstream os;
                os << "grid sup above " << guard_ << " at t = " << t;
                throw BlowupError(os.str(), t);
            }
        return g;
    }

    template <class Fn>
    double grid_mean(const SpectralField& u, Fn f) const {
        auto g = tr_->to_grid(u);
        double acc = 0.0;
        for (double x : g) acc += f(x);
        return acc / static_cast<double>(g.size());
    }

    // H_l(z(t)) for l = 0..3 on the grid, cached by time.
    const std::array<std::vector<double>, 4>& wick_grids(double t) {
        if (auto it = wick_cache_.find(t); it != wick_cache_.end()) return it->second;
        if (wick_cache_.size() > 16) wick_cache_.clear();
        const auto& src = *spec_.wick;
        SpectralField z = linear_flow(src.data, t, spec_.mass).pos;
        if (src.truncation >= 0) z = project(z, src.truncation);
        const auto zg = tr_->to_grid(z);
        std::array<std::vector<double>, 4> w;
        for (int l = 0; l <= 3; ++l) {
            w[l].resize(zg.size());
            for (std::size_t x = 0; x < zg.size(); ++x) w[l][x] = hermite_eval(l, zg[x], src.sigma);
        }
        return wick_cache_.emplace(t, std::move(w)).first->second;
    }

    const std::vector<double>& smooth_grid(double t) {
        if (auto it = smooth_cache_.find(t); it != smooth_cache_.end()) return it->second;
        if (smooth_cache_.size() > 16) smooth_cache_.clear();
        const SpectralField z = linear_flow(spec_.smooth->realization, t, spec_.mass).pos;
        return smooth_cache_.emplace(t, tr_->to_grid(z)).first->second;
    }

    EquationSpec spec_;
    Lattice lat_;
    double guard_;
    std::shared_ptr<const GridTransform> tr_;
    std::map<double, std::array<std::vector<double>, 4>> wick_cache_;
    std::map<double, std::vector<double>> smooth_cache_;
};

struct StepperOptions {
    int nodes = 3;               // Gauss-Legendre collocation nodes per step
    double picard_tol = 1e-13;   // relative FL^1 increment
    int max_corrections = 30;
    int fixed_corrections = 0;   // > 0: exactly this many corrections, no tolerance test
    double blowup_guard = 1e8;
};

// Exponential Gauss-Legendre collocation: exact linear propagator, Picard iteration on
// the Duhamel integral of the nonlinearity at the collocation nodes.
class Stepper {
public:
    Stepper(const EquationSpec& spec, const Lattice& lat, double dt, StepperOptions opt = {})
        : lat_(lat), dt_(dt), opt_(opt), nl_(spec, lat, opt.blowup_guard), mass_(spec.mass) {
        if (dt == 0.0) throw DomainError("Stepper: dt must be nonzero");
        if (opt.nodes < 1 || opt.nodes > 8) throw DomainError("Stepper: nodes must lie in [1,8]");
        build_tables();
    }

    double dt() const { return dt_; }
    Nonlinearity& nonlinearity() { return nl_; }
    int last_corrections() const { return last_iters_; }

    FieldPair step(const FieldPair& s, double t) {
        if (s.lattice() != lat_) throw ShapeError("Stepper::step: state on another lattice");
        const int Q = opt_.nodes;
        const std::size_t n = lat_.size();
        std::vector<SpectralField> lin(Q, SpectralField(lat_)), U, F(Q, SpectralField(lat_));
        for (std::size_t i = 0; i < n; ++i) {
            const double* tb = row(i);
            for (int q = 0; q < Q; ++q) lin[q][i] = tb[q] * s.pos[i] + tb[Q + q] * s.vel[i];
        }
        U = lin;
        last_iters_ = 0;
        if (!nl_.is_zero()) {
            const int iters = opt_.fixed_corrections > 0 ? opt_.fixed_corrections : opt_.max_corrections;
            bool converged = opt_.fixed_corrections > 0;
            for (int it = 0; it < iters; ++it) {
                for (int q = 0; q < Q; ++q) F[q] = nl_(U[q], t + c_[q] * dt_);
                double change = 0.0, scale = 0.0;
                for (int q = 0; q < Q; ++q) {
                    SpectralField next = lin[q];
                    for (std::size_t i = 0; i < n; ++i) {
                        const double* A = row(i) + 2 * Q;
                        cplx acc = 0.0;
                        for (int p = 0; p < Q; ++p) acc += A[q * Q + p] * F[p][i];
                        next[i] -= acc;
                    }
                    change = std::max(change, fourier_lebesgue_norm(next - U[q], 0.0, 1.0));
                    scale = std::max(scale, fourier_lebesgue_norm(next, 0.0, 1.0));
                    U[q] = std::move(next);
                }
                last_iters_ = it + 1;
                if (opt_.fixed_corrections == 0 && change <= opt_.picard_tol * std::max(1.0, scale)) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                std::ostringstream os;
                os << "Picard corrections did not converge in step at t = " << t << " (dt = " << dt_ << ")";
                throw AccuracyError(os.str());
            }
            for (int q = 0; q < Q; ++q) F[q] = nl_(U[q], t + c_[q] * dt_);
        }
        FieldPair out(lat_);
        for (std::size_t i = 0; i < n; ++i) {
            const double* tb = row(i);
            const double* B = tb + 2 * Q + Q * Q;
            const double* C = B + Q;
            const double* E = C + Q;  // cos, sin/w, -w sin
            cplx fb = 0.0, fc = 0.0;
            if (!nl_.is_zero())
                for (int p = 0; p < Q; ++p) {
                    fb += B[p] * F[p][i];
                    fc += C[p] * F[p][i];
                }
            out.pos[i] = E[0] * s.pos[i] + E[1] * s.vel[i] - fb;
            out.vel[i] = E[2] * s.pos[i] + E[0] * s.vel[i] - fc;
        }
        return out;
    }

private:
    const double* row(std::size_t i) const { return &table_[static_cast<std::size_t>(slot_[lat_.norm2(i)]) * stride_]; }

    static double sin_over(double w, double x) { return w > 0 ? std::sin(w * x) / w : x; }

    void build_tables() {
        const int Q = opt_.nodes;
        const auto g = gauss_legendre(Q);
        c_ = g.x;
        LagrangeBasis basis(c_);
        stride_ = 2 * Q + Q * Q + 2 * Q + 3;
        long maxn2 = 0;
        for (std::size_t i = 0; i < lat_.size(); ++i) maxn2 = std::max(maxn2, lat_.norm2(i));
        slot_.assign(static_cast<std::size_t>(maxn2) + 1, -1);
        int nslots = 0;
        for (std::size_t i = 0; i < lat_.size(); ++i)
            if (slot_[lat_.norm2(i)] < 0) slot_[lat_.norm2(i)] = nslots++;
        table_.assign(static_cast<std::size_t>(nslots) * stride_, 0.0);
        const auto panel_rule = gauss_legendre(16);
        for (std::size_t n2 = 0; n2 < slot_.size(); ++n2) {
            if (slot_[n2] < 0) continue;
            double* tb = &table_[static_cast<std::size_t>(slot_[n2]) * stride_];
            const double w = std::sqrt(mass_ + static_cast<double>(n2));
            for (int q = 0; q < Q; ++q) {
                tb[q] = std::cos(w * c_[q] * dt_);
                tb[Q + q] = sin_over(w, c_[q] * dt_);
            }
            // int_0^{c dt} sin(w(c dt - tau))/w l_p(tau/dt) dtau = dt int_0^c sin_over(w, dt(c - s)) l_p(s) ds
            auto kernel_integral = [&](double c, auto&& kern, double* out) {
                for (int p = 0; p < Q; ++p) out[p] = 0.0;
                const int panels = 1 + static_cast<int>(std::abs(w * dt_ * c));
                for (int k = 0; k < panels; ++k) {
                    const double a = c * k / panels, b = c * (k + 1) / panels;
                    for (std::size_t r = 0; r < panel_rule.x.size(); ++r) {
                        const double s = a + (b - a) * panel_rule.x[r];
                        const double kv = kern(dt_ * (c - s));
                        const auto lv = basis.eval(s);
                        for (int p = 0; p < Q; ++p) out[p] += dt_ * (b - a) * panel_rule.w[r] * kv * lv[p];
                    }
                }
            };
            auto ksin = [&](double x) { return sin_over(w, x); };
            auto kcos = [&](double x) { return std::cos(w * x); };
            for (int q = 0; q < Q; ++q) kernel_integral(c_[q], ksin, tb + 2 * Q + q * Q);
            double* B = tb + 2 * Q + Q * Q;
            double* C = B + Q;
            double* E = C + Q;
            kernel_integral(1.0, ksin, B);
            kernel_integral(1.0, kcos, C);
            E[0] = std::cos(w * dt_);
            E[1] = sin_over(w, dt_);
            E[2] = -w * std::sin(w * dt_);
        }
    }

    Lattice lat_;
    double dt_;
    StepperOptions opt_;
    Nonlinearity nl_;
    double mass_;
    std::vector<double> c_;
    std::vector<int> slot_;
    std::vector<double> table_;
    std::size_t stride_ = 0;
    int last_iters_ = 0;
};

inline double default_dt(const FieldPair& data) {
    const double a = fourier_lebesgue_norm(data, 0.0, 1.0);
    return a > 0 ? std::min(0.1 / a, 0.05) : 0.05;
}

struct ObserveSpec {
    int every = 1;                  // record every k-th step (plus the final state)
    bool keep_positions = false;
    bool keep_states = false;
    bool energy = true;
    std::vector<double> sobolev;    // H^s norms of the position
    std::vector<std::pair<double, double>> fourier_lebesgue;  // (s, p)
};

struct Trajectory {
    std::string variant;
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> sobolev_s;
    std::vector<std::pair<double, double>> fl_sp;
    std::vector<std::vector<double>> sobolev;  // [time][k]
    std::vector<std::vector<double>> fl;       // [time][k]
    std::vector<SpectralField> positions;
    std::vector<FieldPair> states;
    FieldPair final_state;
    double final_time = 0.0;
    bool blowup = false;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    std::string blowup_message;
    std::size_t steps = 0;
    double dt = 0.0;

    std::string to_csv() const {
        std::ostringstream os;
        os.precision(17);
        auto g = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            return std::string(buf);
        };
        os << "t,energy";
        for (double s : sobolev_s) os << ",Hs[" << g(s) << "]";
        for (auto [s, p] : fl_sp) os << ",FL[" << g(s) << ";" << g(p) << "]";
        os << "\n";
        for (std::size_t k = 0; k < times.size(); ++k) {
            os << times[k] << "," << energy[k];
            for (double v : sobolev[k]) os << "," << v;
            for (double v : fl[k]) os << "," << v;
            os << "\n";
        }
        return os.str();
    }
};

inline void record(Trajectory& tr, const ObserveSpec& obs, Nonlinearity& nl, const FieldPair& s, double t) {
    tr.times.push_back(t);
    tr.energy.push_back(obs.energy ? nl.energy(s) : std::numeric_limits<double>::quiet_NaN());
    std::vector<double> hs, fl;
    for (double sv : obs.sobolev) hs.push_back(sobolev_norm(s.pos, sv));
    for (auto [sv, p] : obs.fourier_lebesgue) fl.push_back(fourier_lebesgue_norm(s.pos, sv, p));
    tr.sobolev.push_back(std::move(hs));
    tr.fl.push_back(std::move(fl));
    if (obs.keep_positions) tr.positions.push_back(s.pos);
    if (obs.keep_states) tr.states.push_back(s);
}

// Integrates from t = 0 to t_end (negative t_end runs backwards). dt <= 0 selects default_dt.
// Blowup truncates the trajectory and sets the flag instead of throwing.
inline Trajectory solve(const EquationSpec& spec, const FieldPair& data, double t_end, double dt = 0.0,
                        const ObserveSpec& obs = {}, const StepperOptions& opt = {}) {
    if (t_end == 0.0) throw DomainError("solve: t_end must be nonzero");
    const double h0 = dt > 0 ? dt : default_dt(data);
    const std::size_t nsteps = static_cast<std::size_t>(std::ceil(std::abs(t_end) / h0 - 1e-9));
    const double h = t_end / static_cast<double>(nsteps);
    Stepper st(spec, data.lattice(), h, opt);
    Trajectory tr;
    tr.variant = variant_name(spec.variant);
    tr.sobolev_s = obs.sobolev;
    tr.fl_sp = obs.fourier_lebesgue;
    tr.dt = h;
    FieldPair s = data;
    double t = 0.0;
    record(tr, obs, st.nonlinearity(), s, t);
    const int every = std::max(1, obs.every);
    for (std::size_t k = 1; k <= nsteps; ++k) {
        try {
            s = st.step(s, t);
        } catch (const BlowupError& e) {
            tr.blowup = true;
            tr.blowup_time = t;
            tr.blowup_message = e.what();
            break;
        }
        t = k == nsteps ? t_end : h * static_cast<double>(k);
        tr.steps = k;
        if (k % every == 0 || k == nsteps) record(tr, obs, st.nonlinearity(), s, t);
    }
    tr.final_state = s;
    tr.final_time = t;
    return tr;
}

// sup over common recorded times of ||u(t) - v(t)||_{L^2}.
inline double approximation_gap(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size()) throw ShapeError("approximation_gap: different time grids");
    if (a.positions.size() != a.times.size() || b.positions.size() != b.times.size())
        throw ShapeError("approximation_gap: trajectories must keep positions");
    double gap = 0.0;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        if (std::abs(a.times[k] - b.times[k]) > 1e-12 * std::max(1.0, std::abs(a.times[k])))
            throw ShapeError("approximation_gap: different time grids");
        gap = std::max(gap, l2_distance(a.positions[k], b.positions[k]));
    }
    return gap;
}

}  // namespace nlw
