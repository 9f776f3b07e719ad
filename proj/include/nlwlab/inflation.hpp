#pragma once
// Norm-inflation construction: block data, parameter plans for the three regimes, the
// condition checker, and the deterministic / almost-sure experiments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "nlwlab/errors.hpp"
#include "nlwlab/field.hpp"
#include "nlwlab/gff.hpp"
#include "nlwlab/jobs.hpp"
#include "nlwlab/lwp.hpp"
#include "nlwlab/solver.hpp"
#include "nlwlab/stats.hpp"
#include "nlwlab/trees.hpp"

namespace nlw {

// N^n (log N)^l
struct PowerLaw {
    double n = 0.0;
    double log = 0.0;

    double at(double N) const { return std::pow(N, n) * (log != 0.0 ? std::pow(std::log(N), log) : 1.0); }
    PowerLaw operator+(const PowerLaw& o) const { return {n + o.n, log + o.log}; }
    PowerLaw operator-(const PowerLaw& o) const { return {n - o.n, log - o.log}; }
    PowerLaw operator*(double k) const { return {n * k, log * k}; }
};

// 1 below -d/2, sqrt(log A) at -d/2, A^{d/2+s} above.
inline double f_of_A(double s, int d, double A) {
    if (A < 2.0) throw DomainError("f_of_A: A must be at least 2");
    const double crit = -0.5 * d;
    if (s < crit) return 1.0;
    if (s == crit) return std::sqrt(std::log(A));
    return std::pow(A, 0.5 * d + s);
}

struct Condition {
    std::string id;
    std::string statement;
    PowerLaw quantity;       // nominal growth of the quantity in N
    bool small = true;       // true: quantity << threshold, false: quantity >> threshold
    double threshold = 1.0;
    double realized = 0.0;   // value at the rounded parameters
    double margin = 0.0;     // factor by which the realized value clears the threshold
    bool asymptotic = false; // nominal exponent points the right way
    bool holds = false;      // margin >= margin factor
};

struct PlanOptions {
    double delta = std::numeric_limits<double>::quiet_NaN();  // NaN picks the default
    double theta = std::numeric_limits<double>::quiet_NaN();
    int n = 1;
    double margin_factor = 10.0;
    int max_cutoff = 512;  // lattice budget for select_parameters
};

struct InflationPlan {
    int d = 2;
    double s = 0.0;
    int n = 1;
    int case_id = 1;
    double delta = 0.0, theta = 0.0;
    PowerLaw A_law, R_law, T_law, f_law;
    int N = 0, A = 0;
    double R = 0.0, T = 0.0, fA = 1.0;
    double margin_factor = 10.0;
    std::array<Condition, 6> conditions;

    bool feasible() const {
        return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.holds; });
    }
    bool asymptotically_valid() const {
        return std::all_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.asymptotic; });
    }
    int required_cutoff() const { return 3 * N + 2 * A; }
    const Condition& binding() const {
        return *std::min_element(conditions.begin(), conditions.end(),
                                 [](const Condition& a, const Condition& b) { return a.margin < b.margin; });
    }
    const Condition& condition(const std::string& id) const {
        for (const auto& c : conditions)
            if (c.id == id) return c;
        throw DomainError("InflationPlan: unknown condition " + id);
    }
};

inline int case_for(int d, double s) {
    if (d != 1 && d != 2) throw DomainError("inflation: d must be 1 or 2");
    if (!(s < 0.0)) throw DomainError("inflation: s must be negative");
    if (d == 1 && s > -0.5) throw DomainError("inflation: d = 1 requires s <= -1/2");
    const double c = s + 0.5 * d;
    return c < 0 ? 1 : (c == 0 ? 2 : 3);
}

namespace detail {

inline bool sign_ok(const PowerLaw& q, bool small) {
    constexpr double eps = 1e-12;
    const double lead = std::abs(q.n) > eps ? q.n : (std::abs(q.log) > eps ? q.log : 0.0);
    return small ? lead < 0 : lead > 0;
}

// Case 3 parameters: maximize the smallest exponent gap over a grid with delta >= 4 theta.
inline std::pair<double, double> default_case3(int d, double s) {
    double best = -1, bd = 0, bt = 0;
    for (int i = 1; i <= 200; ++i) {
        const double delta = i * 0.0025;
        for (int j = 1; j <= 100; ++j) {
            const double theta = j * 0.0005;
            if (delta < 4 * theta || !(-2 * s > d * delta + theta) || !(-s * delta > 2 * theta)) continue;
            if ((2.0 / d - delta) <= 0) continue;
            const double gaps[] = {theta, -2 * theta - delta * s, -2 * s - d * delta - theta, -s - theta};
            const double g = *std::min_element(std::begin(gaps), std::end(gaps));
            if (g > best) best = g, bd = delta, bt = theta;
        }
    }
    if (best <= 0) throw InfeasibleError("select_parameters: no admissible (delta, theta)", "case-3 inequalities");
    return {bd, bt};
}

}  // namespace detail

// Parameters at a given N, rounded: N to an even integer, A to the nearest integer >= 2, T re-derived
// from the rounded A so
// that T^2 R^2 A^{2d} keeps its nominal law exactly.
inline InflationPlan plan_at(int d, double s, int N_requested, const PlanOptions& opt = {}) {
    InflationPlan p;
    p.d = d;
    p.s = s;
    p.n = opt.n;
    p.margin_factor = opt.margin_factor;
    p.case_id = case_for(d, s);
    if (opt.n < 1) throw DomainError("plan_at: n must be positive");
    if (N_requested < 4) throw DomainError("plan_at: N must be at least 4");
    const double dd = d;
    switch (p.case_id) {
        case 1: {
            const double bound = -2.0 * (s + 0.5) / 3.0;
            // default balances the exponents of (i) and (ii)
            p.delta = std::isnan(opt.delta) ? -(0.5 + s) / 2.5 : opt.delta;
            if (!(p.delta > 0 && p.delta < bound))
                throw DomainError("plan_at: case 1 needs 0 < delta < -2(s + 1/2)/3");
            p.A_law = {(1 - p.delta) / dd, 0};
            p.R_law = {2 * p.delta, 0};
            p.T_law = {-1 - 1.5 * p.delta, 0};
            p.f_law = {0, 0};
            break;
        }
        case 2:
            p.A_law = {1 / dd, -1 / (16 * dd)};
            p.R_law = {0, 0};
            p.T_law = {-1, -1.0 / 16};
            p.f_law = {0, 0.5};
            break;
        case 3: {
            if (d != 2) throw DomainError("plan_at: case 3 requires d = 2");
            auto [dl, th] = detail::default_case3(d, s);
            p.delta = std::isnan(opt.delta) ? dl : opt.delta;
            p.theta = std::isnan(opt.theta) ? th : opt.theta;
            if (!(p.theta > 0 && p.delta > p.theta && -2 * s > dd * p.delta + p.theta && -s * p.delta > 2 * p.theta))
                throw DomainError("plan_at: case 3 needs -2s > d delta + theta and -s delta > 2 theta");
            p.A_law = {2 / dd - p.delta, 0};
            p.R_law = {-1 - s + 0.5 * dd * p.delta - p.theta, 0};
            p.T_law = {-1 + s + 0.5 * dd * p.delta + 0.5 * p.theta, 0};
            p.f_law = {p.A_law.n * (0.5 * dd + s), 0};
            break;
        }
    }

    p.N = 2 * static_cast<int>(std::lround(N_requested / 2.0));
    const double Nd = p.N;
    p.A = std::max(2, static_cast<int>(std::lround(p.A_law.at(Nd))));
    if (p.A >= p.N) throw DomainError("plan_at: block width A must stay below N");
    p.R = p.R_law.at(Nd);
    const PowerLaw ii = p.T_law * 2 + p.R_law * 2 + p.A_law * (2 * dd);
    const double Ad = std::pow(static_cast<double>(p.A), dd);
    p.T = std::sqrt(ii.at(Nd)) / (p.R * Ad);
    p.fA = f_of_A(s, d, p.A);

    const double q_i = p.R * std::sqrt(Ad) * std::pow(Nd, s);
    const double q_ii = p.T * p.T * p.R * p.R * Ad * Ad;
    const double q_iii = q_ii * p.R * p.fA;
    const double q_v = p.T * Nd;
    const double q_vi = p.R * std::sqrt(Ad);
    const PowerLaw RA = p.R_law + p.A_law * (0.5 * dd);
    const double nn = opt.n;
    auto make = [&](const char* id, const char* text, PowerLaw law, bool small, double thr, double val) {
        Condition c;
        c.id = id;
        c.statement = text;
        c.quantity = law;
        c.small = small;
        c.threshold = thr;
        c.realized = val;
        c.margin = small ? thr / val : val / thr;
        c.asymptotic = detail::sign_ok(law, small);
        c.holds = c.margin >= opt.margin_factor;
        return c;
    };
    p.conditions = {
        make("i", "R A^{d/2} N^s << 1/n", RA + PowerLaw{s, 0}, true, 1.0 / nn, q_i),
        make("ii", "T^2 R^2 A^{2d} << 1", ii, true, 1.0, q_ii),
        make("iii", "T^2 R^3 A^{2d} f(A) >> n", ii + p.R_law + p.f_law, false, nn, q_iii),
        make("iv", "T^2 R^3 A^{2d} f(A) >> T^4 R^5 A^{4d} f(A)", ii * -1.0, false, 1.0, 1.0 / q_ii),
        make("v", "T N << 1", p.T_law + PowerLaw{1, 0}, true, 1.0, q_v),
        make("vi", "R A^{d/2} >> 1", RA, false, 1.0, q_vi),
    };
    return p;
}

// Smallest even N whose realized margins all reach the margin factor within the lattice budget.
inline InflationPlan select_parameters(int d, double s, const PlanOptions& opt = {}) {
    InflationPlan last;
    bool any = false;
    for (int N = 4;; N += 2) {
        InflationPlan p;
        try {
            p = plan_at(d, s, N, opt);
        } catch (const DomainError&) {
            if (N > opt.max_cutoff) break;
            continue;  // small N can make A collide with N
        }
        if (p.required_cutoff() > opt.max_cutoff) break;
        if (p.feasible()) return p;
        last = p;
        any = true;
    }
    if (!any) throw InfeasibleError("select_parameters: lattice budget admits no plan", "lattice budget");
    const auto& b = last.binding();
    throw InfeasibleError("select_parameters: no N within the lattice budget meets margin factor; binding (" + b.id +
                              ") " + b.statement,
                          b.id);
}

// Upper bound on alpha for the perturbed local time to cover T, and the exponent of
// T (R N^alpha)^{1/(1-alpha)} A^2 in N.
inline double alpha_bound(const InflationPlan& p) {
    if (p.d != 2) throw PreconditionError("alpha_bound: the perturbed local theory is two-dimensional");
    if (p.case_id == 1) return p.delta / (2 + 5 * p.delta);
    if (p.case_id == 3) return p.theta / (-2 * p.s + 2 * p.delta - p.theta);
    throw PreconditionError("alpha_bound: no exponent condition for case 2");
}

inline double lwp_time_exponent(const InflationPlan& p, double alpha) {
    if (!(alpha >= 0 && alpha < 1)) throw DomainError("lwp_time_exponent: alpha in [0, 1)");
    return p.T_law.n + (p.R_law.n + alpha) / (1 - alpha) + 2 * p.A_law.n;
}

// ---------------------------------------------------------------------------------------------

inline std::vector<Mode> block_modes(int d, int N, int A) {
    std::vector<Mode> out;
    // Q_A = [-A/2, A/2) on the integers: A points starting at -floor(A/2)
    const int lo = -(A / 2), hi = lo + A;
    for (int j : {1, 2})
        for (int a = lo; a < hi; ++a)
            for (int b = (d == 2 ? lo : 0); b < (d == 2 ? hi : 1); ++b) {
                out.push_back({j * N + a, b});
                out.push_back({-(j * N + a), -b});  // mirrored so the data is real
            }
    return out;
}

// phi_0 = R on the four blocks, phi_1 = N phi_0.
inline FieldPair build_block_data(const Lattice& lat, int N, int A, double R) {
    if (A < 2) throw DomainError("build_block_data: A must be at least 2");
    if (N <= A) throw DomainError("build_block_data: N must exceed A");
    if (lat.cutoff() < 3 * N + 2 * A) throw SizeError("build_block_data: lattice cutoff below 3N + 2A");
    FieldPair out(lat);
    for (const auto& m : block_modes(lat.dim(), N, A)) {
        out.pos[lat.index(m)] = R;
        out.vel[lat.index(m)] = R * N;
    }
    return out;
}

inline FieldPair build_block_data(const InflationPlan& p, const Lattice& lat) {
    return build_block_data(lat, p.N, p.A, p.R);
}

// Fixed smooth base pair used by the deterministic experiments.
inline FieldPair reference_smooth_pair(int d) {
    const Lattice lat(d, 3);
    FieldPair u(lat);
    u.pos.set_pair({1, 0}, {0.5, 0.25});
    u.vel.set_pair({2, 0}, {0.0, 0.3});
    if (d == 2) {
        u.pos.set_pair({0, 1}, {0.4, 0.0});
        u.pos.set_pair({1, -1}, {0.1, -0.2});
    }
    u.pos[lat.zero_index()] = 0.3;
    return u;
}

inline Lattice inflation_lattice(const InflationPlan& p, int cutoff = 0) {
    return Lattice(p.d, std::max(cutoff, p.required_cutoff()));
}

// Indicator of all sums of three support frequencies, on the lattice.
inline std::vector<char> triple_sum_support(const Lattice& lat, const std::vector<Mode>& support) {
    std::set<Mode> two;
    for (const auto& a : support)
        for (const auto& b : support) two.insert({a[0] + b[0], a[1] + b[1]});
    std::vector<char> mask(lat.size(), 0);
    for (const auto& ab : two)
        for (const auto& c : support) {
            const Mode m{ab[0] + c[0], ab[1] + c[1]};
            if (lat.contains(m)) mask[lat.index(m)] = 1;
        }
    return mask;
}

struct Xi1Check {
    std::vector<double> times;
    std::vector<double> hs_norm;
    std::vector<double> min_mode_ratio;  // min over Q_A of |Xi1^(xi)| / (t^2 R^3 A^{2d})
    std::vector<double> hs_ratio;        // ||Xi1||_{H^s} / (t^2 R^3 A^{2d} f(A))
    double t_exponent = 0.0, t_fit_r2 = 0.0;
    double c_mode = 0.0, c_hs = 0.0;
    double outside_support = 0.0;        // largest coefficient off the triple-sum set, relative
    bool pass = false;
};

inline Xi1Check xi1_lower_bound_check(const InflationPlan& p, const std::vector<double>& times,
                                      PicardOptions popt = {}) {
    if (times.size() < 2) throw DomainError("xi1_lower_bound_check: need at least two times");
    for (double t : times)
        if (!(t > 0) || t * p.N > 0.1 + 1e-12) throw DomainError("xi1_lower_bound_check: times must satisfy 0 < tN <= 0.1");
    const Lattice lat = inflation_lattice(p);
    const FieldPair phi = build_block_data(p, lat);
    PicardEvaluator ev(phi, times, popt);
    const auto xi = ev.xi(1);
    const auto mask = triple_sum_support(lat, block_modes(p.d, p.N, p.A));

    Xi1Check r;
    r.times = times;
    const double Ad = std::pow(static_cast<double>(p.A), p.d);
    const int lo = -(p.A / 2), hi = lo + p.A;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto& f = xi.values[k];
        const double t = times[k];
        const double scale = t * t * p.R * p.R * p.R * Ad * Ad;
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0, off = 0.0;
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const double a = std::abs(f[i]);
            mx = std::max(mx, a);
            if (!mask[i]) off = std::max(off, a);
        }
        for (int a = lo; a < hi; ++a)
            for (int b = (p.d == 2 ? lo : 0); b < (p.d == 2 ? hi : 1); ++b)
                mn = std::min(mn, std::abs(f[lat.index({a, b})]));
        r.hs_norm.push_back(sobolev_norm(f, p.s));
        r.min_mode_ratio.push_back(mn / scale);
        r.hs_ratio.push_back(r.hs_norm.back() / (scale * p.fA));
        r.outside_support = std::max(r.outside_support, mx > 0 ? off / mx : 0.0);
    }
    const auto fit = fit_loglog(r.times, r.hs_norm);
    r.t_exponent = fit.slope;
    r.t_fit_r2 = fit.r2;
    r.c_mode = *std::min_element(r.min_mode_ratio.begin(), r.min_mode_ratio.end());
    r.c_hs = *std::min_element(r.hs_ratio.begin(), r.hs_ratio.end());
    r.pass = r.c_mode > 0 && std::abs(r.t_exponent - 2.0) <= 0.05 && r.outside_support < 1e-10;
    return r;
}

// ---------------------------------------------------------------------------------------------

struct InflationReport {
    InflationPlan plan;
    int cutoff = 0;
    double dt = 0.0;
    double phi_Hs = 0.0;   // ||phi_n||_{H^s x H^{s-1}} at t = 0
    double phi_FL = 0.0;   // ||phi_n||_{FL^{0,1}} pair norm
    double base_Hs = 0.0;
    std::vector<double> times, u_Hs;
    double u_T_Hs = 0.0, u_max_Hs = 0.0, t_max = 0.0;
    double xi0_Hs = 0.0;        // ||S(T)(u0 + phi)||
    double xi1_Hs = 0.0;        // ||Xi1(phi)(T)||
    double xi1_mixed_Hs = 0.0;  // ||Xi1(u0 + phi)(T) - Xi1(phi)(T)||
    double remainder_Hs = 0.0;  // ||u(T) - S(T)(u0+phi) - Xi1(u0+phi)(T)||, measured
    double tail_bound = 0.0;    // T^4 R^5 A^{4d} f(A)
    bool half_xi1_holds = false;  // ||u(T)|| >= ||Xi1(phi)(T)|| / 2
    double growth_target = 0.0;   // the plan index n: inflation means ||u(T)||_{H^s} > n
    bool growth_pass = false;
    bool blowup = false;
    double horizon = 0.0;
    // almost-sure runs only
    bool stochastic = false;
    std::uint64_t seed = 0;
    double gap = 0.0;          // sup_t ||u - v||_{L^2}
    double v_T_Hs = 0.0, w_T_Hs = 0.0;
    double wick_bound = 0.0;   // K in the perturbed local-time estimate
    double lwp_time = 0.0;
    std::string lwp_binding;
};

struct InflationRunOptions {
    int cutoff = 0;       // 0: 3N + 2A
    double dt = 0.0;      // 0: default_dt of the data
    int scan_points = 16; // approximate number of recorded times in (0, T]
    PicardOptions picard{};
};

namespace detail {

inline ObserveSpec inflation_observer(double T, double dt, double s, int scan, bool positions) {
    ObserveSpec obs;
    obs.energy = false;
    obs.sobolev = {s};
    obs.keep_positions = positions;
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    obs.every = std::max(1, steps / std::max(1, scan));
    return obs;
}

inline void fill_series(InflationReport& r, const Trajectory& tr) {
    r.times = tr.times;
    r.u_Hs.clear();
    for (const auto& row : tr.sobolev) r.u_Hs.push_back(row.at(0));
    r.u_T_Hs = r.u_Hs.back();
    r.u_max_Hs = 0;
    for (std::size_t k = 0; k < r.u_Hs.size(); ++k)
        if (r.u_Hs[k] > r.u_max_Hs) r.u_max_Hs = r.u_Hs[k], r.t_max = r.times[k];
    r.blowup = tr.blowup;
    r.horizon = tr.final_time;
}

}  // namespace detail

// Plain cubic NLW from base + phi_n up to T, with the Xi decomposition at T.
inline InflationReport run_deterministic_inflation(const InflationPlan& p, const FieldPair& base,
                                                   const InflationRunOptions& opt = {}) {
    const Lattice lat = inflation_lattice(p, opt.cutoff);
    const FieldPair phi = build_block_data(p, lat);
    const FieldPair u0 = embed(base, lat);
    const FieldPair data = u0 + phi;

    InflationReport r;
    r.plan = p;
    r.cutoff = lat.cutoff();
    r.dt = opt.dt > 0 ? opt.dt : default_dt(data);
    r.phi_Hs = sobolev_norm(phi, p.s);
    r.phi_FL = fourier_lebesgue_norm(phi, 0.0, 1.0);
    r.base_Hs = sobolev_norm(u0, p.s);

    const auto tr = solve(EquationSpec::plain_cubic(), data, p.T, r.dt,
                          detail::inflation_observer(p.T, r.dt, p.s, opt.scan_points, false));
    detail::fill_series(r, tr);

    PicardEvaluator ev_phi(phi, {p.T}, opt.picard);
    const SpectralField xi1_phi = ev_phi.xi(1).values[0];
    SpectralField xi1_full = xi1_phi;
    if (fourier_lebesgue_norm(u0, 0.0, 1.0) > 0) {
        PicardEvaluator ev(data, {p.T}, opt.picard);
        xi1_full = ev.xi(1).values[0];
    }
    const SpectralField xi0 = linear_flow(data, p.T).pos;
    r.xi0_Hs = sobolev_norm(xi0, p.s);
    r.xi1_Hs = sobolev_norm(xi1_phi, p.s);
    r.xi1_mixed_Hs = sobolev_norm(xi1_full - xi1_phi, p.s);
    if (!tr.blowup) r.remainder_Hs = sobolev_norm(tr.final_state.pos - xi0 - xi1_full, p.s);
    const double Ad = std::pow(static_cast<double>(p.A), p.d);
    r.tail_bound = std::pow(p.T, 4) * std::pow(p.R, 5) * std::pow(Ad, 4) * p.fA;
    r.half_xi1_holds = !tr.blowup && r.u_T_Hs >= 0.5 * r.xi1_Hs;
    r.growth_target = p.n;
    r.growth_pass = !tr.blowup && r.u_T_Hs > r.growth_target;
    return r;
}

struct AlmostSureOptions {
    InflationRunOptions run{};
    double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN: half of alpha_bound
    double noise_scale = 1.0;  // 0 gives the degenerate z = 0 case
    bool lwp_estimate = true;
    int threads = 1;           // seeds run as independent jobs; results do not depend on this
};

struct AlmostSureSummary {
    InflationPlan plan;
    double alpha = 0.0, alpha_max = 0.0, lwp_exponent = 0.0;
    bool alpha_ok = false;
    InflationReport deterministic;  // u, shared by all seeds
    std::vector<InflationReport> seeds;
    double pass_fraction = 0.0;
    double gap_median = 0.0;
};

// For each seed: v solves the residual Wick equation around the free GFF evolution z with data
// phi_n, u the plain cubic equation with the same data; w = z + v.
inline AlmostSureSummary run_almost_sure_inflation(const InflationPlan& p, const std::vector<std::uint64_t>& seeds,
                                                   const AlmostSureOptions& opt = {}) {
    if (seeds.empty()) throw DomainError("run_almost_sure_inflation: empty seed list");
    AlmostSureSummary out;
    out.plan = p;
    out.alpha_max = alpha_bound(p);
    out.alpha = std::isnan(opt.alpha) ? 0.5 * out.alpha_max : opt.alpha;
    if (!(out.alpha > 0 && out.alpha <= 0.25)) throw DomainError("run_almost_sure_inflation: alpha in (0, 1/4]");
    out.alpha_ok = out.alpha < out.alpha_max;
    out.lwp_exponent = lwp_time_exponent(p, out.alpha);
    if (!out.alpha_ok)
        throw InfeasibleError("run_almost_sure_inflation: alpha violates the local-time exponent condition",
                              "alpha exponent");

    const Lattice lat = inflation_lattice(p, opt.run.cutoff);
    const FieldPair phi = build_block_data(p, lat);
    auto run = opt.run;
    run.dt = run.dt > 0 ? run.dt : default_dt(phi);
    const auto obs = detail::inflation_observer(p.T, run.dt, p.s, run.scan_points, true);

    out.deterministic = run_deterministic_inflation(p, FieldPair(lat), run);
    const auto u = solve(EquationSpec::plain_cubic(), phi, p.T, run.dt, obs);

    out.seeds = run_jobs<InflationReport>(seeds.size(), opt.threads, [&](std::size_t i) {
        InflationReport r = out.deterministic;
        r.stochastic = true;
        r.seed = seeds[i];
        const FieldPair z0 = opt.noise_scale * sample_gff(lat, seeds[i]);
        const double sigma = opt.noise_scale * opt.noise_scale * sigma_lattice(lat);
        const WickSource src{z0, -1.0, sigma};
        const auto v = solve(EquationSpec::residual_wick(src), phi, p.T, run.dt, obs);
        detail::fill_series(r, v);
        r.v_T_Hs = r.u_T_Hs;
        r.w_T_Hs = sobolev_norm(linear_flow(z0, v.final_time).pos + v.final_state.pos, p.s);
        r.u_T_Hs = out.deterministic.u_T_Hs;
        r.gap = v.blowup ? std::numeric_limits<double>::infinity() : approximation_gap(u, v);
        r.growth_pass = !v.blowup && r.w_T_Hs > r.growth_target;
        if (opt.lwp_estimate && opt.noise_scale > 0) {
            r.wick_bound = wick_sup_bound(src, out.alpha, default_wick_sample_times());
            const auto est = perturbed_lwp_estimate(phi, r.wick_bound, out.alpha);
            r.lwp_time = est.T_guaranteed;
            r.lwp_binding = est.binding();
        }
        return r;
    });
    std::vector<double> gaps;
    int passed = 0;
    for (const auto& r : out.seeds) {
        gaps.push_back(r.gap);
        passed += r.growth_pass;
    }
    out.pass_fraction = static_cast<double>(passed) / seeds.size();
    out.gap_median = median(gaps);
    return out;
}

}  // namespace nlw
