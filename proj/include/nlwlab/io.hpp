#pragma once
// Versioned JSON/CSV records: field snapshots, reports, ladders, manifests.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlwlab/chaos.hpp"
#include "nlwlab/convergence.hpp"
#include "nlwlab/errors.hpp"
#include "nlwlab/field.hpp"
#include "nlwlab/inflation.hpp"
#include "nlwlab/solver.hpp"

#ifndef NLWLAB_VERSION
#define NLWLAB_VERSION "0.1.0"
#endif

namespace nlw {

using json = nlohmann::ordered_json;

namespace schema {
inline constexpr const char* field = "nlwlab.field/1";
inline constexpr const char* field_pair = "nlwlab.field-pair/1";
inline constexpr const char* trajectory = "nlwlab.trajectory/1";
inline constexpr const char* tree_terms = "nlwlab.tree-terms/1";
inline constexpr const char* wick_ensemble = "nlwlab.wick-ensemble/1";
inline constexpr const char* inflation_plan = "nlwlab.inflation-plan/1";
inline constexpr const char* inflation_report = "nlwlab.inflation-report/1";
inline constexpr const char* inflation_ladder = "nlwlab.inflation-ladder/1";
inline constexpr const char* xi1_check = "nlwlab.xi1-check/1";
inline constexpr const char* convergence = "nlwlab.convergence/1";
inline constexpr const char* wick_rate = "nlwlab.wick-rate/1";
inline constexpr const char* manifest = "nlwlab.manifest/1";
}  // namespace schema

inline void require_schema(const json& j, const char* name) {
    if (!j.is_object() || !j.contains("schema") || j["schema"] != name)
        throw ConfigError(std::string("expected schema ") + name);
}

// ---- fields ----

inline json to_json(const SpectralField& f) {
    json modes = json::array();
    const Lattice& lat = f.lattice();
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (f[i] == cplx(0.0, 0.0)) continue;
        const Mode n = lat.mode(i);
        modes.push_back(lat.dim() == 1 ? json::array({n[0], f[i].real(), f[i].imag()})
                                       : json::array({n[0], n[1], f[i].real(), f[i].imag()}));
    }
    return json{{"schema", schema::field}, {"d", lat.dim()}, {"M", lat.cutoff()}, {"modes", modes}};
}

inline SpectralField field_from_json(const json& j) {
    require_schema(j, schema::field);
    const int d = j.at("d"), M = j.at("M");
    Lattice lat(d, M);
    SpectralField f(lat);
    for (const auto& m : j.at("modes")) {
        const std::size_t w = d == 1 ? 3 : 4;
        if (!m.is_array() || m.size() != w) throw ConfigError("field snapshot: malformed mode record");
        const Mode n = d == 1 ? Mode{m[0].get<int>(), 0} : Mode{m[0].get<int>(), m[1].get<int>()};
        if (!lat.contains(n)) throw ConfigError("field snapshot: mode outside the lattice");
        f[lat.index(n)] = cplx(m[w - 2].get<double>(), m[w - 1].get<double>());
    }
    if (!f.is_hermitian()) throw ConfigError("field snapshot: coefficients are not Hermitian");
    return f;
}

inline json to_json(const FieldPair& p) {
    return json{{"schema", schema::field_pair}, {"pos", to_json(p.pos)}, {"vel", to_json(p.vel)}};
}

inline FieldPair pair_from_json(const json& j) {
    require_schema(j, schema::field_pair);
    FieldPair p;
    p.pos = field_from_json(j.at("pos"));
    p.vel = field_from_json(j.at("vel"));
    if (p.pos.lattice() != p.vel.lattice()) throw ConfigError("field pair: components on different lattices");
    return p;
}

// ---- files ----

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

inline json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// CSV files carry their schema on a leading comment line.
inline std::string csv_with_schema(const char* name, const std::string& body) {
    return std::string("# schema=") + name + "\n" + body;
}

inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Header names of a CSV body (first non-comment line).
inline std::vector<std::string> csv_columns(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cols.push_back(c);
        return cols;
    }
    return {};
}

// ---- reports ----

inline json to_json(const Condition& c) {
    return json{{"id", c.id},
                {"statement", c.statement},
                {"exponent", c.quantity.n},
                {"log_exponent", c.quantity.log},
                {"direction", c.small ? "small" : "large"},
                {"threshold", c.threshold},
                {"realized", c.realized},
                {"margin", c.margin},
                {"asymptotic", c.asymptotic},
                {"holds", c.holds}};
}

inline json to_json(const InflationPlan& p) {
    json conds = json::array();
    for (const auto& c : p.conditions) conds.push_back(to_json(c));
    return json{{"schema", schema::inflation_plan},
                {"d", p.d},
                {"s", p.s},
                {"n", p.n},
                {"case", p.case_id},
                {"delta", p.delta},
                {"theta", p.theta},
                {"N", p.N},
                {"A", p.A},
                {"R", p.R},
                {"T", p.T},
                {"fA", p.fA},
                {"margin_factor", p.margin_factor},
                {"required_cutoff", p.required_cutoff()},
                {"feasible", p.feasible()},
                {"binding", p.binding().id},
                {"conditions", conds}};
}

inline json to_json(const InflationReport& r) {
    json j{{"schema", schema::inflation_report},
           {"plan", to_json(r.plan)},
           {"cutoff", r.cutoff},
           {"dt", r.dt},
           {"phi_Hs", r.phi_Hs},
           {"phi_FL", r.phi_FL},
           {"base_Hs", r.base_Hs},
           {"times", r.times},
           {"u_Hs", r.u_Hs},
           {"u_T_Hs", r.u_T_Hs},
           {"u_max_Hs", r.u_max_Hs},
           {"t_max", r.t_max},
           {"xi0_Hs", r.xi0_Hs},
           {"xi1_Hs", r.xi1_Hs},
           {"xi1_mixed_Hs", r.xi1_mixed_Hs},
           {"remainder_Hs", r.remainder_Hs},
           {"tail_bound", r.tail_bound},
           {"half_xi1_holds", r.half_xi1_holds},
           {"growth_target", r.growth_target},
           {"growth_pass", r.growth_pass},
           {"blowup", r.blowup},
           {"horizon", r.horizon}};
    if (r.stochastic) {
        j["seed"] = r.seed;
        j["gap"] = r.gap;
        j["v_T_Hs"] = r.v_T_Hs;
        j["w_T_Hs"] = r.w_T_Hs;
        j["wick_bound"] = r.wick_bound;
        j["lwp_time"] = r.lwp_time;
        j["lwp_binding"] = r.lwp_binding;
    }
    return j;
}

inline json to_json(const Xi1Check& r) {
    return json{{"schema", schema::xi1_check},
                {"times", r.times},
                {"hs_norm", r.hs_norm},
                {"min_mode_ratio", r.min_mode_ratio},
                {"hs_ratio", r.hs_ratio},
                {"t_exponent", r.t_exponent},
                {"t_fit_r2", r.t_fit_r2},
                {"c_mode", r.c_mode},
                {"c_hs", r.c_hs},
                {"outside_support", r.outside_support},
                {"pass", r.pass}};
}

inline const char* inflation_ladder_header() {
    return "N,A,R,T,phi_Hs,phi_FL,u_T_Hs,u_max_Hs,xi0_Hs,xi1_Hs,xi1_mixed_Hs,remainder_Hs,"
           "margin_i,margin_ii,margin_iii,margin_iv,margin_v,margin_vi,growth_pass,growth_monotone,gap_median,pass_fraction";
}

// One row per plan point; gap_median and pass_fraction are NaN for deterministic ladders.
// growth_monotone: u_T_Hs exceeds the previous row's value (1 on the first row).
inline std::string inflation_ladder_row(const InflationReport& r, double gap_median, double pass_fraction,
                                        bool monotone) {
    const auto& p = r.plan;
    std::string row = std::to_string(p.N) + "," + std::to_string(p.A);
    for (double v : {p.R, p.T, r.phi_Hs, r.phi_FL, r.u_T_Hs, r.u_max_Hs, r.xi0_Hs, r.xi1_Hs, r.xi1_mixed_Hs,
                     r.remainder_Hs})
        row += "," + csv_number(v);
    for (const auto& c : p.conditions) row += "," + csv_number(c.margin);
    row += std::string(",") + (r.growth_pass ? "1" : "0") + (monotone ? ",1" : ",0");
    row += "," + csv_number(gap_median) + "," + csv_number(pass_fraction) + "\n";
    return row;
}

inline json to_json(const ConvergenceRun& r) {
    return json{{"schema", schema::convergence},
                {"kernel", kernel_name(r.kernel)},
                {"deltas", r.deltas},
                {"seed", r.seed},
                {"cutoff", r.cutoff},
                {"dt", r.dt},
                {"T", r.T},
                {"s0", r.s0},
                {"sup_distance", r.sup_distance},
                {"decreasing_steps", r.decreasing_steps()},
                {"lwp_time", r.lwp_time},
                {"within_guarantee", r.within_guarantee},
                {"mesh_gap", std::isnan(r.mesh_gap) ? json(nullptr) : json(r.mesh_gap)},
                {"failed", r.failed},
                {"failure", r.failure}};
}

inline json to_json(const RateFit& f, const std::string& a, const std::string& b, int window) {
    return json{{"schema", schema::wick_rate}, {"l", f.l},       {"families", {a, b}},        {"window", window},
                {"N", f.Ns},                   {"differences", f.differences}, {"gamma", f.gamma}, {"r2", f.r2}};
}

inline json to_json(const std::vector<WickMomentCell>& cells, const json& config) {
    json rows = json::array();
    for (const auto& c : cells)
        rows.push_back(json{{"l", c.l},
                            {"N", c.N},
                            {"n", {c.key[0], c.key[1]}},
                            {"orbit_size", c.orbit_size},
                            {"exact", c.exact},
                            {"mean", c.stats.mean()},
                            {"se", c.stats.std_error()},
                            {"samples", c.stats.count()}});
    return json{{"schema", schema::wick_ensemble}, {"config", config}, {"cells", rows}};
}

inline const char* tree_terms_header() { return "j,t,FL1,Hs,order"; }

inline json manifest(const std::string& subcommand, const json& config, const std::vector<std::string>& outputs) {
    return json{{"schema", schema::manifest},
                {"version", NLWLAB_VERSION},
                {"subcommand", subcommand},
                {"config", config},
                {"outputs", outputs}};
}

}  // namespace nlw
