// nlwlab command-line runner.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical accuracy failure, 4 infeasible plan.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlwlab/chaos.hpp"
#include "nlwlab/convergence.hpp"
#include "nlwlab/covariance.hpp"
#include "nlwlab/duhamel.hpp"
#include "nlwlab/errors.hpp"
#include "nlwlab/gff.hpp"
#include "nlwlab/hermite.hpp"
#include "nlwlab/inflation.hpp"
#include "nlwlab/io.hpp"
#include "nlwlab/jobs.hpp"
#include "nlwlab/mollifier.hpp"
#include "nlwlab/rng.hpp"
#include "nlwlab/solver.hpp"
#include "nlwlab/trees.hpp"

using namespace nlw;

namespace {

struct Global {
    std::string out = "out";
    int threads = 1;
    std::uint64_t seed = 0;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string join_path(const std::string& dir, const std::string& name) { return dir + "/" + name; }

void finish(const Global& g, const std::string& sub, const json& config, const std::vector<std::string>& outputs) {
    write_json(join_path(g.out, "manifest.json"), manifest(sub, config, outputs));
    for (const auto& o : outputs) std::cout << "wrote " << join_path(g.out, o) << "\n";
}

// "gff" samples the free field, "zero" gives zero data, anything else is a field-pair file.
FieldPair load_data(const std::string& spec, int d, int M, std::uint64_t seed, double scale) {
    if (spec == "gff") return scale * sample_gff(Lattice(d, M), seed);
    if (spec == "zero") return FieldPair(Lattice(d, M));
    if (spec == "smooth") return scale * embed(reference_smooth_pair(d), Lattice(d, M));
    return scale * pair_from_json(read_json(spec));
}

// ---------------------------------------------------------------------------------------------

struct SampleArgs {
    int d = 2, M = 16;
};

void run_sample(const Global& g, const SampleArgs& a) {
    const Lattice lat(a.d, a.M);
    const auto u = sample_gff(lat, g.seed);
    write_json(join_path(g.out, "sample.json"), to_json(u));
    std::cout << "sigma " << fmt(sigma_lattice(lat)) << "\n";
    finish(g, "sample", json{{"d", a.d}, {"M", a.M}, {"seed", g.seed}}, {"sample.json"});
}

struct WickArgs {
    int l = 3, d = 2, radius = 4;
    std::vector<int> N{1, 2, 4};
    std::size_t samples = 1000;
};

void run_wick(const Global& g, const WickArgs& a) {
    const auto cells = wick_moment_ensemble(a.d, a.N, a.l, a.radius, a.samples, g.seed);
    const json config{{"l", a.l}, {"d", a.d}, {"N", a.N}, {"radius", a.radius}, {"samples", a.samples}, {"seed", g.seed}};
    write_json(join_path(g.out, "wick.json"), to_json(cells, config));
    finish(g, "wick", config, {"wick.json"});
}

struct SolveArgs {
    std::string variant = "plain-cubic", data = "gff", kernel = "tent";
    int d = 2, M = 16, k = 3, every = 1;
    double t_end = 1.0, dt = 0.0, scale = 1.0, N = -1.0, delta = 0.1;
    std::vector<double> observe{0.0};
};

void run_solve(const Global& g, const SolveArgs& a) {
    const Variant v = parse_variant(a.variant);
    EquationSpec spec;
    FieldPair data;
    switch (v) {
        case Variant::Linear:
        case Variant::PlainCubic:
        case Variant::TruncatedWick: {
            data = load_data(a.data, a.d, a.M, g.seed, a.scale);
            if (v == Variant::Linear) spec = EquationSpec::linear();
            if (v == Variant::PlainCubic) spec = EquationSpec::plain_cubic();
            if (v == Variant::TruncatedWick) {
                if (a.N < 0) throw ConfigError("truncated-wick needs --N");
                spec = EquationSpec::truncated_wick(a.N, data.lattice().dim());
            }
            break;
        }
        case Variant::ResidualWick: {
            const Lattice lat(a.d, a.M);
            FieldPair z = a.scale * sample_gff(lat, g.seed);
            const double sigma = a.scale * a.scale * (a.N >= 0 ? sigma_truncated(static_cast<int>(a.N), a.d) : sigma_lattice(lat));
            spec = EquationSpec::residual_wick(WickSource{z, a.N, sigma});
            data = a.data == "gff" ? FieldPair(lat) : load_data(a.data, a.d, a.M, g.seed, 1.0);
            break;
        }
        case Variant::SigmaRenormalized: {
            const Lattice lat(a.d, a.M);
            const Kernel ker = parse_kernel(a.kernel);
            const FieldPair z = mollify(a.scale * sample_gff(lat, g.seed), ker, a.delta);
            const double sigma = a.scale * a.scale * sigma_mollified(lat, ker, a.delta);
            spec = EquationSpec::sigma_renormalized(SmoothSource{z, [sigma](double) { return sigma; }}, a.k);
            data = a.data == "gff" ? FieldPair(lat) : load_data(a.data, a.d, a.M, g.seed, 1.0);
            break;
        }
    }
    ObserveSpec obs;
    obs.every = a.every;
    obs.sobolev = a.observe;
    const auto tr = solve(spec, data, a.t_end, a.dt, obs);
    write_text(join_path(g.out, "trajectory.csv"), csv_with_schema(schema::trajectory, tr.to_csv()));
    write_json(join_path(g.out, "final.json"), to_json(tr.final_state));
    std::cout << "final_time " << fmt(tr.final_time) << (tr.blowup ? " blowup" : "") << "\n";
    finish(g, "solve",
           json{{"variant", a.variant}, {"data", a.data}, {"d", a.d}, {"M", a.M}, {"t_end", a.t_end}, {"dt", a.dt},
                {"scale", a.scale}, {"N", a.N}, {"kernel", a.kernel}, {"delta", a.delta}, {"k", a.k},
                {"observe", a.observe}, {"every", a.every}, {"seed", g.seed}},
           {"trajectory.csv", "final.json"});
    if (tr.blowup) throw BlowupError("solve: " + tr.blowup_message, tr.blowup_time);
}

struct TreesArgs {
    bool count = false;
    int j = 2, d = 2, M = 8;
    std::string data = "gff";
    double scale = 0.1, s = 0.0;
    std::vector<double> t{0.5};
};

void run_trees(const Global& g, const TreesArgs& a) {
    if (a.count) {
        if (a.j < 0 || a.j > kMaxTreeGenerations) throw ConfigError("--j must lie in [0, 6]");
        std::cout << enumerate_trees(a.j).size() << "\n";
        return;
    }
    const FieldPair data = load_data(a.data, a.d, a.M, g.seed, a.scale);
    PicardEvaluator ev(data, a.t);
    std::string csv = std::string(tree_terms_header()) + "\n";
    for (int j = 0; j <= a.j; ++j) {
        std::vector<SpectralField> vals;
        int order = 0;
        if (j == 0) {
            for (double t : a.t) vals.push_back(linear_flow(data, t).pos);
        } else {
            const auto term = ev.xi(j);
            vals = term.values;
            order = term.order;
        }
        for (std::size_t r = 0; r < a.t.size(); ++r)
            csv += std::to_string(j) + "," + csv_number(a.t[r]) + "," + csv_number(fourier_lebesgue_norm(vals[r], 0, 1)) +
                   "," + csv_number(sobolev_norm(vals[r], a.s)) + "," + std::to_string(order) + "\n";
    }
    write_text(join_path(g.out, "trees.csv"), csv_with_schema(schema::tree_terms, csv));
    finish(g, "trees",
           json{{"j", a.j}, {"data", a.data}, {"d", a.d}, {"M", a.M}, {"scale", a.scale}, {"s", a.s}, {"t", a.t},
                {"seed", g.seed}},
           {"trees.csv"});
}

struct InflateArgs {
    int d = 2, n = 1, cutoff = 0;
    double s = -1.2, delta = std::numeric_limits<double>::quiet_NaN(), theta = std::numeric_limits<double>::quiet_NaN();
    double margin = 10.0, dt = 0.0, alpha = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> ladder{16, 32};
    std::string base = "zero";
    bool select = false, no_lwp = false;
    int seeds = 4;
};

PlanOptions plan_options(const InflateArgs& a) {
    PlanOptions o;
    o.delta = a.delta;
    o.theta = a.theta;
    o.n = a.n;
    o.margin_factor = a.margin;
    if (a.cutoff > 0) o.max_cutoff = a.cutoff;
    return o;
}

json inflate_config(const InflateArgs& a, const Global& g) {
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    return json{{"d", a.d},         {"s", a.s},         {"ladder", a.ladder}, {"delta", num(a.delta)},
                {"theta", num(a.theta)}, {"n", a.n},    {"margin", a.margin}, {"base", a.base},
                {"dt", a.dt},       {"cutoff", a.cutoff}, {"alpha", num(a.alpha)}, {"seeds", a.seeds},
                {"select", a.select}, {"no_lwp", a.no_lwp}, {"seed", g.seed}};
}

void run_inflate(const Global& g, const InflateArgs& a) {
    const PlanOptions po = plan_options(a);
    if (a.select) {
        const auto p = select_parameters(a.d, a.s, po);  // throws InfeasibleError
        write_json(join_path(g.out, "plan.json"), to_json(p));
        finish(g, "inflate", inflate_config(a, g), {"plan.json"});
        return;
    }
    InflationRunOptions ro;
    ro.dt = a.dt;
    const auto reports = run_jobs<InflationReport>(a.ladder.size(), g.threads, [&](std::size_t i) {
        const auto p = plan_at(a.d, a.s, a.ladder[i], po);
        const FieldPair base = load_data(a.base, a.d, 3, g.seed, 1.0);
        return run_deterministic_inflation(p, base, ro);
    });
    std::vector<std::string> outputs;
    std::string csv = std::string(inflation_ladder_header()) + "\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& r : reports) {
        const std::string name = "inflate_N" + std::to_string(r.plan.N) + ".json";
        write_json(join_path(g.out, name), to_json(r));
        outputs.push_back(name);
        csv += inflation_ladder_row(r, nan, nan, r.u_T_Hs > prev);
        prev = r.u_T_Hs;
        std::cout << "N " << r.plan.N << " phi_Hs " << fmt(r.phi_Hs) << " u_T_Hs " << fmt(r.u_T_Hs) << "\n";
    }
    write_text(join_path(g.out, "inflate.csv"), csv_with_schema(schema::inflation_ladder, csv));
    outputs.push_back("inflate.csv");
    finish(g, "inflate", inflate_config(a, g), outputs);
}

void run_as_inflate(const Global& g, const InflateArgs& a) {
    const PlanOptions po = plan_options(a);
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < a.seeds; ++k) seeds.push_back(derive_seed(g.seed, "as-inflate/" + std::to_string(k)));
    AlmostSureOptions ao;
    ao.run.dt = a.dt;
    ao.alpha = a.alpha;
    ao.lwp_estimate = !a.no_lwp;
    ao.threads = g.threads;
    std::vector<std::string> outputs;
    std::string csv = std::string(inflation_ladder_header()) + "\n";
    double prev = -std::numeric_limits<double>::infinity();
    for (int N : a.ladder) {
        const auto p = plan_at(a.d, a.s, N, po);
        const auto all = run_almost_sure_inflation(p, seeds, ao);
        json js{{"schema", schema::inflation_report},
                {"plan", to_json(p)},
                {"alpha", all.alpha},
                {"alpha_max", all.alpha_max},
                {"lwp_exponent", all.lwp_exponent},
                {"deterministic", to_json(all.deterministic)},
                {"pass_fraction", all.pass_fraction},
                {"gap_median", all.gap_median},
                {"seeds", json::array()}};
        for (const auto& r : all.seeds) js["seeds"].push_back(to_json(r));
        const std::string name = "as_N" + std::to_string(p.N) + ".json";
        write_json(join_path(g.out, name), js);
        outputs.push_back(name);
        csv += inflation_ladder_row(all.deterministic, all.gap_median, all.pass_fraction, all.deterministic.u_T_Hs > prev);
        prev = all.deterministic.u_T_Hs;
        std::cout << "N " << p.N << " pass_fraction " << fmt(all.pass_fraction) << " gap_median " << fmt(all.gap_median)
                  << "\n";
    }
    write_text(join_path(g.out, "as-inflate.csv"), csv_with_schema(schema::inflation_ladder, csv));
    outputs.push_back("as-inflate.csv");
    finish(g, "as-inflate", inflate_config(a, g), outputs);
}

struct ConvergeArgs {
    std::vector<std::string> kernels{"tent", "gaussian-bump"};
    std::vector<double> deltas{0.04, 0.02, 0.01, 0.005};
    int seeds = 4, M = 32;
    double s0 = 0.75, T = 0.5, dt = 0.01;
    bool mesh_check = false;
};

void run_converge(const Global& g, const ConvergeArgs& a) {
    ConvergenceOptions o;
    o.cutoff = a.M;
    o.T = a.T;
    o.dt = a.dt;
    o.s0 = a.s0;
    o.mesh_check = a.mesh_check;
    std::vector<Kernel> kernels;
    for (const auto& k : a.kernels) kernels.push_back(parse_kernel(k));
    const auto runs = run_jobs<std::vector<ConvergenceRun>>(a.seeds, g.threads, [&](std::size_t i) {
        const auto seed = derive_seed(g.seed, "converge/" + std::to_string(i));
        const auto ref = convergence_reference(seed, o);
        std::vector<ConvergenceRun> out;
        for (Kernel k : kernels) out.push_back(run_convergence(k, a.deltas, seed, ref, o));
        return out;
    });
    std::string csv = convergence_csv_header() + "\n";
    json all = json::array();
    for (const auto& per_seed : runs)
        for (const auto& r : per_seed) {
            csv += convergence_csv_rows(r);
            all.push_back(to_json(r));
        }
    write_text(join_path(g.out, "converge.csv"), csv_with_schema(schema::convergence, csv));
    write_json(join_path(g.out, "converge.json"), json{{"schema", schema::convergence}, {"runs", all}});
    finish(g, "converge",
           json{{"kernels", a.kernels}, {"deltas", a.deltas}, {"seeds", a.seeds}, {"M", a.M}, {"s0", a.s0}, {"T", a.T},
                {"dt", a.dt}, {"mesh_check", a.mesh_check}, {"seed", g.seed}},
           {"converge.csv", "converge.json"});
}

struct OracleArgs {
    std::string op = "sigma";
    int d = 2, N = 1, l = 1, k = 1, j = 0, window = 2, A_int = 0;
    double s = -1.2, A = 2.0, x = 0.0, sigma = 1.0, w = 1.0, t = 1.0, delta = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> n{0, 0};
    std::vector<int> ladder{8, 16, 32};
    std::vector<std::string> families{"truncation", "fejer"};
};

void run_oracle(const OracleArgs& a) {
    if (a.op == "sigma") {
        std::cout << fmt(sigma_truncated(a.N, a.d)) << "\n";
    } else if (a.op == "covariance") {
        if (a.n.size() != 2) throw ConfigError("--n takes two integers");
        std::cout << fmt(covariance_oracle(a.l, {a.n[0], a.n[1]}, a.d, a.N).moment) << "\n";
    } else if (a.op == "hermite") {
        std::cout << fmt(hermite_eval(a.k, a.x, a.sigma)) << "\n";
    } else if (a.op == "f-of-A") {
        std::cout << fmt(f_of_A(a.s, a.d, a.A)) << "\n";
    } else if (a.op == "duhamel-kernel") {
        std::cout << fmt(duhamel_abs_kernel_integral(a.w, a.t)) << "\n";
    } else if (a.op == "tree-count") {
        std::cout << tree_count(a.j) << "\n";
    } else if (a.op == "plan") {
        PlanOptions po;
        po.delta = a.delta;
        po.theta = a.theta;
        std::cout << to_json(plan_at(a.d, a.s, a.N, po)).dump(2) << "\n";
    } else if (a.op == "wick-rate") {
        if (a.families.size() != 2) throw ConfigError("--families takes two names");
        const auto fa = ScaleFamily::parse(a.families[0]), fb = ScaleFamily::parse(a.families[1]);
        const auto fit = wick_convergence_rate(a.l, a.d, fa, fb, a.ladder, a.window);
        std::cout << to_json(fit, fa.name(), fb.name(), a.window).dump(2) << "\n";
    } else {
        throw ConfigError("unknown oracle op '" + a.op + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nlwlab: spectral lab for the Wick-ordered cubic wave equation on the torus"};
    app.set_version_flag("--version", std::string(NLWLAB_VERSION));
    app.set_config("--config", "", "TOML config file; command-line flags override its values");
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for independent jobs")->check(CLI::Range(1, 256));
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "sample Gaussian free field data");
    sample->add_option("--d", sa.d)->check(CLI::IsMember({1, 2}));
    sample->add_option("--M", sa.M)->check(CLI::Range(0, 4096));

    WickArgs wa;
    auto* wick = app.add_subcommand("wick", "Monte Carlo Wick-power covariances against the exact oracle");
    wick->add_option("--l", wa.l)->check(CLI::Range(1, 3));
    wick->add_option("--d", wa.d)->check(CLI::IsMember({1, 2}));
    wick->add_option("--N", wa.N)->delimiter(',');
    wick->add_option("--radius", wa.radius);
    wick->add_option("--samples", wa.samples);

    SolveArgs so;
    auto* solvec = app.add_subcommand("solve", "integrate one equation variant");
    solvec->add_option("--variant", so.variant);
    solvec->add_option("--data", so.data, "field-pair JSON, or gff / zero / smooth");
    solvec->add_option("--d", so.d)->check(CLI::IsMember({1, 2}));
    solvec->add_option("--M", so.M);
    solvec->add_option("--t-end", so.t_end);
    solvec->add_option("--dt", so.dt);
    solvec->add_option("--scale", so.scale);
    solvec->add_option("--N", so.N, "truncation radius");
    solvec->add_option("--kernel", so.kernel);
    solvec->add_option("--delta", so.delta);
    solvec->add_option("--k", so.k, "odd power for sigma-renormalized");
    solvec->add_option("--observe", so.observe, "Sobolev indices to record")->delimiter(',');
    solvec->add_option("--every", so.every);

    TreesArgs ta;
    auto* trees = app.add_subcommand("trees", "tree counts and Picard term norms");
    trees->add_flag("--count", ta.count, "print the number of trees with j internal nodes");
    trees->add_option("--j", ta.j);
    trees->add_option("--data", ta.data);
    trees->add_option("--d", ta.d)->check(CLI::IsMember({1, 2}));
    trees->add_option("--M", ta.M);
    trees->add_option("--scale", ta.scale);
    trees->add_option("--s", ta.s);
    trees->add_option("--t", ta.t)->delimiter(',');

    InflateArgs ia, aa;
    aa.ladder = {16, 32};
    auto add_inflate = [](CLI::App* c, InflateArgs& x) {
        c->add_option("--d", x.d)->check(CLI::IsMember({1, 2}));
        c->add_option("--s", x.s);
        c->add_option("--ladder", x.ladder)->delimiter(',');
        c->add_option("--delta", x.delta);
        c->add_option("--theta", x.theta);
        c->add_option("--n", x.n);
        c->add_option("--margin", x.margin);
        c->add_option("--dt", x.dt);
        c->add_option("--cutoff", x.cutoff, "lattice budget for --select");
    };
    auto* inflate = app.add_subcommand("inflate", "deterministic norm-inflation ladder");
    add_inflate(inflate, ia);
    inflate->add_option("--base", ia.base, "base data: zero, smooth, or a field-pair JSON");
    inflate->add_flag("--select", ia.select, "search the smallest N meeting the margin factor");
    auto* asinf = app.add_subcommand("as-inflate", "almost-sure norm-inflation ladder");
    add_inflate(asinf, aa);
    asinf->add_option("--alpha", aa.alpha);
    asinf->add_option("--seeds", aa.seeds, "number of seeds");
    asinf->add_flag("--no-lwp", aa.no_lwp, "skip the local-time estimate");

    ConvergeArgs ca;
    auto* conv = app.add_subcommand("converge", "mollified-data convergence ladder");
    conv->add_option("--kernel", ca.kernels)->delimiter(',');
    conv->add_option("--delta-ladder", ca.deltas)->delimiter(',');
    conv->add_option("--seeds", ca.seeds);
    conv->add_option("--s0", ca.s0);
    conv->add_option("--T", ca.T);
    conv->add_option("--M", ca.M);
    conv->add_option("--dt", ca.dt);
    conv->add_flag("--mesh-check", ca.mesh_check);

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "print closed-form and exact-sum values");
    oracle->add_option("--op", oa.op, "sigma, covariance, hermite, f-of-A, duhamel-kernel, tree-count, plan, wick-rate");
    oracle->add_option("--d", oa.d);
    oracle->add_option("--N", oa.N);
    oracle->add_option("--l", oa.l);
    oracle->add_option("--n", oa.n)->delimiter(',');
    oracle->add_option("--k", oa.k);
    oracle->add_option("--x", oa.x);
    oracle->add_option("--sigma", oa.sigma);
    oracle->add_option("--s", oa.s);
    oracle->add_option("--A", oa.A);
    oracle->add_option("--w", oa.w);
    oracle->add_option("--t", oa.t);
    oracle->add_option("--j", oa.j);
    oracle->add_option("--delta", oa.delta);
    oracle->add_option("--theta", oa.theta);
    oracle->add_option("--ladder", oa.ladder)->delimiter(',');
    oracle->add_option("--window", oa.window);
    oracle->add_option("--families", oa.families)->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*sample) run_sample(g, sa);
        if (*wick) run_wick(g, wa);
        if (*solvec) run_solve(g, so);
        if (*trees) run_trees(g, ta);
        if (*inflate) run_inflate(g, ia);
        if (*asinf) run_as_inflate(g, aa);
        if (*conv) run_converge(g, ca);
        if (*oracle) run_oracle(oa);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << " [binding: " << e.binding() << "]\n";
        return 4;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy: " << e.what() << "\n";
        return 3;
    } catch (const BlowupError& e) {
        std::cerr << "blowup: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    } catch (const SizeError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
