#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "hermite.hpp"
#include "quadrature.hpp"
#include "transform.hpp"

namespace nlw {

// Ordered ternary tree stored as its preorder code: '1' for a non-terminal node, '0' for a leaf.
class TernaryTree {
public:
    TernaryTree() : code_("0") { build(); }
    explicit TernaryTree(std::string code) : code_(std::move(code)) { build(); }

    static TernaryTree join(const TernaryTree& a, const TernaryTree& b, const TernaryTree& c) {
        return TernaryTree("1" + a.code_ + b.code_ + c.code_);
    }

    const std::string& code() const { return code_; }
    int generations() const { return generations_; }
    std::size_t size() const { return code_.size(); }
    std::size_t terminals() const { return size() - static_cast<std::size_t>(generations_); }
    bool is_terminal(int node) const { return code_[node] == '0'; }
    int parent(int node) const { return parent_[node]; }
    const std::array<int, 3>& children(int node) const { return children_[node]; }

    // Root's three subtrees; empty for a leaf.
    std::vector<TernaryTree> subtrees() const {
        std::vector<TernaryTree> out;
        if (is_terminal(0)) return out;
        for (int c : children_[0]) out.emplace_back(code_.substr(c, extent(c)));
        return out;
    }

    bool operator==(const TernaryTree& o) const { return code_ == o.code_; }
    bool operator<(const TernaryTree& o) const { return code_ < o.code_; }

private:
    std::size_t extent(int node) const {
        // a subtree's code ends once leaves exceed internal nodes by one
        int need = 1;
        std::size_t k = node;
        while (need > 0) need += code_[k++] == '1' ? 2 : -1;
        return k - node;
    }

    void build() {
        const std::size_t n = code_.size();
        parent_.assign(n, -1);
        children_.assign(n, {-1, -1, -1});
        generations_ = 0;
        std::vector<std::pair<int, int>> stack;  // (node, next child slot)
        for (std::size_t k = 0; k < n; ++k) {
            const char ch = code_[k];
            if (ch != '0' && ch != '1') throw DomainError("TernaryTree: code must consist of '0' and '1'");
            if (k > 0) {
                if (stack.empty()) throw DomainError("TernaryTree: malformed code");
                auto& top = stack.back();
                parent_[k] = top.first;
                children_[top.first][top.second++] = static_cast<int>(k);
                if (top.second == 3) stack.pop_back();
            }
            if (ch == '1') {
                ++generations_;
                stack.emplace_back(static_cast<int>(k), 0);
            }
        }
        if (!stack.empty() || n != 3 * static_cast<std::size_t>(generations_) + 1)
            throw DomainError("TernaryTree: malformed code");
    }

    std::string code_;
    int generations_ = 0;
    std::vector<int> parent_;
    std::vector<std::array<int, 3>> children_;
};

inline constexpr int kMaxTreeGenerations = 6;

// (1/(2j+1)) C(3j, j)
inline std::size_t tree_count(int j) {
    return static_cast<std::size_t>(std::llround(binomial(3 * j, j) / (2.0 * j + 1.0)));
}

namespace detail {
inline const std::vector<TernaryTree>& trees_cached(int j) {
    static std::map<int, std::vector<TernaryTree>> cache;
    static std::recursive_mutex m;
    std::lock_guard<std::recursive_mutex> lock(m);
    if (auto it = cache.find(j); it != cache.end()) return it->second;
    std::vector<TernaryTree> out;
    if (j == 0) {
        out.emplace_back();
    } else {
        for (int a = 0; a <= j - 1; ++a)
            for (int b = 0; a + b <= j - 1; ++b) {
                const int c = j - 1 - a - b;
                for (const auto& x : trees_cached(a))
                    for (const auto& y : trees_cached(b))
                        for (const auto& z : trees_cached(c)) out.push_back(TernaryTree::join(x, y, z));
            }
    }
    return cache.emplace(j, std::move(out)).first->second;
}
}  // namespace detail

// All ordered ternary trees with j non-terminal nodes, ordered by the generation split of the
// root's children and then recursively.
inline std::vector<TernaryTree> enumerate_trees(int j) {
    if (j < 0) throw DomainError("enumerate_trees: negative j");
    if (j > kMaxTreeGenerations) throw SizeError("enumerate_trees: j above 6");
    return detail::trees_cached(j);
}

struct PicardOptions {
    int nodes = 8;          // starting Gauss-Legendre order on [0, t_end]
    int node_step = 8;      // order increment per refinement
    int max_nodes = 72;
    double tol = 1e-9;      // relative FL^1 change between refinements
    double mass = 1.0;
};

// Values of a multilinear term at the collocation nodes and at the requested output times.
struct TermValues {
    std::vector<SpectralField> nodes;
    std::vector<SpectralField> outs;
};

// One quadrature level: P Gauss-Legendre nodes on [0, t_end]. The Duhamel integral of an
// interpolated source is applied through the integration matrix int_0^tau l_p,
// using sin((tau-s)w) = sin(tau w) cos(s w) - cos(tau w) sin(s w).
class PicardLevel {
public:
    PicardLevel(const FieldPair& data, double t_end, const std::vector<double>& out_times, int P, double mass)
        : data_(data), lat_(data.lattice()), P_(P), mass_(mass), outs_(out_times) {
        const auto g = gauss_legendre(P);
        for (double x : g.x) s_.push_back(t_end * x);
        LagrangeBasis basis(s_);
        for (double s : s_) Snode_.push_back(basis.integrate_to(s));
        for (double t : outs_) Sout_.push_back(basis.integrate_to(t));
        omega_.resize(lat_.size());
        for (std::size_t i = 0; i < lat_.size(); ++i) omega_[i] = std::sqrt(mass + static_cast<double>(lat_.norm2(i)));
        tr_ = transform_for_degree(lat_, 3);
    }

    int order() const { return P_; }
    const std::vector<double>& node_times() const { return s_; }

    const TermValues& linear() {
        if (!linear_) {
            TermValues v;
            for (double s : s_) v.nodes.push_back(linear_flow(data_, s, mass_).pos);
            for (double t : outs_) v.outs.push_back(linear_flow(data_, t, mass_).pos);
            linear_ = std::make_shared<TermValues>(std::move(v));
        }
        return *linear_;
    }

    const TermValues& evaluate(const TernaryTree& tree) {
        if (tree.generations() == 0) return linear();
        if (auto it = memo_.find(tree.code()); it != memo_.end()) return *it->second;
        const auto sub = tree.subtrees();
        const TermValues& a = evaluate(sub[0]);
        const TermValues& b = evaluate(sub[1]);
        const TermValues& c = evaluate(sub[2]);
        auto v = std::make_shared<TermValues>(duhamel_product(a.nodes, b.nodes, c.nodes));
        return *memo_.emplace(tree.code(), std::move(v)).first->second;
    }

    // I[a b c] at nodes and outputs; a, b, c given at the nodes.
    TermValues duhamel_product(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b,
                               const std::vector<SpectralField>& c) const {
        std::vector<SpectralField> F(P_);
        for (int p = 0; p < P_; ++p) {
            const SpectralField* in[] = {&a[p], &b[p], &c[p]};
            F[p] = pointwise(std::span<const SpectralField* const>(in, 3), 3,
                             [](const double* x) { return x[0] * x[1] * x[2]; });
        }
        return duhamel_of(F);
    }

    // -int_0^tau sin((tau - s) w)/w F(s) ds for F given at the nodes.
    TermValues duhamel_of(const std::vector<SpectralField>& F) const {
        const std::size_t n = lat_.size();
        TermValues out;
        out.nodes.assign(P_, SpectralField(lat_));
        out.outs.assign(outs_.size(), SpectralField(lat_));
        std::vector<cplx> fc(P_), fs(P_);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = omega_[i];
            bool any = false;
            for (int p = 0; p < P_; ++p) {
                const double cs = std::cos(w * s_[p]);
                const double sn = w > 0 ? std::sin(w * s_[p]) / w : s_[p];
                fc[p] = cs * F[p][i];
                fs[p] = sn * F[p][i];
                any = any || F[p][i] != cplx(0.0, 0.0);
            }
            if (!any) continue;
            auto apply = [&](double tau, const std::vector<double>& S) {
                cplx ic = 0.0, is = 0.0;
                for (int p = 0; p < P_; ++p) {
                    ic += S[p] * fc[p];
                    is += S[p] * fs[p];
                }
                const double st = w > 0 ? std::sin(w * tau) / w : tau;
                return -(st * ic - std::cos(w * tau) * is);
            };
            for (int q = 0; q < P_; ++q) out.nodes[q][i] = apply(s_[q], Snode_[q]);
            for (std::size_t r = 0; r < outs_.size(); ++r) out.outs[r][i] = apply(outs_[r], Sout_[r]);
        }
        return out;
    }

private:
    FieldPair data_;
    Lattice lat_;
    int P_;
    double mass_;
    std::vector<double> outs_, s_, omega_;
    std::vector<std::vector<double>> Snode_, Sout_;
    std::shared_ptr<const GridTransform> tr_;
    std::shared_ptr<TermValues> linear_;
    std::map<std::string, std::shared_ptr<TermValues>> memo_;
};

struct PicardTerm {
    TernaryTree tree;
    std::vector<double> times;
    std::vector<SpectralField> values;
    int order = 0;           // quadrature order that met the tolerance
    double last_change = 0;  // relative FL^1 change at acceptance
};

// Evaluates tree terms at output times in (0, t_end], raising the quadrature order until
// two successive orders agree to the tolerance.
class PicardEvaluator {
public:
    PicardEvaluator(const FieldPair& data, std::vector<double> out_times, PicardOptions opt = {})
        : data_(data), outs_(std::move(out_times)), opt_(opt) {
        if (outs_.empty()) throw DomainError("PicardEvaluator: no output times");
        t_end_ = 0.0;
        for (double t : outs_) {
            if (!(t > 0.0)) throw DomainError("PicardEvaluator: output times must be positive");
            t_end_ = std::max(t_end_, t);
        }
    }

    const std::vector<double>& times() const { return outs_; }

    PicardTerm evaluate_term(const TernaryTree& tree) {
        return refine([&](PicardLevel& lv) { return lv.evaluate(tree).outs; }, tree);
    }

    // sum over trees of generation j
    PicardTerm xi(int j) {
        const auto trees = enumerate_trees(j);
        return refine(
            [&](PicardLevel& lv) {
                std::vector<SpectralField> acc(outs_.size(), SpectralField(data_.lattice()));
                for (const auto& t : trees) {
                    const auto& v = lv.evaluate(t).outs;
                    for (std::size_t r = 0; r < acc.size(); ++r) acc[r] += v[r];
                }
                return acc;
            },
            TernaryTree());
    }

    // U_J - S(t)u0 - I[U_J^3] with U_J = sum_{j <= J} Xi_j, at the output times.
    PicardTerm fixed_point_defect(int J) {
        return refine(
            [&](PicardLevel& lv) {
                std::vector<SpectralField> un(lv.order(), SpectralField(data_.lattice()));
                std::vector<SpectralField> uo(outs_.size(), SpectralField(data_.lattice()));
                for (int j = 0; j <= J; ++j)
                    for (const auto& t : enumerate_trees(j)) {
                        const auto& v = lv.evaluate(t);
                        for (std::size_t q = 0; q < un.size(); ++q) un[q] += v.nodes[q];
                        for (std::size_t r = 0; r < uo.size(); ++r) uo[r] += v.outs[r];
                    }
                const TermValues d = lv.duhamel_product(un, un, un);
                const auto& lin = lv.linear().outs;
                for (std::size_t r = 0; r < uo.size(); ++r) {
                    uo[r] -= lin[r];
                    uo[r] -= d.outs[r];
                }
                return uo;
            },
            TernaryTree());
    }

private:
    template <class Fn>
    PicardTerm refine(Fn&& fn, const TernaryTree& tree) {
        PicardTerm term;
        term.tree = tree;
        term.times = outs_;
        int P = opt_.nodes;
        std::vector<SpectralField> prev = fn(level(P));
        while (P + opt_.node_step <= opt_.max_nodes) {
            P += opt_.node_step;
            std::vector<SpectralField> next = fn(level(P));
            double change = 0.0;
            bool ok = true;
            for (std::size_t r = 0; r < next.size(); ++r) {
                const double d = fourier_lebesgue_norm(next[r] - prev[r], 0.0, 1.0);
                const double s = fourier_lebesgue_norm(next[r], 0.0, 1.0);
                change = std::max(change, s > 0 ? d / s : d);
                if (d > opt_.tol * s && d > 1e-300) ok = false;
            }
            prev = std::move(next);
            if (ok) {
                term.values = std::move(prev);
                term.order = P;
                term.last_change = change;
                return term;
            }
        }
        throw AccuracyError("PicardEvaluator: quadrature order limit reached before tolerance");
    }

    PicardLevel& level(int P) {
        auto it = levels_.find(P);
        if (it == levels_.end())
            it = levels_.emplace(P, std::make_unique<PicardLevel>(data_, t_end_, outs_, P, opt_.mass)).first;
        return *it->second;
    }

    FieldPair data_;
    std::vector<double> outs_;
    double t_end_ = 0.0;
    PicardOptions opt_;
    std::map<int, std::unique_ptr<PicardLevel>> levels_;
};

inline SpectralField xi_sum(int j, const FieldPair& data, double t, PicardOptions opt = {}) {
    if (j > kMaxTreeGenerations) throw SizeError("xi_sum: j above 6");
    PicardEvaluator ev(data, {t}, opt);
    return ev.xi(j).values.at(0);
}

}  // namespace nlw
