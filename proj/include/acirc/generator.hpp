#pragma once
// Seeded random-instance generator.  Every family is constructive: the target
// properties hold by construction, and callers can re-certify with the
// analysis checkers before use.

#include <random>

#include "acirc/transform.hpp"

namespace acirc {

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    // uniform in [0,1); avoids distribution objects so streams are portable
    double u01() { return double(rng() >> 11) * (1.0 / 9007199254740992.0); }
    int pick(int n) { return int(rng() % std::uint64_t(n)); }
    bool coin() { return (rng() & 1) != 0; }
};

inline std::vector<Variable> gen_binary_vars(const std::vector<std::string>& names) {
    std::vector<Variable> vs;
    for (const auto& n : names) vs.push_back({n, 2});
    return vs;
}

inline Value gen_value(const Semiring* sr, Gen& g, bool allow_zero = true) {
    switch (sr->kind) {
        case SemiringKind::Prob:
        case SemiringKind::MaxTimes:
            if (allow_zero && g.pick(8) == 0) return sr->zero;
            return Value::real(0.05 + 0.9 * g.u01());
        case SemiringKind::Bool:
            return Value::boolean(allow_zero ? g.coin() : true);
        case SemiringKind::Counting:
            return Value::natural(std::uint64_t(g.pick(allow_zero ? 4 : 3) + (allow_zero ? 0 : 1)));
        case SemiringKind::NatPair:
            return Value::natpair(std::uint64_t(g.pick(4)), std::uint64_t(g.pick(4)));
        case SemiringKind::RealPair:
            return Value::realpair(0.05 + 0.9 * g.u01(), 0.05 + 0.9 * g.u01());
    }
    throw eval_error("bad semiring kind");
}

namespace detail {

// random smooth+decomposable subcircuit over the given variable list
inline int gen_mixture_rec(Builder& b, std::vector<int> vs, Gen& g, int depth) {
    const Circuit& c = b.c;
    if (int(vs.size()) <= 2 || depth <= 0) {
        std::vector<Value> tab;
        std::uint64_t n = c.table_size_for(vs);
        for (std::uint64_t r = 0; r < n; ++r) tab.push_back(gen_value(c.sr, g));
        return b.input(std::move(vs), std::move(tab));
    }
    int terms = 1 + g.pick(3);
    std::vector<int> ch;
    for (int t = 0; t < terms; ++t) {
        // random 2-partition; same split sizes per term keep nothing — scopes
        // stay equal (full vs), so the sum is smooth
        std::vector<int> left, right;
        for (int v : vs) (g.coin() ? left : right).push_back(v);
        if (left.empty()) left.push_back(right.back()), right.pop_back();
        if (right.empty()) right.push_back(left.back()), left.pop_back();
        int l = gen_mixture_rec(b, left, g, depth - 1);
        int r = gen_mixture_rec(b, right, g, depth - 1);
        ch.push_back(b.prod(l, r));
    }
    return terms == 1 ? ch[0] : b.sum(std::move(ch));
}

} // namespace detail

// Smooth + decomposable circuit over all variables.
inline Circuit gen_mixture(const Semiring* sr, const std::vector<Variable>& vars, Gen& g,
                           int depth = 3) {
    Builder b(sr, vars);
    std::vector<int> vs;
    for (int v = 0; v < int(vars.size()); ++v) vs.push_back(v);
    return b.finish(detail::gen_mixture_rec(b, std::move(vs), g, depth));
}

// branch weights: one value per domain element; normalized draws from the simplex
inline std::vector<Value> gen_branch_theta(const Semiring* sr, int dom, Gen& g, bool normalized) {
    std::vector<Value> t;
    if (sr->dom == Domain::Real) {
        std::vector<double> w;
        double s = 0;
        for (int v = 0; v < dom; ++v) {
            w.push_back(0.05 + 0.95 * g.u01());
            s += w.back();
        }
        for (int v = 0; v < dom; ++v) t.push_back(Value::real(normalized ? w[size_t(v)] / s : w[size_t(v)]));
    } else {
        for (int v = 0; v < dom; ++v) t.push_back(sr->one);
    }
    return t;
}

// Branch-form circuit: fully deterministic over `order` (branches on each of
// those variables in turn, with a distinct subtree per value), then a tail over
// the remaining `tail_vars` — a mixture (X-det only w.r.t. `order`) or a single
// normalized table.  Exponential in |order|; meant for small test instances.
inline Circuit gen_branch(const Semiring* sr, const std::vector<Variable>& vars,
                          const std::vector<int>& order, const std::vector<int>& tail_vars,
                          Gen& g, bool normalized, bool tail_mixture) {
    Builder b(sr, vars);
    auto make_tail = [&]() -> int {
        if (tail_vars.empty()) return -1;
        if (tail_mixture) return detail::gen_mixture_rec(b, tail_vars, g, 2);
        std::uint64_t n = b.c.table_size_for(tail_vars);
        std::vector<Value> tab;
        if (sr->dom == Domain::Real) {
            std::vector<double> w;
            double s = 0;
            for (std::uint64_t r = 0; r < n; ++r) {
                w.push_back(0.02 + g.u01());
                s += w.back();
            }
            for (std::uint64_t r = 0; r < n; ++r)
                tab.push_back(Value::real(normalized ? w[size_t(r)] / s : w[size_t(r)]));
        } else {
            for (std::uint64_t r = 0; r < n; ++r) tab.push_back(gen_value(sr, g));
        }
        return b.input(tail_vars, std::move(tab));
    };
    auto rec = [&](auto&& self, size_t j) -> int {
        if (j == order.size()) return make_tail();
        int var = order[j];
        int dom = vars[size_t(var)].domain;
        std::vector<Value> theta = gen_branch_theta(sr, dom, g, normalized);
        std::vector<int> ch;
        for (int v = 0; v < dom; ++v) {
            std::vector<Value> ind(size_t(dom), sr->zero);
            ind[size_t(v)] = theta[size_t(v)];
            int in = b.input({var}, std::move(ind));
            int sub = self(self, j + 1);
            ch.push_back(sub < 0 ? in : b.prod(in, sub));
        }
        return b.sum(std::move(ch));
    };
    int root = rec(rec, 0);
    if (root < 0) throw eval_error("gen_branch: empty circuit");
    return b.finish(root);
}

// Right-linear deterministic chain with two shared tails per level: linear
// size, fully deterministic, structured decomposable (fixed order), normalized
// when requested.  The workhorse for causal-query and complexity families.
inline Circuit gen_det_chain(const Semiring* sr, const std::vector<Variable>& vars,
                             const std::vector<int>& order, Gen& g, bool normalized) {
    Builder b(sr, vars);
    std::vector<int> next; // tails of the next level (empty at the end)
    for (int j = int(order.size()) - 1; j >= 0; --j) {
        int var = order[size_t(j)];
        int dom = vars[size_t(var)].domain;
        std::vector<int> cur;
        for (int t = 0; t < 2; ++t) {
            std::vector<Value> theta = gen_branch_theta(sr, dom, g, normalized);
            std::vector<int> ch;
            for (int v = 0; v < dom; ++v) {
                std::vector<Value> ind(size_t(dom), sr->zero);
                ind[size_t(v)] = theta[size_t(v)];
                int in = b.input({var}, std::move(ind));
                if (next.empty())
                    ch.push_back(in);
                else
                    ch.push_back(b.prod(in, next[size_t(g.pick(int(next.size())))]));
            }
            cur.push_back(b.sum(std::move(ch)));
        }
        next = std::move(cur);
    }
    if (next.empty()) throw eval_error("gen_det_chain: empty order");
    return b.finish(next[0]);
}

// Joint distribution p(H) p(I): product of two disjoint deterministic chains.
// Deterministic on H, on I, and on H ∪ I.
inline Circuit gen_mfe_factorized(const std::vector<Variable>& vars, const std::vector<int>& hs,
                                  const std::vector<int>& is, Gen& g) {
    const Semiring* prob = lookup_semiring("prob");
    Circuit ch = gen_det_chain(prob, vars, hs, g, true);
    Circuit ci = gen_det_chain(prob, vars, is, g, true);
    return product_cmp(ch, ci).circuit; // disjoint scopes: a single bridge product
}

// Joint distribution supported exactly on {(σ(i), i)} for an injective σ:
// Assign(I) → Assign(H); deterministic on H, I, and H ∪ I.
inline Circuit gen_mfe_injection(const std::vector<Variable>& vars, const std::vector<int>& hs,
                                 const std::vector<int>& is, Gen& g) {
    const Semiring* prob = lookup_semiring("prob");
    Builder b(prob, vars);
    std::uint64_t ni = b.c.table_size_for(is), nh = b.c.table_size_for(hs);
    if (nh < ni) throw eval_error("gen_mfe_injection: |Assign(H)| < |Assign(I)|");
    // random injection via partial Fisher-Yates
    std::vector<std::uint64_t> sigma(nh);
    for (std::uint64_t k = 0; k < nh; ++k) sigma[k] = k;
    for (std::uint64_t k = 0; k < ni; ++k)
        std::swap(sigma[k], sigma[std::uint64_t(k) + std::uint64_t(g.pick(int(nh - k)))]);
    std::vector<double> theta;
    double s = 0;
    for (std::uint64_t k = 0; k < ni; ++k) {
        theta.push_back(0.05 + 0.95 * g.u01());
        s += theta.back();
    }
    std::vector<int> ch;
    for (std::uint64_t i = 0; i < ni; ++i) {
        std::vector<Value> ti(size_t(ni), prob->zero);
        ti[size_t(i)] = Value::real(theta[size_t(i)] / s);
        std::vector<Value> th(size_t(nh), prob->zero);
        th[size_t(sigma[size_t(i)])] = prob->one;
        ch.push_back(b.prod(b.input(is, std::move(ti)), b.input(hs, std::move(th))));
    }
    return b.finish(b.sum(std::move(ch)));
}

// Forward-style hidden Markov model circuit over hidden X_1..X_n and observed
// Y_1..Y_n: right-linear, smooth, decomposable, deterministic on the hidden
// variables, linear size in n.
inline Circuit gen_hmm(int n) {
    std::vector<Variable> vars;
    for (int t = 1; t <= n; ++t) vars.push_back({"X" + std::to_string(t), 2});
    for (int t = 1; t <= n; ++t) vars.push_back({"Y" + std::to_string(t), 2});
    const Semiring* prob = lookup_semiring("prob");
    Builder b(prob, vars);
    const double init[2] = {0.6, 0.4};
    const double trans[2][2] = {{0.7, 0.3}, {0.3, 0.7}};   // p(x_t | x_{t-1})
    const double emit[2][2] = {{0.8, 0.2}, {0.2, 0.8}};    // p(y_t | x_t)
    std::vector<int> next; // per previous hidden state
    for (int t = n; t >= 1; --t) {
        int xv = t - 1, yv = n + t - 1;
        std::vector<int> cur;
        for (int s = 0; s < 2; ++s) {
            std::vector<int> ch;
            for (int x = 0; x < 2; ++x) {
                double px = (t == 1) ? init[x] : trans[s][x];
                std::vector<Value> xin = {x == 0 ? Value::real(px) : Value::real(0),
                                          x == 1 ? Value::real(px) : Value::real(0)};
                std::vector<Value> yin = {Value::real(emit[x][0]), Value::real(emit[x][1])};
                int node = b.prod(b.input({xv}, std::move(xin)), b.input({yv}, std::move(yin)));
                if (!next.empty()) node = b.prod(node, next[size_t(x)]);
                ch.push_back(node);
            }
            cur.push_back(b.sum(std::move(ch)));
            if (t == 1) break; // initial distribution has no previous state
        }
        next = std::move(cur);
    }
    return b.finish(next[0]);
}

// Named-family front end used by `acirc gen`.
//   mixture:   smooth+dec over n vars
//   xdet:      branches the first k vars, mixture tail (X-det, X-first)
//   det:       branches everything (deterministic)
//   chain:     linear-size fully deterministic chain, normalized
//   hmm:       the fixed-parameter HMM family (k = n time steps)
inline Circuit gen_named(const std::string& family, const std::string& sr_id, int nvars, int k,
                         std::uint64_t seed) {
    Gen g(seed);
    const Semiring* sr = lookup_semiring(sr_id);
    if (family == "hmm") return gen_hmm(nvars);
    std::vector<std::string> names;
    for (int i = 0; i < nvars; ++i) names.push_back("V" + std::to_string(i));
    std::vector<Variable> vars = gen_binary_vars(names);
    if (family == "mixture") return gen_mixture(sr, vars, g);
    std::vector<int> all;
    for (int i = 0; i < nvars; ++i) all.push_back(i);
    if (family == "xdet") {
        if (k < 0 || k > nvars) throw parse_error("gen: bad branch count");
        std::vector<int> order(all.begin(), all.begin() + k);
        std::vector<int> tail(all.begin() + k, all.end());
        return gen_branch(sr, vars, order, tail, g, false, true);
    }
    if (family == "det") return gen_branch(sr, vars, all, {}, g, false, false);
    if (family == "chain") return gen_det_chain(sr, vars, all, g, true);
    throw parse_error("gen: unknown family " + family);
}

} // namespace acirc
