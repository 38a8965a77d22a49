#pragma once
// Circuit transforms: aggregation, product (compatible and support-compatible
// variants), and elementwise mapping, with per-node provenance.

#include <optional>

#include "acirc/analysis.hpp"

namespace acirc {

struct TransformResult {
    Circuit circuit;
    // provenance: per output node, source node in the left/only operand and in
    // the right operand (-1 where not applicable)
    std::vector<int> src_a, src_b;
};

// ---- AGG (aggregation over a variable set) ----

inline TransformResult aggregate(const Circuit& c, VarSet w) {
    if (!check_smooth(c) || !check_decomposable(c))
        throw reject_error("aggregate requires a smooth, decomposable circuit");
    if (w & ~c.root_scope()) throw reject_error("aggregate: variables outside circuit scope");
    Builder b(c.sr, c.vars);
    std::vector<int> newid(c.nodes.size(), -1);
    std::vector<int> srca;
    std::vector<std::optional<Value>> scalar(c.nodes.size());
    auto emit = [&](int src) {
        srca.resize(b.c.nodes.size(), src);
    };
    // full aggregate of a node whose scope is inside w (or a constant)
    auto scalar_of = [&](auto&& self, int i) -> Value {
        if (scalar[size_t(i)]) return *scalar[size_t(i)];
        const Node& nd = c.nodes[size_t(i)];
        Value v = c.sr->zero;
        switch (nd.kind) {
            case NodeKind::Input: {
                v = c.sr->zero;
                for (const Value& x : nd.table) v = c.sr->add(v, x);
                break;
            }
            case NodeKind::Sum: {
                v = c.sr->zero;
                for (int ch : nd.children) v = c.sr->add(v, self(self, ch));
                break;
            }
            case NodeKind::Prod: {
                v = c.sr->one;
                for (int ch : nd.children) v = c.sr->mul(v, self(self, ch));
                break;
            }
        }
        scalar[size_t(i)] = v;
        return v;
    };
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        VarSet wa = c.scopes[i] & w;
        if (c.scopes[i] != 0 && wa == c.scopes[i]) continue; // collapses; emitted on demand
        const Node& nd = c.nodes[i];
        switch (nd.kind) {
            case NodeKind::Input: {
                if (!wa) {
                    newid[i] = b.input(nd.scope, nd.table);
                    emit(int(i));
                    break;
                }
                std::vector<int> keep;
                for (int v : nd.scope)
                    if (!(wa & bit(v))) keep.push_back(v);
                std::vector<Value> tab(c.table_size_for(keep), c.sr->zero);
                Assignment a(c.vars.size(), -1);
                for (std::uint64_t row = 0; row < nd.table.size(); ++row) {
                    unrank_row(c, nd.scope, row, a);
                    std::uint64_t idx = row_index(c, keep, a);
                    tab[idx] = c.sr->add(tab[idx], nd.table[row]);
                }
                newid[i] = b.input(keep, std::move(tab));
                emit(int(i));
                break;
            }
            case NodeKind::Sum: {
                // smooth: children share the sum's scope, so none collapse
                std::vector<int> ch;
                for (int k : nd.children) ch.push_back(newid[size_t(k)]);
                newid[i] = b.sum(std::move(ch));
                emit(int(i));
                break;
            }
            case NodeKind::Prod: {
                std::vector<int> ch;
                for (int k : nd.children) {
                    if (newid[size_t(k)] < 0) { // child collapsed to a scalar
                        newid[size_t(k)] = b.constant(scalar_of(scalar_of, k));
                        emit(k);
                    }
                    ch.push_back(newid[size_t(k)]);
                }
                newid[i] = b.prod(ch[0], ch[1]);
                emit(int(i));
                break;
            }
        }
    }
    if (newid[size_t(c.root)] < 0) { // whole circuit aggregated
        newid[size_t(c.root)] = b.constant(scalar_of(scalar_of, c.root));
        emit(c.root);
    }
    std::vector<int> prune;
    TransformResult res;
    res.circuit = b.finish(newid[size_t(c.root)], &prune);
    res.src_a.assign(res.circuit.nodes.size(), -1);
    res.src_b.assign(res.circuit.nodes.size(), -1);
    for (size_t i = 0; i < srca.size(); ++i)
        if (prune[i] >= 0) res.src_a[size_t(prune[i])] = srca[i];
    return res;
}

// ---- MAPPING (elementwise semiring translation) ----

struct MapCert {
    bool det = false;    // circuit certified deterministic
    bool prod01 = false; // circuit certified to satisfy the product-0/1 condition
    bool verify = false; // recheck certificates semantically (slow path)
};

inline TransformResult map_elementwise(const Circuit& c, const Mapping& tau, MapCert cert = {}) {
    if (c.sr != tau.source)
        throw reject_error("mapping " + tau.id + " does not apply to semiring " + c.sr->id);
    bool has_sums = false, has_prods = false;
    for (const Node& nd : c.nodes) {
        if (nd.kind == NodeKind::Sum && nd.children.size() >= 2) has_sums = true;
        if (nd.kind == NodeKind::Prod) has_prods = true;
    }
    if (has_sums && !tau.additive_hom) {
        bool det = cert.det;
        if (cert.verify) det = check_deterministic(c);
        if (!det)
            throw reject_error("mapping " + tau.id +
                               " rejected: neither (Additive) nor (Det) holds for the input circuit");
    }
    if (has_prods && !tau.multiplicative_hom) {
        bool p01 = cert.prod01 && tau.maps_one_to_one;
        if (cert.verify) p01 = tau.maps_one_to_one && check_prod01(c).ok;
        if (!p01)
            throw reject_error("mapping " + tau.id +
                               " rejected: neither (Multiplicative) nor (Prod 0/1) with "
                               "one-to-one holds for the input circuit");
    }
    Builder b(tau.target, c.vars);
    TransformResult res;
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        Node nd = c.nodes[i];
        if (nd.kind == NodeKind::Input) {
            for (Value& v : nd.table) {
                if (tau.restrict_unit_interval &&
                    (v.dom != Domain::Real || v.r < -1e-9 || v.r > 1 + 1e-9))
                    throw eval_error("mapping " + tau.id + " requires inputs in [0,1]");
                v = tau.apply(v);
            }
        }
        b.c.nodes.push_back(std::move(nd));
    }
    res.circuit = b.finish(int(c.root));
    // shape copy: no pruning can occur
    res.src_a.resize(res.circuit.nodes.size());
    for (size_t i = 0; i < res.circuit.nodes.size(); ++i) res.src_a[i] = int(i);
    res.src_b.assign(res.circuit.nodes.size(), -1);
    return res;
}

// ---- products ----

// A fully factorized circuit: no sum nodes, all inputs over at most one variable.
inline bool is_factorized(const Circuit& c) {
    for (const Node& nd : c.nodes) {
        if (nd.kind == NodeKind::Sum) return false;
        if (nd.kind == NodeKind::Input && nd.scope.size() > 1) return false;
    }
    return true;
}

namespace detail {

// PROD-INPUT: tablewise product over the union scope, canonical (sorted) var order.
inline int prod_input(Builder& b, const Circuit& c, const Node& x, const Circuit& d, const Node& y) {
    VarSet us = 0;
    for (int v : x.scope) us |= bit(v);
    for (int v : y.scope) us |= bit(v);
    std::vector<int> scope = mask_to_vars(us);
    std::vector<Value> tab;
    std::uint64_t total = 1;
    for (int v : scope) total *= std::uint64_t(c.vars[size_t(v)].domain);
    tab.reserve(total);
    Assignment a(c.vars.size(), -1);
    for (std::uint64_t row = 0; row < total; ++row) {
        unrank_row(c, scope, row, a);
        Value vx = x.table[row_index(c, x.scope, a)];
        Value vy = y.table[row_index(d, y.scope, a)];
        tab.push_back(c.sr->mul(vx, vy));
    }
    return b.input(std::move(scope), std::move(tab));
}

struct Importer {
    const Circuit* src;
    Builder* b;
    std::vector<int>* srcmap; // builder node -> src node (grows with builder)
    std::vector<int> memo;
    Importer(const Circuit& s, Builder& bb, std::vector<int>& sm)
        : src(&s), b(&bb), srcmap(&sm), memo(s.nodes.size(), -1) {}
    int operator()(int n) {
        if (memo[size_t(n)] >= 0) return memo[size_t(n)];
        Node nd = src->nodes[size_t(n)];
        std::vector<int> ch;
        for (int c0 : nd.children) ch.push_back((*this)(c0));
        nd.children = ch;
        b->c.nodes.push_back(std::move(nd));
        int id = int(b->c.nodes.size()) - 1;
        srcmap->resize(b->c.nodes.size(), -1);
        (*srcmap)[size_t(id)] = n;
        memo[size_t(n)] = id;
        return id;
    }
};

} // namespace detail

// Multiplies a fully factorized circuit into c by reweighting input tables
// (sound for smooth + decomposable c: every induced parse covers each variable
// exactly once).  Factor variables outside scope(c) attach at the root.
inline TransformResult product_factorized(const Circuit& c, const Circuit& d) {
    if (c.sr != d.sr) throw reject_error("product: semiring mismatch");
    if (!is_factorized(d)) throw eval_error("product_factorized: right operand not factorized");
    if (!check_smooth(c) || !check_decomposable(c) || !check_decomposable(d))
        throw reject_error("product requires smooth, decomposable circuits");
    std::vector<std::vector<Value>> factor(c.vars.size());
    std::optional<Value> constant;
    std::vector<int> leftover_inputs;
    for (size_t j = 0; j < d.nodes.size(); ++j) {
        const Node& nd = d.nodes[j];
        if (nd.kind != NodeKind::Input) continue;
        if (nd.scope.empty()) {
            constant = constant ? d.sr->mul(*constant, nd.table[0]) : nd.table[0];
        } else {
            int v = nd.scope[0];
            if (!factor[size_t(v)].empty())
                throw reject_error("product: factorized operand repeats a variable");
            if (c.root_scope() & bit(v)) factor[size_t(v)] = nd.table;
            else leftover_inputs.push_back(int(j));
        }
    }
    Builder b(c.sr, c.vars);
    std::vector<int> srca(c.nodes.size());
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        Node nd = c.nodes[i];
        if (nd.kind == NodeKind::Input) {
            Assignment a(c.vars.size(), -1);
            for (std::uint64_t row = 0; row < nd.table.size(); ++row) {
                unrank_row(c, nd.scope, row, a);
                for (int v : nd.scope)
                    if (!factor[size_t(v)].empty())
                        nd.table[row] = c.sr->mul(nd.table[row], factor[size_t(v)][size_t(a[size_t(v)])]);
            }
        }
        b.c.nodes.push_back(std::move(nd));
        srca[i] = int(i);
    }
    int root = int(c.root);
    std::vector<int> srcb(c.nodes.size(), -1);
    for (int j : leftover_inputs) {
        int in = b.input(d.nodes[size_t(j)].scope, d.nodes[size_t(j)].table);
        srca.resize(b.c.nodes.size(), -1);
        srcb.resize(b.c.nodes.size(), -1);
        srcb[size_t(in)] = j;
        root = b.prod(root, in);
        srca.resize(b.c.nodes.size(), -1);
        srcb.resize(b.c.nodes.size(), -1);
    }
    if (constant && !value_is_one(*constant, *c.sr, 0.0)) {
        int cn = b.constant(*constant);
        root = b.prod(root, cn);
        srca.resize(b.c.nodes.size(), -1);
        srcb.resize(b.c.nodes.size(), -1);
    }
    std::vector<int> prune;
    TransformResult res;
    res.circuit = b.finish(root, &prune);
    res.src_a.assign(res.circuit.nodes.size(), -1);
    res.src_b.assign(res.circuit.nodes.size(), -1);
    for (size_t i = 0; i < srca.size(); ++i)
        if (prune[i] >= 0) {
            res.src_a[size_t(prune[i])] = srca[i];
            res.src_b[size_t(prune[i])] = i < srcb.size() ? srcb[i] : -1;
        }
    return res;
}

// PROD-CMP: product of compatible circuits, node-pair memoization.
inline TransformResult product_cmp(const Circuit& c, const Circuit& d) {
    if (c.sr != d.sr) throw reject_error("product: semiring mismatch");
    if (c.vars.size() != d.vars.size()) throw eval_error("product: variable tables differ");
    if (is_factorized(d)) return product_factorized(c, d);
    if (is_factorized(c)) {
        TransformResult r = product_factorized(d, c);
        std::swap(r.src_a, r.src_b);
        return r;
    }
    if (!check_smooth(c) || !check_decomposable(c) || !check_smooth(d) || !check_decomposable(d))
        throw reject_error("product requires smooth, decomposable circuits");
    Builder b(c.sr, c.vars);
    std::vector<int> srca, srcb;
    auto note = [&](int id, int sa, int sb) {
        srca.resize(b.c.nodes.size(), -1);
        srcb.resize(b.c.nodes.size(), -1);
        srca[size_t(id)] = sa;
        srcb[size_t(id)] = sb;
        return id;
    };
    detail::Importer imp_a(c, b, srca), imp_b(d, b, srcb);
    std::map<std::pair<int, int>, int> memo;
    auto rec = [&](auto&& self, int x, int y) -> int {
        auto key = std::make_pair(x, y);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const Node& nx = c.nodes[size_t(x)];
        const Node& ny = d.nodes[size_t(y)];
        VarSet sx = c.scopes[size_t(x)], sy = d.scopes[size_t(y)];
        int out;
        if (!(sx & sy)) {
            int ia = imp_a(x), ib = imp_b(y);
            srca.resize(b.c.nodes.size(), -1);
            srcb.resize(b.c.nodes.size(), -1);
            out = note(b.prod(ia, ib), x, y);
        } else if (nx.kind == NodeKind::Input && ny.kind == NodeKind::Input) {
            out = note(detail::prod_input(b, c, nx, d, ny), x, y);
        } else if (nx.kind == NodeKind::Sum && ny.kind == NodeKind::Sum) {
            std::vector<int> ch;
            for (int i : nx.children)
                for (int j : ny.children) ch.push_back(self(self, i, j));
            out = note(b.sum(std::move(ch)), x, y);
        } else if (ny.kind == NodeKind::Sum) { // x input or product
            std::vector<int> ch;
            for (int j : ny.children) ch.push_back(self(self, x, j));
            out = note(b.sum(std::move(ch)), x, y);
        } else if (nx.kind == NodeKind::Sum) { // symmetric orientation
            std::vector<int> ch;
            for (int i : nx.children) ch.push_back(self(self, i, y));
            out = note(b.sum(std::move(ch)), x, y);
        } else if (nx.kind == NodeKind::Prod && ny.kind == NodeKind::Prod) {
            int a1 = nx.children[0], a2 = nx.children[1];
            int b1 = ny.children[0], b2 = ny.children[1];
            auto ok = [&](int p, int q, int r, int s) {
                return !(c.scopes[size_t(p)] & d.scopes[size_t(s)]) &&
                       !(c.scopes[size_t(q)] & d.scopes[size_t(r)]);
            };
            if (ok(a1, a2, b1, b2))
                out = note(b.prod(self(self, a1, b1), self(self, a2, b2)), x, y);
            else if (ok(a1, a2, b2, b1))
                out = note(b.prod(self(self, a1, b2), self(self, a2, b1)), x, y);
            else
                throw reject_error("incompatible circuits: scope partitions disagree");
        } else {
            // input against product: recurse into the unique overlapping child
            bool x_is_input = (nx.kind == NodeKind::Input);
            int pn = x_is_input ? y : x;
            const Circuit& pc = x_is_input ? d : c;
            VarSet os = sx & sy;
            int c1 = pc.nodes[size_t(pn)].children[0], c2 = pc.nodes[size_t(pn)].children[1];
            VarSet s1 = pc.scopes[size_t(c1)], s2 = pc.scopes[size_t(c2)];
            int inside, outside;
            if (!(os & ~s1)) { inside = c1; outside = c2; }
            else if (!(os & ~s2)) { inside = c2; outside = c1; }
            else throw reject_error("incompatible circuits: scope partitions disagree");
            int l, r;
            if (x_is_input) {
                l = self(self, x, inside);
                r = imp_b(outside);
            } else {
                l = self(self, inside, y);
                r = imp_a(outside);
            }
            srca.resize(b.c.nodes.size(), -1);
            srcb.resize(b.c.nodes.size(), -1);
            out = note(b.prod(l, r), x, y);
        }
        memo[key] = out;
        return out;
    };
    int root = rec(rec, c.root, d.root);
    std::vector<int> prune;
    TransformResult res;
    res.circuit = b.finish(root, &prune);
    res.src_a.assign(res.circuit.nodes.size(), -1);
    res.src_b.assign(res.circuit.nodes.size(), -1);
    for (size_t i = 0; i < srca.size(); ++i)
        if (prune[i] >= 0) {
            res.src_a[size_t(prune[i])] = srca[i];
            res.src_b[size_t(prune[i])] = srcb[i];
        }
    return res;
}

// ---- property-propagation ledger ----

// What each operator may claim about its output given claims about its inputs:
// determinism masks, plus (support-)compatibility masks relative to partner
// circuits identified by caller-chosen ids.  Aggregation keeps a mask iff it is
// disjoint from the aggregated variables; products keep what both operands
// claim (the compatible product never claims support-compatibility); mappings
// keep everything.  Claims feed the plan validator and are re-checked
// semantically by the test suite.
struct PropClaims {
    std::set<VarSet> x_det;
    std::map<int, std::set<VarSet>> x_cmp;  // partner id -> masks
    std::map<int, std::set<VarSet>> x_scmp;
};

enum class LedgerOp { Agg, ProdCmp, ProdScmp, Map };

inline PropClaims propagate_properties(LedgerOp op, const PropClaims& a,
                                       const PropClaims* b = nullptr, VarSet w = 0) {
    auto keep = [&](const std::set<VarSet>& s) {
        std::set<VarSet> out;
        for (VarSet m : s)
            if (!(m & w)) out.insert(m);
        return out;
    };
    auto meet = [](const std::set<VarSet>& p, const std::set<VarSet>& q) {
        std::set<VarSet> out;
        for (VarSet m : p)
            if (q.count(m)) out.insert(m);
        return out;
    };
    PropClaims out;
    switch (op) {
        case LedgerOp::Agg:
            out.x_det = keep(a.x_det);
            for (const auto& [k, s] : a.x_cmp) out.x_cmp[k] = keep(s);
            for (const auto& [k, s] : a.x_scmp) out.x_scmp[k] = keep(s);
            break;
        case LedgerOp::Map:
            out = a;
            break;
        case LedgerOp::ProdCmp:
        case LedgerOp::ProdScmp: {
            if (!b) throw eval_error("propagate_properties: product needs both profiles");
            out.x_det = meet(a.x_det, b->x_det);
            for (const auto& [k, s] : a.x_cmp) {
                auto it = b->x_cmp.find(k);
                if (it != b->x_cmp.end()) out.x_cmp[k] = meet(s, it->second);
            }
            if (op == LedgerOp::ProdScmp)
                for (const auto& [k, s] : a.x_scmp) {
                    auto it = b->x_scmp.find(k);
                    if (it != b->x_scmp.end()) out.x_scmp[k] = meet(s, it->second);
                }
            break;
        }
    }
    return out;
}

// PROD-SCMP: linear-time product under a support-compatibility isomorphism.
inline TransformResult product_scmp(const Circuit& c, const Circuit& d, const NodeIsomorphism& io) {
    if (c.sr != d.sr) throw reject_error("product: semiring mismatch");
    if (c.vars.size() != d.vars.size()) throw eval_error("product: variable tables differ");
    if (!check_smooth(c) || !check_decomposable(c) || !check_smooth(d) || !check_decomposable(d))
        throw reject_error("product requires smooth, decomposable circuits");
    VarSet x = c.root_scope() & d.root_scope();
    Builder b(c.sr, c.vars);
    std::vector<int> srca, srcb;
    auto note = [&](int id, int sa, int sb) {
        srca.resize(b.c.nodes.size(), -1);
        srcb.resize(b.c.nodes.size(), -1);
        srca[size_t(id)] = sa;
        srcb[size_t(id)] = sb;
        return id;
    };
    detail::Importer imp_a(c, b, srca), imp_b(d, b, srcb);
    // Scaled import: multiply a subtree by a constant, exactly once per parse
    // (inputs: scale the table; sums: scale every child; products: scale one
    // child).  Used to fold constant bridge partners into the other side so
    // bridge inputs stay entrywise products of matched factors — range-
    // restricted mappings applied downstream depend on this.
    std::map<std::pair<int, std::string>, int> smemo_a, smemo_b;
    auto scaled = [&](auto&& self, const Circuit& cc, int n, const Value& v,
                      detail::Importer& imp, std::vector<int>& sm, auto& memo2) -> int {
        if (value_is_one(v, *cc.sr, 0.0)) return imp(n);
        auto key = std::make_pair(n, value_to_string(v));
        auto it = memo2.find(key);
        if (it != memo2.end()) return it->second;
        const Node& nd = cc.nodes[size_t(n)];
        int id;
        switch (nd.kind) {
            case NodeKind::Input: {
                std::vector<Value> tab = nd.table;
                for (Value& x : tab) x = cc.sr->mul(v, x);
                id = b.input(nd.scope, std::move(tab));
                break;
            }
            case NodeKind::Sum: {
                std::vector<int> ch;
                for (int k : nd.children) ch.push_back(self(self, cc, k, v, imp, sm, memo2));
                id = b.sum(std::move(ch));
                break;
            }
            case NodeKind::Prod: {
                int l = self(self, cc, nd.children[0], v, imp, sm, memo2);
                int r = imp(nd.children[1]);
                id = b.prod(l, r);
                break;
            }
            default:
                throw eval_error("bad node kind");
        }
        sm.resize(b.c.nodes.size(), -1);
        sm[size_t(id)] = n;
        memo2[key] = id;
        return id;
    };
    std::map<std::pair<int, int>, int> memo;
    auto rec = [&](auto&& self, int xx, int yy) -> int {
        auto key = std::make_pair(xx, yy);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        const Node& nx = c.nodes[size_t(xx)];
        const Node& ny = d.nodes[size_t(yy)];
        VarSet sx = c.scopes[size_t(xx)], sy = d.scopes[size_t(yy)];
        int out;
        if (!(sx & sy)) {
            if (nx.kind == NodeKind::Input && nx.scope.empty()) {
                out = note(scaled(scaled, d, yy, nx.table[0], imp_b, srcb, smemo_b), xx, yy);
            } else if (ny.kind == NodeKind::Input && ny.scope.empty()) {
                out = note(scaled(scaled, c, xx, ny.table[0], imp_a, srca, smemo_a), xx, yy);
            } else {
                int ia = imp_a(xx), ib = imp_b(yy);
                srca.resize(b.c.nodes.size(), -1);
                srcb.resize(b.c.nodes.size(), -1);
                out = note(b.prod(ia, ib), xx, yy);
            }
        } else if (int(io.map.size()) > xx && io.map[size_t(xx)] != yy) {
            throw reject_error("support-compatibility violated: nodes overlap outside the isomorphism");
        } else if (nx.kind == NodeKind::Input && ny.kind == NodeKind::Input) {
            out = note(detail::prod_input(b, c, nx, d, ny), xx, yy);
        } else if (nx.kind == NodeKind::Sum && ny.kind == NodeKind::Sum) {
            if (nx.children.size() != ny.children.size())
                throw reject_error("support-compatibility violated: sum arity mismatch under iota");
            std::vector<int> ch;
            for (size_t k = 0; k < nx.children.size(); ++k)
                ch.push_back(self(self, nx.children[k], ny.children[k]));
            out = note(b.sum(std::move(ch)), xx, yy);
        } else if (nx.kind == NodeKind::Prod && ny.kind == NodeKind::Prod) {
            std::vector<int> ra, rb, la, lb;
            for (int ch : nx.children)
                ((c.scopes[size_t(ch)] & x) ? ra : la).push_back(ch);
            for (int ch : ny.children)
                ((d.scopes[size_t(ch)] & x) ? rb : lb).push_back(ch);
            if (ra.size() != rb.size() || la.size() != lb.size())
                throw reject_error("support-compatibility violated: restricted child counts differ");
            // pair restricted children in order, leftovers with each other (disjoint)
            std::map<int, int> partner;
            for (size_t k = 0; k < ra.size(); ++k) partner[ra[k]] = rb[k];
            for (size_t k = 0; k < la.size(); ++k) partner[la[k]] = lb[k];
            int l = self(self, nx.children[0], partner[nx.children[0]]);
            int r = self(self, nx.children[1], partner[nx.children[1]]);
            out = note(b.prod(l, r), xx, yy);
        } else {
            throw reject_error("support-compatibility violated: node kinds mismatch under iota");
        }
        memo[key] = out;
        return out;
    };
    int root = rec(rec, c.root, d.root);
    std::vector<int> prune;
    TransformResult res;
    res.circuit = b.finish(root, &prune);
    res.src_a.assign(res.circuit.nodes.size(), -1);
    res.src_b.assign(res.circuit.nodes.size(), -1);
    for (size_t i = 0; i < srca.size(); ++i)
        if (prune[i] >= 0) {
            res.src_a[size_t(prune[i])] = srca[i];
            res.src_b[size_t(prune[i])] = srcb[i];
        }
    return res;
}

} // namespace acirc
