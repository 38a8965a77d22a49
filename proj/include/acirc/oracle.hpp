#pragma once
// Brute-force reference semantics.  Everything here recomputes from first
// principles (full tables, set definitions); only the semiring registry and
// the IR structs are shared with the engine.

#include "acirc/analysis.hpp"
#include "acirc/plan.hpp"

namespace acirc {

struct DenseTable {
    const Semiring* sr = nullptr;
    std::vector<Variable> vars; // the variable table the scope indexes into
    std::vector<int> scope;     // sorted ascending
    std::vector<Value> data;    // row-major, first scope entry slowest
};

namespace oracle_detail {

inline std::uint64_t span(const std::vector<Variable>& vars, const std::vector<int>& scope) {
    std::uint64_t t = 1;
    for (int v : scope) t *= std::uint64_t(vars[size_t(v)].domain);
    return t;
}

// assignment (full vector) -> row under an ordered scope
inline std::uint64_t rank(const std::vector<Variable>& vars, const std::vector<int>& scope,
                          const std::vector<int>& a) {
    std::uint64_t idx = 0;
    for (int v : scope) idx = idx * std::uint64_t(vars[size_t(v)].domain) + std::uint64_t(a[size_t(v)]);
    return idx;
}

inline void unrank(const std::vector<Variable>& vars, const std::vector<int>& scope,
                   std::uint64_t row, std::vector<int>& a) {
    for (int i = int(scope.size()) - 1; i >= 0; --i) {
        int v = scope[size_t(i)];
        a[size_t(v)] = int(row % std::uint64_t(vars[size_t(v)].domain));
        row /= std::uint64_t(vars[size_t(v)].domain);
    }
}

inline std::vector<int> sorted_vars(VarSet m) {
    std::vector<int> out;
    for (int v = 0; v < 64; ++v)
        if (m & (VarSet(1) << v)) out.push_back(v);
    return out;
}

} // namespace oracle_detail

// Per-node full tables by direct recursive semantics (broadcast over the
// node's own scope; tolerates non-smooth circuits).
inline std::vector<DenseTable> oracle_node_tables(const Circuit& c, std::uint64_t cap = (1ull << 22)) {
    using namespace oracle_detail;
    std::vector<DenseTable> out(c.nodes.size());
    std::vector<int> a(c.vars.size(), 0);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        DenseTable& t = out[i];
        t.sr = c.sr;
        t.vars = c.vars;
        t.scope = sorted_vars(c.scopes[i]);
        std::uint64_t n = span(c.vars, t.scope);
        if (n > cap) throw eval_error("oracle cap exceeded");
        t.data.reserve(n);
        const Node& nd = c.nodes[i];
        for (std::uint64_t row = 0; row < n; ++row) {
            unrank(c.vars, t.scope, row, a);
            Value v;
            switch (nd.kind) {
                case NodeKind::Input:
                    v = nd.table[rank(c.vars, nd.scope, a)];
                    break;
                case NodeKind::Sum: {
                    v = c.sr->zero;
                    for (int ch : nd.children)
                        v = c.sr->add(v, out[size_t(ch)].data[rank(c.vars, out[size_t(ch)].scope, a)]);
                    break;
                }
                case NodeKind::Prod: {
                    v = c.sr->one;
                    for (int ch : nd.children)
                        v = c.sr->mul(v, out[size_t(ch)].data[rank(c.vars, out[size_t(ch)].scope, a)]);
                    break;
                }
            }
            t.data.push_back(v);
        }
    }
    return out;
}

inline DenseTable oracle_eval_table(const Circuit& c, std::uint64_t cap = (1ull << 22)) {
    return oracle_node_tables(c, cap)[size_t(c.root)];
}

// ---- the three operators on tables ----

inline DenseTable oracle_agg(const DenseTable& t, VarSet w) {
    using namespace oracle_detail;
    DenseTable out;
    out.sr = t.sr;
    out.vars = t.vars;
    VarSet keep = 0;
    for (int v : t.scope)
        if (!(w & (VarSet(1) << v))) keep |= VarSet(1) << v;
    out.scope = sorted_vars(keep);
    out.data.assign(span(t.vars, out.scope), t.sr->zero);
    std::vector<int> a(t.vars.size(), 0);
    for (std::uint64_t row = 0; row < t.data.size(); ++row) {
        unrank(t.vars, t.scope, row, a);
        std::uint64_t o = rank(t.vars, out.scope, a);
        out.data[o] = t.sr->add(out.data[o], t.data[row]);
    }
    return out;
}

inline DenseTable oracle_prod(const DenseTable& x, const DenseTable& y) {
    using namespace oracle_detail;
    if (x.sr != y.sr) throw eval_error("oracle_prod: semiring mismatch");
    DenseTable out;
    out.sr = x.sr;
    out.vars = x.vars;
    VarSet un = 0;
    for (int v : x.scope) un |= VarSet(1) << v;
    for (int v : y.scope) un |= VarSet(1) << v;
    out.scope = sorted_vars(un);
    std::uint64_t n = span(x.vars, out.scope);
    out.data.reserve(n);
    std::vector<int> a(x.vars.size(), 0);
    for (std::uint64_t row = 0; row < n; ++row) {
        unrank(x.vars, out.scope, row, a);
        out.data.push_back(x.sr->mul(x.data[rank(x.vars, x.scope, a)],
                                     y.data[rank(y.vars, y.scope, a)]));
    }
    return out;
}

inline DenseTable oracle_map(const DenseTable& t, const Mapping& tau) {
    if (t.sr != tau.source) throw eval_error("oracle_map: semiring mismatch");
    DenseTable out = t;
    out.sr = tau.target;
    for (Value& v : out.data) v = tau.apply(v);
    return out;
}

// ---- semantic property checks from full tables ----

inline std::set<std::uint64_t> oracle_support(const DenseTable& t, VarSet x, double tol = 1e-12) {
    using namespace oracle_detail;
    std::vector<int> xs;
    for (int v : t.scope)
        if (x & (VarSet(1) << v)) xs.push_back(v);
    std::set<std::uint64_t> codes;
    std::vector<int> a(t.vars.size(), 0);
    for (std::uint64_t row = 0; row < t.data.size(); ++row) {
        if (value_is_zero(t.data[row], *t.sr, tol)) continue;
        unrank(t.vars, t.scope, row, a);
        codes.insert(rank(t.vars, xs, a));
    }
    return codes;
}

inline bool oracle_check_x_det(const Circuit& c, VarSet x, std::uint64_t cap = (1ull << 22),
                               double tol = 1e-12) {
    auto tabs = oracle_node_tables(c, cap);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Sum || !(c.scopes[i] & x)) continue;
        // compare child supports over x ∩ scope(sum); children of a smooth sum
        // share the scope, so the projections line up
        std::vector<std::set<std::uint64_t>> supp;
        for (int ch : nd.children)
            supp.push_back(oracle_support(tabs[size_t(ch)], x & c.scopes[i], tol));
        for (size_t p = 0; p < supp.size(); ++p)
            for (size_t q = p + 1; q < supp.size(); ++q)
                for (std::uint64_t code : supp[p])
                    if (supp[q].count(code)) return false;
    }
    return true;
}

inline bool oracle_check_det(const Circuit& c, std::uint64_t cap = (1ull << 22), double tol = 1e-12) {
    return oracle_check_x_det(c, c.root_scope(), cap, tol);
}

inline bool oracle_check_prod01(const Circuit& c, std::uint64_t cap = (1ull << 22),
                                double tol = 1e-12) {
    using namespace oracle_detail;
    auto tabs = oracle_node_tables(c, cap);
    std::vector<int> a(c.vars.size(), 0);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Prod) continue;
        const DenseTable& t = tabs[i];
        for (std::uint64_t row = 0; row < t.data.size(); ++row) {
            unrank(c.vars, t.scope, row, a);
            bool ok = false;
            for (int ch : nd.children) {
                const Value& v = tabs[size_t(ch)].data[rank(c.vars, tabs[size_t(ch)].scope, a)];
                if (value_is_zero(v, *c.sr, tol) || value_is_one(v, *c.sr, tol)) ok = true;
            }
            if (!ok) return false;
        }
    }
    return true;
}

// cross-disjointness of sum-child supports under a structural isomorphism
inline bool oracle_check_support_compatible(const Circuit& c, const Circuit& d, VarSet x,
                                            const NodeIsomorphism& io,
                                            std::uint64_t cap = (1ull << 22), double tol = 1e-12) {
    std::string why;
    if (!validate_isomorphism(c, d, x, io, &why)) return false;
    auto tc = oracle_node_tables(c, cap);
    auto td = oracle_node_tables(d, cap);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        if (!(c.scopes[i] & x)) continue;
        const Node& nc = c.nodes[i];
        if (nc.kind != NodeKind::Sum) continue;
        const Node& nd = d.nodes[size_t(io.map[i])];
        for (size_t p = 0; p < nc.children.size(); ++p) {
            auto sp = oracle_support(tc[size_t(nc.children[p])], x, tol);
            for (size_t q = 0; q < nd.children.size(); ++q) {
                if (p == q) continue;
                auto sq = oracle_support(td[size_t(nd.children[q])], x, tol);
                for (std::uint64_t code : sp)
                    if (sq.count(code)) return false;
            }
        }
    }
    return true;
}

// ---- plan interpretation by enumeration ----

inline DenseTable oracle_eval_plan(const PlanTree& t,
                                   const std::map<std::string, Circuit>& bindings,
                                   std::uint64_t cap = (1ull << 22)) {
    // joint variable table over all leaves, by first appearance
    std::vector<const Circuit*> used;
    for (const PlanNode& nd : t.nodes)
        if (nd.kind == PlanKind::Leaf && !plan_leaf_is_const(nd.name)) {
            auto it = bindings.find(nd.name);
            if (it == bindings.end()) throw parse_error("plan: unbound circuit '" + nd.name + "'");
            used.push_back(&it->second);
        }
    std::vector<Variable> joint = merge_variables(used);
    std::vector<DenseTable> val(t.nodes.size());
    for (size_t i = 0; i < t.nodes.size(); ++i) {
        const PlanNode& nd = t.nodes[i];
        switch (nd.kind) {
            case PlanKind::Leaf: {
                Circuit rc = plan_leaf_is_const(nd.name)
                                 ? remap_variables(plan_const_circuit(nd.name), joint)
                                 : remap_variables(bindings.at(nd.name), joint);
                val[i] = oracle_eval_table(rc, cap);
                break;
            }
            case PlanKind::Agg: {
                VarSet w = 0;
                for (const std::string& vn : nd.agg_vars) {
                    int vi = -1;
                    for (size_t j = 0; j < joint.size(); ++j)
                        if (joint[j].name == vn) vi = int(j);
                    if (vi < 0) throw parse_error("plan: unknown variable '" + vn + "'");
                    w |= VarSet(1) << vi;
                }
                val[i] = oracle_agg(val[size_t(nd.a)], w);
                break;
            }
            case PlanKind::Prod:
                val[i] = oracle_prod(val[size_t(nd.a)], val[size_t(nd.b)]);
                break;
            case PlanKind::Map: {
                const Mapping* tau = lookup_mapping(nd.name, val[size_t(nd.a)].sr);
                val[i] = oracle_map(val[size_t(nd.a)], *tau);
                break;
            }
        }
    }
    return val[size_t(t.root)];
}

inline Value oracle_plan_scalar(const PlanTree& t, const std::map<std::string, Circuit>& bindings,
                                std::uint64_t cap = (1ull << 22)) {
    DenseTable r = oracle_eval_plan(t, bindings, cap);
    if (!r.scope.empty()) throw eval_error("plan result is not a scalar");
    return r.data[0];
}

} // namespace acirc
