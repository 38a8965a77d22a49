#pragma once
// Property checkers: smoothness, decomposability, supports, X-determinism,
// X-firstness, X-compatibility, X-support-compatibility, Prod 0/1.
//
// Two-circuit checks assume both circuits share one variable table (same names,
// domains, order); the plan executor and CLI arrange this via remap_variables.

#include <optional>
#include <set>

#include "acirc/circuit.hpp"

namespace acirc {

inline bool check_smooth(const Circuit& c) {
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Sum) continue;
        for (int ch : nd.children)
            if (c.scopes[size_t(ch)] != c.scopes[size_t(nd.children[0])]) return false;
    }
    return true;
}

inline bool check_decomposable(const Circuit& c) {
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Prod) continue;
        VarSet seen = 0;
        for (int ch : nd.children) {
            if (seen & c.scopes[size_t(ch)]) return false;
            seen |= c.scopes[size_t(ch)];
        }
    }
    return true;
}

// Rebinds a circuit onto a (super)set variable table, matching variables by name.
inline Circuit remap_variables(const Circuit& c, const std::vector<Variable>& joint) {
    Circuit out = c;
    out.vars = joint;
    std::vector<int> vmap(c.vars.size(), -1);
    for (size_t i = 0; i < c.vars.size(); ++i) {
        for (size_t j = 0; j < joint.size(); ++j)
            if (joint[j].name == c.vars[i].name) {
                if (joint[j].domain != c.vars[i].domain)
                    throw parse_error("variable domain mismatch for " + c.vars[i].name);
                vmap[i] = int(j);
            }
        if (vmap[i] < 0) throw parse_error("variable missing from joint table: " + c.vars[i].name);
    }
    for (Node& nd : out.nodes)
        for (int& v : nd.scope) v = vmap[size_t(v)];
    out.validate();
    out.recompute_scopes();
    return out;
}

inline std::vector<Variable> merge_variables(const std::vector<const Circuit*>& cs) {
    std::vector<Variable> joint;
    for (const Circuit* c : cs)
        for (const auto& v : c->vars) {
            bool found = false;
            for (const auto& j : joint)
                if (j.name == v.name) {
                    if (j.domain != v.domain)
                        throw parse_error("variable domain mismatch for " + v.name);
                    found = true;
                }
            if (!found) joint.push_back(v);
        }
    return joint;
}

// ---- supports ----

struct NodeSupport {
    std::vector<int> xvars;       // sorted X ∩ scope(node)
    std::set<std::uint64_t> codes; // mixed-radix codes, first listed var slowest
};

struct SupportTable {
    VarSet x = 0;
    std::vector<NodeSupport> per_node;
};

namespace detail {

inline std::vector<int> mask_to_vars(VarSet m) {
    std::vector<int> out;
    for (int v = 0; v < 64; ++v)
        if (m & bit(v)) out.push_back(v);
    return out;
}

inline std::uint64_t encode_assign(const Circuit& c, const std::vector<int>& vars, const Assignment& a) {
    std::uint64_t code = 0;
    for (int v : vars) code = code * std::uint64_t(c.vars[size_t(v)].domain) + std::uint64_t(a[size_t(v)]);
    return code;
}

inline void decode_assign(const Circuit& c, const std::vector<int>& vars, std::uint64_t code, Assignment& a) {
    for (int i = int(vars.size()) - 1; i >= 0; --i) {
        int v = vars[size_t(i)];
        a[size_t(v)] = int(code % std::uint64_t(c.vars[size_t(v)].domain));
        code /= std::uint64_t(c.vars[size_t(v)].domain);
    }
}

} // namespace detail

inline SupportTable compute_supports(const Circuit& c, VarSet x, std::uint64_t cap = (1ull << 20),
                                     double tol = 1e-12) {
    if (!check_smooth(c) || !check_decomposable(c))
        throw eval_error("compute_supports requires a smooth, decomposable circuit");
    if (!c.sr->zero_sum_free)
        throw eval_error("compute_supports is exact only for zero-sum-free semirings");
    SupportTable st;
    st.x = x;
    st.per_node.resize(c.nodes.size());
    Assignment a(c.vars.size(), -1);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        NodeSupport& ns = st.per_node[i];
        ns.xvars = detail::mask_to_vars(c.scopes[i] & x);
        std::uint64_t space = 1;
        for (int v : ns.xvars) {
            space *= std::uint64_t(c.vars[size_t(v)].domain);
            if (space > cap) throw eval_error("support cap exceeded");
        }
        switch (nd.kind) {
            case NodeKind::Input: {
                for (std::uint64_t row = 0; row < nd.table.size(); ++row) {
                    if (value_is_zero(nd.table[row], *c.sr, tol)) continue;
                    unrank_row(c, nd.scope, row, a);
                    ns.codes.insert(detail::encode_assign(c, ns.xvars, a));
                }
                break;
            }
            case NodeKind::Sum: {
                for (int ch : nd.children)
                    ns.codes.insert(st.per_node[size_t(ch)].codes.begin(),
                                    st.per_node[size_t(ch)].codes.end());
                break;
            }
            case NodeKind::Prod: {
                const NodeSupport& l = st.per_node[size_t(nd.children[0])];
                const NodeSupport& r = st.per_node[size_t(nd.children[1])];
                for (std::uint64_t ca : l.codes) {
                    detail::decode_assign(c, l.xvars, ca, a);
                    for (std::uint64_t cb : r.codes) {
                        detail::decode_assign(c, r.xvars, cb, a);
                        ns.codes.insert(detail::encode_assign(c, ns.xvars, a));
                    }
                }
                break;
            }
        }
    }
    return st;
}

inline bool check_x_deterministic(const Circuit& c, VarSet x, std::uint64_t cap = (1ull << 20),
                                  double tol = 1e-12) {
    SupportTable st = compute_supports(c, x, cap, tol);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Sum) continue;
        if (!(c.scopes[i] & x)) continue; // condition (i)
        for (size_t p = 0; p < nd.children.size(); ++p)
            for (size_t q = p + 1; q < nd.children.size(); ++q) {
                const auto& A = st.per_node[size_t(nd.children[p])].codes;
                const auto& B = st.per_node[size_t(nd.children[q])].codes;
                for (std::uint64_t code : A)
                    if (B.count(code)) return false;
            }
    }
    return true;
}

inline bool check_deterministic(const Circuit& c, std::uint64_t cap = (1ull << 20), double tol = 1e-12) {
    return check_x_deterministic(c, c.root_scope(), cap, tol);
}

// X-firstness: every product has (i) two pure children, or (ii) one mixed and one
// X-only child.  Empty-scope constants count as X-only.
inline bool check_x_first(const Circuit& c, VarSet x) {
    VarSet all = 0;
    for (VarSet s : c.scopes) all |= s;
    VarSet y = all & ~x;
    auto xonly = [&](int n) { return (c.scopes[size_t(n)] & y) == 0; };
    auto yonly = [&](int n) { return (c.scopes[size_t(n)] & x) == 0; };
    auto pure = [&](int n) { return xonly(n) || yonly(n); };
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Prod) continue;
        int a = nd.children[0], b = nd.children[1];
        if (pure(a) && pure(b)) continue;
        if (!pure(a) && xonly(b)) continue;
        if (!pure(b) && xonly(a)) continue;
        return false;
    }
    return true;
}

// X-compatibility over a shared variable table.
inline bool check_x_compatible(const Circuit& c, const Circuit& d, VarSet x) {
    if (!check_smooth(c) || !check_decomposable(c) || !check_smooth(d) || !check_decomposable(d))
        return false;
    VarSet shared = c.root_scope() & d.root_scope();
    if (x & ~shared) throw eval_error("X not within shared variables");
    std::vector<std::pair<VarSet, std::pair<VarSet, VarSet>>> dprods;
    for (size_t j = 0; j < d.nodes.size(); ++j) {
        const Node& nd = d.nodes[j];
        if (nd.kind != NodeKind::Prod) continue;
        VarSet b1 = d.scopes[size_t(nd.children[0])] & x;
        VarSet b2 = d.scopes[size_t(nd.children[1])] & x;
        if (!b1 || !b2) continue; // restriction is unary: no decision on X
        dprods.push_back({b1 | b2, {b1, b2}});
    }
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nc = c.nodes[i];
        if (nc.kind != NodeKind::Prod) continue;
        VarSet a1 = c.scopes[size_t(nc.children[0])] & x;
        VarSet a2 = c.scopes[size_t(nc.children[1])] & x;
        if (!a1 || !a2) continue;
        VarSet si = a1 | a2;
        for (const auto& [sj, parts] : dprods) {
            if (si != sj) continue;
            auto [b1, b2] = parts;
            if (!((a1 == b1 && a2 == b2) || (a1 == b2 && a2 == b1))) return false;
        }
    }
    return true;
}

inline bool check_structured_decomposable(const Circuit& c) {
    return check_x_compatible(c, c, c.root_scope());
}

// ---- node isomorphism between restrictions C[X], C'[X] ----

struct NodeIsomorphism {
    std::vector<int> map; // c-node id -> d-node id, -1 outside C[X]
};

inline NodeIsomorphism identity_isomorphism(const Circuit& c) {
    NodeIsomorphism io;
    io.map.resize(c.nodes.size());
    for (size_t i = 0; i < c.nodes.size(); ++i) io.map[i] = int(i);
    return io;
}

// Structural validation of ι: bijection between the X-restrictions, matching node
// kinds, equal X-scopes, child order preserved on the restricted DAGs.
inline bool validate_isomorphism(const Circuit& c, const Circuit& d, VarSet x,
                                 const NodeIsomorphism& io, std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (io.map.size() != c.nodes.size()) return fail("iota has wrong length");
    std::vector<char> hit(d.nodes.size(), 0);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        bool in_restr = (c.scopes[i] & x) != 0;
        int j = io.map[i];
        if (!in_restr) continue;
        if (j < 0 || j >= int(d.nodes.size())) return fail("iota undefined on restricted node");
        if (!(d.scopes[size_t(j)] & x)) return fail("iota maps outside restriction");
        if (hit[size_t(j)]) return fail("iota not injective");
        hit[size_t(j)] = 1;
        const Node& nc = c.nodes[i];
        const Node& ndd = d.nodes[size_t(j)];
        if (nc.kind != ndd.kind) return fail("iota does not preserve node kinds");
        if ((c.scopes[i] & x) != (d.scopes[size_t(j)] & x)) return fail("X-scope mismatch under iota");
        std::vector<int> rc, rd;
        for (int ch : nc.children)
            if (c.scopes[size_t(ch)] & x) rc.push_back(ch);
        for (int ch : ndd.children)
            if (d.scopes[size_t(ch)] & x) rd.push_back(ch);
        if (rc.size() != rd.size()) return fail("restricted child counts differ under iota");
        for (size_t k = 0; k < rc.size(); ++k)
            if (io.map[size_t(rc[k])] != rd[k]) return fail("child order not preserved under iota");
    }
    for (size_t j = 0; j < d.nodes.size(); ++j)
        if ((d.scopes[j] & x) && !hit[j]) return fail("iota not onto restriction");
    return true;
}

inline bool check_support_compatible(const Circuit& c, const Circuit& d, VarSet x,
                                     const NodeIsomorphism& io, std::string* why = nullptr,
                                     std::uint64_t cap = (1ull << 20), double tol = 1e-12) {
    if (!validate_isomorphism(c, d, x, io, why)) return false;
    SupportTable sc = compute_supports(c, x, cap, tol);
    SupportTable sd = compute_supports(d, x, cap, tol);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        if (!(c.scopes[i] & x)) continue;
        const Node& nc = c.nodes[i];
        if (nc.kind != NodeKind::Sum) continue;
        const Node& ndd = d.nodes[size_t(io.map[i])];
        // smooth ⇒ all children restricted; arity equality came from validate
        for (size_t p = 0; p < nc.children.size(); ++p)
            for (size_t q = 0; q < ndd.children.size(); ++q) {
                if (p == q) continue;
                const auto& A = sc.per_node[size_t(nc.children[p])].codes;
                const auto& B = sd.per_node[size_t(ndd.children[q])].codes;
                for (std::uint64_t code : A)
                    if (B.count(code)) {
                        if (why) *why = "cross child supports intersect at a sum";
                        return false;
                    }
            }
    }
    return true;
}

// ---- Prod 0/1 (syntactic sound approximation) ----

struct Prod01Result {
    std::vector<char> zero_one; // per-node flag
    bool ok = false;            // every product has a flagged child
};

inline Prod01Result check_prod01(const Circuit& c, std::uint64_t cap = (1ull << 20),
                                 double tol = 1e-12) {
    Prod01Result res;
    res.zero_one.assign(c.nodes.size(), 0);
    std::optional<SupportTable> st; // full-scope supports, computed lazily for sums
    bool smooth_dec = check_smooth(c) && check_decomposable(c);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        switch (nd.kind) {
            case NodeKind::Input: {
                bool all01 = true;
                for (const Value& v : nd.table)
                    if (!value_is_zero(v, *c.sr, tol) && !value_is_one(v, *c.sr, tol)) all01 = false;
                res.zero_one[i] = all01;
                break;
            }
            case NodeKind::Prod: {
                bool all = true;
                for (int ch : nd.children) all = all && res.zero_one[size_t(ch)];
                res.zero_one[i] = all;
                break;
            }
            case NodeKind::Sum: {
                bool all = true;
                for (int ch : nd.children) all = all && res.zero_one[size_t(ch)];
                if (!all || !smooth_dec) break;
                if (!st) st = compute_supports(c, c.root_scope(), cap, tol);
                bool disjoint = true;
                for (size_t p = 0; p < nd.children.size() && disjoint; ++p)
                    for (size_t q = p + 1; q < nd.children.size() && disjoint; ++q) {
                        const auto& A = st->per_node[size_t(nd.children[p])].codes;
                        const auto& B = st->per_node[size_t(nd.children[q])].codes;
                        for (std::uint64_t code : A)
                            if (B.count(code)) { disjoint = false; break; }
                    }
                res.zero_one[i] = disjoint;
                break;
            }
        }
    }
    res.ok = true;
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Prod) continue;
        bool any = false;
        for (int ch : nd.children) any = any || res.zero_one[size_t(ch)];
        if (!any) res.ok = false;
    }
    return res;
}

// ---- aggregate profile for CLI output ----

struct PropertyProfile {
    bool smooth = false, decomposable = false, deterministic = false;
    bool structured_decomposable = false;
    bool prod01 = false;
    std::map<std::string, bool> x_det;   // keyed by comma-joined variable list
    std::map<std::string, bool> x_first;
};

} // namespace acirc
