#pragma once
// Compositional query layer: static tractability validation of plans, plan
// execution via the circuit transforms, and builders for the query catalog.

#include "acirc/plan.hpp"
#include "acirc/transform.hpp"

namespace acirc {

// ---- validated plan representation ----

struct PlanFacts {
    const Semiring* sr = nullptr;
    VarSet scope = 0;
    bool has_sums = false, has_prods = false;
    bool omni = false;  // fully factorized (weight-chain shaped)
    bool all01 = false; // every input table entry in {0,1}
    std::set<VarSet> x_det;   // established determinism masks (modulo scope)
    std::set<VarSet> x_first; // established X-firstness masks
    std::set<VarSet> val01;   // masks T: every node with nonempty scope ⊆ T is 0/1-valued
    std::set<VarSet> pure;    // masks T: every input scope is inside T or disjoint from T
    int leaf = -1;            // lineage anchor (plan leaf id), -1 when mixed
};

enum class ProdAlgo { Disjoint, Scmp, Omni, Cmp };

struct PlanDecision {
    ProdAlgo algo = ProdAlgo::Cmp;
    bool omni_right = true; // which operand is the weight chain
    VarSet scmp_mask = 0;
    MapCert cert;
};

struct TractabilityReport {
    bool ok = false;
    std::string reason;
    std::vector<std::string> lines;
};

struct ValidatedPlan {
    PlanTree tree;
    std::vector<Variable> joint;
    std::vector<Circuit> leaf_circ; // indexed by plan node (leaves only)
    std::vector<PlanFacts> facts;
    std::vector<PlanDecision> decision;
    std::vector<VarSet> agg_mask;
    TractabilityReport report;
};

namespace detail {

inline std::string varset_names(const std::vector<Variable>& vars, VarSet m) {
    std::string s = "{";
    bool first = true;
    for (size_t v = 0; v < vars.size(); ++v)
        if (m & bit(int(v))) {
            if (!first) s += ",";
            s += vars[v].name;
            first = false;
        }
    return s + "}";
}

inline bool facts_x_det(const PlanFacts& f, VarSet t) {
    if (!(t & f.scope)) return true;
    if (!f.has_sums) return true;
    for (VarSet m : f.x_det)
        if ((m & f.scope) == (t & f.scope)) return true;
    return false;
}

struct RelStore {
    std::map<std::pair<int, int>, std::set<VarSet>> rel;
    void add(int a, int b, VarSet m) { rel[{std::min(a, b), std::max(a, b)}].insert(m); }
    bool stored(int a, int b, VarSet m) const {
        auto it = rel.find({std::min(a, b), std::max(a, b)});
        return it != rel.end() && it->second.count(m);
    }
    // all (other, mask) pairs involving node n
    std::vector<std::pair<int, VarSet>> involving(int n) const {
        std::vector<std::pair<int, VarSet>> out;
        for (const auto& [k, ms] : rel) {
            if (k.first != n && k.second != n) continue;
            int o = (k.first == n) ? k.second : k.first;
            for (VarSet m : ms) out.push_back({o, m});
        }
        return out;
    }
};

} // namespace detail

// ---- static validation ----

inline ValidatedPlan plan_validate(const PlanTree& tree,
                                   const std::map<std::string, Circuit>& bindings,
                                   std::uint64_t cap = (1ull << 20), double tol = 1e-12) {
    ValidatedPlan vp;
    vp.tree = tree;
    size_t n = tree.nodes.size();
    vp.facts.resize(n);
    vp.decision.resize(n);
    vp.agg_mask.assign(n, 0);
    vp.leaf_circ.resize(n);

    // joint variable table over leaves, in plan-node order
    std::vector<const Circuit*> used;
    bool any_leaf = false;
    for (const PlanNode& nd : tree.nodes)
        if (nd.kind == PlanKind::Leaf) {
            any_leaf = true;
            if (plan_leaf_is_const(nd.name)) continue;
            auto it = bindings.find(nd.name);
            if (it == bindings.end()) throw parse_error("plan: unbound circuit '" + nd.name + "'");
            used.push_back(&it->second);
        }
    if (!any_leaf) throw parse_error("plan has no circuit leaves");
    vp.joint = merge_variables(used);
    auto var_of = [&](const std::string& vn) {
        for (size_t j = 0; j < vp.joint.size(); ++j)
            if (vp.joint[j].name == vn) return int(j);
        throw parse_error("plan: unknown variable '" + vn + "'");
    };

    detail::RelStore cmp_rel, scmp_rel;
    std::set<VarSet> pool;

    auto has_cmp = [&](int a, int b, VarSet m) {
        if (!(vp.facts[size_t(a)].scope & m) || !(vp.facts[size_t(b)].scope & m)) return true;
        if (vp.facts[size_t(a)].omni || vp.facts[size_t(b)].omni) return true;
        return cmp_rel.stored(a, b, m);
    };
    auto has_scmp = [&](int a, int b, VarSet m) {
        if (!(vp.facts[size_t(a)].scope & m) && !(vp.facts[size_t(b)].scope & m)) return true;
        if (a == b && detail::facts_x_det(vp.facts[size_t(a)], m)) return true;
        return scmp_rel.stored(a, b, m);
    };

    try {
        // pass 1: scope and semiring
        for (size_t i = 0; i < n; ++i) {
            const PlanNode& nd = tree.nodes[i];
            PlanFacts& f = vp.facts[i];
            switch (nd.kind) {
                case PlanKind::Leaf: {
                    Circuit rc = plan_leaf_is_const(nd.name)
                                     ? remap_variables(plan_const_circuit(nd.name), vp.joint)
                                     : remap_variables(bindings.at(nd.name), vp.joint);
                    f.sr = rc.sr;
                    f.scope = rc.root_scope();
                    vp.leaf_circ[i] = std::move(rc);
                    break;
                }
                case PlanKind::Agg: {
                    VarSet w = 0;
                    for (const std::string& vn : nd.agg_vars) w |= bit(var_of(vn));
                    if (w & ~vp.facts[size_t(nd.a)].scope)
                        throw reject_error("plan: aggregating variables outside the circuit scope");
                    vp.agg_mask[i] = w;
                    f.sr = vp.facts[size_t(nd.a)].sr;
                    f.scope = vp.facts[size_t(nd.a)].scope & ~w;
                    break;
                }
                case PlanKind::Prod: {
                    if (vp.facts[size_t(nd.a)].sr != vp.facts[size_t(nd.b)].sr)
                        throw parse_error("plan: product operands in different semirings");
                    f.sr = vp.facts[size_t(nd.a)].sr;
                    f.scope = vp.facts[size_t(nd.a)].scope | vp.facts[size_t(nd.b)].scope;
                    break;
                }
                case PlanKind::Map: {
                    const Mapping* tau = lookup_mapping(nd.name, vp.facts[size_t(nd.a)].sr);
                    if (tau->source != vp.facts[size_t(nd.a)].sr)
                        throw parse_error("plan: mapping " + nd.name + " does not apply to semiring " +
                                          vp.facts[size_t(nd.a)].sr->id);
                    f.sr = tau->target;
                    f.scope = vp.facts[size_t(nd.a)].scope;
                    break;
                }
            }
        }

        // tracked masks: mapping child scopes and product shared scopes
        std::set<VarSet> tracked;
        for (size_t i = 0; i < n; ++i) {
            const PlanNode& nd = tree.nodes[i];
            if (nd.kind == PlanKind::Map) tracked.insert(vp.facts[size_t(nd.a)].scope);
            if (nd.kind == PlanKind::Prod)
                tracked.insert(vp.facts[size_t(nd.a)].scope & vp.facts[size_t(nd.b)].scope);
        }
        tracked.erase(VarSet(0));
        pool = tracked;

        // pass 2: leaf facts and leaf-pair relation seeds
        std::vector<int> leaves;
        for (size_t i = 0; i < n; ++i) {
            if (tree.nodes[i].kind != PlanKind::Leaf) continue;
            const Circuit& c = vp.leaf_circ[i];
            PlanFacts& f = vp.facts[i];
            if (!check_smooth(c) || !check_decomposable(c))
                throw reject_error("plan: circuit '" + tree.nodes[i].name +
                                   "' is not smooth and decomposable");
            for (const Node& cn : c.nodes) {
                if (cn.kind == NodeKind::Sum && cn.children.size() >= 2) f.has_sums = true;
                if (cn.kind == NodeKind::Prod) f.has_prods = true;
            }
            f.omni = is_factorized(c);
            f.all01 = true;
            for (const Node& cn : c.nodes)
                if (cn.kind == NodeKind::Input)
                    for (const Value& v : cn.table)
                        if (!value_is_zero(v, *c.sr, tol) && !value_is_one(v, *c.sr, tol))
                            f.all01 = false;
            f.leaf = int(i);
            for (VarSet t : tracked) {
                VarSet tx = t & f.scope;
                bool pure = true;
                for (const Node& cn : c.nodes) {
                    if (cn.kind != NodeKind::Input) continue;
                    VarSet s = 0;
                    for (int v : cn.scope) s |= bit(v);
                    if ((s & t) && (s & ~t)) pure = false;
                }
                if (pure) f.pure.insert(t);
                if (c.sr->kind == SemiringKind::Bool) f.val01.insert(t);
                if (check_x_first(c, t)) f.x_first.insert(t);
                if (tx) {
                    try {
                        if (check_x_deterministic(c, tx, cap, tol)) {
                            f.x_det.insert(tx);
                            scmp_rel.add(int(i), int(i), tx);
                            pool.insert(tx);
                        }
                    } catch (const eval_error&) {
                    }
                }
            }
            for (int j : leaves) { // earlier leaves
                for (VarSet t : tracked) {
                    VarSet x = t & f.scope & vp.facts[size_t(j)].scope;
                    if (!x) continue;
                    try {
                        if (check_x_compatible(c, vp.leaf_circ[size_t(j)], x)) {
                            cmp_rel.add(int(i), j, x);
                            pool.insert(x);
                        }
                    } catch (const eval_error&) {
                    }
                }
            }
            for (VarSet t : tracked) { // self compatibility (structuredness on t)
                VarSet x = t & f.scope;
                if (!x) continue;
                try {
                    if (check_x_compatible(c, c, x)) {
                        cmp_rel.add(int(i), int(i), x);
                        pool.insert(x);
                    }
                } catch (const eval_error&) {
                }
            }
            leaves.push_back(int(i));
            vp.report.lines.push_back("#" + std::to_string(i) + " circ " + tree.nodes[i].name +
                                      ": scope " + detail::varset_names(vp.joint, f.scope));
        }

        // pass 3: propagate through operators in order
        for (size_t i = 0; i < n; ++i) {
            const PlanNode& nd = tree.nodes[i];
            PlanFacts& f = vp.facts[i];
            switch (nd.kind) {
                case PlanKind::Leaf:
                    break;
                case PlanKind::Agg: {
                    const PlanFacts& cf = vp.facts[size_t(nd.a)];
                    VarSet w = vp.agg_mask[i];
                    f.has_sums = cf.has_sums;
                    f.has_prods = cf.has_prods;
                    f.omni = cf.omni;
                    f.all01 = false;
                    f.leaf = cf.leaf;
                    f.pure = cf.pure;
                    for (VarSet m : cf.x_det)
                        if (!(m & w)) f.x_det.insert(m);
                    for (VarSet m : cf.x_first)
                        if (!(m & w)) f.x_first.insert(m);
                    for (VarSet m : cf.val01)
                        if (!(m & w) && cf.pure.count(m)) f.val01.insert(m);
                    for (auto [o, m] : cmp_rel.involving(nd.a))
                        if (!(m & w)) {
                            cmp_rel.add(int(i), o, m);
                            if (o == nd.a) cmp_rel.add(int(i), int(i), m);
                        }
                    for (auto [o, m] : scmp_rel.involving(nd.a))
                        if (!(m & w)) {
                            scmp_rel.add(int(i), o, m);
                            if (o == nd.a) scmp_rel.add(int(i), int(i), m);
                        }
                    vp.report.lines.push_back("#" + std::to_string(i) + " agg " +
                                              detail::varset_names(vp.joint, w) + ": ok");
                    break;
                }
                case PlanKind::Map: {
                    const PlanFacts& cf = vp.facts[size_t(nd.a)];
                    const Mapping* tau = lookup_mapping(nd.name, cf.sr);
                    std::string how_sums = "no sums", how_prods = "no products";
                    MapCert cert;
                    if (cf.has_sums) {
                        if (tau->additive_hom) {
                            how_sums = "(Additive)";
                        } else if (detail::facts_x_det(cf, cf.scope)) {
                            cert.det = true;
                            how_sums = "(Det)";
                        } else {
                            throw reject_error("plan node #" + std::to_string(i) + ": mapping " +
                                               nd.name +
                                               " rejected: neither (Additive) nor (Det) established");
                        }
                    }
                    if (cf.has_prods) {
                        if (tau->multiplicative_hom) {
                            how_prods = "(Multiplicative)";
                        } else {
                            bool ok = false;
                            if (tau->maps_one_to_one)
                                for (VarSet t : pool)
                                    if (cf.x_first.count(t) && cf.val01.count(t) &&
                                        cf.pure.count(t) && !(cf.scope & ~t))
                                        ok = true;
                            if (!ok)
                                throw reject_error(
                                    "plan node #" + std::to_string(i) + ": mapping " + nd.name +
                                    " rejected: neither (Multiplicative) nor (Prod 0/1) with "
                                    "one-to-one established");
                            cert.prod01 = true;
                            how_prods = "(Prod 0/1)";
                        }
                    }
                    vp.decision[i].cert = cert;
                    f.has_sums = cf.has_sums;
                    f.has_prods = cf.has_prods;
                    f.omni = cf.omni;
                    f.leaf = cf.leaf;
                    f.pure = cf.pure;
                    f.x_det = cf.x_det;
                    f.x_first = cf.x_first;
                    bool support = nd.name.rfind("support@", 0) == 0;
                    if (support) {
                        f.all01 = true;
                        for (VarSet t : pool) f.val01.insert(t);
                    } else if (tau->maps_one_to_one) {
                        f.all01 = cf.all01;
                        f.val01 = cf.val01;
                    }
                    for (auto [o, m] : cmp_rel.involving(nd.a)) {
                        cmp_rel.add(int(i), o, m);
                        if (o == nd.a) cmp_rel.add(int(i), int(i), m);
                    }
                    for (auto [o, m] : scmp_rel.involving(nd.a)) {
                        scmp_rel.add(int(i), o, m);
                        if (o == nd.a) scmp_rel.add(int(i), int(i), m);
                    }
                    vp.report.lines.push_back("#" + std::to_string(i) + " map " + nd.name +
                                              ": sums " + how_sums + ", products " + how_prods);
                    break;
                }
                case PlanKind::Prod: {
                    int a = nd.a, b = nd.b;
                    const PlanFacts& fa = vp.facts[size_t(a)];
                    const PlanFacts& fb = vp.facts[size_t(b)];
                    VarSet shared = fa.scope & fb.scope;
                    VarSet un = fa.scope | fb.scope;
                    PlanDecision& dec = vp.decision[i];
                    std::string how;
                    bool lineage_ok = (a == b) || (fa.leaf >= 0 && fa.leaf == fb.leaf);
                    VarSet scmask = 0;
                    bool have_scmp = false;
                    for (VarSet m : pool)
                        if ((m & un) == shared && shared && has_scmp(a, b, m)) {
                            scmask = m;
                            have_scmp = true;
                            break;
                        }
                    if (shared == 0) {
                        dec.algo = ProdAlgo::Disjoint;
                        how = "disjoint scopes";
                    } else if (have_scmp && lineage_ok) {
                        dec.algo = ProdAlgo::Scmp;
                        dec.scmp_mask = scmask;
                        how = "support-compatible over " + detail::varset_names(vp.joint, scmask) +
                              " (linear)";
                    } else if (fb.omni) {
                        dec.algo = ProdAlgo::Omni;
                        dec.omni_right = true;
                        how = "omni-compatible weight operand (right)";
                    } else if (fa.omni) {
                        dec.algo = ProdAlgo::Omni;
                        dec.omni_right = false;
                        how = "omni-compatible weight operand (left)";
                    } else {
                        bool have_cmp = false;
                        for (VarSet m : pool)
                            if ((m & shared) == shared && has_cmp(a, b, m)) have_cmp = true;
                        if (!have_cmp)
                            throw reject_error("plan node #" + std::to_string(i) +
                                               ": product rejected: no compatibility established "
                                               "over shared scope " +
                                               detail::varset_names(vp.joint, shared));
                        dec.algo = ProdAlgo::Cmp;
                        how = "compatible over " + detail::varset_names(vp.joint, shared) +
                              " (quadratic)";
                    }

                    f.has_sums = fa.has_sums || fb.has_sums;
                    f.has_prods = true;
                    f.omni = fa.omni && fb.omni;
                    f.all01 = fa.all01 && fb.all01;
                    for (VarSet t : pool)
                        if (fa.pure.count(t) && fb.pure.count(t)) f.pure.insert(t);
                    for (VarSet t : pool)
                        if (detail::facts_x_det(fa, t) && detail::facts_x_det(fb, t))
                            f.x_det.insert(t & f.scope);

                    if (dec.algo == ProdAlgo::Omni) {
                        int p = dec.omni_right ? a : b;
                        int wnode = dec.omni_right ? b : a;
                        const PlanFacts& fp = vp.facts[size_t(p)];
                        const PlanFacts& fw = vp.facts[size_t(wnode)];
                        VarSet leftover = fw.scope & ~fp.scope;
                        f.leaf = fp.leaf;
                        for (VarSet t : fp.x_first)
                            if (!leftover || !(leftover & ~t)) f.x_first.insert(t);
                        for (VarSet t : fp.val01)
                            if ((!(fw.scope & t) || fw.all01) && f.pure.count(t)) f.val01.insert(t);
                        if (!leftover) {
                            for (auto [o, m] : cmp_rel.involving(p)) {
                                cmp_rel.add(int(i), o, m);
                                if (o == p) cmp_rel.add(int(i), int(i), m);
                            }
                            for (auto [o, m] : scmp_rel.involving(p)) {
                                scmp_rel.add(int(i), o, m);
                                if (o == p) scmp_rel.add(int(i), int(i), m);
                            }
                        }
                    } else {
                        if (dec.algo == ProdAlgo::Scmp) f.leaf = fa.leaf;
                        for (int o = 0; o < int(i); ++o)
                            for (VarSet m : pool) {
                                if (has_cmp(a, o, m) && has_cmp(b, o, m)) cmp_rel.add(int(i), o, m);
                                if (dec.algo == ProdAlgo::Scmp && has_scmp(a, o, m) &&
                                    has_scmp(b, o, m))
                                    scmp_rel.add(int(i), o, m);
                            }
                        for (VarSet m : pool) {
                            if (has_cmp(a, a, m) && has_cmp(a, b, m) && has_cmp(b, b, m))
                                cmp_rel.add(int(i), int(i), m);
                            if (dec.algo == ProdAlgo::Scmp && has_scmp(a, a, m) &&
                                has_scmp(a, b, m) && has_scmp(b, b, m))
                                scmp_rel.add(int(i), int(i), m);
                        }
                    }
                    vp.report.lines.push_back("#" + std::to_string(i) + " prod: " + how);
                    break;
                }
            }
        }
        vp.report.ok = true;
    } catch (const reject_error& e) {
        vp.report.ok = false;
        vp.report.reason = e.what();
        vp.report.lines.push_back(std::string("rejected: ") + e.what());
    }
    return vp;
}

// ---- execution ----

struct PlanOutcome {
    bool scalar = false;
    Value value{};
    Circuit circuit;
};

inline NodeIsomorphism derive_isomorphism(const Circuit& a, const std::vector<int>& la,
                                          const Circuit& b, const std::vector<int>& lb, VarSet x) {
    std::map<int, int> inv;
    for (size_t j = 0; j < b.nodes.size(); ++j) {
        if (!(b.scopes[j] & x)) continue;
        if (lb[j] < 0) throw reject_error("isomorphism derivation: missing lineage");
        if (inv.count(lb[j])) throw reject_error("isomorphism derivation: ambiguous lineage");
        inv[lb[j]] = int(j);
    }
    NodeIsomorphism io;
    io.map.assign(a.nodes.size(), -1);
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        if (!(a.scopes[i] & x)) continue;
        auto it = la[i] >= 0 ? inv.find(la[i]) : inv.end();
        if (it == inv.end()) throw reject_error("isomorphism derivation: lineage mismatch");
        io.map[i] = it->second;
    }
    return io;
}

// force: run a plan the validator rejected, with the slow semantic certificate
// checks deciding at each mapping (misuse surfaces as certificate rejection).
// node_edges, when given, records the edge count of every intermediate circuit
// (for complexity measurements).
inline PlanOutcome plan_execute(const ValidatedPlan& vp, bool verify = false, bool force = false,
                                std::vector<std::uint64_t>* node_edges = nullptr) {
    if (!vp.report.ok && !force)
        throw reject_error("plan not validated tractable: " + vp.report.reason);
    size_t n = vp.tree.nodes.size();
    std::vector<Circuit> circ(n);
    std::vector<std::vector<int>> lin(n); // node -> leaf-circuit node, -1 unknown
    for (size_t i = 0; i < n; ++i) {
        const PlanNode& nd = vp.tree.nodes[i];
        switch (nd.kind) {
            case PlanKind::Leaf: {
                circ[i] = vp.leaf_circ[i];
                lin[i].resize(circ[i].nodes.size());
                for (size_t k = 0; k < lin[i].size(); ++k) lin[i][k] = int(k);
                break;
            }
            case PlanKind::Agg: {
                TransformResult r = aggregate(circ[size_t(nd.a)], vp.agg_mask[i]);
                lin[i].assign(r.circuit.nodes.size(), -1);
                for (size_t k = 0; k < lin[i].size(); ++k)
                    if (r.src_a[k] >= 0) lin[i][k] = lin[size_t(nd.a)][size_t(r.src_a[k])];
                circ[i] = std::move(r.circuit);
                break;
            }
            case PlanKind::Map: {
                const Mapping* tau = lookup_mapping(nd.name, circ[size_t(nd.a)].sr);
                MapCert cert = vp.decision[i].cert;
                cert.verify = verify;
                if (force && !vp.report.ok) {
                    cert.det = cert.prod01 = true;
                    cert.verify = true;
                }
                TransformResult r = map_elementwise(circ[size_t(nd.a)], *tau, cert);
                lin[i].assign(r.circuit.nodes.size(), -1);
                for (size_t k = 0; k < lin[i].size(); ++k)
                    if (r.src_a[k] >= 0) lin[i][k] = lin[size_t(nd.a)][size_t(r.src_a[k])];
                circ[i] = std::move(r.circuit);
                break;
            }
            case PlanKind::Prod: {
                const PlanDecision& dec = vp.decision[i];
                const Circuit& A = circ[size_t(nd.a)];
                const Circuit& B = circ[size_t(nd.b)];
                TransformResult r;
                if (dec.algo == ProdAlgo::Scmp) {
                    NodeIsomorphism io;
                    VarSet x = A.root_scope() & B.root_scope();
                    if (nd.a == nd.b)
                        io = identity_isomorphism(A);
                    else
                        io = derive_isomorphism(A, lin[size_t(nd.a)], B, lin[size_t(nd.b)], x);
                    r = product_scmp(A, B, io);
                } else {
                    r = product_cmp(A, B);
                }
                lin[i].assign(r.circuit.nodes.size(), -1);
                bool use_a = true, use_b = true;
                if (dec.algo == ProdAlgo::Omni) { // only the non-weight side carries lineage
                    use_a = dec.omni_right;
                    use_b = !dec.omni_right;
                } else if (dec.algo != ProdAlgo::Scmp) {
                    use_a = use_b = false;
                }
                for (size_t k = 0; k < lin[i].size(); ++k) {
                    if (use_a && r.src_a[k] >= 0)
                        lin[i][k] = lin[size_t(nd.a)][size_t(r.src_a[k])];
                    else if (use_b && r.src_b[k] >= 0)
                        lin[i][k] = lin[size_t(nd.b)][size_t(r.src_b[k])];
                }
                circ[i] = std::move(r.circuit);
                break;
            }
        }
    }
    if (node_edges) {
        node_edges->assign(n, 0);
        for (size_t i = 0; i < n; ++i) (*node_edges)[i] = circuit_size(circ[i]);
    }
    PlanOutcome out;
    out.circuit = std::move(circ[size_t(vp.tree.root)]);
    if (out.circuit.root_scope() == 0) {
        out.scalar = true;
        Assignment a(out.circuit.vars.size(), -1);
        out.value = circuit_evaluate(out.circuit, a);
    }
    return out;
}

// ---- weight chains and query builders ----

// Right-leaning binary chain of single-variable inputs (omni-compatible form).
inline Circuit weight_chain(const Semiring* sr, const std::vector<Variable>& vars,
                            const std::vector<std::pair<int, std::vector<Value>>>& factors) {
    Builder b(sr, vars);
    if (factors.empty()) return b.finish(b.constant(sr->one));
    int acc = -1;
    for (int k = int(factors.size()) - 1; k >= 0; --k) {
        int in = b.input({factors[size_t(k)].first}, factors[size_t(k)].second);
        acc = (acc < 0) ? in : b.prod(in, acc);
    }
    return b.finish(acc);
}

// unit weights over the named variables, optionally pinned by evidence
inline Circuit unit_weights(const Semiring* sr, const std::vector<Variable>& vars,
                            const std::vector<std::string>& names,
                            const std::map<std::string, int>& evidence = {}) {
    std::vector<std::pair<int, std::vector<Value>>> fs;
    for (const std::string& nm : names) {
        int vi = -1;
        for (size_t j = 0; j < vars.size(); ++j)
            if (vars[j].name == nm) vi = int(j);
        if (vi < 0) throw parse_error("unknown variable: " + nm);
        std::vector<Value> tab(size_t(vars[size_t(vi)].domain), sr->one);
        auto ev = evidence.find(nm);
        if (ev != evidence.end())
            for (size_t a = 0; a < tab.size(); ++a)
                if (int(a) != ev->second) tab[a] = sr->zero;
        fs.push_back({vi, std::move(tab)});
    }
    return weight_chain(sr, vars, fs);
}

struct QueryPlan {
    PlanTree plan;
    std::map<std::string, Circuit> bindings;
};

// 2AMC: aggregate Y in the inner semiring, translate, aggregate X outside.
inline QueryPlan build_two_amc(const Circuit& phi, const std::vector<std::string>& xs,
                               const std::vector<std::string>& ys, Circuit wy, Circuit wx,
                               const std::string& inner_id, const std::string& tau_id) {
    QueryPlan q;
    q.bindings["phi"] = phi;
    q.bindings["wy"] = std::move(wy);
    q.bindings["wx"] = std::move(wx);
    PlanTree& t = q.plan;
    int c = t.map("support@bool>" + inner_id, t.leaf("phi"));
    c = t.prod(c, t.leaf("wy"));
    c = t.agg(ys, c);
    c = t.map(tau_id, c);
    c = t.prod(c, t.leaf("wx"));
    t.root = t.agg(xs, c);
    return q;
}

// 2AMC scalar.  Uses the validated compositional route when tractable.  When
// the validator rejects (the general problem is intractable without the full
// condition set) and the instance is small enough to enumerate, falls back to
// an exact evaluation straight from the defining double aggregate — correct by
// definition, exponential in the variable count.
inline Value query_two_amc(const Circuit& phi, const std::vector<std::string>& xs,
                           const std::vector<std::string>& ys, Circuit wy, Circuit wx,
                           const std::string& inner_id, const std::string& tau_id,
                           std::uint64_t cap = (1ull << 22)) {
    QueryPlan q = build_two_amc(phi, xs, ys, wy, wx, inner_id, tau_id);
    ValidatedPlan vp = plan_validate(q.plan, q.bindings, cap);
    if (vp.report.ok) {
        PlanOutcome out = plan_execute(vp);
        if (!out.scalar) throw eval_error("2AMC plan did not produce a scalar");
        return out.value;
    }
    if (phi.sr != lookup_semiring("bool")) throw parse_error("2AMC expects a boolean circuit");
    const Semiring* inner = lookup_semiring(inner_id);
    const Mapping* tau = lookup_mapping(tau_id, inner);
    const Semiring* outer = tau->target;
    const Mapping* sup = lookup_mapping("support@bool>" + inner_id);
    const Circuit& cwy = q.bindings.at("wy");
    const Circuit& cwx = q.bindings.at("wx");
    std::vector<Variable> joint = merge_variables({&phi, &cwy, &cwx});
    Circuit pj = remap_variables(phi, joint);
    Circuit wyj = remap_variables(cwy, joint);
    Circuit wxj = remap_variables(cwx, joint);
    VarSet xm = 0;
    for (const std::string& nm : xs) {
        int v = pj.var_index(nm);
        if (v < 0) throw parse_error("unknown variable: " + nm);
        xm |= bit(v);
    }
    std::vector<int> xv, yv;
    std::uint64_t total = 1;
    for (size_t v = 0; v < joint.size(); ++v) {
        ((xm & bit(int(v))) ? xv : yv).push_back(int(v));
        total *= std::uint64_t(joint[v].domain);
    }
    if (total > cap) throw reject_error(vp.report.reason);
    std::uint64_t nx = 1, ny = 1;
    for (int v : xv) nx *= std::uint64_t(joint[size_t(v)].domain);
    for (int v : yv) ny *= std::uint64_t(joint[size_t(v)].domain);
    Assignment a(joint.size(), 0);
    Value outv = outer->zero;
    for (std::uint64_t rx = 0; rx < nx; ++rx) {
        unrank_row(pj, xv, rx, a);
        Value inv = inner->zero;
        for (std::uint64_t ry = 0; ry < ny; ++ry) {
            unrank_row(pj, yv, ry, a);
            Value term = sup->apply(circuit_evaluate(pj, a));
            term = inner->mul(term, circuit_evaluate(wyj, a));
            inv = inner->add(inv, term);
        }
        Value o = tau->apply(inv);
        o = outer->mul(o, circuit_evaluate(wxj, a));
        outv = outer->add(outv, o);
    }
    return outv;
}

inline QueryPlan build_mmap(const Circuit& phi, const std::vector<std::string>& xs,
                            const std::vector<std::string>& ys, Circuit wy, Circuit wx) {
    return build_two_amc(phi, xs, ys, std::move(wy), std::move(wx), "prob", "id@prob>maxtimes");
}

inline QueryPlan build_pasp_maxent(const Circuit& phi, const std::vector<std::string>& xs,
                                   const std::vector<std::string>& ys, Circuit wq, Circuit px) {
    QueryPlan q;
    q.bindings["phi"] = phi;
    q.bindings["wq"] = std::move(wq);
    q.bindings["px"] = std::move(px);
    PlanTree& t = q.plan;
    int c = t.map("support@bool>natpair", t.leaf("phi"));
    c = t.prod(c, t.leaf("wq"));
    c = t.agg(ys, c);
    c = t.map("ratio", c);
    c = t.prod(c, t.leaf("px"));
    t.root = t.agg(xs, c);
    return q;
}

inline QueryPlan build_pasp_maxcredal(const Circuit& phi, const std::vector<std::string>& xs,
                                      const std::vector<std::string>& ys, Circuit wq, Circuit px) {
    QueryPlan q;
    q.bindings["phi"] = phi;
    q.bindings["wq"] = std::move(wq);
    q.bindings["px"] = std::move(px);
    PlanTree& t = q.plan;
    int c = t.prod(t.leaf("phi"), t.leaf("wq"));
    c = t.agg(ys, c);
    c = t.map("support@bool>prob", c);
    c = t.prod(c, t.leaf("px"));
    t.root = t.agg(xs, c);
    return q;
}

inline QueryPlan build_sdp(const Circuit& phi, const std::vector<std::string>& xs,
                           const std::vector<std::string>& ys, Circuit wy, Circuit px, double T) {
    QueryPlan q;
    q.bindings["phi"] = phi;
    q.bindings["wy"] = std::move(wy);
    q.bindings["px"] = std::move(px);
    PlanTree& t = q.plan;
    int c = t.map("support@bool>realpair", t.leaf("phi"));
    c = t.prod(c, t.leaf("wy"));
    c = t.agg(ys, c);
    c = t.map("sdp_threshold:" + format_real(T), c);
    c = t.prod(c, t.leaf("px"));
    t.root = t.agg(xs, c);
    return q;
}

// Backdoor adjustment: sum_z p(z) p(y|x,z); returns a circuit over X ∪ Y.
inline QueryPlan build_backdoor(const Circuit& p, const std::vector<std::string>& xs,
                                const std::vector<std::string>& ys,
                                const std::vector<std::string>& zs) {
    QueryPlan q;
    q.bindings["p"] = p;
    PlanTree& t = q.plan;
    std::vector<std::string> xy = xs;
    xy.insert(xy.end(), ys.begin(), ys.end());
    int cp = t.leaf("p");
    int c1 = t.agg(ys, cp);                    // p(x, z)
    int c2 = t.map("tau_inv", c1);             // 1 / p(x, z)
    int c3 = t.prod(cp, c2);                   // p(y | x, z)
    int c4 = t.agg(xy, cp);                    // p(z)
    int c5 = t.prod(c4, c3);                   // p(z) p(y | x, z)
    t.root = t.agg(zs, c5);
    return q;
}

// Frontdoor adjustment: sum_z p(z|x) sum_x' p(x') p(y|x',z); circuit over X ∪ Y.
inline QueryPlan build_frontdoor(const Circuit& p, const std::vector<std::string>& xs,
                                 const std::vector<std::string>& ys,
                                 const std::vector<std::string>& zs) {
    QueryPlan q;
    q.bindings["p"] = p;
    PlanTree& t = q.plan;
    std::vector<std::string> yz = ys;
    yz.insert(yz.end(), zs.begin(), zs.end());
    int cp = t.leaf("p");
    int c7 = t.agg(yz, cp);        // p(x)
    int c8 = t.map("tau_inv", c7); // 1 / p(x)
    int c1 = t.agg(ys, cp);        // p(x, z)
    int c9 = t.prod(c8, c1);       // p(z | x)
    int c2 = t.map("tau_inv", c1); // 1 / p(x, z)
    int c3 = t.prod(cp, c2);       // p(y | x, z)
    int pc = t.prod(c7, c3);       // p(x) p(y | x, z)
    int c10 = t.agg(xs, pc);       // sum_x' p(x') p(y | x', z)
    int c11 = t.prod(c9, c10);
    t.root = t.agg(zs, c11);
    return q;
}

// MFE: max_h sum_{i-} 1[h in argmax_{h'} p(h', i-, e)]; intermediate variables
// I+ are marginalized out first, evidence is fixed by weight zeroing.
inline QueryPlan build_mfe(const Circuit& p, const std::vector<std::string>& hs,
                           const std::vector<std::string>& iminus,
                           const std::vector<std::string>& iplus = {},
                           const std::map<std::string, int>& evidence = {}) {
    QueryPlan q;
    q.bindings["p"] = p;
    PlanTree& t = q.plan;
    int cp = t.leaf("p");
    std::vector<std::string> drop = iplus;
    if (!evidence.empty()) {
        std::vector<std::string> evars;
        for (const auto& [k, v] : evidence) evars.push_back(k);
        q.bindings["we"] = unit_weights(p.sr, p.vars, evars, evidence);
        cp = t.prod(cp, t.leaf("we"));
        drop.insert(drop.end(), evars.begin(), evars.end());
    }
    if (!drop.empty()) cp = t.agg(drop, cp);
    int m = t.map("id@prob>maxtimes", cp);
    m = t.agg(hs, m);                  // max_h' p(h', i-)
    m = t.map("id@maxtimes>prob", m);
    m = t.map("tau_inv", m);           // 1 / max_h' p(h', i-)
    m = t.prod(m, cp);                 // p(h, i-) / max_h' p(h', i-)
    m = t.map("indicator_eq_one", m);  // 1[h in argmax]
    m = t.agg(iminus, m);              // votes per h (counting)
    m = t.map("id@counting>maxtimes", m);
    t.root = t.agg(hs, m);             // best vote count
    return q;
}

// Reverse-MAP: max_x p(e1 | x, e2), evidence encoded by weight zeroing.
inline QueryPlan build_reverse_map(const Circuit& p, const std::vector<std::string>& xs,
                                   const std::vector<std::string>& hs,
                                   const std::vector<std::string>& e1_vars,
                                   const std::map<std::string, int>& e1,
                                   const std::vector<std::string>& e2_vars,
                                   const std::map<std::string, int>& e2) {
    QueryPlan q;
    q.bindings["p"] = p;
    q.bindings["we1"] = unit_weights(p.sr, p.vars, e1_vars, e1);
    if (!e2_vars.empty()) q.bindings["we2"] = unit_weights(p.sr, p.vars, e2_vars, e2);
    PlanTree& t = q.plan;
    std::vector<std::string> he = hs;
    he.insert(he.end(), e1_vars.begin(), e1_vars.end());
    he.insert(he.end(), e2_vars.begin(), e2_vars.end());
    int base = t.leaf("p");
    if (!e2_vars.empty()) base = t.prod(base, t.leaf("we2"));
    int num = t.agg(he, t.prod(base, t.leaf("we1"))); // p(e1, x, e2)
    int den = t.map("tau_inv", t.agg(he, base));      // 1 / p(x, e2)
    int m = t.prod(num, den);
    m = t.map("id@prob>maxtimes", m);
    t.root = t.agg(xs, m);
    return q;
}

// ---- the deliberately naive 2AMC evaluation (regression control) ----
//
// Evaluates node-by-node, keeping a single scalar per node: inner-semiring
// values for Y-only nodes, outer values elsewhere, translating children at the
// boundary.  This is how 2AMC was evaluated before the translation point was
// understood as a circuit-level aggregate boundary; it is wrong whenever the
// inner aggregation interacts with outer combination (kept only as a negative
// control for the regression test).
inline Value query_two_amc_naive(const Circuit& phi, VarSet y,
                                 const std::map<int, std::vector<Value>>& wy,
                                 const std::map<int, std::vector<Value>>& wx,
                                 const Semiring* inner, const Semiring* outer,
                                 const Mapping& tau) {
    const Mapping* sup_in = lookup_mapping("support@bool>" + inner->id);
    const Mapping* sup_out = lookup_mapping("support@bool>" + outer->id);
    auto wfor = [&](const std::map<int, std::vector<Value>>& w, int v, int val,
                    const Semiring* s) -> Value {
        auto it = w.find(v);
        if (it == w.end()) return s->one;
        return it->second[size_t(val)];
    };
    std::vector<Value> val(phi.nodes.size());
    std::vector<char> is_inner(phi.nodes.size(), 0);
    for (size_t i = 0; i < phi.nodes.size(); ++i) {
        const Node& nd = phi.nodes[i];
        bool inner_node = phi.scopes[i] != 0 && !(phi.scopes[i] & ~y);
        is_inner[i] = inner_node;
        auto coerce = [&](int ch) {
            return (is_inner[size_t(ch)] && !inner_node) ? tau.apply(val[size_t(ch)])
                                                         : val[size_t(ch)];
        };
        switch (nd.kind) {
            case NodeKind::Input: {
                const Semiring* s = inner_node ? inner : outer;
                const Mapping* sup = inner_node ? sup_in : sup_out;
                Value acc = s->zero;
                Assignment a(phi.vars.size(), -1);
                for (std::uint64_t row = 0; row < nd.table.size(); ++row) {
                    unrank_row(phi, nd.scope, row, a);
                    Value term = sup->apply(nd.table[row]);
                    for (int v : nd.scope) {
                        Value w;
                        if (inner_node)
                            w = wfor(wy, v, a[size_t(v)], inner);
                        else if (y & bit(v))
                            w = tau.apply(wfor(wy, v, a[size_t(v)], inner));
                        else
                            w = wfor(wx, v, a[size_t(v)], outer);
                        term = s->mul(term, w);
                    }
                    acc = s->add(acc, term);
                }
                val[i] = acc;
                break;
            }
            case NodeKind::Sum: {
                const Semiring* s = inner_node ? inner : outer;
                Value acc = coerce(nd.children[0]);
                for (size_t k = 1; k < nd.children.size(); ++k)
                    acc = s->add(acc, coerce(nd.children[k]));
                val[i] = acc;
                break;
            }
            case NodeKind::Prod: {
                const Semiring* s = inner_node ? inner : outer;
                Value acc = coerce(nd.children[0]);
                for (size_t k = 1; k < nd.children.size(); ++k)
                    acc = s->mul(acc, coerce(nd.children[k]));
                val[i] = acc;
                break;
            }
        }
    }
    Value root = val[size_t(phi.root)];
    if (is_inner[size_t(phi.root)]) root = tau.apply(root);
    return root;
}

} // namespace acirc
