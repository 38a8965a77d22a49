#pragma once
// Circuit IR: rooted DAGs of input/sum/product nodes over finite-domain variables.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "acirc/semiring.hpp"

namespace acirc {

using VarSet = std::uint64_t; // bit i <-> variable index i; at most 64 variables

inline VarSet bit(int i) { return VarSet(1) << i; }
inline int popcount(VarSet s) { return __builtin_popcountll(s); }

struct Variable {
    std::string name;
    int domain = 2;
};

enum class NodeKind { Input, Sum, Prod };

struct Node {
    NodeKind kind = NodeKind::Input;
    std::vector<int> scope;    // Input only: ordered declared scope (first listed slowest)
    std::vector<Value> table;  // Input only
    std::vector<int> children; // Sum (arity >= 1) / Prod (binary once validated)
};

// Assignment: value index per variable, -1 for unset.
using Assignment = std::vector<int>;

struct Circuit {
    const Semiring* sr = nullptr;
    std::vector<Variable> vars;
    std::vector<Node> nodes;
    int root = -1;
    std::vector<VarSet> scopes; // cached per node

    int var_index(const std::string& name) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return int(i);
        return -1;
    }
    VarSet scope_of(int n) const { return scopes[n]; }
    VarSet root_scope() const { return scopes[root]; }

    std::uint64_t table_size_for(const std::vector<int>& scope) const {
        std::uint64_t t = 1;
        for (int v : scope) t *= std::uint64_t(vars[v].domain);
        return t;
    }

    void recompute_scopes() {
        scopes.assign(nodes.size(), 0);
        for (size_t i = 0; i < nodes.size(); ++i) {
            const Node& nd = nodes[i];
            if (nd.kind == NodeKind::Input) {
                for (int v : nd.scope) scopes[i] |= bit(v);
            } else {
                for (int c : nd.children) scopes[i] |= scopes[c];
            }
        }
    }

    // Validates all structural invariants; binary==false tolerates k-ary products
    // (internal builder path before binarization).
    void validate(bool binary = true) const {
        if (!sr) throw parse_error("circuit has no semiring");
        if (vars.size() > 64) throw parse_error("too many variables (limit 64)");
        std::set<std::string> names;
        for (const auto& v : vars) {
            if (v.domain < 1) throw parse_error("variable domain must be >= 1: " + v.name);
            if (!names.insert(v.name).second)
                throw parse_error("duplicate variable name: " + v.name);
        }
        if (root < 0 || root >= int(nodes.size())) throw parse_error("bad root id");
        for (size_t i = 0; i < nodes.size(); ++i) {
            const Node& nd = nodes[i];
            switch (nd.kind) {
                case NodeKind::Input: {
                    for (int v : nd.scope)
                        if (v < 0 || v >= int(vars.size()))
                            throw parse_error("input scope references unknown variable");
                    if (nd.table.size() != table_size_for(nd.scope))
                        throw parse_error("table length mismatch at node " + std::to_string(i));
                    for (const Value& x : nd.table) sr->check(x);
                    break;
                }
                case NodeKind::Sum:
                    if (nd.children.empty())
                        throw parse_error("sum with no children at node " + std::to_string(i));
                    break;
                case NodeKind::Prod:
                    if (binary && nd.children.size() != 2)
                        throw parse_error("non-binary product at node " + std::to_string(i));
                    if (nd.children.size() < 2)
                        throw parse_error("product needs >= 2 children at node " + std::to_string(i));
                    break;
            }
            for (int c : nd.children)
                if (c < 0 || c >= int(i))
                    throw parse_error("child id out of order or undefined at node " + std::to_string(i));
        }
    }
};

// row-major index of an assignment under an ordered scope (first listed slowest)
inline std::uint64_t row_index(const Circuit& c, const std::vector<int>& scope, const Assignment& a) {
    std::uint64_t idx = 0;
    for (int v : scope) {
        if (a[v] < 0 || a[v] >= c.vars[v].domain) throw eval_error("assignment out of range");
        idx = idx * std::uint64_t(c.vars[v].domain) + std::uint64_t(a[v]);
    }
    return idx;
}

// inverse of row_index: fill a[v] for v in scope from a row number
inline void unrank_row(const Circuit& c, const std::vector<int>& scope, std::uint64_t row, Assignment& a) {
    for (int i = int(scope.size()) - 1; i >= 0; --i) {
        int v = scope[size_t(i)];
        a[v] = int(row % std::uint64_t(c.vars[v].domain));
        row /= std::uint64_t(c.vars[v].domain);
    }
}

inline Value circuit_evaluate(const Circuit& c, const Assignment& a) {
    VarSet need = c.root_scope();
    for (size_t v = 0; v < c.vars.size(); ++v)
        if ((need & bit(int(v))) && (int(v) >= int(a.size()) || a[v] < 0))
            throw eval_error("assignment missing variable " + c.vars[v].name);
    std::vector<Value> val(c.nodes.size());
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        switch (nd.kind) {
            case NodeKind::Input:
                val[i] = nd.table[row_index(c, nd.scope, a)];
                break;
            case NodeKind::Sum: {
                Value acc = val[nd.children[0]];
                for (size_t k = 1; k < nd.children.size(); ++k)
                    acc = c.sr->add(acc, val[nd.children[k]]);
                val[i] = acc;
                break;
            }
            case NodeKind::Prod: {
                Value acc = val[nd.children[0]];
                for (size_t k = 1; k < nd.children.size(); ++k)
                    acc = c.sr->mul(acc, val[nd.children[k]]);
                val[i] = acc;
                break;
            }
        }
    }
    return val[size_t(c.root)];
}

inline std::uint64_t circuit_size(const Circuit& c) {
    std::uint64_t edges = 0;
    for (const Node& nd : c.nodes) edges += nd.children.size();
    return edges;
}

// ---- construction helper: emits nodes in topological order, prunes on finish ----

struct Builder {
    Circuit c;

    explicit Builder(const Semiring* sr, std::vector<Variable> vars) {
        c.sr = sr;
        c.vars = std::move(vars);
    }

    int input(std::vector<int> scope, std::vector<Value> table) {
        Node nd;
        nd.kind = NodeKind::Input;
        nd.scope = std::move(scope);
        nd.table = std::move(table);
        c.nodes.push_back(std::move(nd));
        return int(c.nodes.size()) - 1;
    }
    int constant(const Value& v) { return input({}, {v}); }
    int sum(std::vector<int> ch) {
        Node nd;
        nd.kind = NodeKind::Sum;
        nd.children = std::move(ch);
        c.nodes.push_back(std::move(nd));
        return int(c.nodes.size()) - 1;
    }
    int prod(int a, int b) {
        Node nd;
        nd.kind = NodeKind::Prod;
        nd.children = {a, b};
        c.nodes.push_back(std::move(nd));
        return int(c.nodes.size()) - 1;
    }
    int prodn(std::vector<int> ch) { // k-ary; binarize before finish
        Node nd;
        nd.kind = NodeKind::Prod;
        nd.children = std::move(ch);
        c.nodes.push_back(std::move(nd));
        return int(c.nodes.size()) - 1;
    }

    // Prunes unreachable nodes, validates, caches scopes.  keep maps old->new ids
    // for callers tracking provenance (entries -1 for pruned nodes).
    Circuit finish(int root, std::vector<int>* remap = nullptr, bool binary = true) {
        std::vector<char> live(c.nodes.size(), 0);
        std::vector<int> stack{root};
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            if (n < 0 || n >= int(c.nodes.size())) throw parse_error("bad node id in builder");
            if (live[size_t(n)]) continue;
            live[size_t(n)] = 1;
            for (int ch : c.nodes[size_t(n)].children) stack.push_back(ch);
        }
        Circuit out;
        out.sr = c.sr;
        out.vars = c.vars;
        std::vector<int> newid(c.nodes.size(), -1);
        for (size_t i = 0; i < c.nodes.size(); ++i) {
            if (!live[i]) continue;
            Node nd = c.nodes[i];
            for (int& ch : nd.children) ch = newid[size_t(ch)];
            newid[i] = int(out.nodes.size());
            out.nodes.push_back(std::move(nd));
        }
        out.root = newid[size_t(root)];
        out.validate(binary);
        out.recompute_scopes();
        if (remap) *remap = std::move(newid);
        return out;
    }
};

// ---- serialization ----

inline std::string circuit_save(const Circuit& c) {
    std::ostringstream os;
    os << "semiring " << c.sr->id << "\n";
    for (const auto& v : c.vars) os << "var " << v.name << " " << v.domain << "\n";
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        os << "node " << i << " ";
        switch (nd.kind) {
            case NodeKind::Input: {
                os << "input ";
                if (nd.scope.empty()) {
                    os << "-";
                } else {
                    for (size_t k = 0; k < nd.scope.size(); ++k)
                        os << (k ? "," : "") << c.vars[size_t(nd.scope[k])].name;
                }
                os << " |";
                for (const Value& x : nd.table) os << " " << value_to_string(x);
                break;
            }
            case NodeKind::Sum:
                os << "sum";
                for (int ch : nd.children) os << " " << ch;
                break;
            case NodeKind::Prod:
                os << "prod";
                for (int ch : nd.children) os << " " << ch;
                break;
        }
        os << "\n";
    }
    os << "root " << c.root << "\n";
    return os.str();
}

inline Circuit circuit_load(const std::string& text) {
    Circuit c;
    std::map<int, int> pos_of_id;            // file node id -> position in parse order
    std::vector<std::pair<int, Node>> parsed; // textual order (children before parents)
    int root = -1;
    bool have_root = false;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw parse_error("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "semiring") {
            std::string id;
            if (!(ls >> id)) fail("missing semiring id");
            c.sr = lookup_semiring(id); // throws on unknown id
        } else if (word == "var") {
            Variable v;
            if (!(ls >> v.name)) fail("missing variable name");
            if (!(ls >> v.domain)) v.domain = 2;
            c.vars.push_back(v);
        } else if (word == "node") {
            if (!c.sr) fail("node before semiring declaration");
            int id;
            std::string kind;
            if (!(ls >> id >> kind)) fail("bad node line");
            if (pos_of_id.count(id)) fail("duplicate node id " + std::to_string(id));
            Node nd;
            if (kind == "input") {
                nd.kind = NodeKind::Input;
                std::string scopes_tok;
                if (!(ls >> scopes_tok)) fail("missing input scope");
                if (scopes_tok != "-") {
                    std::istringstream ss(scopes_tok);
                    std::string vn;
                    while (std::getline(ss, vn, ',')) {
                        int vi = c.var_index(vn);
                        if (vi < 0) fail("unknown variable in scope: " + vn);
                        nd.scope.push_back(vi);
                    }
                }
                std::string bar;
                if (!(ls >> bar) || bar != "|") fail("expected | before input table");
                std::string tok;
                while (ls >> tok) nd.table.push_back(value_from_string(tok, *c.sr));
                if (nd.table.size() != c.table_size_for(nd.scope))
                    fail("table length mismatch");
            } else if (kind == "sum") {
                nd.kind = NodeKind::Sum;
                int ch;
                while (ls >> ch) {
                    if (!pos_of_id.count(ch)) fail("undefined child id " + std::to_string(ch));
                    nd.children.push_back(ch);
                }
                if (nd.children.empty()) fail("sum with no children");
            } else if (kind == "prod") {
                nd.kind = NodeKind::Prod;
                int ch;
                while (ls >> ch) {
                    if (!pos_of_id.count(ch)) fail("undefined child id " + std::to_string(ch));
                    nd.children.push_back(ch);
                }
                if (nd.children.size() != 2) fail("non-binary product");
            } else {
                fail("unknown node kind: " + kind);
            }
            pos_of_id[id] = int(parsed.size());
            parsed.emplace_back(id, std::move(nd));
        } else if (word == "root") {
            if (!(ls >> root)) fail("missing root id");
            have_root = true;
        } else {
            fail("unknown directive: " + word);
        }
    }
    if (!c.sr) throw parse_error("missing semiring line");
    if (!have_root) throw parse_error("missing root line");
    // renumber in textual order (children are guaranteed to appear before parents)
    Builder b(c.sr, c.vars);
    for (auto& [id, nd] : parsed) {
        Node copy = nd;
        for (int& ch : copy.children) ch = pos_of_id[ch];
        b.c.nodes.push_back(std::move(copy));
    }
    auto rit = pos_of_id.find(root);
    if (rit == pos_of_id.end()) throw parse_error("root references undefined node");
    return b.finish(rit->second);
}

// ---- smoothing and binarization ----

inline Circuit circuit_smooth(const Circuit& c, std::vector<int>* remap = nullptr) {
    Builder b(c.sr, c.vars);
    std::vector<int> newid(c.nodes.size(), -1);
    // unit input per variable, created on demand
    std::vector<int> unit(c.vars.size(), -1);
    auto unit_for = [&](int v) {
        if (unit[size_t(v)] < 0) {
            std::vector<Value> tab(size_t(c.vars[size_t(v)].domain), c.sr->one);
            unit[size_t(v)] = b.input({v}, std::move(tab));
        }
        return unit[size_t(v)];
    };
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind != NodeKind::Sum) {
            Node copy = nd;
            for (int& ch : copy.children) ch = newid[size_t(ch)];
            b.c.nodes.push_back(std::move(copy));
            newid[i] = int(b.c.nodes.size()) - 1;
            continue;
        }
        VarSet full = c.scopes[i];
        std::vector<int> ch2;
        for (int ch : nd.children) {
            int nch = newid[size_t(ch)];
            VarSet missing = full & ~c.scopes[size_t(ch)];
            for (int v = 0; v < int(c.vars.size()); ++v)
                if (missing & bit(v)) nch = b.prod(nch, unit_for(v));
            ch2.push_back(nch);
        }
        newid[i] = b.sum(std::move(ch2));
    }
    std::vector<int> prune_map;
    Circuit out = b.finish(newid[size_t(c.root)], &prune_map);
    if (remap) {
        remap->assign(c.nodes.size(), -1);
        for (size_t i = 0; i < c.nodes.size(); ++i)
            if (newid[i] >= 0) (*remap)[i] = prune_map[size_t(newid[i])];
    }
    return out;
}

inline Circuit circuit_binarize_products(const Circuit& c) {
    Builder b(c.sr, c.vars);
    std::vector<int> newid(c.nodes.size(), -1);
    for (size_t i = 0; i < c.nodes.size(); ++i) {
        const Node& nd = c.nodes[i];
        if (nd.kind == NodeKind::Prod && nd.children.size() > 2) {
            // right-leaning chain
            int acc = newid[size_t(nd.children.back())];
            for (int k = int(nd.children.size()) - 2; k >= 0; --k)
                acc = b.prod(newid[size_t(nd.children[size_t(k)])], acc);
            newid[i] = acc;
        } else {
            Node copy = nd;
            for (int& ch : copy.children) ch = newid[size_t(ch)];
            b.c.nodes.push_back(std::move(copy));
            newid[i] = int(b.c.nodes.size()) - 1;
        }
    }
    return b.finish(newid[size_t(c.root)]);
}

} // namespace acirc
