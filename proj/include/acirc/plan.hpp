#pragma once
// Plan expression trees: AGG / PROD / MAP over named circuit leaves, with an
// s-expression reader.  Structurally identical subexpressions share one node.

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "acirc/circuit.hpp"

namespace acirc {

// CONST leaves are stored as reserved binding names "const:<semiring>:<value>".
inline bool plan_leaf_is_const(const std::string& name) {
    return name.rfind("const:", 0) == 0;
}

inline Circuit plan_const_circuit(const std::string& name) {
    auto sep = name.find(':', 6);
    if (sep == std::string::npos) throw parse_error("bad const leaf: " + name);
    const Semiring* sr = lookup_semiring(name.substr(6, sep - 6));
    Builder b(sr, {});
    return b.finish(b.constant(value_from_string(name.substr(sep + 1), *sr)));
}

enum class PlanKind { Leaf, Agg, Prod, Map };

struct PlanNode {
    PlanKind kind = PlanKind::Leaf;
    std::string name;                   // Leaf: binding name; Map: mapping id
    std::vector<std::string> agg_vars;  // Agg
    int a = -1, b = -1;                 // children (a only, except Prod)
};

struct PlanTree {
    std::vector<PlanNode> nodes; // children precede parents
    int root = -1;

    // Adds a node, reusing an existing structurally identical one.
    int add(PlanNode nd) {
        for (size_t i = 0; i < nodes.size(); ++i) {
            const PlanNode& o = nodes[i];
            if (o.kind == nd.kind && o.name == nd.name && o.agg_vars == nd.agg_vars &&
                o.a == nd.a && o.b == nd.b)
                return int(i);
        }
        nodes.push_back(std::move(nd));
        return int(nodes.size()) - 1;
    }
    int leaf(const std::string& name) {
        PlanNode nd;
        nd.kind = PlanKind::Leaf;
        nd.name = name;
        return add(std::move(nd));
    }
    int agg(std::vector<std::string> vars, int child) {
        PlanNode nd;
        nd.kind = PlanKind::Agg;
        nd.agg_vars = std::move(vars);
        nd.a = child;
        return add(std::move(nd));
    }
    int prod(int l, int r) {
        PlanNode nd;
        nd.kind = PlanKind::Prod;
        nd.a = l;
        nd.b = r;
        return add(std::move(nd));
    }
    int map(std::string mapping, int child) {
        PlanNode nd;
        nd.kind = PlanKind::Map;
        nd.name = std::move(mapping);
        nd.a = child;
        return add(std::move(nd));
    }
};

namespace detail {

inline std::vector<std::string> plan_tokens(const std::string& text) {
    std::vector<std::string> toks;
    std::string cur;
    bool comment = false;
    for (char ch : text) {
        if (comment) {
            if (ch == '\n') comment = false;
            continue;
        }
        if (ch == ';' || ch == '#') {
            comment = true;
            ch = ' ';
        }
        if (ch == '(' || ch == ')' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) toks.push_back(cur), cur.clear();
            if (ch == '(' || ch == ')') toks.push_back(std::string(1, ch));
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) toks.push_back(cur);
    return toks;
}

inline int plan_parse_expr(PlanTree& t, const std::vector<std::string>& toks, size_t& pos) {
    auto need = [&](const char* what) -> const std::string& {
        if (pos >= toks.size()) throw parse_error(std::string("plan: unexpected end, expected ") + what);
        return toks[pos];
    };
    if (need("expression") != "(") throw parse_error("plan: expected '(' but got '" + toks[pos] + "'");
    ++pos;
    const std::string head = need("operator");
    ++pos;
    int out;
    if (head == "circ") {
        std::string nm = need("circuit name");
        ++pos;
        out = t.leaf(nm);
    } else if (head == "const") {
        std::string sr = need("semiring id");
        ++pos;
        std::string v = need("value");
        ++pos;
        value_from_string(v, *lookup_semiring(sr)); // validate early
        out = t.leaf("const:" + sr + ":" + v);
    } else if (head == "agg") {
        if (need("variable list") != "(") throw parse_error("plan: agg expects a variable list");
        ++pos;
        std::vector<std::string> vars;
        while (need("variable or ')'") != ")") {
            vars.push_back(toks[pos]);
            ++pos;
        }
        ++pos; // closing paren of the list
        int child = plan_parse_expr(t, toks, pos);
        out = t.agg(std::move(vars), child);
    } else if (head == "prod") {
        int l = plan_parse_expr(t, toks, pos);
        int r = plan_parse_expr(t, toks, pos);
        out = t.prod(l, r);
    } else if (head == "map") {
        std::string id = need("mapping id");
        ++pos;
        int child = plan_parse_expr(t, toks, pos);
        out = t.map(std::move(id), child);
    } else {
        throw parse_error("plan: unknown operator '" + head + "'");
    }
    if (need("')'") != ")") throw parse_error("plan: expected ')'");
    ++pos;
    return out;
}

} // namespace detail

inline PlanTree plan_parse(const std::string& text) {
    PlanTree t;
    std::vector<std::string> toks = detail::plan_tokens(text);
    size_t pos = 0;
    t.root = detail::plan_parse_expr(t, toks, pos);
    if (pos != toks.size()) throw parse_error("plan: trailing tokens after expression");
    return t;
}

inline std::string plan_to_string(const PlanTree& t, int n = -1) {
    if (n < 0) n = t.root;
    const PlanNode& nd = t.nodes[size_t(n)];
    switch (nd.kind) {
        case PlanKind::Leaf: {
            if (nd.name.rfind("const:", 0) == 0) {
                auto sep = nd.name.find(':', 6);
                return "(const " + nd.name.substr(6, sep - 6) + " " + nd.name.substr(sep + 1) + ")";
            }
            return "(circ " + nd.name + ")";
        }
        case PlanKind::Map: return "(map " + nd.name + " " + plan_to_string(t, nd.a) + ")";
        case PlanKind::Prod:
            return "(prod " + plan_to_string(t, nd.a) + " " + plan_to_string(t, nd.b) + ")";
        case PlanKind::Agg: {
            std::string s = "(agg (";
            for (size_t i = 0; i < nd.agg_vars.size(); ++i)
                s += (i ? " " : "") + nd.agg_vars[i];
            return s + ") " + plan_to_string(t, nd.a) + ")";
        }
    }
    return "?";
}

} // namespace acirc
