#include <catch2/catch_amalgamated.hpp>

#include "acirc/plan.hpp"

using namespace acirc;

TEST_CASE("plan parse and print round trip") {
    std::string src = "(agg (X) (prod (map tau_inv (agg (Y Z) (circ p))) (circ p)))";
    PlanTree t = plan_parse(src);
    CHECK(plan_to_string(t) == src);
    // reparse of the printed form is stable
    CHECK(plan_to_string(plan_parse(plan_to_string(t))) == src);
}

TEST_CASE("identical subexpressions share a node") {
    PlanTree t = plan_parse("(prod (agg (Y) (circ p)) (agg (Y) (circ p)))");
    const PlanNode& root = t.nodes[size_t(t.root)];
    REQUIRE(root.kind == PlanKind::Prod);
    CHECK(root.a == root.b);
    CHECK(t.nodes.size() == 3); // leaf, agg, prod
}

TEST_CASE("const leaves") {
    PlanTree t = plan_parse("(prod (circ p) (const prob 0.5))");
    const PlanNode& root = t.nodes[size_t(t.root)];
    const PlanNode& cn = t.nodes[size_t(root.b)];
    REQUIRE(plan_leaf_is_const(cn.name));
    Circuit c = plan_const_circuit(cn.name);
    CHECK(c.root_scope() == 0);
    Assignment a;
    CHECK(circuit_evaluate(c, a).r == 0.5);
    CHECK(plan_to_string(t) == "(prod (circ p) (const prob 0.5))");
    CHECK_THROWS_AS(plan_parse("(const prob nope)"), parse_error);
    CHECK_THROWS_AS(plan_parse("(const tropical 1)"), parse_error);
}

TEST_CASE("comments are ignored") {
    PlanTree t = plan_parse("; header\n(agg (X) ; drop X\n (circ p)) # tail");
    CHECK(plan_to_string(t) == "(agg (X) (circ p))");
}

TEST_CASE("parse diagnostics") {
    CHECK_THROWS_AS(plan_parse(""), parse_error);
    CHECK_THROWS_AS(plan_parse("(circ p) junk"), parse_error);
    CHECK_THROWS_AS(plan_parse("(frobnicate (circ p))"), parse_error);
    CHECK_THROWS_AS(plan_parse("(agg X (circ p))"), parse_error);     // missing var list parens
    CHECK_THROWS_AS(plan_parse("(prod (circ p))"), parse_error);      // missing operand
    CHECK_THROWS_AS(plan_parse("(map tau_inv (circ p)"), parse_error); // unbalanced
}

TEST_CASE("builder interface hash-conses too") {
    PlanTree t;
    int l1 = t.leaf("p");
    int l2 = t.leaf("p");
    CHECK(l1 == l2);
    int a1 = t.agg({"X"}, l1);
    int a2 = t.agg({"X"}, l2);
    CHECK(a1 == a2);
    CHECK(t.agg({"Y"}, l1) != a1);
    t.root = t.prod(a1, t.map("tau_inv", a1));
    CHECK(plan_to_string(t) == "(prod (agg (X) (circ p)) (map tau_inv (agg (X) (circ p))))");
}
