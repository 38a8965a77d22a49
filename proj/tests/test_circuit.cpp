#include <catch2/catch_amalgamated.hpp>

#include "acirc/circuit.hpp"
#include "acirc/generator.hpp"
#include "helpers.hpp"

using namespace acirc;

TEST_CASE("disjunction circuit evaluates") {
    Circuit c = load_testdata("disjunction.ac");
    REQUIRE(c.vars.size() == 2);
    int X = c.var_index("X"), Y = c.var_index("Y");
    REQUIRE(X >= 0);
    REQUIRE(Y >= 0);
    // truth table: true iff X=1
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            Assignment a(2, -1);
            a[size_t(X)] = x;
            a[size_t(Y)] = y;
            CHECK(circuit_evaluate(c, a).b == (x == 1));
        }
    CHECK(circuit_size(c) == 6);
}

TEST_CASE("missing assignment rejected") {
    Circuit c = load_testdata("disjunction.ac");
    Assignment a(2, -1);
    a[size_t(c.var_index("X"))] = 1;
    CHECK_THROWS_AS(circuit_evaluate(c, a), eval_error);
}

TEST_CASE("save/load round trip is byte stable") {
    Circuit c = load_testdata("equality.ac");
    std::string s1 = circuit_save(c);
    Circuit c2 = circuit_load(s1);
    std::string s2 = circuit_save(c2);
    CHECK(s1 == s2);
    // values agree too
    Assignment a(c.vars.size(), 0);
    CHECK(circuit_evaluate(c, a).r == circuit_evaluate(c2, a).r);
}

TEST_CASE("table order: first listed variable is slowest") {
    // input over A,B with table 1 2 3 4 -> (A=1,B=0) reads entry 3
    Circuit c = circuit_load(
        "semiring prob\nvar A 2\nvar B 2\n"
        "node 0 input A,B | 1 2 3 4\nroot 0\n");
    Assignment a = {1, 0};
    CHECK(circuit_evaluate(c, a).r == 3.0);
    a = {0, 1};
    CHECK(circuit_evaluate(c, a).r == 2.0);
}

TEST_CASE("loader diagnostics") {
    CHECK_THROWS_AS(circuit_load("var A 2\nnode 0 input A | 1 1\nroot 0\n"), parse_error);
    CHECK_THROWS_AS(circuit_load("semiring prob\nroot 0\n"), parse_error); // undefined root
    CHECK_THROWS_AS(circuit_load("semiring prob\nvar A 2\nnode 0 input A | 1\nroot 0\n"),
                    parse_error); // table length
    CHECK_THROWS_AS(circuit_load("semiring prob\nvar A 2\nnode 0 input B | 1 1\nroot 0\n"),
                    parse_error); // unknown variable
    CHECK_THROWS_AS(circuit_load("semiring prob\nvar A 2\nnode 0 input A | 1 1\n"
                                 "node 1 sum 0 2\nroot 1\n"),
                    parse_error); // undefined child
    CHECK_THROWS_AS(circuit_load("semiring prob\nvar A 2\nnode 0 input A | 1 1\n"
                                 "node 1 prod 0\nroot 1\n"),
                    parse_error); // non-binary product
    CHECK_THROWS_AS(circuit_load("semiring prob\nvar A 2\nnode 0 input A | 1 1\n"
                                 "node 0 input A | 1 1\nroot 0\n"),
                    parse_error); // duplicate id
    CHECK_THROWS_AS(circuit_load("semiring prob\nfoo bar\n"), parse_error);
    // comments and missing semiring
    Circuit ok = circuit_load("# header\nsemiring bool\nvar A 2\nnode 0 input A | 0 1 # tail\nroot 0\n");
    CHECK(ok.nodes.size() == 1);
}

TEST_CASE("unreferenced nodes are pruned on load") {
    Circuit c = circuit_load(
        "semiring prob\nvar A 2\n"
        "node 0 input A | 1 2\nnode 5 input A | 3 4\nroot 5\n");
    CHECK(c.nodes.size() == 1);
    Assignment a = {0};
    CHECK(circuit_evaluate(c, a).r == 3.0);
}

TEST_CASE("smoothing preserves values") {
    // sum of children with different scopes
    Circuit c = circuit_load(
        "semiring prob\nvar A 2\nvar B 2\n"
        "node 0 input A | 0.25 0.5\n"
        "node 1 input A,B | 0.1 0.2 0.3 0.4\n"
        "node 2 sum 0 1\nroot 2\n");
    CHECK_FALSE(check_smooth(c));
    Circuit s = circuit_smooth(c);
    CHECK(check_smooth(s));
    for (int a0 = 0; a0 < 2; ++a0)
        for (int b0 = 0; b0 < 2; ++b0) {
            Assignment a = {a0, b0};
            CHECK(circuit_evaluate(s, a).r == Catch::Approx(circuit_evaluate(c, a).r));
        }
}

TEST_CASE("smoothing is a no-op on smooth circuits") {
    Circuit c = load_testdata("disjunction.ac");
    Circuit s = circuit_smooth(c);
    CHECK(circuit_save(s) == circuit_save(c));
}

TEST_CASE("binarization of wide products") {
    Builder b(lookup_semiring("prob"), gen_binary_vars({"A", "B", "C"}));
    int i0 = b.input({0}, {Value::real(0.5), Value::real(0.5)});
    int i1 = b.input({1}, {Value::real(0.25), Value::real(0.75)});
    int i2 = b.input({2}, {Value::real(0.1), Value::real(0.9)});
    Circuit c = b.finish(b.prodn({i0, i1, i2}), nullptr, false);
    Circuit bin = circuit_binarize_products(c);
    bin.validate(true);
    for (const Node& nd : bin.nodes)
        if (nd.kind == NodeKind::Prod) CHECK(nd.children.size() == 2);
    Assignment a = {1, 0, 1};
    CHECK(circuit_evaluate(bin, a).r == Catch::Approx(0.5 * 0.25 * 0.9));
}

TEST_CASE("builder prunes dead nodes") {
    Builder b(lookup_semiring("bool"), gen_binary_vars({"A"}));
    b.input({0}, {Value::boolean(true), Value::boolean(false)}); // dead
    int live = b.input({0}, {Value::boolean(false), Value::boolean(true)});
    std::vector<int> remap;
    Circuit c = b.finish(live, &remap);
    CHECK(c.nodes.size() == 1);
    CHECK(remap[0] == -1);
    CHECK(remap[1] == 0);
}
