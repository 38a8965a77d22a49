#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "acirc/generator.hpp"
#include "acirc/oracle.hpp"

using namespace acirc;

TEST_CASE("same seed, same bytes") {
    for (const char* family : {"mixture", "xdet", "det", "chain", "hmm"}) {
        Circuit a = gen_named(family, "prob", 4, 2, 42);
        Circuit b = gen_named(family, "prob", 4, 2, 42);
        Circuit c = gen_named(family, "prob", 4, 2, 43);
        INFO("family " << family);
        CHECK(circuit_save(a) == circuit_save(b));
        if (std::string(family) != "hmm") // hmm has fixed parameters
            CHECK(circuit_save(a) != circuit_save(c));
    }
}

TEST_CASE("mixtures are smooth and decomposable") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Gen g(seed);
        const Semiring* sr = &builtin_semirings()[seed % 6];
        Circuit c = gen_mixture(sr, gen_binary_vars({"A", "B", "C", "D", "E"}), g);
        INFO("seed " << seed << " sr " << sr->id);
        CHECK(check_smooth(c));
        CHECK(check_decomposable(c));
        CHECK(c.root_scope() == 31);
    }
}

TEST_CASE("branch circuits are deterministic over the branch order") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Gen g(seed);
        std::vector<Variable> vars = gen_binary_vars({"A", "B", "C", "D"});
        Circuit c = gen_branch(lookup_semiring("prob"), vars, {0, 1}, {2, 3}, g, false, true);
        VarSet x = bit(0) | bit(1);
        CHECK(check_x_deterministic(c, x));
        CHECK(check_x_first(c, x));
        // fully branched instance is deterministic outright
        Circuit d = gen_branch(lookup_semiring("prob"), vars, {0, 1, 2, 3}, {}, g, false, false);
        CHECK(check_deterministic(d));
        CHECK(oracle_check_det(d));
    }
}

TEST_CASE("chains are linear, fully deterministic, structured") {
    std::vector<std::uint64_t> sizes;
    for (int n : {4, 6, 8, 10}) {
        Gen g(7);
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
        std::vector<Variable> vars = gen_binary_vars(names);
        std::vector<int> order;
        for (int i = 0; i < n; ++i) order.push_back(i);
        Circuit c = gen_det_chain(lookup_semiring("prob"), vars, order, g, true);
        CHECK(check_smooth(c));
        CHECK(check_decomposable(c));
        CHECK(check_deterministic(c));
        CHECK(check_structured_decomposable(c));
        // every prefix of the order is a determinism mask
        VarSet prefix = 0;
        for (int i = 0; i < n; i += 2) {
            prefix |= bit(i) | bit(i + 1);
            CHECK(check_x_deterministic(c, prefix));
        }
        CHECK(circuit_size(c) <= std::uint64_t(12 * n)); // at most a constant per level
        sizes.push_back(circuit_size(c));
    }
    CHECK(sizes[3] > sizes[0]);
}

TEST_CASE("normalized chains sum to one") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Gen g(seed);
        std::vector<Variable> vars = gen_binary_vars({"A", "B", "C", "D"});
        Circuit c = gen_det_chain(lookup_semiring("prob"), vars, {0, 1, 2, 3}, g, true);
        DenseTable t = oracle_eval_table(c);
        double s = 0;
        for (const Value& v : t.data) {
            CHECK(v.r >= 0.0);
            s += v.r;
        }
        CHECK(s == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("factorized joint is deterministic on both blocks") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Gen g(seed);
        std::vector<Variable> vars = gen_binary_vars({"H1", "H2", "I1", "I2"});
        Circuit c = gen_mfe_factorized(vars, {0, 1}, {2, 3}, g);
        VarSet H = bit(0) | bit(1), I = bit(2) | bit(3);
        CHECK(check_smooth(c));
        CHECK(check_decomposable(c));
        CHECK(check_x_deterministic(c, H));
        CHECK(check_x_deterministic(c, I));
        CHECK(check_x_deterministic(c, H | I));
        DenseTable t = oracle_eval_table(c);
        double s = 0;
        for (const Value& v : t.data) s += v.r;
        CHECK(s == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("injective joint maps each assignment to a unique argmax") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Gen g(seed);
        std::vector<Variable> vars = gen_binary_vars({"H1", "H2", "I1"});
        Circuit c = gen_mfe_injection(vars, {0, 1}, {2}, g);
        VarSet H = bit(0) | bit(1), I = bit(2);
        CHECK(check_x_deterministic(c, H));
        CHECK(check_x_deterministic(c, I));
        CHECK(check_x_deterministic(c, H | I));
        // support is a graph of an injection: one hidden row per visible row,
        // and no hidden row repeats
        DenseTable t = oracle_eval_table(c);
        std::map<int, int> h_of_i;
        std::set<int> used_h;
        std::vector<int> a(vars.size(), 0);
        for (std::uint64_t row = 0; row < t.data.size(); ++row) {
            if (t.data[row].r <= 1e-12) continue;
            oracle_detail::unrank(t.vars, t.scope, row, a);
            int hi = a[0] * 2 + a[1], ii = a[2];
            CHECK(h_of_i.emplace(ii, hi).first->second == hi);
            used_h.insert(hi);
        }
        CHECK(h_of_i.size() == 2);
        CHECK(used_h.size() == 2);
    }
}

TEST_CASE("hidden Markov family") {
    Circuit c = gen_hmm(4);
    REQUIRE(c.vars.size() == 8);
    CHECK(check_smooth(c));
    CHECK(check_decomposable(c));
    VarSet hidden = 0;
    for (int t = 0; t < 4; ++t) hidden |= bit(t);
    CHECK(check_x_deterministic(c, hidden));
    DenseTable t = oracle_eval_table(c);
    double s = 0;
    for (const Value& v : t.data) s += v.r;
    CHECK(s == Catch::Approx(1.0).margin(1e-9));
    // linear size in the number of steps
    CHECK(circuit_size(gen_hmm(8)) - circuit_size(gen_hmm(7)) ==
          circuit_size(gen_hmm(7)) - circuit_size(gen_hmm(6)));
}

TEST_CASE("unknown family") {
    CHECK_THROWS_AS(gen_named("nope", "prob", 4, 2, 1), parse_error);
    CHECK_THROWS_AS(gen_named("xdet", "prob", 4, 9, 1), parse_error);
}
