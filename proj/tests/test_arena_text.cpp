#include <catch2/catch_amalgamated.hpp>

#include "rsynth/arena.hpp"
#include "rsynth/arena_text.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace rsynth;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("fixtures parse and survive a serialize round trip") {
    for (const char* name :
         {"fig1.smg", "fig3.smg", "fig4.smg", "coin.smg", "tiny_tr.smg", "cycle_muller.smg"}) {
        INFO(name);
        SMG g = testutil::load_fixture(name);
        REQUIRE(validate_arena(g).empty());
        SMG again = parse_arena(serialize_arena(g));
        REQUIRE_FALSE(oracle::isomorphism_mismatch(g, again).has_value());
        REQUIRE(serialize_arena(g) == serialize_arena(again));
    }
}

TEST_CASE("integral payoff leaves compile to one owned terminal") {
    SMG g = parse_arena(
        "players 2\n"
        "init s\n"
        "vertex s owner 0\n"
        "leaf done (1, 0)\n"
        "edge s done\n"
        "objective 0 tr {}\n"
        "objective 1 tr {}\n");
    REQUIRE(g.arena.vertex_count() == 2);
    int done = find_vertex(g.arena, "done");
    REQUIRE(done >= 0);
    REQUIRE(g.arena.owner[done] == 0);
    REQUIRE(g.arena.is_terminal(done));
    REQUIRE(g.objectives[0].targets.test(done));
    REQUIRE_FALSE(g.objectives[1].targets.test(done));
}

TEST_CASE("fractional payoff leaves expand into a joint lottery gadget") {
    SMG g = testutil::load_fixture("fig1.smg");
    REQUIRE(g.arena.vertex_count() == 15);

    int root = find_vertex(g.arena, "l_e1");
    REQUIRE(g.arena.owner[root] == kNature);
    REQUIRE(g.arena.edges[root].size() == 4);

    // fractional players at l_e1 = (0, 1/4, 1/3) are 1 and 2; winner-set
    // terminals carry the product probabilities
    int w = find_vertex(g.arena, "l_e1_w");
    int w1 = find_vertex(g.arena, "l_e1_w_1");
    int w2 = find_vertex(g.arena, "l_e1_w_2");
    int w12 = find_vertex(g.arena, "l_e1_w_1_2");
    REQUIRE(w >= 0);
    REQUIRE(w1 >= 0);
    REQUIRE(w2 >= 0);
    REQUIRE(w12 >= 0);
    auto prob_to = [&](int t) {
        for (const Edge& e : g.arena.edges[root])
            if (e.target == t) return *e.prob;
        throw std::logic_error("missing edge");
    };
    REQUIRE(prob_to(w) == Rational(1, 2));    // 3/4 * 2/3
    REQUIRE(prob_to(w1) == Rational(1, 6));   // 1/4 * 2/3
    REQUIRE(prob_to(w2) == Rational(1, 4));   // 3/4 * 1/3
    REQUIRE(prob_to(w12) == Rational(1, 12)); // 1/4 * 1/3
    for (int t : {w, w1, w2, w12}) {
        REQUIRE(g.arena.owner[t] == 0);
        REQUIRE(g.arena.is_terminal(t));
    }

    // target sets collect exactly the winner-set terminals per player
    std::set<std::string> t1, expect1 = {"l_e1_w_1", "l_e1_w_1_2", "l_e2_w_1", "l_e2_w_1_2",
                                         "l_s1"};
    const VertexSet& targets1 = g.objectives[1].targets;
    for (auto v = targets1.find_first(); v != VertexSet::npos; v = targets1.find_next(v))
        t1.insert(g.arena.names[v]);
    REQUIRE(t1 == expect1);

    std::set<std::string> t0, expect0 = {"l_s1", "l_s2"};
    const VertexSet& targets0 = g.objectives[0].targets;
    for (auto v = targets0.find_first(); v != VertexSet::npos; v = targets0.find_next(v))
        t0.insert(g.arena.names[v]);
    REQUIRE(t0 == expect0);
}

TEST_CASE("parse errors carry positions and the offending text") {
    auto parse_fails = [](const std::string& text, const std::string& needle) {
        REQUIRE_THROWS_WITH(parse_arena(text), ContainsSubstring(needle));
    };
    parse_fails("players 2\ninit s\nfrobnicate s\n", "unknown statement 'frobnicate'");
    parse_fails("players 0\n", "player count must be a positive integer");
    parse_fails("players 1\ninit s\nvertex s owner 0\nvertex s owner 0\n", "duplicate name 's'");
    parse_fails("players 1\ninit s\nvertex s owner 0\nedge s t\n", "undeclared name 't'");
    parse_fails("players 2\ninit s\nvertex s owner 0\nleaf l (1)\nedge s l\n",
                "leaf 'l' needs 2 payoffs");
    parse_fails("players 1\ninit s\nvertex s owner 0\nleaf l (3/2)\nedge s l\n",
                "payoff 3/2 outside [0,1]");
    parse_fails(
        "players 1\ninit s\nvertex s owner 0\nleaf l (1)\nedge s l\nobjective 0 tr {}\n"
        "objective 0 tr {}\n",
        "duplicate objective for player 0");
    parse_fails("players 1\ninit s\nvertex s owner 0\nleaf l (1)\nedge s l\n",
                "missing objective for player 0");
    parse_fails("players 1\nvertex s owner 0\nleaf l (1)\nedge s l\nobjective 0 tr {}\n",
                "missing 'init' declaration");
    parse_fails(
        "players 1\ninit s\nvertex s owner 0\nleaf l (1)\nedge s l\nobjective 0 muller \"ghost\"\n",
        "undeclared name 'ghost'");

    // a fractional payoff to a muller player has no gadget meaning
    parse_fails(
        "players 2\ninit s\nvertex s owner 0\nleaf l (1, 1/2)\nedge s l\n"
        "objective 0 tr {}\nobjective 1 muller \"s\"\n",
        "payoff to player 1 whose objective is not tr");

    // structurally broken games fail arena validation after compiling
    parse_fails(
        "players 1\ninit s\nvertex s owner 0\nvertex t owner nature\nleaf l (1)\n"
        "edge s l\nedge t l prob 1/2\nobjective 0 tr {}\n",
        "distribution sums to 1/2");
}

TEST_CASE("parse error positions are line and column accurate") {
    try {
        parse_arena("players 2\ninit s\nvertex s owner 9x\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.line == 3);
        REQUIRE_THAT(e.what(), ContainsSubstring("'9x' is not a rational literal"));
    }
}

TEST_CASE("muller formula text round trips with minimal parentheses") {
    for (const char* text : {"v_a", "!v_a", "v_a & v_b & v_c", "v_a | v_b & v_c",
                             "(v_a | v_b) & v_c", "!(v_a & v_b) | v_c"}) {
        INFO(text);
        BoolExprPtr e = parse_muller_formula(text);
        BoolExprPtr again = parse_muller_formula(muller_formula_text(*e));
        REQUIRE(bool_expr_equal(*e, *again));
    }
    REQUIRE(muller_formula_text(*parse_muller_formula("(v_a | v_b) & v_c")) ==
            "(v_a | v_b) & v_c");
    REQUIRE(muller_formula_text(*parse_muller_formula("v_a | (v_b & v_c)")) ==
            "v_a | v_b & v_c");
}

TEST_CASE("profile files parse weighted and uniform rows") {
    SMG g = testutil::load_fixture("fig1.smg");
    int va = find_vertex(g.arena, "v_a");
    int ls1 = find_vertex(g.arena, "l_s1");
    int ls2 = find_vertex(g.arena, "l_s2");

    StationaryProfile weighted =
        parse_profile(g, "strategy 0 at v_a -> l_s1: 1/3 -> l_s2: 2/3\n");
    REQUIRE(weighted.prob(va, ls1) == Rational(1, 3));
    REQUIRE(weighted.prob(va, ls2) == Rational(2, 3));

    StationaryProfile uniform = parse_profile(g, "strategy 0 at v_a -> l_s1 -> l_s2\n");
    REQUIRE(uniform.prob(va, ls1) == Rational(1, 2));

    StationaryProfile pure = parse_profile(g, "# comment\nstrategy 0 at v_a -> l_s2\n");
    REQUIRE(pure.prob(va, ls2) == 1);
    REQUIRE_FALSE(pure.covers(find_vertex(g.arena, "v_b")));

    auto profile_fails = [&](const std::string& text, const std::string& needle) {
        REQUIRE_THROWS_WITH(parse_profile(g, text), ContainsSubstring(needle));
    };
    profile_fails("strategy 1 at v_a -> l_s1\n", "not owned by player 1");
    profile_fails("strategy 0 at v_a -> l_s1\nstrategy 0 at v_a -> l_s2\n",
                  "second strategy for vertex 'v_a'");
    profile_fails("strategy 0 at v_a -> l_s1: 1/3 -> l_s2\n",
                  "either all targets carry probabilities or none do");
    profile_fails("strategy 0 at v_a -> l_s1: 1/3 -> l_s2: 1/3\n", "sums to");
    profile_fails("strategy 0 at v_a -> v_b\n", "uses a missing edge");
    profile_fails("wander 0 at v_a -> l_s1\n", "expected 'strategy'");
}

TEST_CASE("complete_forced fills exactly the single-successor player vertices") {
    SMG g = testutil::load_fixture("fig1.smg");
    StationaryProfile p = complete_forced(g, parse_profile(g, "strategy 0 at v_a -> l_s1\n"));
    int ls1 = find_vertex(g.arena, "l_s1");
    REQUIRE(p.prob(ls1, ls1) == 1);  // terminal self-loop filled in
    REQUIRE_FALSE(p.covers(find_vertex(g.arena, "v_b")));  // real choices stay open
    REQUIRE_FALSE(p.covers(find_vertex(g.arena, "l_e1")));  // nature untouched

    // every terminal of the gadgets is covered after completion
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (g.arena.owner[v] != kNature && g.arena.edges[v].size() == 1) REQUIRE(p.covers(v));
}

TEST_CASE("profile serialization round trips") {
    SMG g = testutil::load_fixture("fig1.smg");
    StationaryProfile p = testutil::load_profile_fixture(g, "profiles/fig1_uniform_s1_s2.prof");
    StationaryProfile again = parse_profile(g, serialize_profile(g, p));
    REQUIRE(serialize_profile(g, p) == serialize_profile(g, again));
    int va = find_vertex(g.arena, "v_a");
    REQUIRE(again.prob(va, find_vertex(g.arena, "l_s1")) == Rational(1, 2));
}
