#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "rsynth/arena.hpp"
#include "rsynth/arena_text.hpp"

#include "fixtures.hpp"

using namespace rsynth;
using Catch::Matchers::ContainsSubstring;

namespace {

// players 2: p0 at s choosing between terminals a and b, nature coin on top
SMG tiny_game() {
    SMG g;
    g.arena.player_count = 2;
    g.arena.names = {"s", "a", "b", "c"};
    g.arena.owner = {0, 0, 0, kNature};
    g.arena.edges.resize(4);
    add_edge(g.arena, 0, 2);
    add_edge(g.arena, 0, 1);  // out of order on purpose; add_edge keeps rows sorted
    add_edge(g.arena, 1, 1);
    add_edge(g.arena, 2, 2);
    add_edge(g.arena, 3, 1, Rational(1, 2));
    add_edge(g.arena, 3, 2, Rational(1, 2));
    g.arena.initial = 0;
    Objective o0;
    o0.kind = Objective::Kind::TerminalReach;
    o0.targets = VertexSet(4);
    o0.targets.set(1);
    Objective o1;
    o1.kind = Objective::Kind::TerminalReach;
    o1.targets = VertexSet(4);
    o1.targets.set(2);
    g.objectives = {o0, o1};
    return g;
}

}  // namespace

TEST_CASE("edge rows stay sorted and terminals are self-loop-only") {
    SMG g = tiny_game();
    REQUIRE(g.arena.next(0) == std::vector<int>{1, 2});
    REQUIRE(g.arena.has_edge(0, 2));
    REQUIRE_FALSE(g.arena.has_edge(1, 2));
    REQUIRE(g.arena.is_terminal(1));
    REQUIRE(g.arena.is_terminal(2));
    REQUIRE_FALSE(g.arena.is_terminal(0));
    VertexSet t = g.arena.terminals();
    REQUIRE(t.count() == 2);
    REQUIRE(t.test(1));
    REQUIRE(t.test(2));
    REQUIRE(find_vertex(g.arena, "c") == 3);
    REQUIRE(find_vertex(g.arena, "zz") == -1);
}

TEST_CASE("validate_arena flags broken games") {
    SMG g = tiny_game();
    REQUIRE(validate_arena(g).empty());

    SECTION("nature distribution must sum to one") {
        g.arena.edges[3][0].prob = Rational(1, 3);
        auto issues = validate_arena(g);
        REQUIRE(issues.size() == 1);
        REQUIRE_THAT(issues[0], ContainsSubstring("distribution sums to 5/6"));
    }
    SECTION("player edges cannot carry probabilities") {
        g.arena.edges[0][0].prob = Rational(1, 2);
        auto issues = validate_arena(g);
        REQUIRE(issues.size() == 1);
        REQUIRE_THAT(issues[0], ContainsSubstring("player edge carries a probability"));
    }
    SECTION("reach targets must be terminals") {
        g.objectives[0].targets.set(0);
        auto issues = validate_arena(g);
        REQUIRE(issues.size() == 1);
        REQUIRE_THAT(issues[0], ContainsSubstring("'s' is not a terminal vertex"));
    }
    SECTION("muller formulas must name real vertices") {
        g.objectives[0].kind = Objective::Kind::Muller;
        g.objectives[0].formula = bvar("ghost");
        auto issues = validate_arena(g);
        REQUIRE(issues.size() == 1);
        REQUIRE_THAT(issues[0], ContainsSubstring("unknown vertex 'ghost'"));
    }
    SECTION("missing objectives are reported") {
        g.objectives.pop_back();
        auto issues = validate_arena(g);
        REQUIRE(issues.size() == 1);
        REQUIRE_THAT(issues[0], ContainsSubstring("expected 2 objectives, found 1"));
    }
    SECTION("require_valid throws with context") {
        g.objectives.pop_back();
        REQUIRE_THROWS_WITH(require_valid(g, "unit"),
                            ContainsSubstring("unit: invalid game:"));
    }
}

TEST_CASE("bool expression builders collapse trivial nodes") {
    BoolExprPtr v = bvar("x");
    REQUIRE(band({v})->kind == BoolExpr::Kind::Var);
    REQUIRE(bor({v})->kind == BoolExpr::Kind::Var);
    BoolExprPtr e = band({bvar("x"), bor({bvar("y"), bnot(bvar("z"))})});
    REQUIRE(muller_eval(*e, std::set<std::string>{"x", "y"}));
    REQUIRE(muller_eval(*e, std::set<std::string>{"x"}));       // ~z holds
    REQUIRE_FALSE(muller_eval(*e, std::set<std::string>{"x", "z"}));
    REQUIRE_FALSE(muller_eval(*e, std::set<std::string>{"y"}));
    REQUIRE(bool_expr_equal(*e, *band({bvar("x"), bor({bvar("y"), bnot(bvar("z"))})})));
    REQUIRE_FALSE(bool_expr_equal(*e, *band({bvar("x"), bvar("y")})));
    std::set<std::string> vars;
    collect_vars(*e, vars);
    REQUIRE(vars == std::set<std::string>{"x", "y", "z"});
}

TEST_CASE("support streams enumerate nonempty subsets, last vertex fastest") {
    SMG g = testutil::load_fixture("fig1.smg");
    int va = find_vertex(g.arena, "v_a");
    int ls1 = find_vertex(g.arena, "l_s1");
    int ls2 = find_vertex(g.arena, "l_s2");
    REQUIRE(ls1 < ls2);

    SupportStream sys(g, SupportScope::System);
    REQUIRE(sys.total_count() == 3);
    std::vector<std::vector<int>> rows;
    while (auto s = sys.next()) rows.push_back(s->chosen[va]);
    REQUIRE(rows == std::vector<std::vector<int>>{{ls1}, {ls2}, {ls1, ls2}});

    SupportStream env(g, SupportScope::Environment);
    REQUIRE(env.total_count() == 9);  // two env vertices with two successors each
    int count = 0;
    std::vector<int> last_first, last_last;
    int vc = find_vertex(g.arena, "v_c");
    while (auto s = env.next()) {
        if (count == 0) last_first = s->chosen[vc];
        last_last = s->chosen[vc];
        ++count;
    }
    REQUIRE(count == 9);
    // first support picks the first successor everywhere, the final one keeps all
    REQUIRE(last_first == std::vector<int>{g.arena.edges[vc][0].target});
    REQUIRE(last_last == g.arena.next(vc));

    SECTION("empty scope yields exactly one empty support") {
        SMG solo = testutil::load_fixture("tiny_tr.smg");
        SupportStream none(solo, SupportScope::Environment);
        REQUIRE(none.total_count() == 1);
        auto s = none.next();
        REQUIRE(s.has_value());
        for (int v = 0; v < solo.arena.vertex_count(); ++v) REQUIRE_FALSE(s->covers(v));
        REQUIRE_FALSE(none.next().has_value());
    }
}

TEST_CASE("positional profile stream order is ascending vertices, last fastest") {
    SMG g = testutil::load_fixture("fig1.smg");
    int vb = find_vertex(g.arena, "v_b");
    int vc = find_vertex(g.arena, "v_c");
    PositionalProfileStream stream(g, {vb, vc});
    REQUIRE(stream.total_count() == 4);
    std::vector<std::pair<int, int>> picks;
    while (auto p = stream.next()) picks.emplace_back(p->choice[vb], p->choice[vc]);
    int va = find_vertex(g.arena, "v_a");
    int le1 = find_vertex(g.arena, "l_e1");
    int le2 = find_vertex(g.arena, "l_e2");
    REQUIRE(picks == std::vector<std::pair<int, int>>{
                         {vc, va}, {vc, le2}, {le1, va}, {le1, le2}});
}

TEST_CASE("supports and profiles merge on disjoint domains only") {
    SMG g = tiny_game();
    Support s1(4), s2(4), s3(4);
    s1.chosen[0] = {1};
    s2.chosen[3] = {1, 2};
    s3.chosen[0] = {2};
    Support u = s1.united(s2);
    REQUIRE(u.allows(0, 1));
    REQUIRE_FALSE(u.allows(0, 2));
    REQUIRE(u.allows(3, 2));
    REQUIRE_THROWS_AS(s1.united(s3), std::invalid_argument);

    StationaryProfile p1(4), p2(4);
    p1.set_pure(0, 1);
    p2.rows[1] = {{1, Rational(1)}};
    StationaryProfile m = p1.merged(p2);
    REQUIRE(m.prob(0, 1) == 1);
    REQUIRE(m.prob(0, 2) == 0);
    REQUIRE_THROWS_AS(p1.merged(p1), std::invalid_argument);

    Support from_profile = m.support();
    REQUIRE(from_profile.allows(0, 1));
    REQUIRE(from_profile.covers(1));

    PositionalProfile pos(4);
    REQUIRE_FALSE(pos.covers(0));
    pos.choice[0] = 2;
    StationaryProfile st = to_stationary(pos);
    REQUIRE(st.prob(0, 2) == 1);
    REQUIRE_FALSE(st.covers(1));
}

TEST_CASE("profile validation rejects off-edge and unnormalized rows") {
    SMG g = tiny_game();
    StationaryProfile p(4);
    p.rows[0] = {{1, Rational(1, 2)}, {2, Rational(1, 2)}};
    REQUIRE_NOTHROW(validate_profile(g, p, "unit"));

    SECTION("row must sum to one") {
        p.rows[0] = {{1, Rational(1, 3)}, {2, Rational(1, 3)}};
        REQUIRE_THROWS_AS(validate_profile(g, p, "unit"), std::invalid_argument);
    }
    SECTION("row may only use existing edges") {
        p.rows[0] = {{3, Rational(1)}};
        REQUIRE_THROWS_AS(validate_profile(g, p, "unit"), std::invalid_argument);
    }
    SECTION("nature vertices cannot be covered") {
        p.rows[3] = {{1, Rational(1)}};
        REQUIRE_THROWS_AS(validate_profile(g, p, "unit"), std::invalid_argument);
    }
    SECTION("require_covered reports the uncovered vertex") {
        StationaryProfile empty(4);
        REQUIRE_THROWS_WITH(
            require_covered(g, empty, [](PlayerId i) { return i == 0; }, "unit"),
            ContainsSubstring("'s'"));
    }
}

TEST_CASE("restrict, fix and fold build the expected subarenas") {
    SMG g = testutil::load_fixture("fig1.smg");
    int va = find_vertex(g.arena, "v_a");
    int vb = find_vertex(g.arena, "v_b");
    int vc = find_vertex(g.arena, "v_c");
    int ls1 = find_vertex(g.arena, "l_s1");

    Support s(g.arena.vertex_count());
    s.chosen[va] = {ls1};
    SMG r = restrict_support(g, s);
    REQUIRE(r.arena.next(va) == std::vector<int>{ls1});
    REQUIRE(r.arena.next(vb) == g.arena.next(vb));
    SMG r2 = restrict_support(g, s, PlayerId{0});
    REQUIRE(r2.arena.next(va) == g.arena.next(va));

    Support bad(g.arena.vertex_count());
    bad.chosen[va] = {vb};  // no such edge
    REQUIRE_THROWS_WITH(restrict_support(g, bad), ContainsSubstring("missing edge"));

    PositionalProfile env(g.arena.vertex_count());
    env.choice[vb] = vc;
    env.choice[vc] = va;
    SMG fixed = fix_positional(g, s, env);
    REQUIRE(fixed.arena.next(vb) == std::vector<int>{vc});
    REQUIRE(fixed.arena.next(vc) == std::vector<int>{va});
    REQUIRE(fixed.arena.next(va) == std::vector<int>{ls1});

    StationaryProfile sys(g.arena.vertex_count());
    sys.rows[va] = {{ls1, Rational(1, 3)},
                    {find_vertex(g.arena, "l_s2"), Rational(2, 3)}};
    SMG folded = fold_to_nature(g, sys);
    REQUIRE(folded.arena.owner[va] == kNature);
    REQUIRE(*folded.arena.edges[va][0].prob == Rational(1, 3));
    REQUIRE(folded.arena.owner[vb] == 1);
}

TEST_CASE("enumeration guards and environment overrides") {
    REQUIRE_NOTHROW(guard_count(BigInt(10), 10, "unit"));
    REQUIRE_THROWS_WITH(guard_count(BigInt(11), 10, "unit"),
                        ContainsSubstring("unit: refusing to enumerate 11 candidates (bound 10)"));

    Bounds defaults;
    REQUIRE(defaults.max_profiles == 1000000);
    REQUIRE(defaults.max_ec_vertices == 16);
    REQUIRE(defaults.max_unfold_vertices == 50000);
    REQUIRE(defaults.max_emit_sentences == 4096);

    setenv("RSYNTH_MAX_PROFILES", "123", 1);
    setenv("RSYNTH_MAX_EC_VERTICES", "7", 1);
    Bounds b = Bounds::from_env();
    REQUIRE(b.max_profiles == 123);
    REQUIRE(b.max_ec_vertices == 7);
    unsetenv("RSYNTH_MAX_PROFILES");
    unsetenv("RSYNTH_MAX_EC_VERTICES");
}

TEST_CASE("scopes pick out the right owners") {
    SMG g = testutil::load_fixture("fig1.smg");
    REQUIRE(scope_includes(SupportScope::System, 0));
    REQUIRE_FALSE(scope_includes(SupportScope::System, 1));
    REQUIRE(scope_includes(SupportScope::Environment, 2));
    REQUIRE_FALSE(scope_includes(SupportScope::Environment, kNature));
    REQUIRE(scope_includes(SupportScope::All, 0));

    auto env = vertices_in_scope(g.arena, SupportScope::Environment);
    REQUIRE(env == std::vector<int>{find_vertex(g.arena, "v_b"), find_vertex(g.arena, "v_c")});
    REQUIRE(vertices_of_player(g.arena, 0).front() == find_vertex(g.arena, "v_a"));

    Support full = full_support(g, SupportScope::All);
    for (int v : vertices_in_scope(g.arena, SupportScope::All))
        REQUIRE(full.chosen[v] == g.arena.next(v));
}
