#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rsynth/arena_text.hpp"
#include "rsynth/chain.hpp"
#include "rsynth/transforms.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace rsynth;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<std::string> names_of(const Arena& a) { return a.names; }

StationaryProfile uniform_over_support(const SMG& g) {
    StationaryProfile p(g.arena.vertex_count());
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (g.arena.owner[v] == kNature) continue;
        DistRow row;
        for (const Edge& e : g.arena.edges[v])
            row.emplace_back(e.target, Rational(1, g.arena.edges[v].size()));
        p.rows[v] = std::move(row);
    }
    return p;
}

}  // namespace

TEST_CASE("memory zero reproduces the original game up to vertex order") {
    for (const char* name :
         {"fig1.smg", "fig3.smg", "fig4.smg", "coin.smg", "tiny_tr.smg", "cycle_muller.smg"}) {
        INFO(name);
        SMG g = testutil::load_fixture(name);
        UnfoldResult u = unfold_t_memory(g, 0);
        auto mismatch = oracle::isomorphism_mismatch(g, u.game);
        if (mismatch) INFO(*mismatch);
        REQUIRE_FALSE(mismatch.has_value());
        for (const UnfoldedVertex& c : u.copies) REQUIRE(c.history.empty());
    }
}

TEST_CASE("the cyclic game unfolds into five one-step windows") {
    SMG g = testutil::load_fixture("fig3.smg");
    UnfoldResult u = unfold_t_memory(g, 1);
    const Arena& a = u.game.arena;

    REQUIRE(names_of(a) == std::vector<std::string>{"v_a", "v_a__v_b", "v_a__v_c", "v_b__v_a",
                                                    "v_c__v_a"});
    REQUIRE(a.initial == 0);
    REQUIRE(a.owner == std::vector<PlayerId>{1, 0, 0, 1, 1});
    REQUIRE(a.next(0) == std::vector<int>{1, 2});
    REQUIRE(a.next(1) == std::vector<int>{3});
    REQUIRE(a.next(2) == std::vector<int>{4});
    REQUIRE(a.next(3) == std::vector<int>{1, 2});
    REQUIRE(a.next(4) == std::vector<int>{1, 2});

    // objective variables become disjunctions over the revisitable copies
    for (int i = 0; i < 2; ++i) {
        REQUIRE(muller_formula_text(*u.game.objectives[i].formula) ==
                "(v_b__v_a | v_c__v_a) & v_a__v_b & v_a__v_c");
        BoolExprPtr expected =
            parse_muller_formula("(v_b__v_a | v_c__v_a) & v_a__v_b & v_a__v_c");
        REQUIRE(bool_expr_equal(*u.game.objectives[i].formula, *expected));
    }
    REQUIRE(validate_arena(u.game).empty());
}

TEST_CASE("reach targets move to the absorbing copies only") {
    SMG g = testutil::load_fixture("fig1.smg");
    UnfoldResult u = unfold_t_memory(g, 1);
    const Arena& a = u.game.arena;
    REQUIRE(validate_arena(u.game).empty());

    for (int i = 0; i < g.players(); ++i) {
        const VertexSet& targets = u.game.objectives[i].targets;
        REQUIRE(targets.count() == g.objectives[i].targets.count());
        for (auto c = targets.find_first(); c != VertexSet::npos; c = targets.find_next(c)) {
            REQUIRE(a.is_terminal(static_cast<int>(c)));
            REQUIRE(g.objectives[i].targets.test(u.copies[c].current));
        }
    }

    // the transient first visit of a terminal is not itself a target
    int transient = find_vertex(a, "v_a__l_s1");
    int absorbing = find_vertex(a, "l_s1__l_s1");
    REQUIRE(transient >= 0);
    REQUIRE(absorbing >= 0);
    REQUIRE_FALSE(u.game.objectives[0].targets.test(transient));
    REQUIRE(u.game.objectives[0].targets.test(absorbing));
    REQUIRE(a.next(transient) == std::vector<int>{absorbing});
}

TEST_CASE("the audit construction seeds every window of the bounded length") {
    SMG g = testutil::load_fixture("fig3.smg");
    UnfoldResult u = unfold_t_memory(g, 1, {}, true);
    const Arena& a = u.game.arena;

    // windows ordered by length then lexicographically, currents ascending
    REQUIRE(names_of(a) ==
            std::vector<std::string>{"v_a", "v_b", "v_c", "v_a__v_a", "v_a__v_b", "v_a__v_c",
                                     "v_b__v_a", "v_b__v_b", "v_b__v_c", "v_c__v_a", "v_c__v_b",
                                     "v_c__v_c"});
    REQUIRE(a.initial == 0);
    REQUIRE(u.copies[a.initial].history.empty());
    REQUIRE(a.next(1) == std::vector<int>{6});        // ([], v_b) steps into window [v_b]
    REQUIRE(a.next(3) == std::vector<int>{4, 5});     // ([v_a], v_a) keeps window [v_a]
    REQUIRE(muller_formula_text(*u.game.objectives[0].formula) ==
            "(v_b__v_a | v_c__v_a) & v_a__v_b & v_a__v_c");

    UnfoldResult reachable = unfold_t_memory(g, 1);
    PositionalProfileStream full_stream(u.game, vertices_in_scope(a, SupportScope::All));
    PositionalProfileStream small_stream(reachable.game,
                                         vertices_in_scope(reachable.game.arena,
                                                           SupportScope::All));
    REQUIRE(full_stream.total_count() == 16);  // four v_a copies with two choices each
    REQUIRE(small_stream.total_count() == 8);
}

TEST_CASE("colliding window names get a disambiguating suffix") {
    SMG g = parse_arena(
        "players 1\n"
        "init x__y\n"
        "vertex x__y owner 0\n"
        "vertex x owner 0\n"
        "vertex y owner 0\n"
        "edge x__y x\n"
        "edge x y\n"
        "edge y y\n"
        "objective 0 tr {}\n");
    UnfoldResult u = unfold_t_memory(g, 1);
    REQUIRE(names_of(u.game.arena) ==
            std::vector<std::string>{"x__y", "x__y__x", "x__y_u2", "y__y"});
}

TEST_CASE("unfolding bounds and argument checks") {
    SMG g = testutil::load_fixture("fig3.smg");
    REQUIRE_THROWS_AS(unfold_t_memory(g, -1), std::invalid_argument);
    Bounds tight;
    tight.max_unfold_vertices = 4;
    REQUIRE_THROWS_WITH(unfold_t_memory(g, 1, tight),
                        ContainsSubstring("unfolding exceeds 4 vertices"));
}

TEST_CASE("unfolded payoffs replay exactly on the original arena") {
    SECTION("absorbing games, both memory depths") {
        for (const char* name : {"fig1.smg", "fig4.smg"}) {
            for (int t : {1, 2}) {
                INFO(name << " t=" << t);
                SMG g = testutil::load_fixture(name);
                UnfoldResult u = unfold_t_memory(g, t);
                REQUIRE(validate_arena(u.game).empty());

                PositionalProfileStream stream(
                    u.game, vertices_in_scope(u.game.arena, SupportScope::All));
                while (auto pos = stream.next()) {
                    StationaryProfile prof = to_stationary(*pos);
                    PayoffResult lib = payoff_profile(u.game, prof);
                    REQUIRE(lib.payoff == oracle::unfolded_dag_payoff(g, u, t, prof));
                }

                StationaryProfile mixed = uniform_over_support(u.game);
                REQUIRE(payoff_profile(u.game, mixed).payoff ==
                        oracle::unfolded_dag_payoff(g, u, t, mixed));
            }
        }
    }
    SECTION("deterministic cyclic game, lasso replay") {
        SMG g = testutil::load_fixture("fig3.smg");
        for (int t : {1, 2}) {
            INFO("t=" << t);
            UnfoldResult u = unfold_t_memory(g, t);
            PositionalProfileStream stream(u.game,
                                           vertices_in_scope(u.game.arena, SupportScope::All));
            while (auto pos = stream.next()) {
                PayoffResult lib = payoff_profile(u.game, to_stationary(*pos));
                std::vector<int> walked = oracle::unfolded_lasso_payoff(g, u, t, *pos);
                for (int i = 0; i < g.players(); ++i)
                    REQUIRE(lib.payoff[i] == Rational(walked[i]));
            }
        }
    }
}

TEST_CASE("the complement reduction adds a vertexless adversary") {
    SMG g = testutil::load_fixture("fig1.smg");
    SMG r = crsp_to_ncrspgt(g);
    REQUIRE(r.players() == 4);
    REQUIRE(vertices_of_player(r.arena, 0).empty());
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (g.arena.owner[v] == kNature)
            REQUIRE(r.arena.owner[v] == kNature);
        else
            REQUIRE(r.arena.owner[v] == g.arena.owner[v] + 1);
    }
    // adversary wins exactly at the terminals the old system player lost
    const VertexSet& adv = r.objectives[0].targets;
    VertexSet expected = g.arena.terminals();
    expected -= g.objectives[0].targets;
    REQUIRE(adv == expected);
    for (int i = 0; i < g.players(); ++i) {
        REQUIRE(r.objectives[i + 1].kind == g.objectives[i].kind);
        REQUIRE(r.objectives[i + 1].targets == g.objectives[i].targets);
    }
}

TEST_CASE("the muller complement negates the old system objective") {
    SMG g = testutil::load_fixture("fig3.smg");
    SMG r = crsp_to_ncrspgt(g);
    REQUIRE(r.players() == 3);
    REQUIRE(r.objectives[0].kind == Objective::Kind::Muller);
    REQUIRE(muller_formula_text(*r.objectives[0].formula) == "!(v_a & v_b & v_c)");
    REQUIRE(bool_expr_equal(*r.objectives[0].formula, *bnot(g.objectives[0].formula)));
}

TEST_CASE("terminal-reach complement requires almost-sure termination") {
    SMG g = parse_arena(
        "players 1\n"
        "init s\n"
        "vertex s owner 0\n"
        "leaf w (1)\n"
        "edge s s\n"
        "edge s w\n"
        "objective 0 tr {}\n");
    REQUIRE_THROWS_WITH(crsp_to_ncrspgt(g),
                        ContainsSubstring("needs almost-sure termination"));
}

TEST_CASE("adversary and old system payoffs always split one unit") {
    std::mt19937_64 rng(1212);
    SECTION("terminating reach game") {
        SMG g = testutil::load_fixture("fig1.smg");
        SMG r = crsp_to_ncrspgt(g);
        for (int round = 0; round < 100; ++round) {
            StationaryProfile p(g.arena.vertex_count());
            for (int v = 0; v < g.arena.vertex_count(); ++v) {
                if (g.arena.owner[v] == kNature) continue;
                const auto& row = g.arena.edges[v];
                std::uint32_t mask = 1 + static_cast<std::uint32_t>(
                                             rng() % ((std::uint32_t{1} << row.size()) - 1));
                std::vector<std::uint64_t> nums;
                std::uint64_t total = 0;
                std::vector<int> targets;
                for (std::size_t j = 0; j < row.size(); ++j)
                    if (mask & (std::uint32_t{1} << j)) {
                        targets.push_back(row[j].target);
                        nums.push_back(1 + rng() % 8);
                        total += nums.back();
                    }
                DistRow dist;
                for (std::size_t j = 0; j < targets.size(); ++j)
                    dist.emplace_back(targets[j], Rational(nums[j], total));
                p.rows[v] = std::move(dist);
            }
            PayoffVector orig = payoff_profile(g, p).payoff;
            PayoffVector red = payoff_profile(r, p).payoff;
            REQUIRE(red.size() == orig.size() + 1);
            REQUIRE(red[0] + red[1] == 1);
            for (int i = 0; i < g.players(); ++i) REQUIRE(red[i + 1] == orig[i]);
        }
    }
    SECTION("cyclic muller game") {
        SMG g = testutil::load_fixture("fig3.smg");
        SMG r = crsp_to_ncrspgt(g);
        StationaryProfile forced = complete_forced(g, StationaryProfile(g.arena.vertex_count()));
        int va = find_vertex(g.arena, "v_a");
        int vb = find_vertex(g.arena, "v_b");
        int vc = find_vertex(g.arena, "v_c");
        for (int num = 0; num <= 4; ++num) {
            StationaryProfile p = forced;
            if (num == 0)
                p.rows[va] = {{vb, Rational(1)}};
            else if (num == 4)
                p.rows[va] = {{vc, Rational(1)}};
            else
                p.rows[va] = {{vb, Rational(num, 4)}, {vc, Rational(4 - num, 4)}};
            PayoffVector orig = payoff_profile(g, p).payoff;
            PayoffVector red = payoff_profile(r, p).payoff;
            REQUIRE(red[0] + red[1] == 1);
            REQUIRE(red[1] == orig[0]);
            REQUIRE(red[2] == orig[1]);
        }
    }
}
