#pragma once

#include <stdexcept>
#include <vector>

#include "rsynth/arena.hpp"
#include "rsynth/chain.hpp"
#include "rsynth/graph.hpp"

namespace rsynth {

namespace detail {

inline void require_mdp_for(const SMG& g, PlayerId i, const std::string& who) {
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (g.arena.owner[v] != kNature && g.arena.owner[v] != i && g.arena.edges[v].size() != 1)
            throw std::invalid_argument(who + ": vertex '" + g.arena.names[v] +
                                        "' of another player is unresolved");
}

inline MarkovChain policy_chain(const SMG& g, PlayerId i, const std::vector<int>& policy,
                                const VertexSet& target) {
    MarkovChain c;
    c.initial = g.arena.initial;
    c.rows.resize(g.arena.vertex_count());
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (target.test(v)) {
            c.rows[v] = {{v, Rational(1)}};  // absorb: continuation is irrelevant
        } else if (g.arena.owner[v] == kNature) {
            for (const Edge& e : g.arena.edges[v]) c.rows[v].emplace_back(e.target, *e.prob);
        } else if (g.arena.owner[v] == i) {
            c.rows[v] = {{policy[v], Rational(1)}};
        } else {
            c.rows[v] = {{g.arena.edges[v][0].target, Rational(1)}};
        }
    }
    return c;
}

}  // namespace detail

// Maximal probability of reaching `target` when player i picks successors and
// everything else is fixed. Exact policy iteration from below: evaluation
// computes true reach probabilities of the current positional policy, and
// only strictly improving switches are taken (ties broken toward the lowest-
// numbered successor), so values increase monotonically to the least fixed
// point of r = 1 on target, r_v = max_w r_w on V_i, r_v = sum p r_w elsewhere.
// Vertices that cannot reach target at all are pinned to 0 up front.
inline ValueMap max_reachability(const SMG& g, PlayerId i, const VertexSet& target,
                                 std::vector<int>* policy_out = nullptr) {
    detail::require_mdp_for(g, i, "max_reachability");
    const Arena& a = g.arena;
    int n = a.vertex_count();

    std::vector<int> policy(n, -1);
    for (int v : vertices_of_player(a, i)) policy[v] = a.edges[v][0].target;

    ValueMap value = chain_reach_values(detail::policy_chain(g, i, policy, target), target);
    for (int round = 0;; ++round) {
        if (round > 100000) throw std::logic_error("max_reachability: no convergence");
        bool switched = false;
        for (int v : vertices_of_player(a, i)) {
            if (target.test(v)) continue;
            int best = policy[v];
            Rational best_value = value[best];
            for (const Edge& e : a.edges[v])
                if (value[e.target] > best_value) {
                    best = e.target;
                    best_value = value[e.target];
                }
            if (best_value > value[v]) {
                policy[v] = best;
                switched = true;
            }
        }
        if (!switched) break;
        ValueMap next = chain_reach_values(detail::policy_chain(g, i, policy, target), target);
        bool strictly_better = false;
        for (int v = 0; v < n; ++v) {
            if (next[v] < value[v])
                throw std::logic_error("max_reachability: value regressed at '" + a.names[v] + "'");
            if (next[v] > value[v]) strictly_better = true;
        }
        if (!strictly_better)
            throw std::logic_error("max_reachability: switch without strict improvement");
        value = std::move(next);
    }
    if (policy_out) *policy_out = std::move(policy);
    return value;
}

struct BestResponse {
    ValueMap values;            // r^i per vertex
    VertexSet winning_ecs;      // E: union of player-i end components satisfying O_i
    StationaryStrategy witness; // stationary strategy attaining values
};

// Player i's optimal values against a fixed stationary profile of everyone
// else. The opponents fold into nature rows; E is the union of winning end
// components of the resulting MDP; the optimum is the maximal probability of
// reaching E. The witness plays the optimal reach policy outside E and,
// inside, spreads uniformly over the successors that stay in the first
// winning end component containing the current vertex — play then settles in
// a winning component almost surely.
inline BestResponse best_response_values(const SMG& g, const StationaryProfile& others,
                                         PlayerId i,
                                         int max_ec_vertices = Bounds{}.max_ec_vertices) {
    if (i < 0 || i >= g.players()) throw std::invalid_argument("best_response_values: bad player");
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (others.covers(v) && g.arena.owner[v] == i)
            throw std::invalid_argument("best_response_values: profile covers deviator vertex '" +
                                        g.arena.names[v] + "'");
    require_covered(
        g, others, [i](PlayerId p) { return p != i; }, "best_response_values");
    SMG folded = fold_to_nature(g, others);

    std::vector<VertexSet> winning;
    const Objective& obj = g.objectives[i];
    if (obj.kind == Objective::Kind::TerminalReach) {
        for (auto t = obj.targets.find_first(); t != VertexSet::npos;
             t = obj.targets.find_next(t)) {
            VertexSet single = g.arena.empty_set();
            single.set(t);
            winning.push_back(std::move(single));
        }
    } else {
        for (const VertexSet& ec : end_components(folded, i, max_ec_vertices))
            if (muller_eval(*obj.formula, g.arena, ec)) winning.push_back(ec);
    }
    BestResponse out;
    out.winning_ecs = g.arena.empty_set();
    for (const VertexSet& ec : winning) out.winning_ecs |= ec;

    std::vector<int> policy;
    out.values = max_reachability(folded, i, out.winning_ecs, &policy);

    out.witness.player = i;
    for (int v : vertices_of_player(g.arena, i)) {
        if (out.winning_ecs.test(v)) {
            const VertexSet* home = nullptr;
            for (const VertexSet& ec : winning)
                if (ec.test(v)) {
                    home = &ec;
                    break;
                }
            DistRow row;
            std::vector<int> inside;
            for (const Edge& e : g.arena.edges[v])
                if (home->test(e.target)) inside.push_back(e.target);
            for (int t : inside) row.emplace_back(t, Rational(1, inside.size()));
            out.witness.rows[v] = std::move(row);
        } else {
            out.witness.rows[v] = {{policy[v], Rational(1)}};
        }
    }
    return out;
}

}  // namespace rsynth
