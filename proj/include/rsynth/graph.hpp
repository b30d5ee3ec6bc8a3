#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rsynth/arena.hpp"

namespace rsynth {
namespace detail {

// Iterative Tarjan over a plain adjacency list; components come out in
// reverse topological order. Deterministic given the adjacency order.
inline std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adj) {
    int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    struct Frame {
        int v;
        std::size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.child < adj[f.v].size()) {
                int w = adj[f.v][f.child++];
                if (index[w] == -1) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    if (index[w] < low[f.v]) low[f.v] = index[w];
                }
            } else {
                int v = f.v;
                call.pop_back();
                if (!call.empty() && low[v] < low[call.back().v]) low[call.back().v] = low[v];
                if (low[v] == index[v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp.push_back(w);
                    } while (w != v);
                    components.push_back(std::move(comp));
                }
            }
        }
    }
    return components;
}

inline std::vector<std::vector<int>> adjacency(const Arena& a) {
    std::vector<std::vector<int>> adj(a.vertex_count());
    for (int v = 0; v < a.vertex_count(); ++v) adj[v] = a.next(v);
    return adj;
}

}  // namespace detail

// Vertices with a path (possibly empty) to `targets` along stored edges.
inline VertexSet backward_reach(const Arena& a, const VertexSet& targets) {
    int n = a.vertex_count();
    std::vector<std::vector<int>> pred(n);
    for (int v = 0; v < n; ++v)
        for (const Edge& e : a.edges[v]) pred[e.target].push_back(v);
    VertexSet seen = targets;
    std::vector<int> queue;
    for (auto v = targets.find_first(); v != VertexSet::npos; v = targets.find_next(v))
        queue.push_back(static_cast<int>(v));
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (int u : pred[v])
            if (!seen.test(u)) {
                seen.set(u);
                queue.push_back(u);
            }
    }
    return seen;
}

inline VertexSet forward_reach(const Arena& a, int from) {
    VertexSet seen(a.vertex_count());
    std::vector<int> queue{from};
    seen.set(from);
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (const Edge& e : a.edges[v])
            if (!seen.test(e.target)) {
                seen.set(e.target);
                queue.push_back(e.target);
            }
    }
    return seen;
}

// Bottom SCCs: strongly connected components no edge leaves.
inline std::vector<VertexSet> bottom_sccs(const SMG& g) {
    const Arena& a = g.arena;
    auto comps = detail::strongly_connected_components(detail::adjacency(a));
    std::vector<VertexSet> out;
    for (const auto& comp : comps) {
        VertexSet c(a.vertex_count());
        for (int v : comp) c.set(v);
        bool closed = true;
        for (int v : comp)
            for (const Edge& e : a.edges[v])
                if (!c.test(e.target)) closed = false;
        if (closed) out.push_back(std::move(c));
    }
    return out;
}

namespace detail {

// The end-component conditions for a candidate set E, with `is_free` marking
// the players whose vertices may choose any successor: (i) E strongly
// connected, (ii) a free vertex keeps some successor in E, (iii) any other
// vertex has all successors in E.
inline bool is_end_component(const Arena& a, const std::function<bool(PlayerId)>& is_free,
                             const VertexSet& candidate) {
    if (!candidate.any()) return false;
    for (auto vv = candidate.find_first(); vv != VertexSet::npos; vv = candidate.find_next(vv)) {
        int v = static_cast<int>(vv);
        bool free_vertex = a.owner[v] != kNature && is_free(a.owner[v]);
        bool some_inside = false;
        for (const Edge& e : a.edges[v]) {
            if (candidate.test(e.target))
                some_inside = true;
            else if (!free_vertex)
                return false;
        }
        if (!some_inside) return false;
    }
    // strong connectivity within the candidate (free vertices may use any of
    // their internal edges to get around)
    int start = static_cast<int>(candidate.find_first());
    VertexSet fwd(a.vertex_count()), bwd(a.vertex_count());
    std::vector<int> queue{start};
    fwd.set(start);
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (const Edge& e : a.edges[v])
            if (candidate.test(e.target) && !fwd.test(e.target)) {
                fwd.set(e.target);
                queue.push_back(e.target);
            }
    }
    if (fwd != candidate) return false;
    std::vector<std::vector<int>> pred(a.vertex_count());
    for (auto vv = candidate.find_first(); vv != VertexSet::npos; vv = candidate.find_next(vv))
        for (const Edge& e : a.edges[vv])
            if (candidate.test(e.target)) pred[e.target].push_back(static_cast<int>(vv));
    queue.push_back(start);
    bwd.set(start);
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (int u : pred[v])
            if (!bwd.test(u)) {
                bwd.set(u);
                queue.push_back(u);
            }
    }
    return bwd == candidate;
}

// Exhaustive subset scan. Muller winning sets are not upward or downward
// closed, so no maximal-EC shortcut applies; desk-scale arenas keep this
// affordable.
inline std::vector<VertexSet> end_components_impl(const SMG& g,
                                                  const std::function<bool(PlayerId)>& is_free,
                                                  int max_vertices) {
    const Arena& a = g.arena;
    int n = a.vertex_count();
    if (n > max_vertices || n > 62)
        throw std::runtime_error("end_components: arena has " + std::to_string(n) +
                                 " vertices, exhaustive bound is " +
                                 std::to_string(std::min(max_vertices, 62)));
    std::vector<VertexSet> out;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        VertexSet candidate(n);
        for (int v = 0; v < n; ++v)
            if (mask & (std::uint64_t{1} << v)) candidate.set(v);
        if (is_end_component(a, is_free, candidate)) out.push_back(std::move(candidate));
    }
    return out;
}

}  // namespace detail

inline std::vector<VertexSet> end_components(const SMG& g, PlayerId free_player,
                                             int max_vertices = Bounds{}.max_ec_vertices) {
    return detail::end_components_impl(
        g, [free_player](PlayerId p) { return p == free_player; }, max_vertices);
}

// End components when one coalition controls every player vertex.
inline std::vector<VertexSet> coalition_end_components(
    const SMG& g, int max_vertices = Bounds{}.max_ec_vertices) {
    return detail::end_components_impl(g, [](PlayerId) { return true; }, max_vertices);
}

// The sets behind the z- and r-clauses for player i under support union S:
// winning_bsccs    — union of bottom SCCs of A^S satisfying O_i   (B)
// reach_winning    — vertices of A^S with a path into that union  (R)
// deviation_wins   — union of winning end components of A^{S-i}   (E)
// TR objectives shortcut through the target terminals: a target terminal is
// always both a winning singleton BSCC and a winning singleton EC, and no
// larger winning BSCC/EC exists because targets are absorbing.
struct ObjectiveSets {
    VertexSet winning_bsccs;
    VertexSet reach_winning;
    VertexSet deviation_wins;
};

inline ObjectiveSets compute_BRE(const SMG& g, const Support& s, PlayerId i,
                                 int max_ec_vertices = Bounds{}.max_ec_vertices) {
    if (i < 0 || i >= g.players()) throw std::invalid_argument("compute_BRE: bad player");
    const Objective& obj = g.objectives[i];
    ObjectiveSets r;
    SMG restricted = restrict_support(g, s);
    if (obj.kind == Objective::Kind::TerminalReach) {
        r.winning_bsccs = obj.targets;
    } else {
        r.winning_bsccs = g.arena.empty_set();
        for (const VertexSet& c : bottom_sccs(restricted))
            if (muller_eval(*obj.formula, g.arena, c)) r.winning_bsccs |= c;
    }
    r.reach_winning = backward_reach(restricted.arena, r.winning_bsccs);
    if (obj.kind == Objective::Kind::TerminalReach) {
        r.deviation_wins = obj.targets;
    } else {
        SMG dropped = restrict_support(g, s, i);
        r.deviation_wins = g.arena.empty_set();
        for (const VertexSet& ec : end_components(dropped, i, max_ec_vertices))
            if (muller_eval(*obj.formula, g.arena, ec)) r.deviation_wins |= ec;
    }
    return r;
}

// Almost-sure termination under every profile: each coalition end component
// is a terminal singleton, so no strategy combination can trap play in a
// non-terminal cycle forever with positive probability.
inline bool check_almost_sure_termination(const SMG& g,
                                          int max_vertices = Bounds{}.max_ec_vertices) {
    for (const VertexSet& ec : coalition_end_components(g, max_vertices)) {
        if (ec.count() != 1) return false;
        if (!g.arena.is_terminal(static_cast<int>(ec.find_first()))) return false;
    }
    return true;
}

}  // namespace rsynth
