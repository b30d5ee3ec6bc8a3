#pragma once

#include <deque>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsynth/arena.hpp"
#include "rsynth/graph.hpp"

namespace rsynth {

// One vertex of the t-memory unfolding: the window of up to t previously
// visited vertices plus the current vertex, both as indices into the
// original arena.
struct UnfoldedVertex {
    std::vector<int> history;
    int current = 0;
};

struct UnfoldResult {
    SMG game;
    std::vector<UnfoldedVertex> copies;  // indexed by unfolded vertex
};

namespace detail {

inline std::string unfold_name(const Arena& a, const UnfoldedVertex& u) {
    std::string out;
    for (int v : u.history) out += a.names[v] + "__";
    return out + a.names[u.current];
}

}  // namespace detail

// Builds the reachable part of the t-window unfolding. From state (x, v) an
// edge v -> w leads to (suffix_t(x.v), w), so histories never exceed t. At
// t = 0 this is the identity on the reachable subarena, original names kept.
// Terminal-reach targets become the absorbing copies of the targets (every
// transient copy of a terminal flows into its absorbing copy surely, so the
// payoff is unchanged and targets stay terminal). Muller variables become
// the disjunction of the copies of that vertex, skipping copies without
// incoming edges since those can never repeat on a play.
//
// `full` switches to the audit construction with every history sequence of
// length <= t, feasible or not; unreachable copies cannot carry plays, so
// both constructions agree on payoffs and equilibria.
inline UnfoldResult unfold_t_memory(const SMG& g, int t, const Bounds& bounds = {},
                                    bool full = false) {
    if (t < 0) throw std::invalid_argument("unfold_t_memory: negative memory bound");
    const Arena& a = g.arena;

    UnfoldResult res;
    std::vector<UnfoldedVertex>& copies = res.copies;
    std::map<std::pair<std::vector<int>, int>, int> index;

    auto intern = [&](UnfoldedVertex u) {
        auto key = std::make_pair(u.history, u.current);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(copies.size());
        if (static_cast<std::uint64_t>(id) >= bounds.max_unfold_vertices)
            throw std::runtime_error("unfold_t_memory: unfolding exceeds " +
                                     std::to_string(bounds.max_unfold_vertices) +
                                     " vertices (RSYNTH_MAX_UNFOLD_VERTICES)");
        index.emplace(std::move(key), id);
        copies.push_back(std::move(u));
        return id;
    };

    std::deque<int> queue;
    int start;
    if (full) {
        // seed histories by length, then lexicographically, then current
        std::vector<std::vector<int>> hists{{}};
        for (std::size_t lo = 0, len = 0; static_cast<int>(len) < t; ++len) {
            std::size_t hi = hists.size();
            for (std::size_t h = lo; h < hi; ++h)
                for (int v = 0; v < a.vertex_count(); ++v) {
                    std::vector<int> ext = hists[h];
                    ext.push_back(v);
                    hists.push_back(std::move(ext));
                }
            lo = hi;
        }
        start = -1;
        for (const auto& h : hists)
            for (int v = 0; v < a.vertex_count(); ++v) {
                int id = intern({h, v});
                if (h.empty() && v == a.initial) start = id;
                queue.push_back(id);
            }
    } else {
        start = intern({{}, a.initial});
        queue.push_back(start);
    }

    std::vector<std::vector<Edge>> rows;
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        // intern() may grow `copies`; take the state by value first
        UnfoldedVertex u = copies[id];
        std::vector<int> next_hist = u.history;
        next_hist.push_back(u.current);
        if (static_cast<int>(next_hist.size()) > t)
            next_hist.erase(next_hist.begin(), next_hist.end() - t);
        std::vector<Edge> row;
        for (const Edge& e : a.edges[u.current]) {
            std::size_t before = copies.size();
            int w = intern({next_hist, e.target});
            if (copies.size() > before) queue.push_back(w);
            row.push_back(Edge{w, e.prob});
        }
        std::sort(row.begin(), row.end(),
                  [](const Edge& x, const Edge& y) { return x.target < y.target; });
        if (static_cast<int>(rows.size()) <= id) rows.resize(id + 1);
        rows[id] = std::move(row);
    }

    Arena& ua = res.game.arena;
    ua.player_count = a.player_count;
    ua.initial = start;
    ua.edges = std::move(rows);
    ua.owner.reserve(copies.size());
    ua.names.reserve(copies.size());
    std::set<std::string> used;
    for (const UnfoldedVertex& u : copies) {
        ua.owner.push_back(a.owner[u.current]);
        std::string name = detail::unfold_name(a, u);
        while (used.count(name)) name += "_u" + std::to_string(ua.names.size());
        used.insert(name);
        ua.names.push_back(std::move(name));
    }

    std::vector<int> indegree(copies.size(), 0);
    for (const auto& row : ua.edges)
        for (const Edge& e : row) ++indegree[e.target];

    // copies of each original vertex, in discovery order
    std::vector<std::vector<int>> copies_of(a.vertex_count());
    for (std::size_t i = 0; i < copies.size(); ++i)
        copies_of[copies[i].current].push_back(static_cast<int>(i));

    auto rewrite = [&](const BoolExprPtr& e) {
        auto go = [&](auto&& self, const BoolExpr& node) -> BoolExprPtr {
            switch (node.kind) {
                case BoolExpr::Kind::Var: {
                    int orig = find_vertex(a, node.var);
                    if (orig < 0)
                        throw std::invalid_argument("unfold_t_memory: unknown vertex " + node.var);
                    std::vector<BoolExprPtr> parts;
                    for (int c : copies_of[orig])
                        if (indegree[c] > 0) parts.push_back(bvar(ua.names[c]));
                    return bor(std::move(parts));
                }
                case BoolExpr::Kind::Not:
                    return bnot(self(self, *node.args[0]));
                case BoolExpr::Kind::And:
                case BoolExpr::Kind::Or: {
                    std::vector<BoolExprPtr> parts;
                    for (const auto& arg : node.args) parts.push_back(self(self, *arg));
                    return node.kind == BoolExpr::Kind::And ? band(std::move(parts))
                                                            : bor(std::move(parts));
                }
            }
            throw std::logic_error("unfold_t_memory: bad formula node");
        };
        return go(go, *e);
    };

    for (const Objective& obj : g.objectives) {
        Objective out;
        out.kind = obj.kind;
        if (obj.kind == Objective::Kind::TerminalReach) {
            out.targets = ua.empty_set();
            for (int c = 0; c < static_cast<int>(copies.size()); ++c)
                if (obj.targets.test(copies[c].current) && ua.is_terminal(c))
                    out.targets.set(c);
        } else {
            out.formula = rewrite(obj.formula);
        }
        res.game.objectives.push_back(std::move(out));
    }
    return res;
}

// Complement construction behind the reduction from CRSP to the strict
// variant of NCRSP: a fresh system player 0 with no vertices and the
// complemented objective of the old system player; every original player
// shifts up by one. Pay_0' + Pay_1 = 1 on every play, which needs
// almost-sure termination when the old objective is terminal reach.
inline SMG crsp_to_ncrspgt(const SMG& g, int max_ec_vertices = Bounds{}.max_ec_vertices) {
    const Objective& o0 = g.objectives.at(0);
    SMG out;
    out.arena = g.arena;
    out.arena.player_count = g.arena.player_count + 1;
    for (int& o : out.arena.owner)
        if (o != kNature) ++o;

    Objective adversary;
    if (o0.kind == Objective::Kind::Muller) {
        adversary.kind = Objective::Kind::Muller;
        adversary.formula = bnot(o0.formula);
    } else {
        if (!check_almost_sure_termination(g, max_ec_vertices))
            throw std::runtime_error(
                "crsp_to_ncrspgt: terminal-reach complement needs almost-sure termination "
                "(some coalition end component is not a terminal)");
        adversary.kind = Objective::Kind::TerminalReach;
        adversary.targets = g.arena.terminals();
        adversary.targets -= o0.targets;
    }
    out.objectives.push_back(std::move(adversary));
    for (const Objective& obj : g.objectives) out.objectives.push_back(obj);
    return out;
}

}  // namespace rsynth
