#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "rsynth/arena.hpp"
#include "rsynth/graph.hpp"

namespace rsynth {

using ValueMap = std::vector<Rational>;  // indexed by vertex

struct MarkovChain {
    std::vector<DistRow> rows;  // row-stochastic, targets ascending
    int initial = 0;

    int size() const { return static_cast<int>(rows.size()); }
};

inline MarkovChain induce_chain(const SMG& g, const StationaryProfile& profile) {
    validate_profile(g, profile, "induce_chain");
    require_covered(g, profile, [](PlayerId) { return true; }, "induce_chain");
    MarkovChain c;
    c.initial = g.arena.initial;
    c.rows.resize(g.arena.vertex_count());
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (g.arena.owner[v] == kNature) {
            for (const Edge& e : g.arena.edges[v]) c.rows[v].emplace_back(e.target, *e.prob);
        } else {
            c.rows[v] = profile.rows[v];
        }
    }
    return c;
}

inline std::vector<VertexSet> chain_bottom_sccs(const MarkovChain& c) {
    std::vector<std::vector<int>> adj(c.rows.size());
    for (std::size_t v = 0; v < c.rows.size(); ++v)
        for (const auto& [t, p] : c.rows[v]) adj[v].push_back(t);
    auto comps = detail::strongly_connected_components(adj);
    std::vector<VertexSet> out;
    for (const auto& comp : comps) {
        VertexSet s(c.rows.size());
        for (int v : comp) s.set(v);
        bool closed = true;
        for (int v : comp)
            for (const auto& [t, p] : c.rows[v])
                if (!s.test(t)) closed = false;
        if (closed) out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

// Solves A x = b for a dense rational matrix by Gaussian elimination with
// first-nonzero pivoting. Exact; throws on a singular matrix.
inline std::vector<Rational> solve_linear(std::vector<std::vector<Rational>> a,
                                          std::vector<Rational> b) {
    int m = static_cast<int>(a.size());
    for (int col = 0; col < m; ++col) {
        int pivot = -1;
        for (int row = col; row < m; ++row)
            if (a[row][col] != 0) {
                pivot = row;
                break;
            }
        if (pivot < 0) throw std::logic_error("solve_linear: singular system");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int row = 0; row < m; ++row) {
            if (row == col || a[row][col] == 0) continue;
            Rational f = a[row][col] / a[col][col];
            for (int k = col; k < m; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::vector<Rational> x(m);
    for (int i = 0; i < m; ++i) x[i] = b[i] / a[i][i];
    return x;
}

}  // namespace detail

// Probability of ever entering `winning` from each vertex. Qualitative part
// first: value 1 inside `winning`, 0 where no path exists; the rest is the
// unique solution of x_v = sum P(v,w) x_w, which is nonsingular because every
// remaining vertex can also escape toward probability mass outside the
// transient part.
inline ValueMap chain_reach_values(const MarkovChain& c, const VertexSet& winning) {
    int n = c.size();
    Arena shadow;  // adjacency view for the reachability pass
    shadow.player_count = 1;
    shadow.names.resize(n);
    shadow.owner.assign(n, 0);
    shadow.edges.resize(n);
    for (int v = 0; v < n; ++v)
        for (const auto& [t, p] : c.rows[v]) shadow.edges[v].push_back(Edge{t, std::nullopt});
    VertexSet can_reach = backward_reach(shadow, winning);

    ValueMap value(n, Rational(0));
    for (auto v = winning.find_first(); v != VertexSet::npos; v = winning.find_next(v))
        value[v] = 1;

    std::vector<int> transient;  // can reach but not inside
    std::vector<int> column(n, -1);
    for (int v = 0; v < n; ++v)
        if (can_reach.test(v) && !winning.test(v)) {
            column[v] = static_cast<int>(transient.size());
            transient.push_back(v);
        }
    if (transient.empty()) return value;

    int m = static_cast<int>(transient.size());
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m, Rational(0)));
    std::vector<Rational> b(m, Rational(0));
    for (int row = 0; row < m; ++row) {
        int v = transient[row];
        a[row][row] += 1;
        for (const auto& [t, p] : c.rows[v]) {
            if (column[t] >= 0)
                a[row][column[t]] -= p;
            else
                b[row] += p * value[t];
        }
    }
    std::vector<Rational> x = detail::solve_linear(std::move(a), std::move(b));
    for (int row = 0; row < m; ++row) value[transient[row]] = x[row];
    return value;
}

// Winning bottom SCCs of the chain for player i's objective.
inline VertexSet chain_winning_bsccs(const SMG& g, const MarkovChain& c, int player) {
    VertexSet winning = g.arena.empty_set();
    for (const VertexSet& bscc : chain_bottom_sccs(c))
        if (objective_holds(g, player, bscc)) winning |= bscc;
    return winning;
}

struct PayoffResult {
    PayoffVector payoff;          // per player, at the initial vertex
    std::vector<ValueMap> values; // per player, per vertex
};

// Exact payoff of a fully resolved stationary profile. A play's limit set is
// almost surely a bottom SCC of the induced chain, so each player's payoff
// is the probability of reaching the union of her winning bottom SCCs.
inline PayoffResult payoff_profile(const SMG& g, const StationaryProfile& profile) {
    MarkovChain c = induce_chain(g, profile);
    PayoffResult out;
    for (int i = 0; i < g.players(); ++i) {
        ValueMap z = chain_reach_values(c, chain_winning_bsccs(g, c, i));
        out.payoff.push_back(z[c.initial]);
        out.values.push_back(std::move(z));
    }
    return out;
}

// Proposition-style EC-sure strategy: inside E, spread uniformly over the
// successors that stay in E; from any other owned vertex take the first
// edge. Once play enters E it stays (E is closed for the fixed players) and
// visits exactly E's vertices infinitely often.
inline StationaryStrategy ec_sure_strategy(const SMG& g, PlayerId player, const VertexSet& ec) {
    if (!detail::is_end_component(g.arena, [player](PlayerId p) { return p == player; }, ec))
        throw std::invalid_argument("ec_sure_strategy: " + vertex_list(g.arena, ec) +
                                    " is not an end component for player " +
                                    std::to_string(player));
    StationaryStrategy s;
    s.player = player;
    for (int v : vertices_of_player(g.arena, player)) {
        if (ec.test(v)) {
            std::vector<int> inside;
            for (const Edge& e : g.arena.edges[v])
                if (ec.test(e.target)) inside.push_back(e.target);
            DistRow row;
            for (int t : inside) row.emplace_back(t, Rational(1, inside.size()));
            s.rows[v] = std::move(row);
        } else {
            s.rows[v] = {{g.arena.edges[v][0].target, Rational(1)}};
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Monte-Carlo cross-check. Doubles and approximation live here only.

struct SimulationResult {
    std::vector<double> empirical;     // win frequency per player
    std::vector<std::uint64_t> visits; // total visit count per vertex
};

namespace detail {

class SplitMixEngine {
  public:
    explicit SplitMixEngine(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with 53-bit resolution; avoids distribution classes
    // whose output is implementation-defined
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

}  // namespace detail

inline SimulationResult simulate(const SMG& g, const StationaryProfile& profile, int runs,
                                 int horizon, std::uint64_t seed) {
    if (runs < 1 || horizon < 1) throw std::invalid_argument("simulate: runs and horizon >= 1");
    MarkovChain c = induce_chain(g, profile);
    int n = c.size();
    // cumulative distributions in double precision, one conversion per row
    std::vector<std::vector<double>> cumulative(n);
    for (int v = 0; v < n; ++v) {
        double acc = 0;
        for (const auto& [t, p] : c.rows[v]) {
            acc += static_cast<double>(numerator(p)) / static_cast<double>(denominator(p));
            cumulative[v].push_back(acc);
        }
        cumulative[v].back() = 1.0;
    }

    SimulationResult result;
    result.empirical.assign(g.players(), 0.0);
    result.visits.assign(n, 0);
    detail::SplitMixEngine rng(seed);

    std::vector<int> wins(g.players(), 0);
    for (int run = 0; run < runs; ++run) {
        VertexSet visited(n), second_half(n);
        int v = c.initial;
        for (int step = 0; step < horizon; ++step) {
            ++result.visits[v];
            visited.set(v);
            if (2 * step >= horizon) second_half.set(v);
            if (g.arena.is_terminal(v)) {
                // absorbing: account the remaining steps without sampling
                result.visits[v] += static_cast<std::uint64_t>(horizon - 1 - step);
                second_half.set(v);
                break;
            }
            double u = rng.next_unit();
            const auto& cum = cumulative[v];
            std::size_t k = 0;
            while (k + 1 < cum.size() && u >= cum[k]) ++k;
            v = c.rows[v][k].first;
        }
        for (int i = 0; i < g.players(); ++i) {
            const Objective& o = g.objectives[i];
            bool won = o.kind == Objective::Kind::TerminalReach
                           ? (o.targets & visited).any()
                           : muller_eval(*o.formula, g.arena, second_half);
            if (won) ++wins[i];
        }
    }
    for (int i = 0; i < g.players(); ++i)
        result.empirical[i] = static_cast<double>(wins[i]) / runs;
    return result;
}

}  // namespace rsynth
