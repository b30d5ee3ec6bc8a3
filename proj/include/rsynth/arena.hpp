#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "rsynth/rational.hpp"

namespace rsynth {

using PlayerId = int;
inline constexpr PlayerId kNature = -1;

using VertexSet = boost::dynamic_bitset<>;
using PayoffVector = std::vector<Rational>;

// A probability on an edge leaving a nature vertex; player edges carry none.
struct Edge {
    int target = -1;
    std::optional<Rational> prob;
};

struct Arena {
    // owner[v] is kNature or a player id in [0, player_count).
    int player_count = 0;
    std::vector<std::string> names;
    std::vector<PlayerId> owner;
    std::vector<std::vector<Edge>> edges;  // per vertex, sorted by target index
    int initial = 0;

    int vertex_count() const { return static_cast<int>(names.size()); }

    std::vector<int> next(int v) const {
        std::vector<int> out;
        out.reserve(edges[v].size());
        for (const Edge& e : edges[v]) out.push_back(e.target);
        return out;
    }

    bool has_edge(int v, int w) const {
        for (const Edge& e : edges[v])
            if (e.target == w) return true;
        return false;
    }

    // A terminal's only edge is the self loop.
    bool is_terminal(int v) const {
        return edges[v].size() == 1 && edges[v][0].target == v;
    }

    VertexSet terminals() const {
        VertexSet t(vertex_count());
        for (int v = 0; v < vertex_count(); ++v)
            if (is_terminal(v)) t.set(v);
        return t;
    }

    VertexSet empty_set() const { return VertexSet(vertex_count()); }
};

inline int find_vertex(const Arena& a, const std::string& name) {
    for (int v = 0; v < a.vertex_count(); ++v)
        if (a.names[v] == name) return v;
    return -1;
}

// Keeps each vertex's edge list sorted by target so enumeration order and the
// lowest-numbered-successor tie-break are deterministic.
inline void add_edge(Arena& a, int from, int to, std::optional<Rational> prob = std::nullopt) {
    auto& row = a.edges[from];
    Edge e{to, std::move(prob)};
    row.insert(std::upper_bound(row.begin(), row.end(), e,
                                [](const Edge& l, const Edge& r) { return l.target < r.target; }),
               std::move(e));
}

inline std::string vertex_list(const Arena& a, const VertexSet& s) {
    std::string out = "{";
    bool first = true;
    for (auto v = s.find_first(); v != VertexSet::npos; v = s.find_next(v)) {
        if (!first) out += ", ";
        out += a.names[v];
        first = false;
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// Objectives

// Muller condition: a Boolean formula over vertex names, evaluated on the set
// of vertices visited infinitely often. And/Or are n-ary; an empty And is
// true, an empty Or is false.
struct BoolExpr;
using BoolExprPtr = std::shared_ptr<const BoolExpr>;

struct BoolExpr {
    enum class Kind { Var, Not, And, Or };
    Kind kind = Kind::Var;
    std::string var;
    std::vector<BoolExprPtr> args;
};

inline BoolExprPtr bvar(std::string name) {
    auto e = std::make_shared<BoolExpr>();
    e->kind = BoolExpr::Kind::Var;
    e->var = std::move(name);
    return e;
}
inline BoolExprPtr bnot(BoolExprPtr a) {
    auto e = std::make_shared<BoolExpr>();
    e->kind = BoolExpr::Kind::Not;
    e->args = {std::move(a)};
    return e;
}
inline BoolExprPtr band(std::vector<BoolExprPtr> args) {
    if (args.size() == 1) return args[0];
    auto e = std::make_shared<BoolExpr>();
    e->kind = BoolExpr::Kind::And;
    e->args = std::move(args);
    return e;
}
inline BoolExprPtr bor(std::vector<BoolExprPtr> args) {
    if (args.size() == 1) return args[0];
    auto e = std::make_shared<BoolExpr>();
    e->kind = BoolExpr::Kind::Or;
    e->args = std::move(args);
    return e;
}

inline bool bool_expr_equal(const BoolExpr& a, const BoolExpr& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == BoolExpr::Kind::Var) return a.var == b.var;
    if (a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!bool_expr_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

inline void collect_vars(const BoolExpr& e, std::set<std::string>& out) {
    if (e.kind == BoolExpr::Kind::Var)
        out.insert(e.var);
    else
        for (const auto& a : e.args) collect_vars(*a, out);
}

inline bool muller_eval(const BoolExpr& e, const std::function<bool(const std::string&)>& truth) {
    switch (e.kind) {
        case BoolExpr::Kind::Var:
            return truth(e.var);
        case BoolExpr::Kind::Not:
            return !muller_eval(*e.args[0], truth);
        case BoolExpr::Kind::And:
            for (const auto& a : e.args)
                if (!muller_eval(*a, truth)) return false;
            return true;
        case BoolExpr::Kind::Or:
            for (const auto& a : e.args)
                if (muller_eval(*a, truth)) return true;
            return false;
    }
    throw std::logic_error("muller_eval: bad kind");
}

inline bool muller_eval(const BoolExpr& e, const std::set<std::string>& inf_set) {
    return muller_eval(e, [&](const std::string& n) { return inf_set.count(n) > 0; });
}

inline bool muller_eval(const BoolExpr& e, const Arena& a, const VertexSet& inf_set) {
    return muller_eval(e, [&](const std::string& n) {
        int v = find_vertex(a, n);
        if (v < 0) throw std::invalid_argument("muller_eval: unknown vertex '" + n + "'");
        return inf_set.test(v);
    });
}

struct Objective {
    enum class Kind { TerminalReach, Muller };
    Kind kind = Kind::TerminalReach;
    VertexSet targets;    // TerminalReach: a set of terminal vertices
    BoolExprPtr formula;  // Muller
};

struct SMG {
    Arena arena;
    std::vector<Objective> objectives;  // one per player, index = player id

    int players() const { return arena.player_count; }
};

// True iff player i's objective is met by a play whose long-run behaviour is
// captured by `inf_set` (for terminal reachability the set of vertices hit at
// all; both uses coincide on the sets this library feeds in, since targets
// are absorbing).
inline bool objective_holds(const SMG& g, int player, const VertexSet& inf_set) {
    const Objective& o = g.objectives.at(player);
    if (o.kind == Objective::Kind::TerminalReach) return (o.targets & inf_set).any();
    return muller_eval(*o.formula, g.arena, inf_set);
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate_arena(const SMG& g) {
    std::vector<std::string> issues;
    const Arena& a = g.arena;
    int n = a.vertex_count();
    auto complain = [&](const std::string& msg) { issues.push_back(msg); };

    if (a.player_count < 1) complain("arena declares no players");
    if (n == 0) {
        complain("arena has no vertices");
        return issues;
    }
    if (a.initial < 0 || a.initial >= n) complain("initial vertex index out of range");

    for (int v = 0; v < n; ++v) {
        const std::string& name = a.names[v];
        if (a.owner[v] != kNature && (a.owner[v] < 0 || a.owner[v] >= a.player_count))
            complain("vertex '" + name + "': owner out of range");
        if (a.edges[v].empty()) {
            complain("vertex '" + name + "': no outgoing edge");
            continue;
        }
        std::set<int> seen;
        for (const Edge& e : a.edges[v]) {
            if (e.target < 0 || e.target >= n) {
                complain("vertex '" + name + "': edge target out of range");
                continue;
            }
            if (!seen.insert(e.target).second)
                complain("vertex '" + name + "': duplicate edge to '" + a.names[e.target] + "'");
        }
        if (a.owner[v] == kNature) {
            Rational sum = 0;
            bool all_probs = true;
            for (const Edge& e : a.edges[v]) {
                if (!e.prob) {
                    all_probs = false;
                    complain("vertex '" + name + "': nature edge without probability");
                    continue;
                }
                if (*e.prob <= 0 || *e.prob > 1)
                    complain("vertex '" + name + "': edge probability " + to_string(*e.prob) +
                             " outside (0,1]");
                sum += *e.prob;
            }
            if (all_probs && sum != 1)
                complain("vertex '" + name + "': distribution sums to " + to_string(sum));
        } else {
            for (const Edge& e : a.edges[v])
                if (e.prob)
                    complain("vertex '" + name + "': player edge carries a probability");
        }
    }

    if (static_cast<int>(g.objectives.size()) != a.player_count)
        complain("expected " + std::to_string(a.player_count) + " objectives, found " +
                 std::to_string(g.objectives.size()));
    for (std::size_t i = 0; i < g.objectives.size(); ++i) {
        const Objective& o = g.objectives[i];
        std::string who = "objective of player " + std::to_string(i);
        if (o.kind == Objective::Kind::TerminalReach) {
            if (o.targets.size() != static_cast<std::size_t>(n)) {
                complain(who + ": target set sized for a different arena");
                continue;
            }
            for (auto v = o.targets.find_first(); v != VertexSet::npos; v = o.targets.find_next(v))
                if (!a.is_terminal(static_cast<int>(v)))
                    complain(who + ": target '" + a.names[v] + "' is not a terminal vertex");
        } else {
            if (!o.formula) {
                complain(who + ": missing Muller formula");
                continue;
            }
            std::set<std::string> vars;
            collect_vars(*o.formula, vars);
            for (const auto& name : vars)
                if (find_vertex(a, name) < 0)
                    complain(who + ": formula names unknown vertex '" + name + "'");
        }
    }
    return issues;
}

inline void require_valid(const SMG& g, const std::string& context) {
    auto issues = validate_arena(g);
    if (!issues.empty())
        throw std::invalid_argument(context + ": invalid game: " + issues.front());
}

// ---------------------------------------------------------------------------
// Supports and profiles

// A support assigns each covered player vertex a nonempty set of kept
// successors. Vertices with an empty row are simply not constrained.
struct Support {
    std::vector<std::vector<int>> chosen;  // ascending target indices

    Support() = default;
    explicit Support(int vertex_count) : chosen(vertex_count) {}

    bool covers(int v) const { return !chosen[v].empty(); }

    bool allows(int v, int w) const {
        const auto& row = chosen[v];
        return std::binary_search(row.begin(), row.end(), w);
    }

    // Union of two supports with disjoint covered domains.
    Support united(const Support& other) const {
        Support out = *this;
        for (std::size_t v = 0; v < other.chosen.size(); ++v) {
            if (other.chosen[v].empty()) continue;
            if (!out.chosen[v].empty())
                throw std::invalid_argument("Support::united: overlapping domains");
            out.chosen[v] = other.chosen[v];
        }
        return out;
    }
};

enum class SupportScope { System, Environment, All };

inline bool scope_includes(SupportScope scope, PlayerId owner) {
    if (owner == kNature) return false;
    switch (scope) {
        case SupportScope::System: return owner == 0;
        case SupportScope::Environment: return owner >= 1;
        case SupportScope::All: return true;
    }
    return false;
}

inline std::vector<int> vertices_in_scope(const Arena& a, SupportScope scope) {
    std::vector<int> out;
    for (int v = 0; v < a.vertex_count(); ++v)
        if (scope_includes(scope, a.owner[v])) out.push_back(v);
    return out;
}

inline std::vector<int> vertices_of_player(const Arena& a, PlayerId p) {
    std::vector<int> out;
    for (int v = 0; v < a.vertex_count(); ++v)
        if (a.owner[v] == p) out.push_back(v);
    return out;
}

// Full support: every covered vertex keeps all of its successors.
inline Support full_support(const SMG& g, SupportScope scope) {
    Support s(g.arena.vertex_count());
    for (int v : vertices_in_scope(g.arena, scope)) s.chosen[v] = g.arena.next(v);
    return s;
}

// Streams every support of the given scope in a fixed order: per vertex the
// nonempty subsets of its successor list by ascending bitmask, vertices
// combined odometer-style with the highest-indexed vertex ticking fastest.
class SupportStream {
  public:
    SupportStream(const SMG& g, SupportScope scope)
        : game_(&g), vertices_(vertices_in_scope(g.arena, scope)) {
        for (int v : vertices_) {
            if (g.arena.edges[v].size() > 20)
                throw std::runtime_error("SupportStream: vertex '" + g.arena.names[v] +
                                         "' has too many successors to enumerate subsets");
            mask_.push_back(1);
        }
    }

    BigInt total_count() const {
        BigInt total = 1;
        for (int v : vertices_)
            total *= (BigInt(1) << game_->arena.edges[v].size()) - 1;
        return total;
    }

    std::optional<Support> next() {
        if (done_) return std::nullopt;
        Support s(game_->arena.vertex_count());
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            int v = vertices_[i];
            const auto& row = game_->arena.edges[v];
            for (std::size_t j = 0; j < row.size(); ++j)
                if (mask_[i] & (std::uint32_t{1} << j)) s.chosen[v].push_back(row[j].target);
        }
        // advance the odometer
        done_ = true;
        for (std::size_t i = vertices_.size(); i-- > 0;) {
            std::uint32_t limit = (std::uint32_t{1} << game_->arena.edges[vertices_[i]].size()) - 1;
            if (mask_[i] < limit) {
                ++mask_[i];
                for (std::size_t j = i + 1; j < vertices_.size(); ++j) mask_[j] = 1;
                done_ = false;
                break;
            }
        }
        return s;
    }

  private:
    const SMG* game_;
    std::vector<int> vertices_;
    std::vector<std::uint32_t> mask_;
    bool done_ = false;
};

// Pure memoryless choices, one successor per covered vertex; -1 = uncovered.
struct PositionalProfile {
    std::vector<int> choice;

    PositionalProfile() = default;
    explicit PositionalProfile(int vertex_count) : choice(vertex_count, -1) {}

    bool covers(int v) const { return choice[v] >= 0; }
};

using DistRow = std::vector<std::pair<int, Rational>>;  // ascending targets, positive probs

// Randomized memoryless choices for any subset of player vertices.
struct StationaryProfile {
    std::vector<DistRow> rows;

    StationaryProfile() = default;
    explicit StationaryProfile(int vertex_count) : rows(vertex_count) {}

    bool covers(int v) const { return !rows[v].empty(); }

    void set_pure(int v, int target) { rows[v] = {{target, Rational(1)}}; }

    Rational prob(int v, int w) const {
        for (const auto& [t, p] : rows[v])
            if (t == w) return p;
        return Rational(0);
    }

    // Overlay with disjoint covered domains.
    StationaryProfile merged(const StationaryProfile& other) const {
        StationaryProfile out = *this;
        for (std::size_t v = 0; v < other.rows.size(); ++v) {
            if (other.rows[v].empty()) continue;
            if (!out.rows[v].empty())
                throw std::invalid_argument("StationaryProfile::merged: overlapping domains");
            out.rows[v] = other.rows[v];
        }
        return out;
    }

    Support support() const {
        Support s(static_cast<int>(rows.size()));
        for (std::size_t v = 0; v < rows.size(); ++v)
            for (const auto& [t, p] : rows[v]) s.chosen[v].push_back(t);
        return s;
    }
};

inline StationaryProfile to_stationary(const PositionalProfile& p) {
    StationaryProfile out(static_cast<int>(p.choice.size()));
    for (std::size_t v = 0; v < p.choice.size(); ++v)
        if (p.choice[v] >= 0) out.set_pure(static_cast<int>(v), p.choice[v]);
    return out;
}

// Checks each covered row: targets are real successors, probabilities
// positive and summing to one. Throws on violation.
inline void validate_profile(const SMG& g, const StationaryProfile& p, const std::string& who) {
    if (p.rows.size() != static_cast<std::size_t>(g.arena.vertex_count()))
        throw std::invalid_argument(who + ": profile sized for a different arena");
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (!p.covers(v)) continue;
        if (g.arena.owner[v] == kNature)
            throw std::invalid_argument(who + ": profile covers nature vertex '" +
                                        g.arena.names[v] + "'");
        Rational sum = 0;
        for (const auto& [t, prob] : p.rows[v]) {
            if (!g.arena.has_edge(v, t))
                throw std::invalid_argument(who + ": strategy at '" + g.arena.names[v] +
                                            "' uses a missing edge to '" + g.arena.names[t] + "'");
            if (prob <= 0)
                throw std::invalid_argument(who + ": strategy at '" + g.arena.names[v] +
                                            "' has a non-positive probability");
            sum += prob;
        }
        if (sum != 1)
            throw std::invalid_argument(who + ": strategy at '" + g.arena.names[v] +
                                        "' sums to " + to_string(sum));
    }
}

// Requires the profile to cover every vertex owned by a player for which
// `needs` holds; used to reject partial profiles early with a clear name.
inline void require_covered(const SMG& g, const StationaryProfile& p,
                            const std::function<bool(PlayerId)>& needs, const std::string& who) {
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (g.arena.owner[v] != kNature && needs(g.arena.owner[v]) && !p.covers(v))
            throw std::invalid_argument(who + ": profile missing a choice at '" +
                                        g.arena.names[v] + "'");
}

// ---------------------------------------------------------------------------
// Strategy objects (for certificates and witnesses)

struct PositionalStrategy {
    PlayerId player = 0;
    std::map<int, int> choice;  // vertex -> successor
};

struct StationaryStrategy {
    PlayerId player = 0;
    std::map<int, DistRow> rows;  // vertex -> distribution
};

struct PureTMemoryStrategy {
    PlayerId player = 0;
    int memory = 0;  // window length t
    // (recent-history suffix, current vertex) -> successor; histories use
    // vertex indices of the original arena, most recent last.
    std::map<std::pair<std::vector<int>, int>, int> choice;
};

using StrategyObject = std::variant<PositionalStrategy, StationaryStrategy, PureTMemoryStrategy>;

inline StationaryProfile profile_of(const SMG& g, const StationaryStrategy& s) {
    StationaryProfile p(g.arena.vertex_count());
    for (const auto& [v, row] : s.rows) p.rows[v] = row;
    return p;
}

inline StationaryProfile profile_of(const SMG& g, const PositionalStrategy& s) {
    StationaryProfile p(g.arena.vertex_count());
    for (const auto& [v, t] : s.choice) p.set_pure(v, t);
    return p;
}

// ---------------------------------------------------------------------------
// Subarena constructions

// Drops the player edges a support rules out. Covered vertices keep exactly
// the chosen successors; uncovered vertices and nature are untouched, as are
// all vertices of `unrestricted_player` (used for best-response analyses
// where one player is free to deviate).
inline SMG restrict_support(const SMG& g, const Support& s,
                            std::optional<PlayerId> unrestricted_player = std::nullopt) {
    if (s.chosen.size() != static_cast<std::size_t>(g.arena.vertex_count()))
        throw std::invalid_argument("restrict_support: support sized for a different arena");
    SMG out = g;
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        PlayerId o = g.arena.owner[v];
        if (o == kNature || !s.covers(v)) continue;
        if (unrestricted_player && o == *unrestricted_player) continue;
        std::vector<Edge> kept;
        for (const Edge& e : g.arena.edges[v])
            if (s.allows(v, e.target)) kept.push_back(e);
        if (kept.size() != s.chosen[v].size())
            throw std::invalid_argument("restrict_support: support at '" + g.arena.names[v] +
                                        "' names a missing edge");
        out.arena.edges[v] = std::move(kept);
    }
    return out;
}

// Fixes a system support together with a positional environment profile:
// the subarena where the system may still mix over its support while every
// environment player is pinned to one choice.
inline SMG fix_positional(const SMG& g, const Support& system_support,
                          const PositionalProfile& env) {
    Support merged = system_support;
    for (int v : vertices_in_scope(g.arena, SupportScope::Environment)) {
        if (!env.covers(v))
            throw std::invalid_argument("fix_positional: environment profile missing a choice at '" +
                                        g.arena.names[v] + "'");
        if (!g.arena.has_edge(v, env.choice[v]))
            throw std::invalid_argument("fix_positional: environment choice at '" +
                                        g.arena.names[v] + "' uses a missing edge");
        merged.chosen[v] = {env.choice[v]};
    }
    return restrict_support(g, merged);
}

// Replaces every vertex covered by `fixed` with a nature vertex carrying the
// strategy's distribution. The result is a smaller game in which only the
// remaining players make choices.
inline SMG fold_to_nature(const SMG& g, const StationaryProfile& fixed) {
    validate_profile(g, fixed, "fold_to_nature");
    SMG out = g;
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (!fixed.covers(v)) continue;
        out.arena.owner[v] = kNature;
        std::vector<Edge> row;
        for (const auto& [t, p] : fixed.rows[v]) row.push_back(Edge{t, p});
        out.arena.edges[v] = std::move(row);
    }
    return out;
}

// Streams every positional assignment over the given vertices (ascending
// index), choices per vertex in edge order, last vertex ticking fastest.
class PositionalProfileStream {
  public:
    PositionalProfileStream(const SMG& g, std::vector<int> vertices)
        : game_(&g), vertices_(std::move(vertices)), pick_(vertices_.size(), 0) {}

    BigInt total_count() const {
        BigInt total = 1;
        for (int v : vertices_) total *= game_->arena.edges[v].size();
        return total;
    }

    std::optional<PositionalProfile> next() {
        if (done_) return std::nullopt;
        PositionalProfile p(game_->arena.vertex_count());
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            p.choice[vertices_[i]] = game_->arena.edges[vertices_[i]][pick_[i]].target;
        done_ = true;
        for (std::size_t i = vertices_.size(); i-- > 0;) {
            if (pick_[i] + 1 < game_->arena.edges[vertices_[i]].size()) {
                ++pick_[i];
                for (std::size_t j = i + 1; j < vertices_.size(); ++j) pick_[j] = 0;
                done_ = false;
                break;
            }
        }
        return p;
    }

  private:
    const SMG* game_;
    std::vector<int> vertices_;
    std::vector<std::size_t> pick_;
    bool done_ = false;
};

// ---------------------------------------------------------------------------
// Enumeration guards

struct Bounds {
    std::uint64_t max_profiles = 1000000;   // positional profile enumerations
    int max_ec_vertices = 16;               // exhaustive end-component search
    std::uint64_t max_unfold_vertices = 50000;
    std::uint64_t max_emit_sentences = 4096;

    static Bounds from_env() {
        Bounds b;
        auto read = [](const char* name, std::uint64_t& slot) {
            if (const char* s = std::getenv(name)) slot = std::strtoull(s, nullptr, 10);
        };
        read("RSYNTH_MAX_PROFILES", b.max_profiles);
        read("RSYNTH_MAX_UNFOLD_VERTICES", b.max_unfold_vertices);
        read("RSYNTH_MAX_EMIT_SENTENCES", b.max_emit_sentences);
        if (const char* s = std::getenv("RSYNTH_MAX_EC_VERTICES"))
            b.max_ec_vertices = std::atoi(s);
        return b;
    }
};

inline void guard_count(const BigInt& count, std::uint64_t bound, const std::string& what) {
    if (count > bound)
        throw std::runtime_error(what + ": refusing to enumerate " + count.str() +
                                 " candidates (bound " + std::to_string(bound) + ")");
}

}  // namespace rsynth
