#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rsynth/arena.hpp"
#include "rsynth/best_response.hpp"
#include "rsynth/chain.hpp"
#include "rsynth/equilibrium.hpp"
#include "rsynth/formula.hpp"
#include "rsynth/graph.hpp"
#include "rsynth/transforms.hpp"

namespace rsynth {

enum class Answer { Yes, No, Unknown };

inline const char* to_string(Answer a) {
    switch (a) {
        case Answer::Yes: return "yes";
        case Answer::No: return "no";
        case Answer::Unknown: return "unknown";
    }
    return "unknown";
}

// NCRSP_GT is the strict-threshold variant (Pay_0 > mu), used by the
// cooperative reduction; the command line exposes ncrsp and crsp.
enum class Problem { NCRSP, CRSP, NCRSP_GT };

struct ProfileRecord {
    std::size_t index = 0;                       // rank in enumeration order
    PositionalProfile profile;                   // environment profile (full profile for CRSP)
    PayoffVector payoff;
    bool zero_fixed_ne = false;                  // equilibrium among the checked deviators
    std::optional<DeviationWitness> refutation;  // set when some deviation is profitable
};

struct CandidateFailure {
    PositionalProfile system;  // rejected system candidate
    ProfileRecord failure;     // its 0-fixed equilibrium completion with Pay_0 below threshold
};

struct Verdict {
    Answer answer = Answer::Unknown;
    std::optional<StationaryProfile> system_profile;  // witnessing sigma_0 (full profile for CRSP)
    std::vector<ProfileRecord> table;                 // per-profile certificate
    std::optional<std::size_t> failing_index;         // table row establishing a `no`
    std::vector<CandidateFailure> rejected;           // NCRSP `no`: one failure per candidate
    std::optional<PureTMemoryStrategy> t_memory;      // solve_t_memory witness
    std::string note;
};

namespace detail {

struct EnvSweep {
    bool ok = true;
    std::optional<std::size_t> failing;
    std::vector<ProfileRecord> table;
};

// Enumerates every environment positional completion of a fixed system
// strategy and decides 0NE (positional deviation class) for each, exactly.
inline EnvSweep sweep_environment(const SMG& g, const StationaryProfile& sigma0,
                                  const Rational& mu, bool strict, const Bounds& bounds) {
    PositionalProfileStream stream(g, vertices_in_scope(g.arena, SupportScope::Environment));
    guard_count(stream.total_count(), bounds.max_profiles, "environment enumeration");
    EnvSweep out;
    std::size_t idx = 0;
    while (auto p = stream.next()) {
        StationaryProfile full = sigma0.merged(to_stationary(*p));
        EquilibriumVerdict eq = check_equilibrium(g, full, true, DeviationClass::Positional, bounds);
        bool meets = strict ? eq.payoff[0] > mu : eq.payoff[0] >= mu;
        if (eq.equilibrium && !meets && out.ok) {
            out.ok = false;
            out.failing = idx;
        }
        out.table.push_back(
            ProfileRecord{idx, std::move(*p), std::move(eq.payoff), eq.equilibrium,
                          std::move(eq.witness)});
        ++idx;
    }
    return out;
}

inline void require_system_candidate(const SMG& g, const StationaryProfile& sigma0,
                                     const std::string& who) {
    validate_profile(g, sigma0, who);
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (sigma0.covers(v) && g.arena.owner[v] != 0)
            throw std::invalid_argument(who + ": candidate covers vertex '" + g.arena.names[v] +
                                        "' not owned by player 0");
    require_covered(g, sigma0, [](PlayerId p) { return p == 0; }, who);
}

}  // namespace detail

// Stationary-Positional-NCRSP for one concrete system candidate: fold the
// candidate in, sweep all environment positional profiles, and require
// Pay_0 >= mu at every 0-fixed equilibrium. The full table is the
// certificate either way.
inline Verdict verify_stationary_candidate(const SMG& g, const StationaryProfile& sigma0,
                                           const Rational& mu, const Bounds& bounds = {}) {
    detail::require_system_candidate(g, sigma0, "verify_stationary_candidate");
    detail::EnvSweep sweep = detail::sweep_environment(g, sigma0, mu, false, bounds);
    Verdict v;
    v.answer = sweep.ok ? Answer::Yes : Answer::No;
    v.system_profile = sigma0;
    v.failing_index = sweep.failing;
    v.table = std::move(sweep.table);
    if (sweep.ok) {
        v.note = "all 0-fixed equilibria among " + std::to_string(v.table.size()) +
                 " environment profiles meet the threshold";
    } else {
        const ProfileRecord& bad = v.table[*sweep.failing];
        v.note = "environment profile #" + std::to_string(bad.index) +
                 " is a 0-fixed equilibrium with Pay_0 = " + to_string(bad.payoff[0]);
    }
    return v;
}

// Brute-force decision over positional strategies. NCRSP searches for a
// positional system strategy whose every 0-fixed-equilibrium environment
// completion meets the threshold; CRSP searches for one full equilibrium
// profile meeting it.
inline Verdict solve_positional(const SMG& g, const Rational& mu, Problem problem,
                                const Bounds& bounds = {}) {
    Verdict v;
    if (problem == Problem::CRSP) {
        PositionalProfileStream stream(g, vertices_in_scope(g.arena, SupportScope::All));
        guard_count(stream.total_count(), bounds.max_profiles, "solve_positional");
        v.answer = Answer::No;
        std::size_t idx = 0, equilibria = 0;
        while (auto p = stream.next()) {
            StationaryProfile full = to_stationary(*p);
            EquilibriumVerdict eq =
                check_equilibrium(g, full, false, DeviationClass::Positional, bounds);
            if (eq.equilibrium) {
                ++equilibria;
                ProfileRecord rec{idx, *p, eq.payoff, true, std::nullopt};
                bool meets = eq.payoff[0] >= mu;
                v.table.push_back(std::move(rec));
                if (meets) {
                    v.answer = Answer::Yes;
                    v.system_profile = full;
                    v.note = "equilibrium profile #" + std::to_string(idx) +
                             " has Pay_0 = " + to_string(eq.payoff[0]);
                    return v;
                }
            }
            ++idx;
        }
        v.note = "no equilibrium among " + std::to_string(idx) + " positional profiles (" +
                 std::to_string(equilibria) + " equilibria) meets the threshold";
        return v;
    }

    bool strict = problem == Problem::NCRSP_GT;
    std::vector<int> sys = vertices_of_player(g.arena, 0);
    PositionalProfileStream sys_stream(g, sys);
    PositionalProfileStream env_probe(g, vertices_in_scope(g.arena, SupportScope::Environment));
    guard_count(sys_stream.total_count() * env_probe.total_count(), bounds.max_profiles,
                "solve_positional");

    v.answer = Answer::No;
    std::size_t candidates = 0;
    while (auto s0 = sys_stream.next()) {
        ++candidates;
        StationaryProfile fixed = to_stationary(*s0);
        detail::EnvSweep sweep = detail::sweep_environment(g, fixed, mu, strict, bounds);
        if (sweep.ok) {
            v.answer = Answer::Yes;
            v.system_profile = fixed;
            v.table = std::move(sweep.table);
            v.note = "system candidate #" + std::to_string(candidates - 1) + " verified against " +
                     std::to_string(v.table.size()) + " environment profiles";
            return v;
        }
        v.rejected.push_back(CandidateFailure{*s0, std::move(sweep.table[*sweep.failing])});
    }
    v.note = "all " + std::to_string(candidates) + " positional system candidates rejected";
    return v;
}

// ---------------------------------------------------------------------------
// Grid search for Stationary-Positional-NCRSP (sound yes, incomplete)

namespace detail {

inline void compositions_rec(int total, int parts, std::vector<int>& acc,
                             std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        acc.push_back(total);
        out.push_back(acc);
        acc.pop_back();
        return;
    }
    for (int p = 1; total - p >= parts - 1; ++p) {
        acc.push_back(p);
        compositions_rec(total - p, parts - 1, acc, out);
        acc.pop_back();
    }
}

// Ordered splittings of `total` into `parts` positive integers,
// lexicographically ascending; empty when parts > total.
inline std::vector<std::vector<int>> compositions(int total, int parts) {
    std::vector<std::vector<int>> out;
    if (parts < 1 || parts > total) return out;
    std::vector<int> acc;
    compositions_rec(total, parts, acc, out);
    return out;
}

inline std::string profile_key(const StationaryProfile& p) {
    std::string key;
    for (std::size_t v = 0; v < p.rows.size(); ++v) {
        if (p.rows[v].empty()) continue;
        key += std::to_string(v) + ":";
        for (const auto& [t, q] : p.rows[v]) key += std::to_string(t) + "=" + to_string(q) + ",";
        key += ";";
    }
    return key;
}

}  // namespace detail

// All system candidates on the grid: for each denominator d = 1..bound and
// each support, the rows whose probabilities are positive multiples of 1/d.
// Duplicates across denominators (2/4 = 1/2) are kept once, first occurrence
// wins, so the enumeration order is reproducible.
inline std::vector<StationaryProfile> stationary_grid_candidates(const SMG& g,
                                                                 int denominator_bound,
                                                                 const Bounds& bounds = {}) {
    if (denominator_bound < 1)
        throw std::invalid_argument("stationary_grid_candidates: denominator bound must be >= 1");
    std::vector<StationaryProfile> out;
    std::set<std::string> seen;
    std::uint64_t generated = 0;
    for (int d = 1; d <= denominator_bound; ++d) {
        SupportStream supports(g, SupportScope::System);
        while (auto s = supports.next()) {
            std::vector<int> verts;
            for (int v = 0; v < g.arena.vertex_count(); ++v)
                if (s->covers(v)) verts.push_back(v);
            std::vector<std::vector<std::vector<int>>> comps;
            bool feasible = true;
            for (int v : verts) {
                auto c = detail::compositions(d, static_cast<int>(s->chosen[v].size()));
                if (c.empty()) {
                    feasible = false;
                    break;
                }
                comps.push_back(std::move(c));
            }
            if (!feasible) continue;
            std::vector<std::size_t> pick(verts.size(), 0);
            bool more = true;
            while (more) {
                StationaryProfile cand(g.arena.vertex_count());
                for (std::size_t j = 0; j < verts.size(); ++j) {
                    DistRow row;
                    const auto& targets = s->chosen[verts[j]];
                    const auto& parts = comps[j][pick[j]];
                    for (std::size_t k = 0; k < targets.size(); ++k)
                        row.emplace_back(targets[k], Rational(parts[k], d));
                    cand.rows[verts[j]] = std::move(row);
                }
                if (++generated > bounds.max_profiles)
                    throw std::runtime_error(
                        "stationary_grid_candidates: refusing to enumerate more than " +
                        std::to_string(bounds.max_profiles) + " grid candidates");
                if (seen.insert(detail::profile_key(cand)).second) out.push_back(std::move(cand));
                more = false;
                for (std::size_t j = verts.size(); j-- > 0;) {
                    if (++pick[j] < comps[j].size()) {
                        more = true;
                        break;
                    }
                    pick[j] = 0;
                }
            }
        }
    }
    return out;
}

// Grid mode: first verified candidate wins; exhaustion is only `unknown`
// because the grid cannot speak for off-grid system strategies.
inline Verdict solve_stationary_positional_grid(const SMG& g, const Rational& mu,
                                                int denominator_bound = 4,
                                                const Bounds& bounds = {}) {
    auto candidates = stationary_grid_candidates(g, denominator_bound, bounds);
    for (const StationaryProfile& cand : candidates) {
        Verdict v = verify_stationary_candidate(g, cand, mu, bounds);
        if (v.answer == Answer::Yes) return v;
    }
    Verdict v;
    v.answer = Answer::Unknown;
    v.note = "grid exhausted: none of " + std::to_string(candidates.size()) +
             " candidates verified (denominators up to " + std::to_string(denominator_bound) + ")";
    return v;
}

// ---------------------------------------------------------------------------
// Formula construction (variable families a_<src>_<dst>, z_<i>_<v>, r_<i>_<v>)

namespace detail {

inline std::string alpha_name(const Arena& a, int v, int w) {
    return "a_" + a.names[v] + "_" + a.names[w];
}
inline std::string z_name(const Arena& a, PlayerId i, int v) {
    return "z_" + std::to_string(i) + "_" + a.names[v];
}
inline std::string r_name(const Arena& a, PlayerId i, int v) {
    return "r_" + std::to_string(i) + "_" + a.names[v];
}
// emit mode: one z family per (player, environment profile) pair
inline std::string z_profile_name(const Arena& a, PlayerId i, int v, std::size_t n) {
    return z_name(a, i, v) + "_p" + std::to_string(n);
}

}  // namespace detail

// alpha variables for player 0 are consistent with support S_0: probabilities
// per vertex, positive exactly on the supported edges. One conjunct per
// system vertex.
inline FormulaPtr build_psi_sys(const SMG& g, const Support& s0) {
    std::vector<FormulaPtr> groups;
    for (int v : vertices_of_player(g.arena, 0)) {
        std::vector<FormulaPtr> atoms;
        std::vector<TermPtr> sum;
        for (const Edge& e : g.arena.edges[v]) {
            TermPtr a = t_var(detail::alpha_name(g.arena, v, e.target));
            atoms.push_back(f_cmp(Formula::CmpOp::Ge, a, t_const(0)));
            sum.push_back(a);
        }
        atoms.push_back(f_cmp(Formula::CmpOp::Eq, t_add(std::move(sum)), t_const(1)));
        for (const Edge& e : g.arena.edges[v]) {
            TermPtr a = t_var(detail::alpha_name(g.arena, v, e.target));
            atoms.push_back(s0.allows(v, e.target) ? f_cmp(Formula::CmpOp::Gt, a, t_const(0))
                                                   : f_cmp(Formula::CmpOp::Eq, a, t_const(0)));
        }
        groups.push_back(f_and(std::move(atoms)));
    }
    return f_and(std::move(groups));
}

// Environment players' alpha variables consistent with S_-0, plus the nature
// rows pinned to their fixed probabilities.
inline FormulaPtr build_psi_env(const SMG& g, const Support& senv) {
    std::vector<FormulaPtr> groups;
    for (int v : vertices_in_scope(g.arena, SupportScope::Environment)) {
        std::vector<FormulaPtr> atoms;
        std::vector<TermPtr> sum;
        for (const Edge& e : g.arena.edges[v]) {
            TermPtr a = t_var(detail::alpha_name(g.arena, v, e.target));
            atoms.push_back(f_cmp(Formula::CmpOp::Ge, a, t_const(0)));
            sum.push_back(a);
        }
        atoms.push_back(f_cmp(Formula::CmpOp::Eq, t_add(std::move(sum)), t_const(1)));
        for (const Edge& e : g.arena.edges[v]) {
            TermPtr a = t_var(detail::alpha_name(g.arena, v, e.target));
            atoms.push_back(senv.allows(v, e.target) ? f_cmp(Formula::CmpOp::Gt, a, t_const(0))
                                                     : f_cmp(Formula::CmpOp::Eq, a, t_const(0)));
        }
        groups.push_back(f_and(std::move(atoms)));
    }
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (g.arena.owner[v] != kNature) continue;
        std::vector<FormulaPtr> atoms;
        for (const Edge& e : g.arena.edges[v])
            atoms.push_back(f_cmp(Formula::CmpOp::Eq,
                                  t_var(detail::alpha_name(g.arena, v, e.target)),
                                  t_const(*e.prob)));
        groups.push_back(f_and(std::move(atoms)));
    }
    return f_and(std::move(groups));
}

// z^i is player i's payoff per start vertex under the support: exactly one
// clause per vertex — 1 on B, 0 off R, otherwise the harmonic equation over
// the original successors.
inline FormulaPtr build_psi_z(const SMG& g, const Support& merged, PlayerId i,
                              int max_ec_vertices = Bounds{}.max_ec_vertices) {
    ObjectiveSets sets = compute_BRE(g, merged, i, max_ec_vertices);
    std::vector<FormulaPtr> clauses;
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        TermPtr zv = t_var(detail::z_name(g.arena, i, v));
        if (sets.winning_bsccs.test(v)) {
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_const(1)));
        } else if (!sets.reach_winning.test(v)) {
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_const(0)));
        } else {
            std::vector<TermPtr> sum;
            for (const Edge& e : g.arena.edges[v])
                sum.push_back(t_mul({t_var(detail::alpha_name(g.arena, v, e.target)),
                                     t_var(detail::z_name(g.arena, i, e.target))}));
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_add(std::move(sum))));
        }
    }
    return f_and(std::move(clauses));
}

// r^i is player i's best attainable payoff when only she may deviate:
// nonnegative, 1 on her winning end components E, monotone along her own
// edges, harmonic elsewhere. One conjunct (group) per vertex.
inline FormulaPtr build_psi_r(const SMG& g, const Support& merged, PlayerId i,
                              int max_ec_vertices = Bounds{}.max_ec_vertices) {
    ObjectiveSets sets = compute_BRE(g, merged, i, max_ec_vertices);
    std::vector<FormulaPtr> groups;
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        TermPtr rv = t_var(detail::r_name(g.arena, i, v));
        std::vector<FormulaPtr> atoms;
        atoms.push_back(f_cmp(Formula::CmpOp::Ge, rv, t_const(0)));
        if (sets.deviation_wins.test(v)) atoms.push_back(f_cmp(Formula::CmpOp::Eq, rv, t_const(1)));
        if (g.arena.owner[v] == i) {
            for (const Edge& e : g.arena.edges[v])
                atoms.push_back(f_cmp(Formula::CmpOp::Ge, rv,
                                      t_var(detail::r_name(g.arena, i, e.target))));
        } else {
            std::vector<TermPtr> sum;
            for (const Edge& e : g.arena.edges[v])
                sum.push_back(t_mul({t_var(detail::alpha_name(g.arena, v, e.target)),
                                     t_var(detail::r_name(g.arena, i, e.target))}));
            atoms.push_back(f_cmp(Formula::CmpOp::Eq, rv, t_add(std::move(sum))));
        }
        groups.push_back(f_and(std::move(atoms)));
    }
    return f_and(std::move(groups));
}

struct PsiStats {
    BigInt system_supports = 0;
    BigInt environment_supports = 0;
    std::size_t atom_count = 0;
};

inline std::size_t count_atoms(const Formula& f) {
    switch (f.kind) {
        case Formula::Kind::Cmp:
            return 1;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            return count_atoms(*f.body);
        default: {
            std::size_t n = 0;
            for (const auto& a : f.args) n += count_atoms(*a);
            return n;
        }
    }
}

// The full sentence characterizing Stationary-NCRSP: a disjunct per system
// support, existential over alpha^0, with one universal block per
// environment support demanding that every 0-fixed equilibrium consistent
// with the supports pays the system at least mu.
inline FormulaPtr build_psi_stationary(const SMG& g, const Rational& mu, const Bounds& bounds = {},
                                       PsiStats* stats = nullptr) {
    SupportStream sys_probe(g, SupportScope::System);
    SupportStream env_probe(g, SupportScope::Environment);
    guard_count(sys_probe.total_count() * env_probe.total_count(), bounds.max_emit_sentences,
                "build_psi_stationary");

    const Arena& a = g.arena;
    int v0 = a.initial;

    std::vector<std::string> alpha0;
    for (int v : vertices_of_player(a, 0))
        for (const Edge& e : a.edges[v]) alpha0.push_back(detail::alpha_name(a, v, e.target));

    std::vector<std::string> universal;
    for (int v : vertices_in_scope(a, SupportScope::Environment))
        for (const Edge& e : a.edges[v]) universal.push_back(detail::alpha_name(a, v, e.target));
    for (int v = 0; v < a.vertex_count(); ++v)
        if (a.owner[v] == kNature)
            for (const Edge& e : a.edges[v]) universal.push_back(detail::alpha_name(a, v, e.target));
    for (PlayerId i = 0; i < g.players(); ++i)
        for (int v = 0; v < a.vertex_count(); ++v) universal.push_back(detail::z_name(a, i, v));
    for (PlayerId i = 1; i < g.players(); ++i)
        for (int v = 0; v < a.vertex_count(); ++v) universal.push_back(detail::r_name(a, i, v));

    std::vector<FormulaPtr> disjuncts;
    BigInt sys_count = 0, env_count = 0;

    SupportStream sys_stream(g, SupportScope::System);
    while (auto s0 = sys_stream.next()) {
        ++sys_count;
        std::vector<FormulaPtr> inner;
        inner.push_back(build_psi_sys(g, *s0));

        env_count = 0;
        SupportStream env_stream(g, SupportScope::Environment);
        while (auto senv = env_stream.next()) {
            ++env_count;
            Support merged = s0->united(*senv);

            std::vector<FormulaPtr> premise;
            premise.push_back(build_psi_env(g, *senv));
            for (PlayerId i = 0; i < g.players(); ++i)
                premise.push_back(build_psi_z(g, merged, i, bounds.max_ec_vertices));
            for (PlayerId i = 1; i < g.players(); ++i)
                premise.push_back(build_psi_r(g, merged, i, bounds.max_ec_vertices));

            std::vector<FormulaPtr> ne_atoms;
            for (PlayerId i = 1; i < g.players(); ++i)
                ne_atoms.push_back(f_cmp(Formula::CmpOp::Ge, t_var(detail::z_name(a, i, v0)),
                                         t_var(detail::r_name(a, i, v0))));
            FormulaPtr conclusion =
                f_implies(f_and(std::move(ne_atoms)),
                          f_cmp(Formula::CmpOp::Ge, t_var(detail::z_name(a, 0, v0)), t_const(mu)));

            inner.push_back(
                f_forall(universal, f_implies(f_and(std::move(premise)), std::move(conclusion))));
        }
        disjuncts.push_back(f_exists(alpha0, f_and(std::move(inner))));
    }

    FormulaPtr psi = f_or(std::move(disjuncts));
    if (stats) {
        stats->system_supports = sys_count;
        stats->environment_supports = env_count;
        stats->atom_count = count_atoms(*psi);
    }
    return psi;
}

// ---------------------------------------------------------------------------
// Existential sentences (emit mode for Stationary-Positional-NCRSP)

struct EmittedSentence {
    std::string name;  // psi_s<support>_m<mask>
    std::size_t support_index = 0;
    std::uint64_t mask = 0;  // bit j <=> deviation candidate j asserted profitable
    FormulaPtr sentence;
};

namespace detail {

inline Support profile_support(const SMG& g, const PositionalProfile& p) {
    Support s(g.arena.vertex_count());
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (p.covers(v)) s.chosen[v] = {p.choice[v]};
    return s;
}

// Defining equations of the z family for (player, environment profile):
// environment and nature coefficients are constants, only alpha^0 stays
// symbolic. Exactly one clause per vertex.
inline FormulaPtr build_z_family(const SMG& g, const Support& s0, const PositionalProfile& env,
                                 PlayerId i, std::size_t n, int max_ec_vertices) {
    Support merged = s0.united(profile_support(g, env));
    ObjectiveSets sets = compute_BRE(g, merged, i, max_ec_vertices);
    const Arena& a = g.arena;
    std::vector<FormulaPtr> clauses;
    for (int v = 0; v < a.vertex_count(); ++v) {
        TermPtr zv = t_var(z_profile_name(a, i, v, n));
        if (sets.winning_bsccs.test(v)) {
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_const(1)));
        } else if (!sets.reach_winning.test(v)) {
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_const(0)));
        } else if (a.owner[v] == 0) {
            std::vector<TermPtr> sum;
            for (const Edge& e : a.edges[v])
                sum.push_back(t_mul({t_var(alpha_name(a, v, e.target)),
                                     t_var(z_profile_name(a, i, e.target, n))}));
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_add(std::move(sum))));
        } else if (a.owner[v] == kNature) {
            std::vector<TermPtr> sum;
            for (const Edge& e : a.edges[v])
                sum.push_back(
                    t_mul({t_const(*e.prob), t_var(z_profile_name(a, i, e.target, n))}));
            clauses.push_back(f_cmp(Formula::CmpOp::Eq, zv, t_add(std::move(sum))));
        } else {
            clauses.push_back(
                f_cmp(Formula::CmpOp::Eq, zv, t_var(z_profile_name(a, i, env.choice[v], n))));
        }
    }
    return f_and(std::move(clauses));
}

}  // namespace detail

// One sentence per (system support, subset of the deviation-candidate set):
// exists alpha^0 with psi^sys, the z defining equations for every payoff
// mentioned, each chosen candidate strictly profitable, and Pay_0 >= mu at
// every profile without a chosen outgoing deviation.
inline std::vector<EmittedSentence> emit_stationary_positional(const SMG& g, const Rational& mu,
                                                               const Bounds& bounds = {}) {
    SupportStream sys_probe(g, SupportScope::System);
    DeviationGraph dg = profitable_deviation_graph(g, full_support(g, SupportScope::System), mu,
                                                   bounds);
    if (dg.candidates.size() > 32)
        throw std::runtime_error("emit_stationary_positional: " +
                                 std::to_string(dg.candidates.size()) +
                                 " deviation candidates exceed the subset enumeration limit (32)");
    BigInt total = sys_probe.total_count() * (BigInt(1) << dg.candidates.size());
    guard_count(total, bounds.max_emit_sentences, "emit_stationary_positional");

    const Arena& a = g.arena;
    int v0 = a.initial;
    std::vector<EmittedSentence> out;

    std::size_t sidx = 0;
    SupportStream sys_stream(g, SupportScope::System);
    while (auto s0 = sys_stream.next()) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << dg.candidates.size()); ++mask) {
            // payoff families needed by COND
            std::set<std::pair<PlayerId, std::size_t>> families;
            std::vector<bool> has_outgoing(dg.profiles.size(), false);
            for (std::size_t j = 0; j < dg.candidates.size(); ++j) {
                if (!(mask & (std::uint64_t{1} << j))) continue;
                const DeviationCandidate& c = dg.candidates[j];
                families.insert({c.player, c.from_index});
                families.insert({c.player, c.to_index});
                has_outgoing[c.from_index] = true;
            }
            for (std::size_t n = 0; n < dg.profiles.size(); ++n)
                if (!has_outgoing[n]) families.insert({0, n});

            std::vector<FormulaPtr> conjuncts;
            conjuncts.push_back(build_psi_sys(g, *s0));
            for (const auto& [player, n] : families)
                conjuncts.push_back(detail::build_z_family(g, *s0, dg.profiles[n], player, n,
                                                           bounds.max_ec_vertices));
            for (std::size_t j = 0; j < dg.candidates.size(); ++j) {
                if (!(mask & (std::uint64_t{1} << j))) continue;
                const DeviationCandidate& c = dg.candidates[j];
                conjuncts.push_back(
                    f_cmp(Formula::CmpOp::Lt,
                          t_var(detail::z_profile_name(a, c.player, v0, c.from_index)),
                          t_var(detail::z_profile_name(a, c.player, v0, c.to_index))));
            }
            for (std::size_t n = 0; n < dg.profiles.size(); ++n)
                if (!has_outgoing[n])
                    conjuncts.push_back(f_cmp(Formula::CmpOp::Ge,
                                              t_var(detail::z_profile_name(a, 0, v0, n)),
                                              t_const(mu)));

            std::vector<std::string> bound_vars;
            for (int v : vertices_of_player(a, 0))
                for (const Edge& e : a.edges[v])
                    bound_vars.push_back(detail::alpha_name(a, v, e.target));
            for (const auto& [player, n] : families)
                for (int v = 0; v < a.vertex_count(); ++v)
                    bound_vars.push_back(detail::z_profile_name(a, player, v, n));

            EmittedSentence s;
            s.name = "psi_s" + std::to_string(sidx) + "_m" + std::to_string(mask);
            s.support_index = sidx;
            s.mask = mask;
            s.sentence = f_exists(std::move(bound_vars), f_and(std::move(conjuncts)));
            out.push_back(std::move(s));
        }
        ++sidx;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling falsification for full Stationary-NCRSP (sound no, incomplete)

struct FalsifyResult {
    std::optional<StationaryProfile> counterexample;  // environment rows only
    PayoffVector payoff;                              // payoffs at the counterexample
    std::uint64_t samples_used = 0;
};

// Round-robin over environment supports, spending the total sample budget:
// the first visit to each support tries the uniform profile, later visits
// draw random rational mixes (numerators 1..8). Any hit is verified exactly,
// so a returned counterexample is genuine; absence proves nothing.
inline FalsifyResult falsify_candidate(const SMG& g, const StationaryProfile& sigma0,
                                       const Rational& mu, std::uint64_t samples,
                                       std::uint64_t seed, const Bounds& bounds = {}) {
    detail::require_system_candidate(g, sigma0, "falsify_candidate");
    SupportStream stream(g, SupportScope::Environment);
    guard_count(stream.total_count(), bounds.max_profiles, "falsify_candidate");
    std::vector<Support> supports;
    while (auto s = stream.next()) supports.push_back(std::move(*s));

    detail::SplitMixEngine rng(seed);
    FalsifyResult out;
    for (std::uint64_t k = 0; k < samples; ++k) {
        const Support& s = supports[k % supports.size()];
        bool uniform = k < supports.size();
        StationaryProfile env(g.arena.vertex_count());
        for (std::size_t v = 0; v < s.chosen.size(); ++v) {
            const auto& targets = s.chosen[v];
            if (targets.empty()) continue;
            DistRow row;
            if (uniform) {
                for (int t : targets) row.emplace_back(t, Rational(1, targets.size()));
            } else {
                std::vector<std::uint64_t> nums;
                std::uint64_t total = 0;
                for (std::size_t j = 0; j < targets.size(); ++j) {
                    nums.push_back(1 + rng.next_u64() % 8);
                    total += nums.back();
                }
                for (std::size_t j = 0; j < targets.size(); ++j)
                    row.emplace_back(targets[j], Rational(nums[j], total));
            }
            env.rows[v] = std::move(row);
        }
        ++out.samples_used;
        StationaryProfile full = sigma0.merged(env);
        EquilibriumVerdict eq =
            check_equilibrium(g, full, true, DeviationClass::Stationary, bounds);
        if (eq.equilibrium && eq.payoff[0] < mu) {
            out.counterexample = std::move(env);
            out.payoff = std::move(eq.payoff);
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pure t-memory NCRSP via the unfolding

inline Verdict solve_t_memory(const SMG& g, int t, const Rational& mu, const Bounds& bounds = {}) {
    UnfoldResult u = unfold_t_memory(g, t, bounds);
    Verdict v = solve_positional(u.game, mu, Problem::NCRSP, bounds);
    if (v.answer == Answer::Yes && v.system_profile) {
        PureTMemoryStrategy s;
        s.player = 0;
        s.memory = t;
        for (int c = 0; c < u.game.arena.vertex_count(); ++c) {
            if (u.game.arena.owner[c] != 0) continue;
            const DistRow& row = v.system_profile->rows[c];
            if (row.empty()) continue;
            s.choice[{u.copies[c].history, u.copies[c].current}] =
                u.copies[row.front().first].current;
        }
        v.t_memory = std::move(s);
    }
    v.note = "decided on the " + std::to_string(u.game.arena.vertex_count()) +
             "-vertex unfolding; " + v.note;
    return v;
}

}  // namespace rsynth
