#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "rsynth/arena.hpp"
#include "rsynth/best_response.hpp"
#include "rsynth/chain.hpp"

namespace rsynth {

// The two deviation classes give different equilibrium notions and therefore
// different synthesis answers: against stationary deviations a mixed choice
// can be the unique best response, while the positional class only quantifies
// over pure memoryless switches.
enum class DeviationClass { Stationary, Positional };

struct DeviationWitness {
    PlayerId player = 0;
    StrategyObject deviation;
    Rational old_payoff, new_payoff;  // new_payoff > old_payoff
};

struct EquilibriumVerdict {
    bool equilibrium = false;
    std::optional<DeviationWitness> witness;
    PayoffVector payoff;
};

namespace detail {

inline StationaryProfile erase_player(const SMG& g, const StationaryProfile& profile,
                                      PlayerId i) {
    StationaryProfile others = profile;
    for (int v : vertices_of_player(g.arena, i)) others.rows[v].clear();
    return others;
}

}  // namespace detail

// Checks profitable unilateral deviations at the initial vertex for every
// candidate deviator (environment players only when fixed0). Witnesses are
// replayed through payoff_profile before being returned.
inline EquilibriumVerdict check_equilibrium(const SMG& g, const StationaryProfile& profile,
                                            bool fixed0, DeviationClass deviation_class,
                                            const Bounds& bounds = {}) {
    require_covered(g, profile, [](PlayerId) { return true; }, "check_equilibrium");
    EquilibriumVerdict verdict;
    verdict.payoff = payoff_profile(g, profile).payoff;

    for (PlayerId i = fixed0 ? 1 : 0; i < g.players(); ++i) {
        StationaryProfile others = detail::erase_player(g, profile, i);
        if (deviation_class == DeviationClass::Stationary) {
            BestResponse br = best_response_values(g, others, i, bounds.max_ec_vertices);
            Rational attainable = br.values[g.arena.initial];
            if (attainable > verdict.payoff[i]) {
                StationaryProfile deviated = others.merged(profile_of(g, br.witness));
                Rational replayed = payoff_profile(g, deviated).payoff[i];
                if (replayed != attainable)
                    throw std::logic_error("check_equilibrium: witness replay mismatch");
                verdict.witness = DeviationWitness{i, br.witness, verdict.payoff[i], attainable};
                return verdict;
            }
        } else {
            std::vector<int> mine = vertices_of_player(g.arena, i);
            PositionalProfileStream stream(g, mine);
            guard_count(stream.total_count(), bounds.max_profiles, "check_equilibrium");
            std::optional<PositionalProfile> best;
            Rational best_payoff = verdict.payoff[i];
            while (auto candidate = stream.next()) {
                StationaryProfile deviated = others.merged(to_stationary(*candidate));
                Rational pay = payoff_profile(g, deviated).payoff[i];
                if (pay > best_payoff) {
                    best_payoff = pay;
                    best = *candidate;
                }
            }
            if (best) {
                PositionalStrategy s;
                s.player = i;
                for (int v : mine) s.choice[v] = best->choice[v];
                verdict.witness = DeviationWitness{i, s, verdict.payoff[i], best_payoff};
                return verdict;
            }
        }
    }
    verdict.equilibrium = true;
    return verdict;
}

// ---------------------------------------------------------------------------
// Deviation candidates for the existential sentences: all triples of
// environment positional profiles differing in exactly one player's strategy.

struct DeviationCandidate {
    std::size_t from_index;
    std::size_t to_index;
    PlayerId player;
};

struct DeviationGraph {
    Support system_support;
    Rational mu;
    std::vector<PositionalProfile> profiles;  // environment enumeration order
    std::vector<DeviationCandidate> candidates;
};

inline DeviationGraph profitable_deviation_graph(const SMG& g, const Support& system_support,
                                                 const Rational& mu, const Bounds& bounds = {}) {
    DeviationGraph out;
    out.system_support = system_support;
    out.mu = mu;

    std::vector<int> env = vertices_in_scope(g.arena, SupportScope::Environment);
    PositionalProfileStream stream(g, env);
    guard_count(stream.total_count(), bounds.max_profiles, "profitable_deviation_graph");
    while (auto p = stream.next()) out.profiles.push_back(std::move(*p));

    // mixed-radix rank: env vertices ascending, last one least significant
    std::vector<std::size_t> weight(env.size(), 1);
    for (std::size_t j = env.size(); j-- > 1;)
        weight[j - 1] = weight[j] * g.arena.edges[env[j]].size();
    auto edge_slot = [&](int v, int target) {
        const auto& row = g.arena.edges[v];
        for (std::size_t k = 0; k < row.size(); ++k)
            if (row[k].target == target) return k;
        throw std::logic_error("profitable_deviation_graph: missing edge");
    };

    BigInt triple_count = 0;
    for (PlayerId i = 1; i < g.players(); ++i) {
        BigInt alternatives = 1;
        for (int v : vertices_of_player(g.arena, i)) alternatives *= g.arena.edges[v].size();
        triple_count += BigInt(out.profiles.size()) * (alternatives - 1);
    }
    guard_count(triple_count, bounds.max_profiles, "profitable_deviation_graph");

    for (std::size_t from = 0; from < out.profiles.size(); ++from) {
        const PositionalProfile& base = out.profiles[from];
        for (PlayerId i = 1; i < g.players(); ++i) {
            std::vector<int> mine = vertices_of_player(g.arena, i);
            if (mine.empty()) continue;
            PositionalProfileStream alts(g, mine);
            while (auto alt = alts.next()) {
                bool same = true;
                for (int v : mine)
                    if (alt->choice[v] != base.choice[v]) same = false;
                if (same) continue;
                std::size_t to = 0;
                for (std::size_t j = 0; j < env.size(); ++j) {
                    int v = env[j];
                    int chosen = g.arena.owner[v] == i ? alt->choice[v] : base.choice[v];
                    to += weight[j] * edge_slot(v, chosen);
                }
                out.candidates.push_back({from, to, i});
            }
        }
    }
    return out;
}

}  // namespace rsynth
