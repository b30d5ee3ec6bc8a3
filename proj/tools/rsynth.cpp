// Command-line front end for the rsynth library: validation, payoff and
// equilibrium queries, the decision procedures, constraint emission, and the
// game-to-game reductions.
//
// Exit codes: 0 yes/valid, 1 no, 2 unknown, 64 usage, 65 bad input data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsynth/arena_text.hpp"
#include "rsynth/solvers.hpp"

namespace {

using nlohmann::json;
using namespace rsynth;

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

SMG load_game(const std::string& path) { return parse_arena(slurp(path)); }

StationaryProfile load_profile(const SMG& g, const std::string& path) {
    return complete_forced(g, parse_profile(g, slurp(path)));
}

std::string payoff_text(const PayoffVector& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_string(v[i]);
    return s + ")";
}

json payoff_json(const PayoffVector& v) {
    json a = json::array();
    for (const Rational& q : v) a.push_back(to_string(q));
    return a;
}

json profile_json(const SMG& g, const StationaryProfile& p) {
    json rows = json::object();
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (!p.covers(v)) continue;
        json row = json::object();
        for (const auto& [t, q] : p.rows[v]) row[g.arena.names[t]] = to_string(q);
        rows[g.arena.names[v]] = std::move(row);
    }
    return rows;
}

json positional_json(const SMG& g, const PositionalProfile& p) {
    json rows = json::object();
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (p.covers(v)) rows[g.arena.names[v]] = g.arena.names[p.choice[v]];
    return rows;
}

std::string positional_text(const SMG& g, const PositionalProfile& p, bool player_vertices_only) {
    std::string s;
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (!p.covers(v)) continue;
        if (player_vertices_only && g.arena.edges[v].size() == 1) continue;
        if (!s.empty()) s += ", ";
        s += g.arena.names[v] + "->" + g.arena.names[p.choice[v]];
    }
    return s.empty() ? "(empty)" : s;
}

std::string dot_of(const SMG& g) {
    const Arena& a = g.arena;
    std::string out = "digraph arena {\n";
    for (int v = 0; v < a.vertex_count(); ++v) {
        out += "  " + a.names[v] + " [label=\"" + a.names[v];
        out += a.owner[v] == kNature ? std::string("\\nnature") :
                                       "\\nplayer " + std::to_string(a.owner[v]);
        out += "\"";
        if (v == a.initial) out += ", shape=doublecircle";
        if (a.owner[v] == kNature) out += ", shape=diamond";
        out += "];\n";
    }
    for (int v = 0; v < a.vertex_count(); ++v)
        for (const Edge& e : a.edges[v]) {
            out += "  " + a.names[v] + " -> " + a.names[e.target];
            if (e.prob) out += " [label=\"" + to_string(*e.prob) + "\"]";
            out += ";\n";
        }
    return out + "}\n";
}

struct Output {
    bool as_json = false;
    json record = json::object();

    void put(const std::string& key, json value) { record[key] = std::move(value); }

    int finish(int code, const std::string& line) {
        if (as_json) {
            record["exit"] = code;
            std::cout << record.dump(2) << "\n";
        } else {
            std::cout << line << "\n";
        }
        return code;
    }
};

int answer_code(Answer a) {
    switch (a) {
        case Answer::Yes: return kExitYes;
        case Answer::No: return kExitNo;
        case Answer::Unknown: return kExitUnknown;
    }
    return kExitUnknown;
}

json witness_json(const SMG& g, const DeviationWitness& w) {
    json j = json::object();
    j["player"] = w.player;
    j["old_payoff"] = to_string(w.old_payoff);
    j["new_payoff"] = to_string(w.new_payoff);
    if (const auto* ps = std::get_if<PositionalStrategy>(&w.deviation)) {
        json rows = json::object();
        for (const auto& [v, t] : ps->choice) rows[g.arena.names[v]] = g.arena.names[t];
        j["deviation"] = std::move(rows);
    } else if (const auto* ss = std::get_if<StationaryStrategy>(&w.deviation)) {
        json rows = json::object();
        for (const auto& [v, row] : ss->rows) {
            json r = json::object();
            for (const auto& [t, q] : row) r[g.arena.names[t]] = to_string(q);
            rows[g.arena.names[v]] = std::move(r);
        }
        j["deviation"] = std::move(rows);
    }
    return j;
}

std::string witness_text(const SMG& g, const DeviationWitness& w) {
    std::string s = "player " + std::to_string(w.player) + " improves " +
                    to_string(w.old_payoff) + " -> " + to_string(w.new_payoff) + " via";
    if (const auto* ps = std::get_if<PositionalStrategy>(&w.deviation)) {
        for (const auto& [v, t] : ps->choice) s += " " + g.arena.names[v] + "->" + g.arena.names[t];
    } else if (const auto* ss = std::get_if<StationaryStrategy>(&w.deviation)) {
        for (const auto& [v, row] : ss->rows) {
            s += " " + g.arena.names[v] + "->{";
            bool first = true;
            for (const auto& [t, q] : row) {
                if (!first) s += ", ";
                first = false;
                s += g.arena.names[t] + ": " + to_string(q);
            }
            s += "}";
        }
    }
    return s;
}

json table_json(const SMG& g, const std::vector<ProfileRecord>& table) {
    json rows = json::array();
    for (const ProfileRecord& r : table) {
        json row = json::object();
        row["index"] = r.index;
        row["profile"] = positional_json(g, r.profile);
        row["payoff"] = payoff_json(r.payoff);
        row["zero_fixed_ne"] = r.zero_fixed_ne;
        if (r.refutation) row["refutation"] = witness_json(g, *r.refutation);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver workbench for rational synthesis on stochastic multiplayer games"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output record");

    std::string game_path, profile_path, candidate_path, mu_text = "0", out_path, dot_path;
    int player = 0, t_bound = 0, grid_denominator = 4;
    std::uint64_t runs = 1000, seed = 0, horizon = 10000;
    bool fixed0 = false, full_unfold = false;
    std::string deviation_class = "positional", problem_text = "ncrsp", mode;

    auto* validate = app.add_subcommand("validate", "parse and validate a game file");
    validate->add_option("file", game_path)->required();
    validate->add_option("--dot", dot_path, "write a DOT rendering of the arena");

    auto* payoff = app.add_subcommand("payoff", "exact payoff vector of a stationary profile");
    payoff->add_option("file", game_path)->required();
    payoff->add_option("--profile", profile_path)->required();

    auto* bestresp = app.add_subcommand("best-response", "best attainable payoff for one player");
    bestresp->add_option("file", game_path)->required();
    bestresp->add_option("--player", player)->required();
    bestresp->add_option("--profile", profile_path)->required();

    auto* checkne = app.add_subcommand("check-ne", "is the profile a (0-fixed) Nash equilibrium");
    checkne->add_option("file", game_path)->required();
    checkne->add_option("--profile", profile_path)->required();
    checkne->add_flag("--fixed0", fixed0, "player 0 may not deviate");
    checkne->add_option("--class", deviation_class, "positional|stationary deviations")
        ->check(CLI::IsMember({"positional", "stationary"}));

    auto* solve = app.add_subcommand("solve", "decision procedures");
    solve->require_subcommand(1);

    auto* s_pos = solve->add_subcommand("positional", "brute-force positional NCRSP or CRSP");
    s_pos->add_option("file", game_path)->required();
    s_pos->add_option("--mu", mu_text)->required();
    s_pos->add_option("--problem", problem_text)->check(CLI::IsMember({"ncrsp", "crsp"}));

    auto* s_sp = solve->add_subcommand(
        "stationary-positional", "stationary system vs positional environment");
    s_sp->add_option("file", game_path)->required();
    s_sp->add_option("--mu", mu_text)->required();
    s_sp->add_option("--mode", mode, "grid|emit")->check(CLI::IsMember({"grid", "emit"}));
    s_sp->add_option("--grid-denominator", grid_denominator);
    s_sp->add_option("--candidate", candidate_path, "verify this candidate profile instead");
    s_sp->add_option("--out", out_path, "emit mode: directory for the sentence files");

    auto* s_st = solve->add_subcommand("stationary", "emit Theorem-style sentence for the full problem");
    s_st->add_option("file", game_path)->required();
    s_st->add_option("--mu", mu_text)->required();
    s_st->add_option("--emit", out_path, "output .smt2 path")->required();

    auto* s_tm = solve->add_subcommand("t-memory", "pure t-memory NCRSP via the unfolding");
    s_tm->add_option("file", game_path)->required();
    s_tm->add_option("--t", t_bound)->required();
    s_tm->add_option("--mu", mu_text)->required();

    auto* unfold = app.add_subcommand("unfold", "print the t-window unfolding");
    unfold->add_option("file", game_path)->required();
    unfold->add_option("--t", t_bound)->required();
    unfold->add_flag("--full", full_unfold, "audit mode: include unreachable histories");

    auto* reduce = app.add_subcommand("reduce", "game-to-game reductions");
    reduce->require_subcommand(1);
    auto* r_crsp = reduce->add_subcommand("crsp-to-ncrspgt", "adversary-player construction");
    r_crsp->add_option("file", game_path)->required();

    auto* check = app.add_subcommand("check", "structural checks");
    check->require_subcommand(1);
    auto* c_term = check->add_subcommand("termination", "almost-sure termination of coalitions");
    c_term->add_option("file", game_path)->required();

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo runs under a profile");
    simulate->add_option("file", game_path)->required();
    simulate->add_option("--profile", profile_path)->required();
    simulate->add_option("--runs", runs)->required();
    simulate->add_option("--seed", seed)->required();
    simulate->add_option("--horizon", horizon);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    Output out;
    out.as_json = as_json;
    Bounds bounds = Bounds::from_env();

    try {
        if (*validate) {
            SMG g = load_game(game_path);
            if (!dot_path.empty()) spill(dot_path, dot_of(g));
            out.put("command", "validate");
            out.put("vertices", g.arena.vertex_count());
            out.put("players", g.players());
            return out.finish(kExitYes, "valid: " + std::to_string(g.arena.vertex_count()) +
                                            " vertices, " + std::to_string(g.players()) +
                                            " players");
        }
        if (*payoff) {
            SMG g = load_game(game_path);
            StationaryProfile p = load_profile(g, profile_path);
            PayoffResult r = payoff_profile(g, p);
            out.put("command", "payoff");
            out.put("payoff", payoff_json(r.payoff));
            return out.finish(kExitYes, "payoff " + payoff_text(r.payoff));
        }
        if (*bestresp) {
            SMG g = load_game(game_path);
            StationaryProfile p = load_profile(g, profile_path);
            for (int v : vertices_of_player(g.arena, player)) p.rows[v].clear();
            BestResponse br = best_response_values(g, p, player, bounds.max_ec_vertices);
            out.put("command", "best-response");
            out.put("player", player);
            out.put("value", to_string(br.values[g.arena.initial]));
            json values = json::object();
            for (int v = 0; v < g.arena.vertex_count(); ++v)
                values[g.arena.names[v]] = to_string(br.values[v]);
            out.put("values", std::move(values));
            return out.finish(kExitYes,
                              "best response value " + to_string(br.values[g.arena.initial]));
        }
        if (*checkne) {
            SMG g = load_game(game_path);
            StationaryProfile p = load_profile(g, profile_path);
            DeviationClass cls = deviation_class == "stationary" ? DeviationClass::Stationary
                                                                 : DeviationClass::Positional;
            EquilibriumVerdict v = check_equilibrium(g, p, fixed0, cls, bounds);
            out.put("command", "check-ne");
            out.put("equilibrium", v.equilibrium);
            out.put("payoff", payoff_json(v.payoff));
            if (v.witness) out.put("witness", witness_json(g, *v.witness));
            if (v.equilibrium)
                return out.finish(kExitYes, std::string(fixed0 ? "0-fixed " : "") +
                                                "equilibrium, payoff " + payoff_text(v.payoff));
            return out.finish(kExitNo, "not an equilibrium: " + witness_text(g, *v.witness));
        }
        if (*s_pos) {
            SMG g = load_game(game_path);
            auto mu = parse_rational(mu_text);
            if (!mu) throw std::runtime_error("--mu is not a rational literal");
            Problem problem = problem_text == "crsp" ? Problem::CRSP : Problem::NCRSP;
            Verdict v = solve_positional(g, *mu, problem, bounds);
            out.put("command", "solve positional");
            out.put("problem", problem_text);
            out.put("mu", to_string(*mu));
            out.put("answer", to_string(v.answer));
            out.put("note", v.note);
            if (v.system_profile) out.put("certificate", profile_json(g, *v.system_profile));
            if (!v.table.empty()) out.put("table", table_json(g, v.table));
            std::string line = std::string(to_string(v.answer)) + ": " + v.note;
            if (v.answer == Answer::Yes && v.system_profile) {
                const auto& rows = *v.system_profile;
                std::string cert;
                for (int vx = 0; vx < g.arena.vertex_count(); ++vx) {
                    if (!rows.covers(vx) || g.arena.edges[vx].size() == 1) continue;
                    if (!cert.empty()) cert += ", ";
                    cert += g.arena.names[vx] + "->{";
                    bool first = true;
                    for (const auto& [t, q] : rows.rows[vx]) {
                        if (!first) cert += ", ";
                        first = false;
                        cert += g.arena.names[t] + ": " + to_string(q);
                    }
                    cert += "}";
                }
                if (!cert.empty()) line += "; certificate " + cert;
            }
            return out.finish(answer_code(v.answer), line);
        }
        if (*s_sp) {
            SMG g = load_game(game_path);
            auto mu = parse_rational(mu_text);
            if (!mu) throw std::runtime_error("--mu is not a rational literal");
            out.put("command", "solve stationary-positional");
            out.put("mu", to_string(*mu));
            if (!candidate_path.empty()) {
                StationaryProfile cand = load_profile(g, candidate_path);
                Verdict v = verify_stationary_candidate(g, cand, *mu, bounds);
                out.put("answer", to_string(v.answer));
                out.put("note", v.note);
                out.put("table", table_json(g, v.table));
                return out.finish(answer_code(v.answer),
                                  std::string(to_string(v.answer)) + ": " + v.note);
            }
            if (mode == "emit") {
                if (out_path.empty()) throw std::runtime_error("emit mode needs --out <dir>");
                std::filesystem::create_directories(out_path);
                auto sentences = emit_stationary_positional(g, *mu, bounds);
                json names = json::array();
                for (const EmittedSentence& s : sentences) {
                    spill(out_path + "/" + s.name + ".smt2", emit_constraints(s.sentence));
                    names.push_back(s.name);
                }
                out.put("answer", "unknown");
                out.put("sentences", std::move(names));
                out.put("directory", out_path);
                return out.finish(kExitUnknown,
                                  "unknown: emitted " + std::to_string(sentences.size()) +
                                      " sentences to " + out_path);
            }
            if (mode != "grid") throw std::runtime_error("need --mode grid|emit or --candidate");
            Verdict v = solve_stationary_positional_grid(g, *mu, grid_denominator, bounds);
            out.put("answer", to_string(v.answer));
            out.put("note", v.note);
            if (v.system_profile) out.put("certificate", profile_json(g, *v.system_profile));
            std::string line = std::string(to_string(v.answer)) + ": " + v.note;
            return out.finish(answer_code(v.answer), line);
        }
        if (*s_st) {
            SMG g = load_game(game_path);
            auto mu = parse_rational(mu_text);
            if (!mu) throw std::runtime_error("--mu is not a rational literal");
            PsiStats stats;
            FormulaPtr psi = build_psi_stationary(g, *mu, bounds, &stats);
            spill(out_path, emit_constraints(psi));
            out.put("command", "solve stationary");
            out.put("answer", "unknown");
            out.put("emitted", out_path);
            out.put("system_supports", stats.system_supports.str());
            out.put("environment_supports", stats.environment_supports.str());
            out.put("atoms", stats.atom_count);
            return out.finish(kExitUnknown, "unknown: wrote " + out_path + " (" +
                                                stats.system_supports.str() + " system x " +
                                                stats.environment_supports.str() +
                                                " environment supports, " +
                                                std::to_string(stats.atom_count) + " atoms)");
        }
        if (*s_tm) {
            SMG g = load_game(game_path);
            auto mu = parse_rational(mu_text);
            if (!mu) throw std::runtime_error("--mu is not a rational literal");
            Verdict v = solve_t_memory(g, t_bound, *mu, bounds);
            out.put("command", "solve t-memory");
            out.put("t", t_bound);
            out.put("answer", to_string(v.answer));
            out.put("note", v.note);
            if (v.t_memory) {
                json rows = json::array();
                for (const auto& [key, target] : v.t_memory->choice) {
                    json r = json::object();
                    json hist = json::array();
                    for (int h : key.first) hist.push_back(g.arena.names[h]);
                    r["history"] = std::move(hist);
                    r["at"] = g.arena.names[key.second];
                    r["to"] = g.arena.names[target];
                    rows.push_back(std::move(r));
                }
                out.put("strategy", std::move(rows));
            }
            return out.finish(answer_code(v.answer),
                              std::string(to_string(v.answer)) + ": " + v.note);
        }
        if (*unfold) {
            SMG g = load_game(game_path);
            UnfoldResult u = unfold_t_memory(g, t_bound, bounds, full_unfold);
            out.put("command", "unfold");
            out.put("t", t_bound);
            out.put("vertices", u.game.arena.vertex_count());
            out.put("game", serialize_arena(u.game));
            return out.finish(kExitYes, serialize_arena(u.game));
        }
        if (*r_crsp) {
            SMG g = load_game(game_path);
            SMG reduced = crsp_to_ncrspgt(g, bounds.max_ec_vertices);
            out.put("command", "reduce crsp-to-ncrspgt");
            out.put("players", reduced.players());
            out.put("game", serialize_arena(reduced));
            return out.finish(kExitYes, serialize_arena(reduced));
        }
        if (*c_term) {
            SMG g = load_game(game_path);
            bool ok = check_almost_sure_termination(g, bounds.max_ec_vertices);
            out.put("command", "check termination");
            out.put("terminates", ok);
            if (ok) return out.finish(kExitYes, "yes: every coalition end component is a terminal");
            return out.finish(kExitNo, "no: some coalition end component avoids the terminals");
        }
        if (*simulate) {
            SMG g = load_game(game_path);
            StationaryProfile p = load_profile(g, profile_path);
            SimulationResult r = rsynth::simulate(g, p, static_cast<int>(runs),
                                                  static_cast<int>(horizon), seed);
            out.put("command", "simulate");
            out.put("runs", runs);
            out.put("seed", seed);
            json freq = json::array();
            for (double f : r.empirical) freq.push_back(f);
            out.put("win_frequency", std::move(freq));
            std::string line = "win frequencies";
            for (double f : r.empirical) line += " " + std::to_string(f);
            return out.finish(kExitYes, line);
        }
        return out.finish(kExitUsage, "unknown command");
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
