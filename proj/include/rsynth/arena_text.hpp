#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsynth/arena.hpp"

namespace rsynth {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& msg, int line_, int column_)
        : std::runtime_error("line " + std::to_string(line_) + ", column " +
                             std::to_string(column_) + ": " + msg),
          line(line_),
          column(column_) {}
};

// ---------------------------------------------------------------------------
// Muller formula text: identifiers with & | ! and parentheses.

namespace detail {

class FormulaScanner {
  public:
    FormulaScanner(const std::string& text, int line, int col0)
        : text_(text), line_(line), col0_(col0) {}

    BoolExprPtr parse() {
        BoolExprPtr e = parse_or();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input in formula");
        return e;
    }

  private:
    BoolExprPtr parse_or() {
        std::vector<BoolExprPtr> args{parse_and()};
        while (peek() == '|') {
            ++pos_;
            args.push_back(parse_and());
        }
        return args.size() == 1 ? args[0] : bor(std::move(args));
    }

    BoolExprPtr parse_and() {
        std::vector<BoolExprPtr> args{parse_unary()};
        while (peek() == '&') {
            ++pos_;
            args.push_back(parse_unary());
        }
        return args.size() == 1 ? args[0] : band(std::move(args));
    }

    BoolExprPtr parse_unary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("formula ends unexpectedly");
        char c = text_[pos_];
        if (c == '!') {
            ++pos_;
            return bnot(parse_unary());
        }
        if (c == '(') {
            ++pos_;
            BoolExprPtr e = parse_or();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            return bvar(text_.substr(start, pos_ - start));
        }
        fail(std::string("unexpected character '") + c + "' in formula");
        return nullptr;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, line_, col0_ + static_cast<int>(pos_));
    }

    const std::string& text_;
    int line_;
    int col0_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline BoolExprPtr parse_muller_formula(const std::string& text, int line = 1, int col0 = 1) {
    return detail::FormulaScanner(text, line, col0).parse();
}

inline std::string muller_formula_text(const BoolExpr& e) {
    // precedence: | < & < !
    auto wrap = [](const std::string& s, bool needed) { return needed ? "(" + s + ")" : s; };
    switch (e.kind) {
        case BoolExpr::Kind::Var:
            return e.var;
        case BoolExpr::Kind::Not: {
            const BoolExpr& a = *e.args[0];
            return "!" + wrap(muller_formula_text(a), a.kind == BoolExpr::Kind::And ||
                                                          a.kind == BoolExpr::Kind::Or);
        }
        case BoolExpr::Kind::And: {
            std::string out;
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += " & ";
                out += wrap(muller_formula_text(*e.args[i]),
                            e.args[i]->kind == BoolExpr::Kind::Or);
            }
            return out;
        }
        case BoolExpr::Kind::Or: {
            std::string out;
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += " | ";
                out += muller_formula_text(*e.args[i]);
            }
            return out;
        }
    }
    throw std::logic_error("muller_formula_text: bad kind");
}

// ---------------------------------------------------------------------------
// Arena document

struct ArenaDocument {
    int player_count = -1;
    int players_line = 0;
    std::string initial;
    int init_line = 0;

    struct VertexDecl {
        std::string name;
        PlayerId owner;
        int line;
    };
    struct EdgeDecl {
        std::string src, dst;
        std::optional<Rational> prob;
        int line;
    };
    struct LeafDecl {
        std::string name;
        std::vector<Rational> payoffs;
        int line;
    };
    struct ObjectiveDecl {
        int player;
        bool muller;
        std::vector<std::string> tr_names;
        std::string muller_text;
        int line;
        int muller_col;
    };

    std::vector<VertexDecl> vertices;
    std::vector<EdgeDecl> edges;
    std::vector<LeafDecl> leaves;
    std::vector<ObjectiveDecl> objectives;
};

namespace detail {

// Splits one DSL line into tokens. Parenthesized payoff vectors, braced name
// lists and quoted strings arrive as single tokens (without the delimiters
// for quotes). `#` starts a comment.
struct Token {
    std::string text;
    int column;
    enum class Kind { Word, Paren, Brace, Quote } kind = Kind::Word;
};

inline std::vector<Token> tokenize_line(const std::string& line, int line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#') break;
        int col = static_cast<int>(i) + 1;
        if (c == '(' || c == '{') {
            char close = c == '(' ? ')' : '}';
            std::size_t end = line.find(close, i + 1);
            if (end == std::string::npos)
                throw ParseError(std::string("missing '") + close + "'", line_no, col);
            out.push_back({line.substr(i + 1, end - i - 1), col,
                           c == '(' ? Token::Kind::Paren : Token::Kind::Brace});
            i = end + 1;
        } else if (c == '"') {
            std::size_t end = line.find('"', i + 1);
            if (end == std::string::npos) throw ParseError("missing closing quote", line_no, col);
            out.push_back({line.substr(i + 1, end - i - 1), col, Token::Kind::Quote});
            i = end + 1;
        } else {
            std::size_t end = i;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])) &&
                   line[end] != '#' && line[end] != '(' && line[end] != '{' && line[end] != '"')
                ++end;
            out.push_back({line.substr(i, end - i), col, Token::Kind::Word});
            i = end;
        }
    }
    return out;
}

inline bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

inline std::vector<std::string> split_list(const std::string& body) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : body) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace detail

inline ArenaDocument parse_document(const std::string& text) {
    ArenaDocument doc;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = detail::tokenize_line(line, line_no);
        if (tokens.empty()) continue;
        const std::string& head = tokens[0].text;
        auto need = [&](std::size_t n, const std::string& usage) {
            if (tokens.size() != n)
                throw ParseError("expected '" + usage + "'", line_no, tokens[0].column);
        };
        auto ident = [&](std::size_t idx) {
            if (!detail::valid_identifier(tokens[idx].text))
                throw ParseError("'" + tokens[idx].text + "' is not a valid name", line_no,
                                 tokens[idx].column);
            return tokens[idx].text;
        };
        auto number = [&](std::size_t idx) {
            auto q = parse_rational(tokens[idx].text);
            if (!q)
                throw ParseError("'" + tokens[idx].text + "' is not a rational literal", line_no,
                                 tokens[idx].column);
            return *q;
        };
        if (head == "players") {
            need(2, "players <count>");
            Rational q = number(1);
            if (denominator(q) != 1 || q < 1)
                throw ParseError("player count must be a positive integer", line_no,
                                 tokens[1].column);
            doc.player_count = static_cast<int>(numerator(q));
            doc.players_line = line_no;
        } else if (head == "init") {
            need(2, "init <vertex>");
            doc.initial = ident(1);
            doc.init_line = line_no;
        } else if (head == "vertex") {
            need(4, "vertex <name> owner (<player>|nature)");
            if (tokens[2].text != "owner")
                throw ParseError("expected 'owner'", line_no, tokens[2].column);
            PlayerId owner;
            if (tokens[3].text == "nature") {
                owner = kNature;
            } else {
                Rational q = number(3);
                if (denominator(q) != 1 || q < 0)
                    throw ParseError("owner must be a player index or 'nature'", line_no,
                                     tokens[3].column);
                owner = static_cast<int>(numerator(q));
            }
            doc.vertices.push_back({ident(1), owner, line_no});
        } else if (head == "edge") {
            if (tokens.size() != 3 && tokens.size() != 5)
                throw ParseError("expected 'edge <src> <dst> [prob <rational>]'", line_no,
                                 tokens[0].column);
            ArenaDocument::EdgeDecl e{ident(1), ident(2), std::nullopt, line_no};
            if (tokens.size() == 5) {
                if (tokens[3].text != "prob")
                    throw ParseError("expected 'prob'", line_no, tokens[3].column);
                e.prob = number(4);
            }
            doc.edges.push_back(std::move(e));
        } else if (head == "leaf") {
            need(3, "leaf <name> (<r0>,...,<rk>)");
            if (tokens[2].kind != detail::Token::Kind::Paren)
                throw ParseError("expected a parenthesized payoff vector", line_no,
                                 tokens[2].column);
            ArenaDocument::LeafDecl l{ident(1), {}, line_no};
            for (const std::string& part : detail::split_list(tokens[2].text)) {
                auto q = parse_rational(part);
                if (!q)
                    throw ParseError("'" + part + "' is not a rational literal", line_no,
                                     tokens[2].column);
                l.payoffs.push_back(*q);
            }
            doc.leaves.push_back(std::move(l));
        } else if (head == "objective") {
            if (tokens.size() != 4)
                throw ParseError("expected 'objective <player> (tr {...}|muller \"...\")'",
                                 line_no, tokens[0].column);
            Rational q = number(1);
            if (denominator(q) != 1 || q < 0)
                throw ParseError("objective player index must be a natural number", line_no,
                                 tokens[1].column);
            ArenaDocument::ObjectiveDecl o{};
            o.player = static_cast<int>(numerator(q));
            o.line = line_no;
            if (tokens[2].text == "tr") {
                if (tokens[3].kind != detail::Token::Kind::Brace)
                    throw ParseError("expected a braced vertex list", line_no, tokens[3].column);
                o.muller = false;
                o.tr_names = detail::split_list(tokens[3].text);
            } else if (tokens[2].text == "muller") {
                if (tokens[3].kind != detail::Token::Kind::Quote)
                    throw ParseError("expected a quoted formula", line_no, tokens[3].column);
                o.muller = true;
                o.muller_text = tokens[3].text;
                o.muller_col = tokens[3].column + 1;
            } else {
                throw ParseError("objective kind must be 'tr' or 'muller'", line_no,
                                 tokens[2].column);
            }
            doc.objectives.push_back(std::move(o));
        } else {
            throw ParseError("unknown statement '" + head + "'", line_no, tokens[0].column);
        }
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Document -> SMG, expanding payoff-vector leaves into nature gadgets.
//
// A leaf (p0,...,pk) becomes: players with p_i = 1 win at every terminal of
// the gadget, players with p_i = 0 at none, and the players with fractional
// p_i get an independent joint lottery — one nature vertex branching into a
// terminal per winner subset, with the product probability. Integral-only
// leaves need no branching and compile to a single terminal.

inline SMG compile_document(const ArenaDocument& doc) {
    if (doc.player_count < 1) throw ParseError("missing 'players' declaration", 1, 1);
    SMG g;
    g.arena.player_count = doc.player_count;

    auto add_vertex = [&](const std::string& name, PlayerId owner, int line) {
        if (find_vertex(g.arena, name) >= 0)
            throw ParseError("duplicate name '" + name + "'", line, 1);
        g.arena.names.push_back(name);
        g.arena.owner.push_back(owner);
        g.arena.edges.emplace_back();
        return g.arena.vertex_count() - 1;
    };

    for (const auto& v : doc.vertices) add_vertex(v.name, v.owner, v.line);

    // leaf name -> (set of winning players, terminal vertices they win at)
    std::map<std::string, std::vector<std::pair<int, std::vector<int>>>> leaf_wins;
    for (const auto& l : doc.leaves) {
        if (static_cast<int>(l.payoffs.size()) != doc.player_count)
            throw ParseError("leaf '" + l.name + "' needs " + std::to_string(doc.player_count) +
                                 " payoffs",
                             l.line, 1);
        std::vector<int> fractional;
        for (std::size_t i = 0; i < l.payoffs.size(); ++i) {
            if (!in_unit_interval(l.payoffs[i]))
                throw ParseError("leaf '" + l.name + "': payoff " + to_string(l.payoffs[i]) +
                                     " outside [0,1]",
                                 l.line, 1);
            if (l.payoffs[i] != 0 && l.payoffs[i] != 1) fractional.push_back(static_cast<int>(i));
        }
        std::vector<int> terminals;
        if (fractional.empty()) {
            int t = add_vertex(l.name, 0, l.line);
            add_edge(g.arena, t, t);
            terminals.push_back(t);
        } else {
            int root = add_vertex(l.name, kNature, l.line);
            for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << fractional.size()); ++mask) {
                std::string name = l.name + "_w";
                Rational p = 1;
                for (std::size_t j = 0; j < fractional.size(); ++j) {
                    if (mask & (std::uint32_t{1} << j)) {
                        name += "_" + std::to_string(fractional[j]);
                        p *= l.payoffs[fractional[j]];
                    } else {
                        p *= 1 - l.payoffs[fractional[j]];
                    }
                }
                int t = add_vertex(name, 0, l.line);
                add_edge(g.arena, t, t);
                add_edge(g.arena, root, t, p);
                terminals.push_back(t);
            }
        }
        std::vector<std::pair<int, std::vector<int>>> wins;
        for (std::size_t i = 0; i < l.payoffs.size(); ++i) {
            if (l.payoffs[i] == 0) continue;
            if (l.payoffs[i] == 1) {
                wins.emplace_back(static_cast<int>(i), terminals);
            } else {
                std::vector<int> mine;
                auto frac_pos = std::find(fractional.begin(), fractional.end(), static_cast<int>(i));
                std::size_t j = static_cast<std::size_t>(frac_pos - fractional.begin());
                for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << fractional.size()); ++mask)
                    if (mask & (std::uint32_t{1} << j)) mine.push_back(terminals[mask]);
                wins.emplace_back(static_cast<int>(i), std::move(mine));
            }
        }
        leaf_wins[l.name] = std::move(wins);
    }

    for (const auto& e : doc.edges) {
        int s = find_vertex(g.arena, e.src);
        int d = find_vertex(g.arena, e.dst);
        if (s < 0) throw ParseError("undeclared name '" + e.src + "'", e.line, 1);
        if (d < 0) throw ParseError("undeclared name '" + e.dst + "'", e.line, 1);
        add_edge(g.arena, s, d, e.prob);
    }

    if (doc.initial.empty()) throw ParseError("missing 'init' declaration", 1, 1);
    g.arena.initial = find_vertex(g.arena, doc.initial);
    if (g.arena.initial < 0)
        throw ParseError("undeclared name '" + doc.initial + "'", doc.init_line, 1);

    g.objectives.resize(doc.player_count);
    std::vector<bool> declared(doc.player_count, false);
    for (auto& o : g.objectives) {
        o.kind = Objective::Kind::TerminalReach;
        o.targets = g.arena.empty_set();
    }
    for (const auto& o : doc.objectives) {
        if (o.player < 0 || o.player >= doc.player_count)
            throw ParseError("objective for unknown player " + std::to_string(o.player), o.line, 1);
        if (declared[o.player])
            throw ParseError("duplicate objective for player " + std::to_string(o.player), o.line,
                             1);
        declared[o.player] = true;
        Objective& obj = g.objectives[o.player];
        if (o.muller) {
            obj.kind = Objective::Kind::Muller;
            obj.formula = parse_muller_formula(o.muller_text, o.line, o.muller_col);
            std::set<std::string> vars;
            collect_vars(*obj.formula, vars);
            for (const auto& name : vars)
                if (find_vertex(g.arena, name) < 0)
                    throw ParseError("undeclared name '" + name + "'", o.line, 1);
        } else {
            obj.kind = Objective::Kind::TerminalReach;
            obj.targets = g.arena.empty_set();
            for (const auto& name : o.tr_names) {
                int v = find_vertex(g.arena, name);
                if (v < 0) throw ParseError("undeclared name '" + name + "'", o.line, 1);
                obj.targets.set(v);
            }
        }
    }
    for (int i = 0; i < doc.player_count; ++i)
        if (!declared[i])
            throw ParseError("missing objective for player " + std::to_string(i), 1, 1);

    // Leaf memberships extend TR target sets.
    for (const auto& [name, wins] : leaf_wins) {
        for (const auto& [player, terms] : wins) {
            Objective& obj = g.objectives[player];
            if (obj.kind != Objective::Kind::TerminalReach)
                throw ParseError("leaf '" + name + "' gives payoff to player " +
                                     std::to_string(player) + " whose objective is not tr",
                                 1, 1);
            for (int t : terms) obj.targets.set(t);
        }
    }
    return g;
}

inline SMG parse_arena(const std::string& text) {
    SMG g = compile_document(parse_document(text));
    auto issues = validate_arena(g);
    if (!issues.empty()) throw std::runtime_error("invalid game: " + issues.front());
    return g;
}

inline std::string serialize_arena(const SMG& g) {
    const Arena& a = g.arena;
    std::string out;
    out += "players " + std::to_string(a.player_count) + "\n";
    out += "init " + a.names[a.initial] + "\n";
    for (int v = 0; v < a.vertex_count(); ++v)
        out += "vertex " + a.names[v] + " owner " +
               (a.owner[v] == kNature ? std::string("nature") : std::to_string(a.owner[v])) + "\n";
    for (int v = 0; v < a.vertex_count(); ++v)
        for (const Edge& e : a.edges[v]) {
            out += "edge " + a.names[v] + " " + a.names[e.target];
            if (e.prob) out += " prob " + to_string(*e.prob);
            out += "\n";
        }
    for (int i = 0; i < a.player_count; ++i) {
        const Objective& o = g.objectives[i];
        if (o.kind == Objective::Kind::TerminalReach) {
            out += "objective " + std::to_string(i) + " tr {";
            bool first = true;
            for (auto v = o.targets.find_first(); v != VertexSet::npos;
                 v = o.targets.find_next(v)) {
                if (!first) out += " ";
                out += a.names[v];
                first = false;
            }
            out += "}\n";
        } else {
            out += "objective " + std::to_string(i) + " muller \"" +
                   muller_formula_text(*o.formula) + "\"\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Profile files: `strategy <player> at <vertex> -> <target>[: <rational>] ...`
// Weights are either given for every listed target (and must sum to 1) or for
// none (uniform over the listed targets).

inline StationaryProfile parse_profile(const SMG& g, const std::string& text) {
    StationaryProfile p(g.arena.vertex_count());
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word != "strategy") throw ParseError("expected 'strategy'", line_no, 1);
        int player;
        std::string at, vertex_name;
        if (!(ls >> player >> at >> vertex_name) || at != "at")
            throw ParseError("expected 'strategy <player> at <vertex> -> ...'", line_no, 1);
        int v = find_vertex(g.arena, vertex_name);
        if (v < 0) throw ParseError("undeclared name '" + vertex_name + "'", line_no, 1);
        if (g.arena.owner[v] != player)
            throw ParseError("vertex '" + vertex_name + "' is not owned by player " +
                                 std::to_string(player),
                             line_no, 1);
        if (p.covers(v))
            throw ParseError("second strategy for vertex '" + vertex_name + "'", line_no, 1);

        std::vector<std::pair<int, std::optional<Rational>>> picks;
        std::string arrow;
        while (ls >> arrow) {
            if (arrow != "->") throw ParseError("expected '->'", line_no, 1);
            std::string target_name;
            if (!(ls >> target_name)) throw ParseError("missing target vertex", line_no, 1);
            std::optional<Rational> weight;
            if (!target_name.empty() && target_name.back() == ':') {
                target_name.pop_back();
                std::string weight_text;
                if (!(ls >> weight_text)) throw ParseError("missing probability", line_no, 1);
                weight = parse_rational(weight_text);
                if (!weight)
                    throw ParseError("'" + weight_text + "' is not a rational literal", line_no, 1);
            }
            int w = find_vertex(g.arena, target_name);
            if (w < 0) throw ParseError("undeclared name '" + target_name + "'", line_no, 1);
            picks.emplace_back(w, weight);
        }
        if (picks.empty()) throw ParseError("strategy line lists no targets", line_no, 1);
        bool weighted = picks[0].second.has_value();
        for (const auto& [w, q] : picks)
            if (q.has_value() != weighted)
                throw ParseError("either all targets carry probabilities or none do", line_no, 1);
        DistRow row;
        for (const auto& [w, q] : picks)
            row.emplace_back(w, weighted ? *q : Rational(1, picks.size()));
        std::sort(row.begin(), row.end());
        p.rows[v] = std::move(row);
    }
    validate_profile(g, p, "parse_profile");
    return p;
}

// Fills in the forced choice at every player vertex with a single successor
// (terminal self-loops in particular), so profile files only need to list
// real decisions.
inline StationaryProfile complete_forced(const SMG& g, StationaryProfile p) {
    for (int v = 0; v < g.arena.vertex_count(); ++v)
        if (g.arena.owner[v] != kNature && !p.covers(v) && g.arena.edges[v].size() == 1)
            p.set_pure(v, g.arena.edges[v][0].target);
    return p;
}

inline std::string serialize_profile(const SMG& g, const StationaryProfile& p) {
    std::string out;
    for (int v = 0; v < g.arena.vertex_count(); ++v) {
        if (!p.covers(v)) continue;
        out += "strategy " + std::to_string(g.arena.owner[v]) + " at " + g.arena.names[v];
        for (const auto& [t, q] : p.rows[v])
            out += " -> " + g.arena.names[t] + ": " + to_string(q);
        out += "\n";
    }
    return out;
}

}  // namespace rsynth
