#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsynth/rational.hpp"

namespace rsynth {

// Terms and formulas of real arithmetic, just expressive enough for the
// synthesis sentences: +, *, rational constants, comparisons, Boolean
// connectives and quantifier blocks. Builders normalize away 0/1-ary
// connectives so the printed form parses back to a structurally equal tree.

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    enum class Kind { Const, Var, Add, Mul };
    Kind kind = Kind::Const;
    Rational value;
    std::string name;
    std::vector<TermPtr> args;
};

inline TermPtr t_const(Rational q) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Const;
    t->value = std::move(q);
    return t;
}
inline TermPtr t_var(std::string name) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Var;
    t->name = std::move(name);
    return t;
}
inline TermPtr t_add(std::vector<TermPtr> args) {
    if (args.empty()) return t_const(0);
    if (args.size() == 1) return args[0];
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Add;
    t->args = std::move(args);
    return t;
}
inline TermPtr t_mul(std::vector<TermPtr> args) {
    if (args.empty()) return t_const(1);
    if (args.size() == 1) return args[0];
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Mul;
    t->args = std::move(args);
    return t;
}

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { Cmp, And, Or, Implies, Exists, Forall };
    enum class CmpOp { Ge, Gt, Le, Lt, Eq };
    Kind kind = Kind::And;
    CmpOp op = CmpOp::Eq;
    TermPtr lhs, rhs;                // Cmp
    std::vector<FormulaPtr> args;    // And, Or (n-ary), Implies (exactly 2)
    std::vector<std::string> bound;  // Exists, Forall
    FormulaPtr body;
};

inline FormulaPtr f_cmp(Formula::CmpOp op, TermPtr lhs, TermPtr rhs) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Cmp;
    f->op = op;
    f->lhs = std::move(lhs);
    f->rhs = std::move(rhs);
    return f;
}
// empty And is "true", empty Or is "false"
inline FormulaPtr f_and(std::vector<FormulaPtr> args) {
    if (args.size() == 1) return args[0];
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::And;
    f->args = std::move(args);
    return f;
}
inline FormulaPtr f_or(std::vector<FormulaPtr> args) {
    if (args.size() == 1) return args[0];
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Or;
    f->args = std::move(args);
    return f;
}
inline FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Implies;
    f->args = {std::move(a), std::move(b)};
    return f;
}
inline FormulaPtr f_quant(Formula::Kind kind, std::vector<std::string> bound, FormulaPtr body) {
    if (bound.empty()) return body;
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->bound = std::move(bound);
    f->body = std::move(body);
    return f;
}
inline FormulaPtr f_exists(std::vector<std::string> bound, FormulaPtr body) {
    return f_quant(Formula::Kind::Exists, std::move(bound), std::move(body));
}
inline FormulaPtr f_forall(std::vector<std::string> bound, FormulaPtr body) {
    return f_quant(Formula::Kind::Forall, std::move(bound), std::move(body));
}

// ---------------------------------------------------------------------------
// Structure

inline bool term_equal(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Term::Kind::Const: return a.value == b.value;
        case Term::Kind::Var: return a.name == b.name;
        default:
            if (a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!term_equal(*a.args[i], *b.args[i])) return false;
            return true;
    }
}

inline bool formula_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Formula::Kind::Cmp:
            return a.op == b.op && term_equal(*a.lhs, *b.lhs) && term_equal(*a.rhs, *b.rhs);
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            if (a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!formula_equal(*a.args[i], *b.args[i])) return false;
            return true;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            return a.bound == b.bound && formula_equal(*a.body, *b.body);
    }
    return false;
}

inline void term_vars(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Var) out.insert(t.name);
    for (const auto& a : t.args) term_vars(*a, out);
}

inline void free_vars(const Formula& f, std::set<std::string>& bound_here,
                      std::set<std::string>& out) {
    switch (f.kind) {
        case Formula::Kind::Cmp: {
            std::set<std::string> vars;
            term_vars(*f.lhs, vars);
            term_vars(*f.rhs, vars);
            for (const auto& v : vars)
                if (!bound_here.count(v)) out.insert(v);
            return;
        }
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            for (const auto& a : f.args) free_vars(*a, bound_here, out);
            return;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            std::vector<std::string> added;
            for (const auto& v : f.bound)
                if (bound_here.insert(v).second) added.push_back(v);
            free_vars(*f.body, bound_here, out);
            for (const auto& v : added) bound_here.erase(v);
            return;
        }
    }
}

inline std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> bound, out;
    free_vars(f, bound, out);
    return out;
}

inline bool quantifier_free(const Formula& f) {
    switch (f.kind) {
        case Formula::Kind::Cmp: return true;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: return false;
        default:
            for (const auto& a : f.args)
                if (!quantifier_free(*a)) return false;
            return true;
    }
}

// ---------------------------------------------------------------------------
// Exact evaluation of quantifier-free formulas (used to certify satisfying
// assignments of emitted sentences without an external solver).

inline Rational eval_term(const Term& t, const std::map<std::string, Rational>& env) {
    switch (t.kind) {
        case Term::Kind::Const:
            return t.value;
        case Term::Kind::Var: {
            auto it = env.find(t.name);
            if (it == env.end())
                throw std::invalid_argument("eval_term: unbound variable " + t.name);
            return it->second;
        }
        case Term::Kind::Add: {
            Rational acc = 0;
            for (const auto& a : t.args) acc += eval_term(*a, env);
            return acc;
        }
        case Term::Kind::Mul: {
            Rational acc = 1;
            for (const auto& a : t.args) acc *= eval_term(*a, env);
            return acc;
        }
    }
    throw std::logic_error("eval_term: bad kind");
}

inline bool eval_formula(const Formula& f, const std::map<std::string, Rational>& env) {
    switch (f.kind) {
        case Formula::Kind::Cmp: {
            Rational l = eval_term(*f.lhs, env), r = eval_term(*f.rhs, env);
            switch (f.op) {
                case Formula::CmpOp::Ge: return l >= r;
                case Formula::CmpOp::Gt: return l > r;
                case Formula::CmpOp::Le: return l <= r;
                case Formula::CmpOp::Lt: return l < r;
                case Formula::CmpOp::Eq: return l == r;
            }
            throw std::logic_error("eval_formula: bad op");
        }
        case Formula::Kind::And:
            for (const auto& a : f.args)
                if (!eval_formula(*a, env)) return false;
            return true;
        case Formula::Kind::Or:
            for (const auto& a : f.args)
                if (eval_formula(*a, env)) return true;
            return false;
        case Formula::Kind::Implies:
            return !eval_formula(*f.args[0], env) || eval_formula(*f.args[1], env);
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            throw std::invalid_argument("eval_formula: quantified formula");
    }
    throw std::logic_error("eval_formula: bad kind");
}

// ---------------------------------------------------------------------------
// SMT-LIB v2 emission

namespace detail {

inline std::string smt_const(const Rational& q) {
    bool negative = q < 0;
    Rational a = negative ? Rational(-q) : q;
    std::string body = denominator(a) == 1
                           ? numerator(a).str()
                           : "(/ " + numerator(a).str() + " " + denominator(a).str() + ")";
    return negative ? "(- " + body + ")" : body;
}

inline std::string smt_term(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Const:
            return smt_const(t.value);
        case Term::Kind::Var:
            return t.name;
        case Term::Kind::Add:
        case Term::Kind::Mul: {
            std::string out = t.kind == Term::Kind::Add ? "(+" : "(*";
            for (const auto& a : t.args) out += " " + smt_term(*a);
            return out + ")";
        }
    }
    throw std::logic_error("smt_term: bad kind");
}

inline std::string smt_formula(const Formula& f) {
    switch (f.kind) {
        case Formula::Kind::Cmp: {
            const char* op = nullptr;
            switch (f.op) {
                case Formula::CmpOp::Ge: op = ">="; break;
                case Formula::CmpOp::Gt: op = ">"; break;
                case Formula::CmpOp::Le: op = "<="; break;
                case Formula::CmpOp::Lt: op = "<"; break;
                case Formula::CmpOp::Eq: op = "="; break;
            }
            return std::string("(") + op + " " + smt_term(*f.lhs) + " " + smt_term(*f.rhs) + ")";
        }
        case Formula::Kind::And:
        case Formula::Kind::Or: {
            if (f.args.empty()) return f.kind == Formula::Kind::And ? "true" : "false";
            std::string out = f.kind == Formula::Kind::And ? "(and" : "(or";
            for (const auto& a : f.args) out += " " + smt_formula(*a);
            return out + ")";
        }
        case Formula::Kind::Implies:
            return "(=> " + smt_formula(*f.args[0]) + " " + smt_formula(*f.args[1]) + ")";
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            std::string out = f.kind == Formula::Kind::Exists ? "(exists (" : "(forall (";
            for (std::size_t i = 0; i < f.bound.size(); ++i) {
                if (i) out += " ";
                out += "(" + f.bound[i] + " Real)";
            }
            return out + ") " + smt_formula(*f.body) + ")";
        }
    }
    throw std::logic_error("smt_formula: bad kind");
}

}  // namespace detail

// Deterministic SMT-LIB v2 text. A top-level existential block becomes
// declare-const lines; a quantifier-free formula declares its free variables;
// each top-level conjunct becomes one assert. Everything else is asserted as
// a single quantified formula under logic NRA.
inline std::string emit_constraints(const FormulaPtr& f) {
    std::vector<std::string> declares;
    FormulaPtr rest = f;
    if (f->kind == Formula::Kind::Exists) {
        declares = f->bound;
        rest = f->body;
    } else if (quantifier_free(*f)) {
        for (const auto& v : free_vars(*f)) declares.push_back(v);
    }
    std::string out;
    out += "(set-logic " + std::string(quantifier_free(*rest) ? "QF_NRA" : "NRA") + ")\n";
    for (const auto& v : declares) out += "(declare-const " + v + " Real)\n";
    if (rest->kind == Formula::Kind::And) {
        for (const auto& c : rest->args) out += "(assert " + detail::smt_formula(*c) + ")\n";
    } else {
        out += "(assert " + detail::smt_formula(*rest) + ")\n";
    }
    out += "(check-sat)\n";
    return out;
}

// ---------------------------------------------------------------------------
// Round-trip parser for the emitted subset of SMT-LIB.

struct ParsedConstraints {
    std::vector<std::string> declared;
    FormulaPtr body;  // conjunction of the asserts

    // The closed sentence: declared constants read back as an existential.
    FormulaPtr as_formula() const {
        return declared.empty() ? body : f_exists(declared, body);
    }
};

namespace detail {

struct Sexpr {
    std::string atom;  // empty iff list
    bool is_atom = false;
    std::vector<Sexpr> items;
};

inline std::vector<std::string> smt_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '(' || c == ')') {
            tokens.push_back(std::string(1, c));
            ++i;
        } else {
            std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
                   text[i] != '(' && text[i] != ')' && text[i] != ';')
                ++i;
            tokens.push_back(text.substr(start, i - start));
        }
    }
    return tokens;
}

inline Sexpr read_sexpr(const std::vector<std::string>& tokens, std::size_t& pos) {
    if (pos >= tokens.size()) throw std::runtime_error("parse_constraints: unexpected end");
    if (tokens[pos] == "(") {
        ++pos;
        Sexpr list;
        while (pos < tokens.size() && tokens[pos] != ")") list.items.push_back(read_sexpr(tokens, pos));
        if (pos >= tokens.size()) throw std::runtime_error("parse_constraints: missing ')'");
        ++pos;
        return list;
    }
    Sexpr atom;
    atom.is_atom = true;
    atom.atom = tokens[pos++];
    return atom;
}

inline TermPtr term_of_sexpr(const Sexpr& s);
inline FormulaPtr formula_of_sexpr(const Sexpr& s);

inline TermPtr term_of_sexpr(const Sexpr& s) {
    if (s.is_atom) {
        if (auto q = parse_rational(s.atom)) return t_const(*q);
        return t_var(s.atom);
    }
    if (s.items.empty() || !s.items[0].is_atom)
        throw std::runtime_error("parse_constraints: bad term");
    const std::string& head = s.items[0].atom;
    if (head == "/") {
        if (s.items.size() != 3) throw std::runtime_error("parse_constraints: bad '/'");
        TermPtr num = term_of_sexpr(s.items[1]), den = term_of_sexpr(s.items[2]);
        if (num->kind != Term::Kind::Const || den->kind != Term::Kind::Const)
            throw std::runtime_error("parse_constraints: non-constant division");
        return t_const(num->value / den->value);
    }
    if (head == "-") {
        if (s.items.size() != 2) throw std::runtime_error("parse_constraints: bad '-'");
        TermPtr inner = term_of_sexpr(s.items[1]);
        if (inner->kind != Term::Kind::Const)
            throw std::runtime_error("parse_constraints: non-constant negation");
        return t_const(-inner->value);
    }
    if (head == "+" || head == "*") {
        std::vector<TermPtr> args;
        for (std::size_t i = 1; i < s.items.size(); ++i) args.push_back(term_of_sexpr(s.items[i]));
        return head == "+" ? t_add(std::move(args)) : t_mul(std::move(args));
    }
    throw std::runtime_error("parse_constraints: unknown term head '" + head + "'");
}

inline FormulaPtr formula_of_sexpr(const Sexpr& s) {
    if (s.is_atom) {
        if (s.atom == "true") return f_and({});
        if (s.atom == "false") return f_or({});
        throw std::runtime_error("parse_constraints: bare atom '" + s.atom + "' is not a formula");
    }
    if (s.items.empty() || !s.items[0].is_atom)
        throw std::runtime_error("parse_constraints: bad formula");
    const std::string& head = s.items[0].atom;
    auto cmp = [&](Formula::CmpOp op) {
        if (s.items.size() != 3) throw std::runtime_error("parse_constraints: bad comparison");
        return f_cmp(op, term_of_sexpr(s.items[1]), term_of_sexpr(s.items[2]));
    };
    if (head == ">=") return cmp(Formula::CmpOp::Ge);
    if (head == ">") return cmp(Formula::CmpOp::Gt);
    if (head == "<=") return cmp(Formula::CmpOp::Le);
    if (head == "<") return cmp(Formula::CmpOp::Lt);
    if (head == "=") return cmp(Formula::CmpOp::Eq);
    if (head == "and" || head == "or") {
        std::vector<FormulaPtr> args;
        for (std::size_t i = 1; i < s.items.size(); ++i)
            args.push_back(formula_of_sexpr(s.items[i]));
        return head == "and" ? f_and(std::move(args)) : f_or(std::move(args));
    }
    if (head == "=>") {
        if (s.items.size() != 3) throw std::runtime_error("parse_constraints: bad '=>'");
        return f_implies(formula_of_sexpr(s.items[1]), formula_of_sexpr(s.items[2]));
    }
    if (head == "exists" || head == "forall") {
        if (s.items.size() != 3 || s.items[1].is_atom)
            throw std::runtime_error("parse_constraints: bad quantifier");
        std::vector<std::string> bound;
        for (const Sexpr& b : s.items[1].items) {
            if (b.is_atom || b.items.size() != 2 || !b.items[0].is_atom)
                throw std::runtime_error("parse_constraints: bad binder");
            bound.push_back(b.items[0].atom);
        }
        FormulaPtr body = formula_of_sexpr(s.items[2]);
        return head == "exists" ? f_exists(std::move(bound), std::move(body))
                                : f_forall(std::move(bound), std::move(body));
    }
    throw std::runtime_error("parse_constraints: unknown formula head '" + head + "'");
}

}  // namespace detail

inline ParsedConstraints parse_constraints(const std::string& text) {
    auto tokens = detail::smt_tokens(text);
    std::size_t pos = 0;
    ParsedConstraints out;
    std::vector<FormulaPtr> asserts;
    while (pos < tokens.size()) {
        detail::Sexpr s = detail::read_sexpr(tokens, pos);
        if (s.is_atom || s.items.empty() || !s.items[0].is_atom)
            throw std::runtime_error("parse_constraints: bad command");
        const std::string& head = s.items[0].atom;
        if (head == "set-logic" || head == "set-info" || head == "check-sat" || head == "exit")
            continue;
        if (head == "declare-const") {
            if (s.items.size() != 3 || !s.items[1].is_atom)
                throw std::runtime_error("parse_constraints: bad declare-const");
            out.declared.push_back(s.items[1].atom);
            continue;
        }
        if (head == "assert") {
            if (s.items.size() != 2) throw std::runtime_error("parse_constraints: bad assert");
            asserts.push_back(detail::formula_of_sexpr(s.items[1]));
            continue;
        }
        throw std::runtime_error("parse_constraints: unknown command '" + head + "'");
    }
    out.body = f_and(std::move(asserts));
    return out;
}

}  // namespace rsynth
