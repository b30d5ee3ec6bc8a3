#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rsynth/formula.hpp"

using namespace rsynth;
using Catch::Matchers::ContainsSubstring;

namespace {

using Op = Formula::CmpOp;

TermPtr random_term(std::mt19937_64& rng, int depth) {
    switch (depth <= 0 ? rng() % 2 : rng() % 4) {
        case 0:
            return t_var("x" + std::to_string(rng() % 4));
        case 1:
            return t_const(Rational(static_cast<int>(rng() % 7) - 3,
                                    1 + static_cast<int>(rng() % 4)));
        case 2: {
            std::vector<TermPtr> args;
            for (std::size_t k = 0; k < 2 + rng() % 2; ++k)
                args.push_back(random_term(rng, depth - 1));
            return t_add(std::move(args));
        }
        default: {
            std::vector<TermPtr> args;
            for (std::size_t k = 0; k < 2 + rng() % 2; ++k)
                args.push_back(random_term(rng, depth - 1));
            return t_mul(std::move(args));
        }
    }
}

FormulaPtr random_qf_formula(std::mt19937_64& rng, int depth) {
    static const Op ops[5] = {Op::Ge, Op::Gt, Op::Le, Op::Lt, Op::Eq};
    if (depth <= 0 || rng() % 3 == 0)
        return f_cmp(ops[rng() % 5], random_term(rng, 2), random_term(rng, 2));
    switch (rng() % 3) {
        case 0: {
            std::vector<FormulaPtr> args;
            for (std::size_t k = 0; k < 2 + rng() % 2; ++k)
                args.push_back(random_qf_formula(rng, depth - 1));
            return f_and(std::move(args));
        }
        case 1: {
            std::vector<FormulaPtr> args;
            for (std::size_t k = 0; k < 2 + rng() % 2; ++k)
                args.push_back(random_qf_formula(rng, depth - 1));
            return f_or(std::move(args));
        }
        default:
            return f_implies(random_qf_formula(rng, depth - 1), random_qf_formula(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("term and formula builders collapse degenerate nodes") {
    REQUIRE(t_add({})->kind == Term::Kind::Const);
    REQUIRE(t_add({})->value == 0);
    REQUIRE(t_mul({})->value == 1);
    REQUIRE(t_add({t_var("x")})->kind == Term::Kind::Var);
    REQUIRE(t_mul({t_var("x")})->name == "x");

    FormulaPtr atom = f_cmp(Op::Ge, t_var("x"), t_const(0));
    REQUIRE(f_and({atom})->kind == Formula::Kind::Cmp);
    REQUIRE(f_or({atom})->kind == Formula::Kind::Cmp);
    REQUIRE(f_exists({}, atom)->kind == Formula::Kind::Cmp);  // no binders, no node
    REQUIRE(f_forall({"x"}, atom)->kind == Formula::Kind::Forall);
}

TEST_CASE("structural equality distinguishes operators and operands") {
    FormulaPtr a = f_cmp(Op::Ge, t_add({t_var("x"), t_var("y")}), t_const(1));
    FormulaPtr b = f_cmp(Op::Ge, t_add({t_var("x"), t_var("y")}), t_const(1));
    FormulaPtr c = f_cmp(Op::Gt, t_add({t_var("x"), t_var("y")}), t_const(1));
    FormulaPtr d = f_cmp(Op::Ge, t_add({t_var("y"), t_var("x")}), t_const(1));
    REQUIRE(formula_equal(*a, *b));
    REQUIRE_FALSE(formula_equal(*a, *c));
    REQUIRE_FALSE(formula_equal(*a, *d));  // argument order matters
    REQUIRE(term_equal(*t_const(Rational(1, 2)), *t_const(Rational(2, 4))));
}

TEST_CASE("free variables respect binders") {
    FormulaPtr body =
        f_and({f_cmp(Op::Ge, t_add({t_var("x"), t_var("y")}), t_const(0)),
               f_cmp(Op::Lt, t_var("z"), t_const(1))});
    REQUIRE(free_vars(*body) == std::set<std::string>{"x", "y", "z"});
    REQUIRE(free_vars(*f_exists({"x"}, body)) == std::set<std::string>{"y", "z"});
    REQUIRE(free_vars(*f_forall({"x", "y", "z"}, body)).empty());
    REQUIRE(quantifier_free(*body));
    REQUIRE_FALSE(quantifier_free(*f_exists({"x"}, body)));
}

TEST_CASE("exact evaluation of quantifier-free formulas") {
    std::map<std::string, Rational> env = {{"x", Rational(1, 3)}, {"y", Rational(2, 3)}};
    TermPtr sum = t_add({t_var("x"), t_var("y")});
    REQUIRE(eval_term(*sum, env) == 1);
    REQUIRE(eval_term(*t_mul({t_var("x"), t_const(3)}), env) == 1);

    REQUIRE(eval_formula(*f_cmp(Op::Eq, sum, t_const(1)), env));
    REQUIRE_FALSE(eval_formula(*f_cmp(Op::Gt, sum, t_const(1)), env));
    REQUIRE(eval_formula(*f_implies(f_cmp(Op::Gt, t_var("x"), t_const(1)),
                                    f_cmp(Op::Eq, t_var("y"), t_const(0))),
                         env));  // false premise
    REQUIRE_THROWS_AS(eval_term(*t_var("ghost"), env), std::invalid_argument);
    REQUIRE_THROWS_AS(eval_formula(*f_exists({"x"}, f_cmp(Op::Ge, t_var("x"), t_const(0))), env),
                      std::invalid_argument);
}

TEST_CASE("emitted SMT-LIB text is byte-stable") {
    FormulaPtr f = f_exists(
        {"x", "y"},
        f_and({f_cmp(Op::Eq, t_add({t_var("x"), t_var("y")}), t_const(1)),
               f_cmp(Op::Ge, t_var("x"), t_const(Rational(1, 3)))}));
    REQUIRE(emit_constraints(f) ==
            "(set-logic QF_NRA)\n"
            "(declare-const x Real)\n"
            "(declare-const y Real)\n"
            "(assert (= (+ x y) 1))\n"
            "(assert (>= x (/ 1 3)))\n"
            "(check-sat)\n");

    FormulaPtr nested = f_exists(
        {"x"}, f_forall({"y"}, f_cmp(Op::Ge, t_var("y"), t_mul({t_var("x"), t_var("y")}))));
    REQUIRE(emit_constraints(nested) ==
            "(set-logic NRA)\n"
            "(declare-const x Real)\n"
            "(assert (forall ((y Real)) (>= y (* x y))))\n"
            "(check-sat)\n");

    FormulaPtr negative = f_cmp(Op::Le, t_var("x"), t_const(Rational(-1, 2)));
    REQUIRE(emit_constraints(negative) ==
            "(set-logic QF_NRA)\n"
            "(declare-const x Real)\n"
            "(assert (<= x (- (/ 1 2))))\n"
            "(check-sat)\n");
}

TEST_CASE("parsing reads back exactly what emission wrote") {
    FormulaPtr f = f_exists(
        {"a", "b"},
        f_and({f_cmp(Op::Gt, t_var("a"), t_const(0)),
               f_or({f_cmp(Op::Eq, t_var("b"), t_const(Rational(-2))),
                     f_implies(f_cmp(Op::Le, t_var("a"), t_const(1)),
                               f_cmp(Op::Lt, t_var("b"), t_var("a")))})}));
    ParsedConstraints parsed = parse_constraints(emit_constraints(f));
    REQUIRE(parsed.declared == std::vector<std::string>{"a", "b"});
    REQUIRE(formula_equal(*parsed.as_formula(), *f));

    REQUIRE_THROWS_WITH(parse_constraints("(assert (frob x 1))"),
                        ContainsSubstring("unknown formula head 'frob'"));
    REQUIRE_THROWS_WITH(parse_constraints("(flip-table)"),
                        ContainsSubstring("unknown command 'flip-table'"));
}

TEST_CASE("random sentences survive an emit and parse round trip") {
    std::mt19937_64 rng(816);
    for (int round = 0; round < 60; ++round) {
        FormulaPtr body = random_qf_formula(rng, 3);
        FormulaPtr f = f_exists({"x0", "x1", "x2", "x3"}, body);
        std::string text = emit_constraints(f);
        INFO("round " << round << "\n" << text);
        ParsedConstraints parsed = parse_constraints(text);
        REQUIRE(formula_equal(*parsed.as_formula(), *f));

        // evaluation agrees before and after the round trip
        std::map<std::string, Rational> env;
        for (int v = 0; v < 4; ++v)
            env["x" + std::to_string(v)] =
                Rational(static_cast<int>(rng() % 9) - 4, 1 + static_cast<int>(rng() % 3));
        REQUIRE(eval_formula(*body, env) == eval_formula(*parsed.body, env));
    }
}
