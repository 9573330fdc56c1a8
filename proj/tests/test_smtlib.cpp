#include <catch2/catch_amalgamated.hpp>

#include "weqinterp/smtlib.hpp"

using namespace weqinterp;

TEST_CASE("parse a small script with named assertions") {
  Context ctx;
  Parser p(ctx);
  Script s = p.parse(
      "(set-logic QF_AX)\n"
      "(declare-sort I 0)\n"
      "(declare-sort E 0)\n"
      "(declare-const a (Array I E))\n"
      "(assert (! (= a a) :named p1))\n"
      "(check-sat)\n");
  REQUIRE(s.assertions.size() == 1);
  CHECK(s.assertions[0].name == "p1");
  CHECK(s.assertions[0].formula == ctx.mk_true());
  CHECK(s.logic == "QF_AX");
}

TEST_CASE("unsupported features are rejected") {
  Context ctx;
  Parser p(ctx);
  CHECK_THROWS_AS(p.parse("(declare-sort I 0)(declare-const i I)"
                          "(assert (forall ((x I)) (= x i)))"),
                  UnsupportedFeature);
  CHECK_THROWS_AS(p.parse("(declare-const x Int)(assert (= x x))"), UnsupportedFeature);
  CHECK_THROWS_AS(p.parse("(declare-sort I 0)(declare-sort E 0)"
                          "(declare-const m (Array I (Array I E)))"),
                  UnsupportedFeature);
}

TEST_CASE("parse errors carry positions") {
  Context ctx;
  Parser p(ctx);
  try {
    p.parse("(declare-sort I 0)\n(assert (= q q))");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(p.parse("(assert"), ParseError);
}

TEST_CASE("print uses lets for shared subterms and reparses identically") {
  Context ctx;
  SortId I = ctx.declare_sort("I");
  SortId E = ctx.declare_sort("E");
  SortId A = ctx.array_sort(I, E);
  ctx.declare_fun("a", {}, A);
  ctx.declare_fun("b", {}, A);
  TermId a = ctx.mk_const("a");
  TermId b = ctx.mk_const("b");

  CHECK(print_term(ctx, ctx.mk_eq(a, b)) == "(= a b)");

  // The m=2 rewrite chain shares three compound prefixes: the first diff,
  // the one-step store, and the second diff.
  TermId r2 = ctx.mk_rewrite(a, b, 2);
  std::string s = print_term(ctx, r2);
  size_t lets = 0;
  for (size_t pos = 0; (pos = s.find("(let ", pos)) != std::string::npos; ++pos) ++lets;
  CHECK(lets == 3);

  Parser p(ctx);
  CHECK(p.parse_term_text(s) == r2);

  TermId w = ctx.mk_weq(a, b, 3, ctx.mk_eq(ctx.mk_hole(I), ctx.mk_diff(a, b)));
  CHECK(p.parse_term_text(print_term(ctx, w)) == w);
}

TEST_CASE("parse-print-parse is structurally idempotent") {
  Context ctx;
  Parser p(ctx);
  Script s1 = p.parse(
      "(declare-sort I 0)(declare-sort E 0)\n"
      "(declare-const a (Array I E))(declare-const b (Array I E))\n"
      "(declare-const i I)(declare-const j I)(declare-const v E)\n"
      "(declare-fun p (I) Bool)\n"
      "(assert (! (= b (store a i v)) :named h1))\n"
      "(assert (! (or (not (p j)) (distinct (select a j) (select b j))) :named h2))\n");
  for (const auto& na : s1.assertions) {
    std::string text = print_term(ctx, na.formula);
    CHECK(p.parse_term_text(text) == na.formula);
  }
}

TEST_CASE("printing internal symbols is an internal error") {
  Context ctx;
  SortId I = ctx.declare_sort("I");
  TermId x = ctx.mk_aux("x_ij", I, kNoTerm);
  ctx.declare_fun("i", {}, I);
  TermId t = ctx.mk_eq(x, ctx.mk_const("i"));
  CHECK_THROWS_AS(print_term(ctx, t), std::logic_error);
  CHECK_NOTHROW(debug_term(ctx, t));
}
