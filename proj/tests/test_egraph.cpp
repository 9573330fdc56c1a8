#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "weqinterp/egraph.hpp"

using namespace weqinterp;

namespace {

struct Fixture {
  Context ctx;
  SortId I;
  std::vector<TermId> c;  // constants c0..c9
  Fixture() {
    I = ctx.declare_sort("I");
    for (int k = 0; k < 10; ++k) {
      std::string n = "c" + std::to_string(k);
      ctx.declare_fun(n, {}, I);
      c.push_back(ctx.mk_const(n));
    }
  }
  Lit eq_lit(TermId a, TermId b, bool pos = true) { return {ctx.mk_eq(a, b), pos}; }
};

}  // namespace

TEST_CASE_METHOD(Fixture, "transitivity conflict with explanation") {
  EGraph eg(ctx);
  for (TermId t : c) eg.add_term(t);
  REQUIRE(eg.assert_eq(c[0], c[1], eq_lit(c[0], c[1])));
  REQUIRE(eg.assert_eq(c[1], c[2], eq_lit(c[1], c[2])));
  REQUIRE_FALSE(eg.assert_diseq(c[0], c[2], eq_lit(c[0], c[2], false)));
  const EGraphConflict& cf = eg.conflict();
  CHECK(cf.dlit.has_value());

  std::vector<Lit> ex = eg.explain(c[0], c[2]);
  REQUIRE(ex.size() == 2);
  for (const Lit& l : ex) CHECK(l.pos);
}

TEST_CASE_METHOD(Fixture, "congruence propagates through applications") {
  ctx.declare_fun("f", {I}, I);
  uint32_t f = ctx.fun_id("f");
  TermId fi = ctx.mk_app(f, {c[0]});
  TermId fj = ctx.mk_app(f, {c[1]});
  EGraph eg(ctx);
  eg.add_term(fi);
  eg.add_term(fj);
  CHECK_FALSE(eg.same(fi, fj));
  REQUIRE(eg.assert_eq(c[0], c[1], eq_lit(c[0], c[1])));
  CHECK(eg.same(fi, fj));

  std::vector<Lit> ex = eg.explain(fi, fj);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].atom == ctx.mk_eq(c[0], c[1]));
}

TEST_CASE_METHOD(Fixture, "explain of a term with itself is empty") {
  EGraph eg(ctx);
  eg.add_term(c[0]);
  CHECK(eg.explain(c[0], c[0]).empty());
}

TEST_CASE_METHOD(Fixture, "snapshot and rollback restore the exact state") {
  ctx.declare_fun("g", {I, I}, I);
  uint32_t g = ctx.fun_id("g");
  TermId g01 = ctx.mk_app(g, {c[0], c[1]});
  TermId g23 = ctx.mk_app(g, {c[2], c[3]});
  EGraph eg(ctx);
  eg.add_term(g01);
  eg.add_term(g23);
  for (TermId t : c) eg.add_term(t);

  size_t m0 = eg.mark();
  REQUIRE(eg.assert_eq(c[0], c[2], eq_lit(c[0], c[2])));
  size_t m1 = eg.mark();
  REQUIRE(eg.assert_eq(c[1], c[3], eq_lit(c[1], c[3])));
  CHECK(eg.same(g01, g23));
  REQUIRE(eg.assert_diseq(c[4], c[5], eq_lit(c[4], c[5], false)));

  eg.undo_to(m1);
  CHECK(eg.same(c[0], c[2]));
  CHECK_FALSE(eg.same(c[1], c[3]));
  CHECK_FALSE(eg.same(g01, g23));
  // diseq gone: asserting the equality now succeeds
  REQUIRE(eg.assert_eq(c[4], c[5], eq_lit(c[4], c[5])));

  eg.undo_to(m0);
  CHECK_FALSE(eg.same(c[0], c[2]));
  CHECK_FALSE(eg.same(c[4], c[5]));

  // And the same merges can be replayed cleanly after rollback.
  REQUIRE(eg.assert_eq(c[0], c[2], eq_lit(c[0], c[2])));
  REQUIRE(eg.assert_eq(c[1], c[3], eq_lit(c[1], c[3])));
  CHECK(eg.same(g01, g23));
}

TEST_CASE_METHOD(Fixture, "merging classes with a recorded disequality conflicts") {
  EGraph eg(ctx);
  for (TermId t : c) eg.add_term(t);
  REQUIRE(eg.assert_diseq(c[0], c[1], eq_lit(c[0], c[1], false)));
  REQUIRE(eg.assert_eq(c[1], c[2], eq_lit(c[1], c[2])));
  REQUIRE_FALSE(eg.assert_eq(c[0], c[2], eq_lit(c[0], c[2])));
  const EGraphConflict& cf = eg.conflict();
  CHECK(cf.has_bridge);
  CHECK(cf.dlit.has_value());
  CHECK_FALSE(cf.dlit->pos);
}

// Replay soundness: for random equality chains, re-asserting only the
// explanation in a fresh graph re-derives the equality.
TEST_CASE_METHOD(Fixture, "explanations replay on random instances") {
  ctx.declare_fun("f", {I}, I);
  uint32_t f = ctx.fun_id("f");
  std::mt19937_64 rng(7);

  for (int round = 0; round < 200; ++round) {
    std::vector<TermId> terms = c;
    for (int k = 0; k < 8; ++k)
      terms.push_back(ctx.mk_app(f, {terms[rng() % terms.size()]}));

    EGraph eg(ctx);
    for (TermId t : terms) eg.add_term(t);
    std::vector<std::pair<TermId, TermId>> asserted;
    for (int k = 0; k < 9; ++k) {
      TermId x = terms[rng() % terms.size()];
      TermId y = terms[rng() % terms.size()];
      if (ctx.mk_eq(x, y) == ctx.mk_true()) continue;
      eg.assert_eq(x, y, {ctx.mk_eq(x, y), true});
      asserted.emplace_back(x, y);
    }
    if (asserted.empty()) continue;
    auto [s, t] = asserted[rng() % asserted.size()];
    REQUIRE(eg.same(s, t));
    std::vector<Lit> ex = eg.explain(s, t);

    EGraph fresh(ctx);
    for (TermId u : terms) fresh.add_term(u);
    for (const Lit& l : ex) {
      REQUIRE(l.pos);
      const Term& atom = ctx.term(l.atom);
      REQUIRE(atom.kind == Kind::Eq);
      REQUIRE(fresh.assert_eq(atom.args[0], atom.args[1], l));
    }
    CHECK(fresh.same(s, t));
    // Explanations contain only asserted literals.
    for (const Lit& l : ex) {
      const Term& atom = ctx.term(l.atom);
      bool found = false;
      for (auto& [x, y] : asserted)
        if (ctx.mk_eq(x, y) == ctx.mk_eq(atom.args[0], atom.args[1])) found = true;
      CHECK(found);
    }
  }
}
