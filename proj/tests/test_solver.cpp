#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "weqinterp/solver.hpp"

using namespace weqinterp;

namespace {

struct Fixture {
  Context ctx;
  SortId I, E, AIE;
  Fixture() {
    I = ctx.declare_sort("I");
    E = ctx.declare_sort("E");
    AIE = ctx.array_sort(I, E);
    for (const char* n : {"a", "b", "c", "s1", "s2", "s3"}) ctx.declare_fun(n, {}, AIE);
    for (const char* n : {"i", "j", "k", "k1", "k2"}) ctx.declare_fun(n, {}, I);
    for (const char* n : {"v", "w", "v1", "v2"}) ctx.declare_fun(n, {}, E);
  }
  TermId c(const char* n) { return ctx.mk_const(n); }

  Verdict run(const std::vector<TermId>& fs) {
    std::vector<NamedAssertion> as;
    for (size_t k = 0; k < fs.size(); ++k) as.push_back({"n" + std::to_string(k), fs[k]});
    Solver s(ctx, as);
    return s.solve(0, false).verdict;
  }
};

}  // namespace

TEST_CASE_METHOD(Fixture, "select-over-store axiom instance is unsat") {
  TermId st = ctx.mk_store(c("a"), c("i"), c("v"));
  CHECK(run({ctx.mk_neq(ctx.mk_select(st, c("i")), c("v"))}) == Verdict::Unsat);
}

TEST_CASE_METHOD(Fixture, "read-over-write instance is unsat") {
  TermId st = ctx.mk_store(c("a"), c("i"), c("v"));
  CHECK(run({ctx.mk_neq(c("i"), c("j")),
             ctx.mk_neq(ctx.mk_select(st, c("j")), ctx.mk_select(c("a"), c("j")))}) ==
        Verdict::Unsat);
}

TEST_CASE_METHOD(Fixture, "ext-diff instance is unsat") {
  TermId d = ctx.mk_diff(c("a"), c("b"));
  CHECK(run({ctx.mk_neq(c("a"), c("b")),
             ctx.mk_eq(ctx.mk_select(c("a"), d), ctx.mk_select(c("b"), d))}) == Verdict::Unsat);
}

TEST_CASE_METHOD(Fixture, "distinct selects alone are satisfiable") {
  Verdict v = run({ctx.mk_neq(ctx.mk_select(c("a"), c("i")), ctx.mk_select(c("b"), c("i")))});
  CHECK(v == Verdict::Sat);
  // A model exists with two-element domains.
  OracleBounds b;
  b.sizes[I] = 1;
  b.sizes[E] = 2;
  OracleResult r = oracle_sat(
      ctx, {ctx.mk_neq(ctx.mk_select(c("a"), c("i")), ctx.mk_select(c("b"), c("i")))}, b);
  CHECK(r.sat());
}

TEST_CASE_METHOD(Fixture, "propositional structure with theory atoms") {
  TermId e1 = ctx.mk_eq(c("i"), c("j"));
  TermId e2 = ctx.mk_eq(c("j"), c("k"));
  TermId e3 = ctx.mk_eq(c("i"), c("k"));
  CHECK(run({ctx.mk_or({ctx.mk_not(e1), ctx.mk_not(e2), e3}), e1, e2, ctx.mk_not(e3)}) ==
        Verdict::Unsat);
  CHECK(run({ctx.mk_or({e1, e2}), ctx.mk_not(e3)}) == Verdict::Sat);
}

TEST_CASE_METHOD(Fixture, "congruence conflicts over predicates") {
  ctx.declare_fun("p", {I}, ctx.bool_sort());
  TermId pi = ctx.mk_app(ctx.fun_id("p"), {c("i")});
  TermId pj = ctx.mk_app(ctx.fun_id("p"), {c("j")});
  CHECK(run({pi, ctx.mk_not(pj), ctx.mk_eq(c("i"), c("j"))}) == Verdict::Unsat);
  CHECK(run({pi, ctx.mk_not(pj)}) == Verdict::Sat);
}

TEST_CASE_METHOD(Fixture, "example conflict: store chain with avoided indices") {
  std::vector<TermId> fs = {
      ctx.mk_eq(c("a"), c("s1")),
      ctx.mk_eq(ctx.mk_store(c("s1"), c("k1"), c("v1")), c("s2")),
      ctx.mk_eq(ctx.mk_store(c("s2"), c("k2"), c("v2")), c("s3")),
      ctx.mk_eq(c("s3"), c("b")),
      ctx.mk_neq(c("i"), c("k1")),
      ctx.mk_neq(c("i"), c("k2")),
      ctx.mk_eq(c("i"), c("j")),
      ctx.mk_neq(ctx.mk_select(c("a"), c("i")), ctx.mk_select(c("b"), c("j"))),
  };
  CHECK(run(fs) == Verdict::Unsat);
  // Dropping the select disequality leaves it satisfiable.
  std::vector<TermId> sat_fs(fs.begin(), fs.end() - 1);
  CHECK(run(sat_fs) == Verdict::Sat);
}

TEST_CASE_METHOD(Fixture, "extensionality through weak congruence") {
  TermId st = ctx.mk_store(c("a"), c("i"), ctx.mk_select(c("a"), c("i")));
  CHECK(run({ctx.mk_neq(st, c("a"))}) == Verdict::Unsat);
}

TEST_CASE_METHOD(Fixture, "proofs replay") {
  std::vector<TermId> fs = {
      ctx.mk_eq(c("a"), c("s1")),
      ctx.mk_eq(ctx.mk_store(c("s1"), c("k1"), c("v1")), c("s2")),
      ctx.mk_eq(c("s2"), c("b")),
      ctx.mk_neq(c("i"), c("k1")),
      ctx.mk_eq(c("i"), c("j")),
      ctx.mk_neq(ctx.mk_select(c("a"), c("i")), ctx.mk_select(c("b"), c("j"))),
  };
  std::vector<NamedAssertion> as;
  for (size_t k = 0; k < fs.size(); ++k) as.push_back({"n" + std::to_string(k), fs[k]});
  Solver s(ctx, as);
  REQUIRE(s.solve(0, false).verdict == Verdict::Unsat);
  auto violation = replay_proof(ctx, s.proof(), s.input_clauses());
  if (violation) INFO(violation->what);
  CHECK_FALSE(violation.has_value());
}

TEST_CASE_METHOD(Fixture, "tampered proofs are rejected") {
  std::vector<TermId> fs = {ctx.mk_eq(c("i"), c("j")), ctx.mk_eq(c("j"), c("k")),
                            ctx.mk_neq(c("i"), c("k"))};
  std::vector<NamedAssertion> as;
  for (size_t k = 0; k < fs.size(); ++k) as.push_back({"n" + std::to_string(k), fs[k]});
  Solver s(ctx, as);
  REQUIRE(s.solve(0, false).verdict == Verdict::Unsat);
  // Forge the input clause list: claim the disequality came from assertion 0.
  auto clauses = s.input_clauses();
  for (auto& [lits, aid] : clauses)
    if (lits.size() == 1 && !lits[0].pos) aid = 0;
  auto violation = replay_proof(ctx, s.proof(), clauses);
  CHECK(violation.has_value());
}

namespace {

// Random conjunctions in the array fragment.
struct FuzzGen {
  Context& ctx;
  std::mt19937_64 rng;
  SortId I, E, A;
  std::vector<TermId> arrays, indices, elems;

  FuzzGen(Context& c, uint64_t seed) : ctx(c), rng(seed) {
    I = ctx.declare_sort("I");
    E = ctx.declare_sort("E");
    A = ctx.array_sort(I, E);
    auto cst = [&](const std::string& n, SortId s) {
      ctx.declare_fun(n, {}, s);
      return ctx.mk_const(n);
    };
    for (int k = 0; k < 3; ++k) arrays.push_back(cst("fa" + std::to_string(k), A));
    for (int k = 0; k < 3; ++k) indices.push_back(cst("fi" + std::to_string(k), I));
    for (int k = 0; k < 2; ++k) elems.push_back(cst("fe" + std::to_string(k), E));
  }

  TermId idx() { return indices[rng() % indices.size()]; }

  TermId arr(int depth) {
    TermId a = arrays[rng() % arrays.size()];
    while (depth-- > 0 && rng() % 2) a = ctx.mk_store(a, idx(), elem(0));
    return a;
  }

  TermId elem(int depth) {
    if (depth > 0 && rng() % 2) return ctx.mk_select(arr(depth - 1), idx());
    return elems[rng() % elems.size()];
  }

  TermId literal() {
    switch (rng() % 4) {
      case 0: {
        TermId l = arr(1), r = arr(1);
        return rng() % 2 ? ctx.mk_eq(l, r) : ctx.mk_neq(l, r);
      }
      case 1: {
        TermId l = ctx.mk_select(arr(1), idx()), r = elem(1);
        return rng() % 2 ? ctx.mk_eq(l, r) : ctx.mk_neq(l, r);
      }
      case 2: {
        TermId l = idx(), r = idx();
        return rng() % 2 ? ctx.mk_eq(l, r) : ctx.mk_neq(l, r);
      }
      default: {
        TermId l = elem(1), r = elem(1);
        return rng() % 2 ? ctx.mk_eq(l, r) : ctx.mk_neq(l, r);
      }
    }
  }

  std::vector<TermId> instance(int n) {
    std::vector<TermId> fs;
    for (int k = 0; k < n; ++k) {
      TermId l = literal();
      if (l != ctx.mk_true()) fs.push_back(l);
    }
    return fs;
  }
};

}  // namespace

TEST_CASE("fuzz: solver verdict matches the oracle") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    Context ctx;
    FuzzGen gen(ctx, seed);
    std::vector<TermId> fs = gen.instance(2 + seed % 5);
    std::vector<NamedAssertion> as;
    for (size_t k = 0; k < fs.size(); ++k) as.push_back({"n" + std::to_string(k), fs[k]});

    Solver s(ctx, as);
    Verdict v = s.solve(0, false).verdict;
    OracleResult o = oracle_sat(ctx, fs);
    INFO("seed " << seed);
    CHECK((v == Verdict::Sat) == o.sat());
  }
}
