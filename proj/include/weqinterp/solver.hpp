// Solver facade: per-assertion Tseitin clausification, theory integration
// of the congruence and array engines, proof construction and replay.

#ifndef WEQINTERP_SOLVER_HPP
#define WEQINTERP_SOLVER_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weqinterp/cdcl.hpp"
#include "weqinterp/oracle.hpp"
#include "weqinterp/smtlib.hpp"
#include "weqinterp/weakgraph.hpp"

namespace weqinterp {

// Tseitin-style clausification, one proxy namespace per assertion so every
// auxiliary atom stays partition-pure.
class Clausifier {
 public:
  explicit Clausifier(Context& ctx) : ctx_(ctx) {}

  struct Out {
    std::vector<std::pair<std::vector<Lit>, uint32_t>> clauses;  // clause, assertion
    std::unordered_map<TermId, uint32_t> proxy_assertion;        // proxy atom -> assertion
  };

  Out run(const std::vector<NamedAssertion>& assertions) {
    Out out;
    for (uint32_t aid = 0; aid < assertions.size(); ++aid)
      top(assertions[aid].formula, aid, out);
    return out;
  }

 private:
  enum class V { True, False, Lit };
  struct Enc {
    V v;
    Lit lit;
  };

  void top(TermId f, uint32_t aid, Out& out) {
    const Term& n = ctx_.term(f);
    if (f == ctx_.mk_true()) return;
    if (n.kind == Kind::And) {
      for (TermId c : n.args) top(c, aid, out);
      return;
    }
    emit_disjunction(f, aid, out);
  }

  void emit_disjunction(TermId f, uint32_t aid, Out& out) {
    std::vector<TermId> disj;
    flatten_or(f, disj);
    std::vector<Lit> clause;
    for (TermId d : disj) {
      Enc e = enc(d, true, aid, out);
      if (e.v == V::True) return;  // satisfied clause
      if (e.v == V::False) continue;
      clause.push_back(e.lit);
    }
    out.clauses.emplace_back(std::move(clause), aid);
  }

  void flatten_or(TermId f, std::vector<TermId>& disj) {
    const Term& n = ctx_.term(f);
    if (n.kind == Kind::Or) {
      for (TermId c : n.args) flatten_or(c, disj);
    } else {
      disj.push_back(f);
    }
  }

  Enc enc(TermId t, bool pos, uint32_t aid, Out& out) {
    const Term& n = ctx_.term(t);
    switch (n.kind) {
      case Kind::True: return {pos ? V::True : V::False, {}};
      case Kind::False: return {pos ? V::False : V::True, {}};
      case Kind::Not: return enc(n.args[0], !pos, aid, out);
      case Kind::Eq:
      case Kind::EqPred:
        return {V::Lit, {t, pos}};
      case Kind::App:
        if (n.sort != ctx_.bool_sort())
          throw std::logic_error("clausify: non-boolean application as literal");
        return {V::Lit, {t, pos}};
      case Kind::And:
      case Kind::Or: {
        TermId p = proxy(t, aid, out);
        define(p, t, pos, aid, out);
        return {V::Lit, {p, pos}};
      }
      default:
        throw std::logic_error("clausify: unexpected term kind");
    }
  }

  TermId proxy(TermId t, uint32_t aid, Out& out) {
    auto key = std::make_pair(aid, t);
    auto it = proxies_.find(key);
    if (it != proxies_.end()) return it->second;
    std::string name = ".p" + std::to_string(aid) + "." + std::to_string(proxies_.size());
    uint32_t f = ctx_.declare_fun(name, {}, ctx_.bool_sort());
    TermId p = ctx_.mk_app(f, {});
    proxies_.emplace(key, p);
    out.proxy_assertion.emplace(p, aid);
    return p;
  }

  void define(TermId p, TermId t, bool pos, uint32_t aid, Out& out) {
    auto key = std::make_tuple(aid, t, pos);
    if (!defined_.insert(key).second) return;
    const Term& n = ctx_.term(t);
    bool conj = n.kind == Kind::And;
    if (pos) {
      // p -> t
      if (conj) {
        for (TermId c : n.args) {
          std::vector<Lit> cl{{p, false}};
          Enc e = enc(c, true, aid, out);
          if (e.v == V::True) continue;
          if (e.v == V::False) { out.clauses.emplace_back(std::move(cl), aid); continue; }
          cl.push_back(e.lit);
          out.clauses.emplace_back(std::move(cl), aid);
        }
      } else {
        std::vector<Lit> cl{{p, false}};
        bool sat = false;
        for (TermId c : n.args) {
          Enc e = enc(c, true, aid, out);
          if (e.v == V::True) { sat = true; break; }
          if (e.v == V::False) continue;
          cl.push_back(e.lit);
        }
        if (!sat) out.clauses.emplace_back(std::move(cl), aid);
      }
    } else {
      // t -> p
      if (conj) {
        std::vector<Lit> cl{{p, true}};
        bool sat = false;
        for (TermId c : n.args) {
          Enc e = enc(c, false, aid, out);
          if (e.v == V::True) { sat = true; break; }
          if (e.v == V::False) continue;
          cl.push_back(e.lit);
        }
        if (!sat) out.clauses.emplace_back(std::move(cl), aid);
      } else {
        for (TermId c : n.args) {
          std::vector<Lit> cl{{p, true}};
          Enc e = enc(c, false, aid, out);
          if (e.v == V::True) continue;
          if (e.v == V::False) { out.clauses.emplace_back(std::move(cl), aid); continue; }
          cl.push_back(e.lit);
          out.clauses.emplace_back(std::move(cl), aid);
        }
      }
    }
  }

  Context& ctx_;
  std::map<std::pair<uint32_t, TermId>, TermId> proxies_;
  std::set<std::tuple<uint32_t, TermId, bool>> defined_;
};

enum class Verdict { Sat, Unsat };

struct SolveResult {
  Verdict verdict;
  std::optional<FiniteModel> model;  // Sat only, when the oracle is affordable
};

class Solver : public TheoryClient {
 public:
  Solver(Context& ctx, std::vector<NamedAssertion> assertions)
      : ctx_(ctx), assertions_(std::move(assertions)), eg_(ctx), cdcl_(ctx), arrays_(ctx, eg_) {
    cdcl_.set_theory(this);
  }

  SolveResult solve(uint64_t timeout_ms = 0, bool want_model = true) {
    assert(!solved_ && "a Solver instance is single-shot");
    solved_ = true;
    ++solve_count_;
    init();
    Cdcl::Status st = cdcl_.solve(timeout_ms);
    if (st == Cdcl::Status::Unsat) return {Verdict::Unsat, std::nullopt};
    SolveResult r{Verdict::Sat, std::nullopt};
    if (want_model) {
      std::vector<TermId> fs;
      for (const auto& a : assertions_) fs.push_back(a.formula);
      try {
        OracleResult o = oracle_sat(ctx_, fs);
        assert(o.sat());
        if (o.sat()) r.model = std::move(o.model);
      } catch (const BoundTooLarge&) {
      }
    }
    return r;
  }

  const Proof& proof() const { return cdcl_.proof(); }
  uint64_t solve_count() const { return solve_count_; }
  const std::unordered_map<TermId, uint32_t>& proxy_assertion() const { return proxy_assertion_; }
  const std::vector<NamedAssertion>& assertions() const { return assertions_; }
  const std::vector<std::pair<std::vector<Lit>, uint32_t>>& input_clauses() const {
    return input_clauses_;
  }

  // ---- TheoryClient ----

  void on_assert(Lit l) override {
    marks_.push_back(eg_.mark());
    flags_.push_back(try_assert(l));
  }

  void on_backtrack(size_t trail_size) override {
    if (trail_size < marks_.size()) {
      eg_.undo_to(marks_[trail_size]);
      marks_.resize(trail_size);
      flags_.resize(trail_size);
    }
  }

  bool final_check() override {
    // Every boolean assignment must be reflected in the congruence state
    // before the array reasoning runs. Re-assertions stay unflagged: they
    // sit above the per-position marks and vanish on the next backtrack.
    std::vector<Lit> assigned = cdcl_.assignment();
    assert(assigned.size() == flags_.size());
    bool added = false;
    for (size_t k = 0; k < assigned.size(); ++k) {
      if (flags_[k]) continue;
      if (!try_assert(assigned[k])) added = true;
    }
    if (added) return true;

    arrays_.refresh_index();
    for (auto& [clause, info] : arrays_.roweq_lemmas())
      added |= add_theory_clause(clause, std::move(info));
    std::vector<std::pair<TermId, TermId>> diseqs;
    for (const Lit& l : assigned) {
      if (l.pos) continue;
      const Term& n = ctx_.term(l.atom);
      if (n.kind != Kind::Eq) continue;
      if (ctx_.sort(ctx_.sort_of(n.args[0])).kind != SortKind::Array) continue;
      diseqs.emplace_back(n.args[0], n.args[1]);
    }
    for (auto& [clause, info] : arrays_.weqext_lemmas(diseqs))
      added |= add_theory_clause(clause, std::move(info));
    return added;
  }

 private:
  void init() {
    std::vector<TermId> fs;
    for (const auto& a : assertions_) fs.push_back(a.formula);
    arrays_.activate(fs);

    Clausifier cl(ctx_);
    Clausifier::Out out = cl.run(assertions_);
    proxy_assertion_ = out.proxy_assertion;
    input_clauses_ = out.clauses;
    for (auto& [lits, aid] : out.clauses) {
      ProofId pid = cdcl_.proof().add_leaf(lits, aid);
      cdcl_.add_clause(lits, pid);
    }

    // One extensionality instance per diff term in the input.
    std::unordered_set<TermId> nodes;
    for (TermId f : fs) ctx_.collect_subterms(f, nodes);
    std::vector<TermId> diffs(nodes.begin(), nodes.end());
    std::sort(diffs.begin(), diffs.end());
    for (TermId t : diffs) {
      const Term& n = ctx_.term(t);
      if (n.kind != Kind::Diff) continue;
      TermId a = n.args[0], b = n.args[1];
      TermId sa = ctx_.mk_select(a, t), sb = ctx_.mk_select(b, t);
      eg_.add_term(sa);
      eg_.add_term(sb);
      ExtDiffLemma lemma{a, b, ctx_.mk_eq(sa, sb), ctx_.mk_eq(a, b)};
      std::vector<Lit> clause{{lemma.sel_eq_atom, false}, {lemma.concl_atom, true}};
      add_theory_clause(clause, lemma);
    }
    arrays_.refresh_index();
  }

  bool add_theory_clause(const std::vector<Lit>& clause, LemmaInfo info) {
    ProofId pid = cdcl_.proof().add_theory(clause, std::move(info));
    return cdcl_.add_clause(clause, pid) == Cdcl::AddStatus::Added;
  }

  // Applies one literal to the congruence state. On conflict the state is
  // rolled back, explanation lemmas are queued, and false is returned.
  bool try_assert(Lit l) {
    const Term& n = ctx_.term(l.atom);
    size_t mark = eg_.mark();
    bool ok = true;
    if (n.kind == Kind::Eq && ctx_.sort_of(n.args[0]) != ctx_.bool_sort()) {
      ok = l.pos ? eg_.assert_eq(n.args[0], n.args[1], l)
                 : eg_.assert_diseq(n.args[0], n.args[1], l);
    } else if (n.kind == Kind::App && n.sort == ctx_.bool_sort() &&
               !proxy_assertion_.count(l.atom)) {
      ok = eg_.assert_bool_app(l.atom, l.pos, l);
    } else {
      return true;  // proxies and non-theory atoms
    }
    if (ok) return true;
    emit_conflict_lemmas(eg_.conflict());
    eg_.undo_to(mark);
    return false;
  }

  void emit_conflict_lemmas(const EGraphConflict& cf) {
    std::vector<PathStep> steps;
    if (cf.has_bridge) {
      bool u_on_s = eg_.same(cf.ds, cf.bridge_u);
      TermId u = u_on_s ? cf.bridge_u : cf.bridge_v;
      TermId v = u_on_s ? cf.bridge_v : cf.bridge_u;
      steps = eg_.explain_path(cf.ds, u);
      steps.push_back({u, v, cf.bridge_r});
      std::vector<PathStep> tail = eg_.explain_path(v, cf.dt);
      steps.insert(steps.end(), tail.begin(), tail.end());
    } else {
      steps = eg_.explain_path(cf.ds, cf.dt);
    }
    if (ctx_.sort_of(cf.ds) == ctx_.bool_sort()) {
      emit_bool_chain(steps);
    } else {
      emit_trans_chain(cf.ds, cf.dt, steps);
    }
  }

  // Equality chain between non-boolean terms: one transitivity lemma over
  // the step atoms plus one congruence lemma per congruence step.
  void emit_trans_chain(TermId s, TermId t, const std::vector<PathStep>& steps) {
    EufTransLemma trans;
    trans.goal_atom = ctx_.mk_eq(s, t);
    std::vector<Lit> clause;
    for (const PathStep& st : steps) {
      EufTransLemma::Link link{st.from, st.to, kNoTerm, kNoTerm};
      switch (st.reason.kind) {
        case ReasonKind::Literal:
          link.atom = st.reason.lit.atom;
          break;
        case ReasonKind::Congruence:
          link.atom = ctx_.mk_eq(st.reason.t1, st.reason.t2);
          emit_congruence(st.reason.t1, st.reason.t2);
          break;
        case ReasonKind::Axiom:
          link.store_term = st.reason.t1;
          break;
      }
      if (link.atom != kNoTerm) clause.push_back({link.atom, false});
      trans.links.push_back(link);
    }
    // A one-step congruence path makes this a tautology; the congruence
    // lemma emitted above already carries the conflict then.
    clause.push_back({trans.goal_atom, true});
    add_theory_clause(clause, std::move(trans));
  }

  // Chain between true and false: application congruences only; the
  // endpoint steps are the asserted application literals themselves.
  void emit_bool_chain(const std::vector<PathStep>& steps) {
    for (const PathStep& st : steps) {
      if (st.reason.kind != ReasonKind::Congruence) continue;
      emit_congruence(st.reason.t1, st.reason.t2);
    }
  }

  void emit_congruence(TermId t1, TermId t2) {
    const Term& n1 = ctx_.term(t1);
    const Term& n2 = ctx_.term(t2);
    assert(n1.args.size() == n2.args.size());
    std::vector<TermId> premises;
    std::vector<Lit> clause;
    for (size_t k = 0; k < n1.args.size(); ++k) {
      if (n1.args[k] == n2.args[k]) {
        premises.push_back(kNoTerm);
        continue;
      }
      TermId atom = ctx_.mk_eq(n1.args[k], n2.args[k]);
      premises.push_back(atom);
      clause.push_back({atom, false});
    }
    if (ctx_.sort_of(t1) == ctx_.bool_sort()) {
      clause.push_back({t1, false});
      clause.push_back({t2, true});
      add_theory_clause(clause, EufAppCongLemma{t1, t2, std::move(premises)});
    } else {
      TermId concl = ctx_.mk_eq(t1, t2);
      clause.push_back({concl, true});
      add_theory_clause(clause, EufCongLemma{t1, t2, std::move(premises), concl});
    }
  }

  Context& ctx_;
  std::vector<NamedAssertion> assertions_;
  EGraph eg_;
  Cdcl cdcl_;
  ArraySolver arrays_;
  std::unordered_map<TermId, uint32_t> proxy_assertion_;
  std::vector<std::pair<std::vector<Lit>, uint32_t>> input_clauses_;
  std::vector<size_t> marks_;
  std::vector<bool> flags_;
  uint64_t solve_count_ = 0;
  bool solved_ = false;
};

// Proof replay, independent of the solver run: checks the resolution
// structure, leaf provenance, and (for small lemmas) theory validity.
struct ReplayViolation {
  ProofId node;
  std::string what;
};

inline std::optional<ReplayViolation> replay_proof(
    Context& ctx, const Proof& proof,
    const std::vector<std::pair<std::vector<Lit>, uint32_t>>& input_clauses,
    size_t lemma_oracle_max_lits = 8) {
  auto lit_set = [](const std::vector<Lit>& ls) {
    std::set<std::pair<TermId, bool>> s;
    for (const Lit& l : ls) s.emplace(l.atom, l.pos);
    return s;
  };
  if (proof.root() == kNoProof) return ReplayViolation{0, "no root"};
  if (!proof.node(proof.root()).clause.empty())
    return ReplayViolation{proof.root(), "root clause not empty"};
  for (ProofId id = 0; id < proof.size(); ++id) {
    const ProofNode& n = proof.node(id);
    switch (n.kind) {
      case ProofNode::Leaf: {
        bool found = false;
        for (const auto& [lits, aid] : input_clauses)
          if (aid == n.assertion && lit_set(lits) == lit_set(n.clause)) found = true;
        if (!found) return ReplayViolation{id, "leaf clause not among input clauses"};
        break;
      }
      case ProofNode::Res: {
        if (n.left >= id || n.right >= id)
          return ReplayViolation{id, "resolution references a later node"};
        const auto& L = proof.node(n.left).clause;
        const auto& R = proof.node(n.right).clause;
        bool pl = false, pr = false;
        for (const Lit& l : L) pl |= l.atom == n.pivot && l.pos;
        for (const Lit& l : R) pr |= l.atom == n.pivot && !l.pos;
        if (!pl || !pr) return ReplayViolation{id, "pivot missing from antecedent"};
        if (lit_set(Proof::resolvent(L, R, n.pivot)) != lit_set(n.clause))
          return ReplayViolation{id, "resolvent mismatch"};
        break;
      }
      case ProofNode::Theory: {
        if (n.clause.size() > lemma_oracle_max_lits) break;
        std::vector<TermId> negated;
        for (const Lit& l : n.clause) {
          TermId t = l.pos ? ctx.mk_not(l.atom) : l.atom;
          negated.push_back(t);
        }
        try {
          OracleResult r = oracle_sat(ctx, negated, 4);
          if (r.sat()) return ReplayViolation{id, "theory lemma negation is satisfiable"};
        } catch (const BoundTooLarge&) {
        }
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace weqinterp

#endif  // WEQINTERP_SOLVER_HPP
