// Congruence closure over the term DAG with a proof forest for
// explanation generation and trail-based rollback.

#ifndef WEQINTERP_EGRAPH_HPP
#define WEQINTERP_EGRAPH_HPP

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weqinterp/terms.hpp"

namespace weqinterp {

struct Lit {
  TermId atom = kNoTerm;
  bool pos = true;
  bool operator==(const Lit& o) const { return atom == o.atom && pos == o.pos; }
  Lit negate() const { return {atom, !pos}; }
};

struct LitHash {
  size_t operator()(const Lit& l) const { return (size_t(l.atom) << 1) | (l.pos ? 1 : 0); }
};

enum class ReasonKind : uint8_t { Literal, Congruence, Axiom };

struct Reason {
  ReasonKind kind;
  Lit lit;             // Literal
  TermId t1 = kNoTerm; // Congruence: the two application terms
  TermId t2 = kNoTerm;
};

struct PathStep {
  TermId from, to;
  Reason reason;
};

// A merge that would equate the two sides of an asserted disequality.
// `bridge_*` is the not-yet-applied merge completing the equality.
struct EGraphConflict {
  TermId ds = kNoTerm, dt = kNoTerm;
  std::optional<Lit> dlit;  // absent for the built-in true != false
  bool has_bridge = false;
  TermId bridge_u = kNoTerm, bridge_v = kNoTerm;
  Reason bridge_r;
};

class EGraph {
 public:
  explicit EGraph(Context& ctx) : ctx_(ctx) {
    add_term(ctx_.mk_true());
    add_term(ctx_.mk_false());
    diseqs_.push_back({ctx_.mk_true(), ctx_.mk_false(), std::nullopt});
  }

  Context& ctx() { return ctx_; }

  // Activates t and its subterms; congruence applies to select/store/diff
  // and declared applications.
  void add_term(TermId t) {
    if (nodes_.count(t)) return;
    const Term& n = ctx_.term(t);
    for (TermId c : n.args) add_term(c);
    Node node;
    node.parent = t;
    node.next = t;
    node.size = 1;
    nodes_.emplace(t, node);
    order_.push_back(t);
    trail_.push_back({TrailEntry::AddTerm, t, kNoTerm, 0});
    if (congruent_kind(n.kind)) {
      Sig s = signature(t);
      auto it = sigs_.find(s);
      if (it == sigs_.end()) {
        sigs_.emplace(std::move(s), t);
        trail_.push_back({TrailEntry::AddSig, t, kNoTerm, 0});
      } else if (!same(it->second, t)) {
        // Activation happens outside of solving; the merge cannot conflict
        // because t is fresh and carries no disequalities.
        pending_.push_back({t, it->second, {ReasonKind::Congruence, {}, t, it->second}});
        bool ok = process_pending();
        assert(ok);
        (void)ok;
      }
      for (TermId c : n.args) {
        TermId r = rep(c);
        use_[r].push_back(t);
        trail_.push_back({TrailEntry::UsePush, r, kNoTerm, 0});
      }
    }
  }

  bool is_active(TermId t) const { return nodes_.count(t) != 0; }
  const std::vector<TermId>& active_terms() const { return order_; }

  TermId rep(TermId t) const {
    const Node* n = &nodes_.at(t);
    while (n->parent != t) {
      t = n->parent;
      n = &nodes_.at(t);
    }
    return t;
  }

  bool same(TermId a, TermId b) const { return rep(a) == rep(b); }

  template <typename F>
  void for_each_in_class(TermId t, F&& f) const {
    TermId start = t;
    do {
      f(t);
      t = nodes_.at(t).next;
    } while (t != start);
  }

  // ---- assertions ----

  bool assert_eq(TermId a, TermId b, Lit reason) {
    assert(is_active(a) && is_active(b));
    pending_.push_back({a, b, {ReasonKind::Literal, reason, kNoTerm, kNoTerm}});
    return process_pending();
  }

  bool assert_diseq(TermId a, TermId b, Lit reason) {
    assert(is_active(a) && is_active(b));
    if (same(a, b)) {
      conflict_ = EGraphConflict{a, b, reason, false, kNoTerm, kNoTerm, {}};
      return false;
    }
    diseqs_.push_back({a, b, reason});
    trail_.push_back({TrailEntry::AddDiseq, kNoTerm, kNoTerm, 0});
    return true;
  }

  bool assert_bool_app(TermId app, bool val, Lit reason) {
    return assert_eq(app, val ? ctx_.mk_true() : ctx_.mk_false(), reason);
  }

  // tag: the term the axiom instance was generated from (a store term).
  bool merge_axiom(TermId a, TermId b, TermId tag = kNoTerm) {
    assert(is_active(a) && is_active(b));
    pending_.push_back({a, b, {ReasonKind::Axiom, {}, tag, kNoTerm}});
    return process_pending();
  }

  const EGraphConflict& conflict() const { return conflict_; }

  // ---- explanations ----

  // Proof-forest path between two currently equal terms.
  std::vector<PathStep> explain_path(TermId s, TermId t) const {
    assert(same(s, t));
    std::vector<PathStep> out;
    if (s == t) return out;
    // Walk to the proof roots, find the meeting point.
    std::vector<TermId> ps = pf_chain(s), pt = pf_chain(t);
    std::unordered_map<TermId, size_t> pos;
    for (size_t i = 0; i < ps.size(); ++i) pos.emplace(ps[i], i);
    size_t meet_t = 0;
    TermId meet = kNoTerm;
    for (size_t i = 0; i < pt.size(); ++i) {
      auto it = pos.find(pt[i]);
      if (it != pos.end()) { meet = pt[i]; meet_t = i; break; }
    }
    assert(meet != kNoTerm);
    for (size_t i = 0; ps[i] != meet; ++i)
      out.push_back({ps[i], pf_parent_.at(ps[i]), pf_reason_.at(ps[i])});
    std::vector<PathStep> back;
    for (size_t i = 0; i < meet_t; ++i)
      back.push_back({pf_parent_.at(pt[i]), pt[i], pf_reason_.at(pt[i])});
    out.insert(out.end(), back.rbegin(), back.rend());
    return out;
  }

  // Asserted literals whose conjunction entails s = t.
  std::vector<Lit> explain(TermId s, TermId t) const {
    std::vector<Lit> lits;
    std::unordered_set<uint64_t> seen_pairs, seen_lits;
    collect_explain(s, t, lits, seen_pairs, seen_lits);
    return lits;
  }

  // ---- rollback ----

  size_t mark() const { return trail_.size(); }

  void undo_to(size_t mark) {
    while (trail_.size() > mark) {
      TrailEntry e = trail_.back();
      trail_.pop_back();
      switch (e.kind) {
        case TrailEntry::AddTerm: {
          nodes_.erase(e.a);
          use_.erase(e.a);
          assert(order_.back() == e.a);
          order_.pop_back();
          break;
        }
        case TrailEntry::AddSig:
          sigs_.erase(signature(e.a));
          break;
        case TrailEntry::AddDiseq:
          diseqs_.pop_back();
          break;
        case TrailEntry::Union: {
          // e.a: absorbed root, e.b: surviving root, e.n: old use size of b.
          Node& ra = nodes_.at(e.a);
          Node& rb = nodes_.at(e.b);
          ra.parent = e.a;
          std::swap(ra.next, rb.next);
          rb.size -= ra.size;
          auto& ub = use_[e.b];
          auto& ua = use_[e.a];
          assert(ub.size() >= e.n);
          ua.assign(ub.begin() + e.n, ub.end());
          ub.resize(e.n);
          break;
        }
        case TrailEntry::PfEdge:
          pf_parent_.erase(e.a);
          pf_reason_.erase(e.a);
          break;
        case TrailEntry::PfFlip: {
          // e.a -> e.b restored (it had been reversed to e.b -> e.a).
          Reason r = pf_reason_.at(e.b);
          pf_parent_.erase(e.b);
          pf_reason_.erase(e.b);
          pf_parent_[e.a] = e.b;
          pf_reason_[e.a] = reversed(r);
          break;
        }
        case TrailEntry::AddSigPending:
          sigs_.erase(signature(e.a));
          break;
        case TrailEntry::UsePush:
          use_[e.a].pop_back();
          break;
      }
    }
  }

 private:
  struct Node {
    TermId parent;  // union-find, no path compression so undo stays local
    TermId next;    // circular class list
    uint32_t size;
  };

  struct Diseq {
    TermId s, t;
    std::optional<Lit> lit;
  };

  struct Pending {
    TermId a, b;
    Reason r;
  };

  struct TrailEntry {
    enum Kind { AddTerm, AddSig, AddDiseq, Union, PfEdge, PfFlip, AddSigPending, UsePush } kind;
    TermId a, b;
    size_t n;
  };

  using Sig = std::vector<uint32_t>;
  struct SigHash {
    size_t operator()(const Sig& s) const {
      size_t h = 1469598103934665603ull;
      for (uint32_t x : s) { h ^= x; h *= 1099511628211ull; }
      return h;
    }
  };

  static bool congruent_kind(Kind k) {
    return k == Kind::Select || k == Kind::Store || k == Kind::Diff || k == Kind::App;
  }

  Sig signature(TermId t) const {
    const Term& n = ctx_.term(t);
    Sig s;
    s.reserve(n.args.size() + 2);
    s.push_back(static_cast<uint32_t>(n.kind));
    s.push_back(n.sym);
    for (TermId c : n.args) s.push_back(rep(c));
    return s;
  }

  bool process_pending() {
    while (!pending_.empty()) {
      Pending p = pending_.back();
      pending_.pop_back();
      TermId ra = rep(p.a), rb = rep(p.b);
      if (ra == rb) continue;
      // Disequality guard.
      for (const Diseq& d : diseqs_) {
        TermId rs = rep(d.s), rt = rep(d.t);
        if ((rs == ra && rt == rb) || (rs == rb && rt == ra)) {
          conflict_ = EGraphConflict{d.s, d.t, d.lit, true, p.a, p.b, p.r};
          pending_.clear();
          return false;
        }
      }
      apply_merge(p);
    }
    return true;
  }

  void apply_merge(const Pending& p) {
    TermId ra = rep(p.a), rb = rep(p.b);
    // Keep the larger class's representative.
    TermId a = p.a, b = p.b;
    if (nodes_.at(ra).size > nodes_.at(rb).size) {
      std::swap(a, b);
      std::swap(ra, rb);
    }
    // Proof forest: make a the root of its tree, then hang it below b.
    reroot(a);
    pf_parent_[a] = b;
    pf_reason_[a] = (a == p.a) ? p.r : reversed(p.r);
    trail_.push_back({TrailEntry::PfEdge, a, kNoTerm, 0});

    // Union: ra absorbed into rb.
    auto& ub = use_[rb];
    size_t old_use = ub.size();
    Node& na = nodes_.at(ra);
    Node& nb = nodes_.at(rb);
    na.parent = rb;
    std::swap(na.next, nb.next);
    nb.size += na.size;
    trail_.push_back({TrailEntry::Union, ra, rb, old_use});

    // Re-signature parents of the absorbed class.
    auto& ua = use_[ra];
    for (TermId u : ua) {
      Sig s = signature(u);
      auto it = sigs_.find(s);
      if (it == sigs_.end()) {
        sigs_.emplace(std::move(s), u);
        trail_.push_back({TrailEntry::AddSigPending, u, kNoTerm, 0});
        ub.push_back(u);
      } else if (!same(it->second, u)) {
        pending_.push_back({u, it->second, {ReasonKind::Congruence, {}, u, it->second}});
        ub.push_back(u);
      } else {
        ub.push_back(u);
      }
    }
    ua.clear();
  }

  // The reason of an edge is directional only for congruence bookkeeping.
  static Reason reversed(const Reason& r) {
    if (r.kind != ReasonKind::Congruence) return r;
    return {ReasonKind::Congruence, r.lit, r.t2, r.t1};
  }

  void reroot(TermId a) {
    // Reverse the proof-forest path from a to its root.
    std::vector<TermId> chain;
    TermId u = a;
    while (pf_parent_.count(u)) {
      chain.push_back(u);
      u = pf_parent_.at(u);
    }
    for (size_t i = chain.size(); i-- > 0;) {
      TermId x = chain[i];
      TermId y = pf_parent_.at(x);
      Reason r = pf_reason_.at(x);
      pf_parent_.erase(x);
      pf_reason_.erase(x);
      pf_parent_[y] = x;
      pf_reason_[y] = reversed(r);
      trail_.push_back({TrailEntry::PfFlip, x, y, 0});
    }
  }

  std::vector<TermId> pf_chain(TermId s) const {
    std::vector<TermId> chain{s};
    while (pf_parent_.count(s)) {
      s = pf_parent_.at(s);
      chain.push_back(s);
    }
    return chain;
  }

  void collect_explain(TermId s, TermId t, std::vector<Lit>& lits,
                       std::unordered_set<uint64_t>& seen_pairs,
                       std::unordered_set<uint64_t>& seen_lits) const {
    if (s == t) return;
    uint64_t key = (uint64_t(std::min(s, t)) << 32) | std::max(s, t);
    if (!seen_pairs.insert(key).second) return;
    for (const PathStep& e : explain_path(s, t)) {
      switch (e.reason.kind) {
        case ReasonKind::Literal: {
          uint64_t lk = (uint64_t(e.reason.lit.atom) << 1) | (e.reason.lit.pos ? 1 : 0);
          if (seen_lits.insert(lk).second) lits.push_back(e.reason.lit);
          break;
        }
        case ReasonKind::Congruence: {
          const Term& n1 = ctx_.term(e.reason.t1);
          const Term& n2 = ctx_.term(e.reason.t2);
          assert(n1.args.size() == n2.args.size());
          for (size_t i = 0; i < n1.args.size(); ++i)
            collect_explain(n1.args[i], n2.args[i], lits, seen_pairs, seen_lits);
          break;
        }
        case ReasonKind::Axiom:
          break;
      }
    }
  }

  Context& ctx_;
  std::unordered_map<TermId, Node> nodes_;
  std::vector<TermId> order_;
  std::unordered_map<TermId, std::vector<TermId>> use_;
  std::unordered_map<Sig, TermId, SigHash> sigs_;
  std::vector<Diseq> diseqs_;
  std::vector<Pending> pending_;
  std::unordered_map<TermId, TermId> pf_parent_;
  std::unordered_map<TermId, Reason> pf_reason_;
  std::vector<TrailEntry> trail_;
  EGraphConflict conflict_;
};

}  // namespace weqinterp

#endif  // WEQINTERP_EGRAPH_HPP
