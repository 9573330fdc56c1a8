// Weak equivalence graph over array terms: path search modulo the current
// congruence state, and instantiation of the two array lemma schemas.

#ifndef WEQINTERP_WEAKGRAPH_HPP
#define WEQINTERP_WEAKGRAPH_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weqinterp/lemmas.hpp"

namespace weqinterp {

class ArraySolver {
 public:
  ArraySolver(Context& ctx, EGraph& eg) : ctx_(ctx), eg_(eg) {}

  // Interns the select terms required for each store term and asserts the
  // select-over-store instances; collects the array vertex set.
  void activate(const std::vector<TermId>& formulas) {
    std::unordered_set<TermId> nodes;
    for (TermId f : formulas) ctx_.collect_subterms(f, nodes);
    for (TermId t : nodes) {
      const Term& n = ctx_.term(t);
      if (n.kind == Kind::Eq) {
        if (ctx_.sort_of(n.args[0]) != ctx_.bool_sort()) {
          eg_.add_term(n.args[0]);
          eg_.add_term(n.args[1]);
        }
      } else if (n.kind == Kind::App && n.sort == ctx_.bool_sort()) {
        eg_.add_term(t);
      }
    }
    // V closure: one pass over stores suffices since the added selects
    // introduce no new store terms.
    std::vector<TermId> stores;
    for (TermId t : eg_.active_terms())
      if (ctx_.term(t).kind == Kind::Store) stores.push_back(t);
    for (TermId st : stores) {
      const Term& n = ctx_.term(st);
      TermId sel_base = ctx_.mk_select(n.args[0], n.args[1]);
      TermId sel_store = ctx_.mk_select(st, n.args[1]);
      eg_.add_term(sel_base);
      eg_.add_term(sel_store);
      bool ok = eg_.merge_axiom(sel_store, n.args[2], st);
      assert(ok);
      (void)ok;
    }
    refresh_index();
  }

  // Vertices and store adjacency from the currently active terms.
  void refresh_index() {
    arrays_.clear();
    selects_.clear();
    stores_of_.clear();
    for (TermId t : eg_.active_terms()) {
      const Term& n = ctx_.term(t);
      if (ctx_.sort(n.sort).kind == SortKind::Array) arrays_.push_back(t);
      if (n.kind == Kind::Select) selects_.push_back(t);
      if (n.kind == Kind::Store) stores_of_[n.args[0]].push_back(t);
    }
    std::sort(arrays_.begin(), arrays_.end());
    std::sort(selects_.begin(), selects_.end());
    for (auto& [base, sts] : stores_of_) std::sort(sts.begin(), sts.end());
  }

  // Shortest weak path by edge count, ties broken towards smaller term ids.
  // avoid == kNoTerm searches the plain weak equivalence.
  std::optional<WeakPath> find_weak_path(TermId a, TermId b, TermId avoid) {
    if (ctx_.sort_of(a) != ctx_.sort_of(b)) return std::nullopt;
    WeakPath path;
    path.a = a;
    path.b = b;
    if (a == b) return path;

    std::unordered_map<TermId, std::pair<TermId, PathEdge>> parent;
    std::deque<TermId> queue{a};
    parent.emplace(a, std::make_pair(kNoTerm, PathEdge{}));
    while (!queue.empty()) {
      TermId u = queue.front();
      queue.pop_front();
      if (u == b) break;
      for (auto& [v, e] : neighbors(u, avoid)) {
        if (parent.count(v)) continue;
        parent.emplace(v, std::make_pair(u, e));
        queue.push_back(v);
      }
    }
    if (!parent.count(b)) return std::nullopt;
    std::vector<PathEdge> rev;
    for (TermId u = b; u != a;) {
      auto& [p, e] = parent.at(u);
      rev.push_back(e);
      u = p;
    }
    path.edges.assign(rev.rbegin(), rev.rend());
    return path;
  }

  // Weak congruence: a path avoiding `idx`, possibly via one select bridge.
  std::optional<WeakPath> find_congruent_path(TermId a, TermId b, TermId idx) {
    if (auto p = find_weak_path(a, b, idx)) return p;
    std::optional<WeakPath> best;
    for (TermId s1 : selects_) {
      const Term& n1 = ctx_.term(s1);
      if (!eg_.same(n1.args[1], idx)) continue;
      for (TermId s2 : selects_) {
        if (s1 == s2) continue;
        const Term& n2 = ctx_.term(s2);
        if (ctx_.sort_of(s1) != ctx_.sort_of(s2)) continue;
        if (!eg_.same(n2.args[1], idx)) continue;
        if (!eg_.same(s1, s2)) continue;
        auto pa = find_weak_path(a, n1.args[0], idx);
        if (!pa) continue;
        auto pb = find_weak_path(n2.args[0], b, idx);
        if (!pb) continue;
        PathEdge bridge;
        bridge.kind = EdgeKind::SelectBridge;
        bridge.from = n1.args[0];
        bridge.to = n2.args[0];
        bridge.lit_atom = ctx_.mk_eq(s1, s2);
        bridge.sel_from = s1;
        bridge.sel_to = s2;
        bridge.idx_eq_from = (n1.args[1] == idx) ? kNoTerm : ctx_.mk_eq(n1.args[1], idx);
        bridge.idx_eq_to = (n2.args[1] == idx) ? kNoTerm : ctx_.mk_eq(n2.args[1], idx);
        WeakPath cand;
        cand.a = a;
        cand.b = b;
        cand.edges = pa->edges;
        cand.edges.push_back(bridge);
        cand.edges.insert(cand.edges.end(), pb->edges.begin(), pb->edges.end());
        if (!best || cand.edges.size() < best->edges.size()) best = std::move(cand);
      }
    }
    return best;
  }

  // Read-over-weakeq instances for select pairs with congruent indices.
  std::vector<std::pair<std::vector<Lit>, LemmaInfo>> roweq_lemmas() {
    std::vector<std::pair<std::vector<Lit>, LemmaInfo>> out;
    for (size_t x = 0; x < selects_.size(); ++x) {
      for (size_t y = x + 1; y < selects_.size(); ++y) {
        TermId s1 = selects_[x], s2 = selects_[y];
        if (ctx_.sort_of(s1) != ctx_.sort_of(s2)) continue;
        const Term& n1 = ctx_.term(s1);
        const Term& n2 = ctx_.term(s2);
        if (ctx_.sort_of(n1.args[1]) != ctx_.sort_of(n2.args[1])) continue;
        if (!eg_.same(n1.args[1], n2.args[1])) continue;
        if (eg_.same(s1, s2)) continue;
        auto path = find_weak_path(n1.args[0], n2.args[0], n1.args[1]);
        if (!path) continue;
        RoweqLemma lemma;
        lemma.path = *path;
        lemma.i = n1.args[1];
        lemma.j = n2.args[1];
        lemma.sel_a = s1;
        lemma.sel_b = s2;
        lemma.eq_ij_atom = (lemma.i == lemma.j) ? kNoTerm : ctx_.mk_eq(lemma.i, lemma.j);
        lemma.concl_atom = ctx_.mk_eq(s1, s2);
        std::vector<Lit> clause = negate_cond(lemma.path);
        if (lemma.eq_ij_atom != kNoTerm) clause.push_back({lemma.eq_ij_atom, false});
        clause.push_back({lemma.concl_atom, true});
        out.emplace_back(std::move(clause), std::move(lemma));
      }
    }
    return out;
  }

  // Extensionality instances for the given array disequalities.
  std::vector<std::pair<std::vector<Lit>, LemmaInfo>> weqext_lemmas(
      const std::vector<std::pair<TermId, TermId>>& diseqs) {
    std::vector<std::pair<std::vector<Lit>, LemmaInfo>> out;
    for (auto& [a, b] : diseqs) {
      if (eg_.same(a, b)) continue;
      auto main = find_weak_path(a, b, kNoTerm);
      if (!main) continue;
      WeqExtLemma lemma;
      lemma.main = *main;
      bool complete = true;
      for (const PathEdge& e : main->edges) {
        if (e.kind != EdgeKind::StoreStep) continue;
        auto ip = find_congruent_path(a, b, e.index);
        if (!ip) { complete = false; break; }
        lemma.ipaths.push_back({e.index, *ip});
      }
      if (!complete) continue;
      lemma.concl_atom = ctx_.mk_eq(a, b);
      std::vector<Lit> clause = negate_cond(lemma.main);
      for (const IPath& ip : lemma.ipaths) {
        std::vector<Lit> part = negate_cond(ip.path);
        clause.insert(clause.end(), part.begin(), part.end());
      }
      clause.push_back({lemma.concl_atom, true});
      out.emplace_back(std::move(clause), std::move(lemma));
    }
    return out;
  }

 private:
  // Negation of the path condition, as clause literals.
  static std::vector<Lit> negate_cond(const WeakPath& path) {
    std::vector<Lit> out;
    for (const PathEdge& e : path.edges) {
      switch (e.kind) {
        case EdgeKind::Strong:
          if (e.lit_atom != kNoTerm) out.push_back({e.lit_atom, false});
          break;
        case EdgeKind::StoreStep:
          if (e.diseq_atom != kNoTerm) out.push_back({e.diseq_atom, true});
          break;
        case EdgeKind::SelectBridge:
          if (e.lit_atom != kNoTerm) out.push_back({e.lit_atom, false});
          if (e.idx_eq_from != kNoTerm) out.push_back({e.idx_eq_from, false});
          if (e.idx_eq_to != kNoTerm) out.push_back({e.idx_eq_to, false});
          break;
      }
    }
    return out;
  }

  std::vector<std::pair<TermId, PathEdge>> neighbors(TermId u, TermId avoid) {
    std::vector<std::pair<TermId, PathEdge>> out;
    // Strong edges to every array vertex in the class.
    eg_.for_each_in_class(u, [&](TermId w) {
      if (w == u) return;
      if (ctx_.sort(ctx_.sort_of(w)).kind != SortKind::Array) return;
      PathEdge e;
      e.kind = EdgeKind::Strong;
      e.from = u;
      e.to = w;
      e.lit_atom = ctx_.mk_eq(u, w);
      out.emplace_back(w, e);
    });
    // Store edges in both directions.
    auto add_store_edge = [&](TermId st, TermId other) {
      const Term& n = ctx_.term(st);
      if (avoid != kNoTerm && eg_.same(n.args[1], avoid)) return;
      PathEdge e;
      e.kind = EdgeKind::StoreStep;
      e.from = u;
      e.to = other;
      e.store_term = st;
      e.index = n.args[1];
      if (avoid != kNoTerm) e.diseq_atom = ctx_.mk_eq(n.args[1], avoid);
      out.emplace_back(other, e);
    };
    const Term& nu = ctx_.term(u);
    if (nu.kind == Kind::Store) add_store_edge(u, nu.args[0]);
    auto it = stores_of_.find(u);
    if (it != stores_of_.end())
      for (TermId st : it->second) add_store_edge(st, st);
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
  }

  Context& ctx_;
  EGraph& eg_;
  std::vector<TermId> arrays_;
  std::vector<TermId> selects_;
  std::map<TermId, std::vector<TermId>> stores_of_;
};

}  // namespace weqinterp

#endif  // WEQINTERP_WEAKGRAPH_HPP
