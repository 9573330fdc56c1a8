// Sorted term DAG with hash-consing, array signature (select/store/diff),
// and the derived rewrite/weq/nweq constructs.

#ifndef WEQINTERP_TERMS_HPP
#define WEQINTERP_TERMS_HPP

#include <cassert>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace weqinterp {

using SortId = uint32_t;
using TermId = uint32_t;

constexpr TermId kNoTerm = 0xffffffffu;
constexpr SortId kNoSort = 0xffffffffu;

struct SortError : std::runtime_error {
  explicit SortError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedFeature : std::runtime_error {
  explicit UnsupportedFeature(const std::string& what) : std::runtime_error(what) {}
};

enum class SortKind : uint8_t { Bool, Uninterp, Array };

struct Sort {
  SortKind kind;
  std::string name;  // Uninterp only
  SortId index = kNoSort;  // Array only
  SortId elem = kNoSort;   // Array only
};

enum class Kind : uint8_t {
  True,
  False,
  Not,
  And,
  Or,
  Eq,       // binary, args ordered by id
  Select,
  Store,
  Diff,
  EqPred,   // EQ(x, t); first arg is an auxiliary variable
  Hole,     // template parameter, one per sort
  App,      // declared function or constant; sym indexes the fun table
  Aux,      // auxiliary variable; sym indexes the aux table
};

struct Term {
  Kind kind;
  uint32_t sym = 0;
  SortId sort = kNoSort;
  std::vector<TermId> args;
};

struct FunDecl {
  std::string name;
  std::vector<SortId> args;
  SortId ret;
};

struct AuxDecl {
  std::string name;
  SortId sort;
  TermId origin = kNoTerm;  // the mixed equality atom this variable splits
};

// Per-context term table. Contexts share nothing.
class Context {
 public:
  Context() {
    bool_sort_ = intern_sort({SortKind::Bool, "Bool", kNoSort, kNoSort});
    true_ = intern(Kind::True, 0, bool_sort_, {});
    false_ = intern(Kind::False, 0, bool_sort_, {});
  }

  // ---- sorts ----

  SortId bool_sort() const { return bool_sort_; }

  SortId declare_sort(const std::string& name) {
    auto it = sort_names_.find(name);
    if (it != sort_names_.end()) return it->second;
    SortId s = intern_sort({SortKind::Uninterp, name, kNoSort, kNoSort});
    sort_names_.emplace(name, s);
    return s;
  }

  SortId find_sort(const std::string& name) const {
    auto it = sort_names_.find(name);
    return it == sort_names_.end() ? kNoSort : it->second;
  }

  SortId array_sort(SortId index, SortId elem) {
    if (sort(index).kind != SortKind::Uninterp || sort(elem).kind != SortKind::Uninterp)
      throw UnsupportedFeature("array index/element sorts must be uninterpreted sorts");
    return intern_sort({SortKind::Array, "", index, elem});
  }

  const Sort& sort(SortId s) const { return sorts_[s]; }

  std::string sort_name(SortId s) const {
    const Sort& so = sort(s);
    switch (so.kind) {
      case SortKind::Bool: return "Bool";
      case SortKind::Uninterp: return so.name;
      case SortKind::Array:
        return "(Array " + sort_name(so.index) + " " + sort_name(so.elem) + ")";
    }
    return "?";
  }

  // ---- symbols ----

  uint32_t declare_fun(const std::string& name, std::vector<SortId> args, SortId ret) {
    auto it = fun_names_.find(name);
    if (it != fun_names_.end()) {
      const FunDecl& d = funs_[it->second];
      if (d.args != args || d.ret != ret)
        throw SortError("symbol redeclared with a different signature: " + name);
      return it->second;
    }
    uint32_t id = static_cast<uint32_t>(funs_.size());
    funs_.push_back({name, std::move(args), ret});
    fun_names_.emplace(name, id);
    return id;
  }

  bool has_fun(const std::string& name) const { return fun_names_.count(name) != 0; }

  uint32_t fun_id(const std::string& name) const {
    auto it = fun_names_.find(name);
    assert(it != fun_names_.end());
    return it->second;
  }

  const FunDecl& fun(uint32_t id) const { return funs_[id]; }
  size_t num_funs() const { return funs_.size(); }

  TermId mk_aux(const std::string& name, SortId s, TermId origin) {
    uint32_t id = static_cast<uint32_t>(auxes_.size());
    auxes_.push_back({name, s, origin});
    return intern(Kind::Aux, id, s, {});
  }

  const AuxDecl& aux(uint32_t id) const { return auxes_[id]; }

  // ---- terms ----

  const Term& term(TermId t) const { return terms_[t]; }
  size_t num_terms() const { return terms_.size(); }
  SortId sort_of(TermId t) const { return terms_[t].sort; }

  TermId mk_true() const { return true_; }
  TermId mk_false() const { return false_; }

  TermId mk_const(const std::string& name) {
    uint32_t f = fun_id(name);
    return mk_app(f, {});
  }

  TermId mk_app(uint32_t f, const std::vector<TermId>& args) {
    const FunDecl& d = funs_[f];
    if (d.args.size() != args.size())
      throw SortError("wrong arity for " + d.name);
    for (size_t i = 0; i < args.size(); ++i)
      if (sort_of(args[i]) != d.args[i])
        throw SortError("sort mismatch at position " + std::to_string(i) + " of " + d.name);
    return intern(Kind::App, f, d.ret, args);
  }

  TermId mk_select(TermId a, TermId i) {
    const Sort& sa = sort(sort_of(a));
    if (sa.kind != SortKind::Array)
      throw SortError("sort mismatch at position 0 of select: not an array");
    if (sort_of(i) != sa.index)
      throw SortError("sort mismatch at position 1 of select");
    return intern(Kind::Select, 0, sa.elem, {a, i});
  }

  TermId mk_store(TermId a, TermId i, TermId v) {
    const Sort& sa = sort(sort_of(a));
    if (sa.kind != SortKind::Array)
      throw SortError("sort mismatch at position 0 of store: not an array");
    if (sort_of(i) != sa.index)
      throw SortError("sort mismatch at position 1 of store");
    if (sort_of(v) != sa.elem)
      throw SortError("sort mismatch at position 2 of store");
    return intern(Kind::Store, 0, sort_of(a), {a, i, v});
  }

  TermId mk_diff(TermId a, TermId b) {
    const Sort& sa = sort(sort_of(a));
    if (sa.kind != SortKind::Array)
      throw SortError("sort mismatch at position 0 of diff: not an array");
    if (sort_of(a) != sort_of(b))
      throw SortError("sort mismatch at position 1 of diff");
    return intern(Kind::Diff, 0, sa.index, {a, b});
  }

  // Equality is normalized: reflexive instances collapse to true and
  // arguments are ordered by id, so atom identity is canonical.
  TermId mk_eq(TermId a, TermId b) {
    if (sort_of(a) != sort_of(b)) throw SortError("equality between different sorts");
    if (a == b) return true_;
    if (sort_of(a) == bool_sort_)   // iff
      return mk_and({mk_or({mk_not(a), b}), mk_or({mk_not(b), a})});
    if (a > b) std::swap(a, b);
    return intern(Kind::Eq, 0, bool_sort_, {a, b});
  }

  TermId mk_neq(TermId a, TermId b) { return mk_not(mk_eq(a, b)); }

  TermId mk_not(TermId a) {
    require_bool(a, "not");
    if (a == true_) return false_;
    if (a == false_) return true_;
    const Term& t = term(a);
    if (t.kind == Kind::Not) return t.args[0];
    return intern(Kind::Not, 0, bool_sort_, {a});
  }

  TermId mk_and(const std::vector<TermId>& args) {
    std::vector<TermId> kept;
    for (TermId a : args) {
      require_bool(a, "and");
      if (a == true_) continue;
      if (a == false_) return false_;
      kept.push_back(a);
    }
    if (kept.empty()) return true_;
    if (kept.size() == 1) return kept[0];
    return intern(Kind::And, 0, bool_sort_, kept);
  }

  TermId mk_or(const std::vector<TermId>& args) {
    std::vector<TermId> kept;
    for (TermId a : args) {
      require_bool(a, "or");
      if (a == false_) continue;
      if (a == true_) return true_;
      kept.push_back(a);
    }
    if (kept.empty()) return false_;
    if (kept.size() == 1) return kept[0];
    return intern(Kind::Or, 0, bool_sort_, kept);
  }

  TermId mk_implies(TermId a, TermId b) { return mk_or({mk_not(a), b}); }

  TermId mk_eqpred(TermId x, TermId t) {
    if (term(x).kind != Kind::Aux)
      throw SortError("EQ expects an auxiliary variable as first argument");
    if (sort_of(x) != sort_of(t)) throw SortError("EQ between different sorts");
    return intern(Kind::EqPred, 0, bool_sort_, {x, t});
  }

  TermId mk_hole(SortId s) { return intern(Kind::Hole, 0, s, {}); }

  // ---- derived array constructs ----

  // a rewritten towards b at one index.
  TermId mk_rewrite_step(TermId a, TermId b) {
    TermId d = mk_diff(a, b);
    return mk_store(a, d, mk_select(b, d));
  }

  TermId mk_rewrite(TermId a, TermId b, uint32_t m) {
    if (sort_of(a) != sort_of(b)) throw SortError("rewrite between different array sorts");
    for (uint32_t k = 0; k < m; ++k) a = mk_rewrite_step(a, b);
    return a;
  }

  // a and b differ at most at m indices, each satisfying F (a template with
  // a hole of the index sort).
  TermId mk_weq(TermId a, TermId b, uint32_t m, TermId f) {
    check_template(a, b, f);
    std::vector<TermId> conj;
    for (uint32_t k = 0; k < m; ++k) {
      conj.push_back(mk_or({mk_eq(a, b), instantiate(f, mk_diff(a, b))}));
      a = mk_rewrite_step(a, b);
    }
    conj.push_back(mk_eq(a, b));
    return mk_and(conj);
  }

  // Either one of the first m rewrite indices satisfies F, or a and b
  // differ at more than m indices.
  TermId mk_nweq(TermId a, TermId b, uint32_t m, TermId f) {
    check_template(a, b, f);
    std::vector<TermId> disj;
    for (uint32_t k = 0; k < m; ++k) {
      disj.push_back(mk_and({mk_neq(a, b), instantiate(f, mk_diff(a, b))}));
      a = mk_rewrite_step(a, b);
    }
    disj.push_back(mk_neq(a, b));
    return mk_or(disj);
  }

  // Capture-free hole substitution (no binders exist in this language).
  TermId instantiate(TermId tmpl, TermId arg) {
    std::unordered_map<TermId, TermId> memo;
    return subst_rec(tmpl, [&](TermId t) -> TermId {
      const Term& n = term(t);
      if (n.kind == Kind::Hole && n.sort == sort_of(arg)) return arg;
      return kNoTerm;
    }, memo);
  }

  // Replaces every occurrence of `from` (an atomic term) by `to`.
  TermId substitute(TermId t, TermId from, TermId to) {
    std::unordered_map<TermId, TermId> memo;
    return subst_rec(t, [&](TermId u) -> TermId { return u == from ? to : kNoTerm; }, memo);
  }

  // ---- utilities ----

  bool contains(TermId t, TermId needle) const {
    std::unordered_set<TermId> seen;
    return contains_rec(t, needle, seen);
  }

  bool contains_kind(TermId t, Kind k) const {
    std::unordered_set<TermId> seen;
    std::vector<TermId> stack{t};
    while (!stack.empty()) {
      TermId u = stack.back();
      stack.pop_back();
      if (!seen.insert(u).second) continue;
      const Term& n = term(u);
      if (n.kind == k) return true;
      for (TermId c : n.args) stack.push_back(c);
    }
    return false;
  }

  // Distinct DAG nodes reachable from t.
  size_t dag_size(TermId t) const {
    std::unordered_set<TermId> seen;
    std::vector<TermId> stack{t};
    while (!stack.empty()) {
      TermId u = stack.back();
      stack.pop_back();
      if (!seen.insert(u).second) continue;
      for (TermId c : term(u).args) stack.push_back(c);
    }
    return seen.size();
  }

  size_t count_kind(TermId t, Kind k) const {
    std::unordered_set<TermId> seen;
    std::vector<TermId> stack{t};
    size_t n = 0;
    while (!stack.empty()) {
      TermId u = stack.back();
      stack.pop_back();
      if (!seen.insert(u).second) continue;
      if (term(u).kind == k) ++n;
      for (TermId c : term(u).args) stack.push_back(c);
    }
    return n;
  }

  void collect_subterms(TermId t, std::unordered_set<TermId>& out) const {
    std::vector<TermId> stack{t};
    while (!stack.empty()) {
      TermId u = stack.back();
      stack.pop_back();
      if (!out.insert(u).second) continue;
      for (TermId c : term(u).args) stack.push_back(c);
    }
  }

 private:
  void require_bool(TermId a, const char* op) const {
    if (sort_of(a) != bool_sort_)
      throw SortError(std::string("non-Bool argument to ") + op);
  }

  void check_template(TermId a, TermId b, TermId f) const {
    if (sort_of(a) != sort_of(b)) throw SortError("weq/nweq between different array sorts");
    if (sort_of(f) != bool_sort_) throw SortError("weq/nweq template must be Bool");
    SortId idx = sort(sort_of(a)).index;
    // A hole of a non-index sort would survive instantiation.
    std::unordered_set<TermId> seen;
    std::vector<TermId> stack{f};
    while (!stack.empty()) {
      TermId u = stack.back();
      stack.pop_back();
      if (!seen.insert(u).second) continue;
      const Term& n = term(u);
      if (n.kind == Kind::Hole && n.sort != idx)
        throw SortError("template hole sort does not match the array index sort");
      for (TermId c : n.args) stack.push_back(c);
    }
  }

  bool contains_rec(TermId t, TermId needle, std::unordered_set<TermId>& seen) const {
    if (t == needle) return true;
    if (!seen.insert(t).second) return false;
    for (TermId c : term(t).args)
      if (contains_rec(c, needle, seen)) return true;
    return false;
  }

  template <typename F>
  TermId subst_rec(TermId t, const F& hit, std::unordered_map<TermId, TermId>& memo) {
    TermId r = hit(t);
    if (r != kNoTerm) return r;
    auto it = memo.find(t);
    if (it != memo.end()) return it->second;
    const Term n = term(t);  // copy: interning below may reallocate
    bool changed = false;
    std::vector<TermId> args;
    args.reserve(n.args.size());
    for (TermId c : n.args) {
      TermId nc = subst_rec(c, hit, memo);
      changed |= nc != c;
      args.push_back(nc);
    }
    TermId res = t;
    if (changed) res = rebuild(n, args);
    memo.emplace(t, res);
    return res;
  }

  TermId rebuild(const Term& n, const std::vector<TermId>& args) {
    switch (n.kind) {
      case Kind::Not: return mk_not(args[0]);
      case Kind::And: return mk_and(args);
      case Kind::Or: return mk_or(args);
      case Kind::Eq: return mk_eq(args[0], args[1]);
      case Kind::Select: return mk_select(args[0], args[1]);
      case Kind::Store: return mk_store(args[0], args[1], args[2]);
      case Kind::Diff: return mk_diff(args[0], args[1]);
      case Kind::EqPred: return mk_eqpred(args[0], args[1]);
      case Kind::App: return mk_app(n.sym, args);
      default: assert(args.empty()); return intern(n.kind, n.sym, n.sort, args);
    }
  }

  SortId intern_sort(const Sort& s) {
    for (SortId i = 0; i < sorts_.size(); ++i) {
      const Sort& o = sorts_[i];
      if (o.kind == s.kind && o.name == s.name && o.index == s.index && o.elem == s.elem)
        return i;
    }
    sorts_.push_back(s);
    return static_cast<SortId>(sorts_.size() - 1);
  }

  struct NodeKey {
    Kind kind;
    uint32_t sym;
    SortId sort;
    std::vector<TermId> args;
    bool operator==(const NodeKey& o) const {
      return kind == o.kind && sym == o.sym && sort == o.sort && args == o.args;
    }
  };
  struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const {
      size_t h = std::hash<uint32_t>()((static_cast<uint32_t>(k.kind) << 24) ^ k.sym);
      h ^= std::hash<uint32_t>()(k.sort) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      for (TermId a : k.args)
        h ^= std::hash<uint32_t>()(a) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      return h;
    }
  };

  TermId intern(Kind kind, uint32_t sym, SortId sort, const std::vector<TermId>& args) {
    NodeKey key{kind, sym, sort, args};
    auto it = node_map_.find(key);
    if (it != node_map_.end()) return it->second;
    TermId id = static_cast<TermId>(terms_.size());
    terms_.push_back({kind, sym, sort, args});
    node_map_.emplace(std::move(key), id);
    return id;
  }

  std::vector<Sort> sorts_;
  std::unordered_map<std::string, SortId> sort_names_;
  std::vector<FunDecl> funs_;
  std::unordered_map<std::string, uint32_t> fun_names_;
  std::vector<AuxDecl> auxes_;
  std::vector<Term> terms_;
  std::unordered_map<NodeKey, TermId, NodeKeyHash> node_map_;
  SortId bool_sort_ = 0;
  TermId true_ = 0;
  TermId false_ = 0;
};

}  // namespace weqinterp

#endif  // WEQINTERP_TERMS_HPP
