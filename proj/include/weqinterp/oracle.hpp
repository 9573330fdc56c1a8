// Bounded finite-model search for the quantifier-free array fragment.
// Interpretations are enumerated lazily: a choice point (constant value,
// array cell, function entry, EQ entry) is only branched when formula
// evaluation actually reads it, and fresh domain values are introduced
// in canonical least-first order.

#ifndef WEQINTERP_ORACLE_HPP
#define WEQINTERP_ORACLE_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weqinterp/terms.hpp"

namespace weqinterp {

struct BoundTooLarge : std::runtime_error {
  explicit BoundTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct OracleBounds {
  std::map<SortId, uint32_t> sizes;  // uninterpreted sorts only
  uint64_t budget = 20'000'000;      // search nodes

  uint32_t size_of(SortId s) const {
    auto it = sizes.find(s);
    return it == sizes.end() ? 1 : it->second;
  }
};

// Index domain: one value per distinct index term plus one; element domain:
// element terms plus one value per array term plus one, so arrays forced
// distinct can always differ somewhere.
inline OracleBounds derive_bounds(const Context& ctx, const std::vector<TermId>& formulas,
                                  uint32_t cap = 0) {
  std::unordered_set<TermId> nodes;
  for (TermId f : formulas) ctx.collect_subterms(f, nodes);
  std::map<SortId, uint32_t> term_count;
  std::map<SortId, uint32_t> array_bonus;
  for (TermId t : nodes) {
    SortId s = ctx.sort_of(t);
    const Sort& so = ctx.sort(s);
    if (so.kind == SortKind::Uninterp) ++term_count[s];
    if (so.kind == SortKind::Array) ++array_bonus[so.elem];
  }
  OracleBounds b;
  std::unordered_set<SortId> sorts;
  for (TermId t : nodes) {
    SortId s = ctx.sort_of(t);
    const Sort& so = ctx.sort(s);
    if (so.kind == SortKind::Uninterp) sorts.insert(s);
    if (so.kind == SortKind::Array) { sorts.insert(so.index); sorts.insert(so.elem); }
  }
  for (SortId s : sorts) {
    uint32_t n = term_count[s] + array_bonus[s] + 1;
    if (cap) n = std::min(n, cap);
    b.sizes[s] = n;
  }
  return b;
}

struct FiniteModel {
  std::map<SortId, uint32_t> sizes;
  std::map<std::string, uint32_t> consts;                              // non-array constants
  std::map<std::string, std::vector<uint32_t>> arrays;                 // total tables
  std::map<std::string, std::map<std::vector<uint32_t>, uint32_t>> funs;  // realized entries

  std::string dump(const Context& ctx) const {
    std::ostringstream os;
    for (auto& [s, n] : sizes) os << ctx.sort_name(s) << " : " << n << " values\n";
    for (auto& [name, v] : consts) os << name << " = " << v << "\n";
    for (auto& [name, tab] : arrays) {
      os << name << " = [";
      for (size_t i = 0; i < tab.size(); ++i) os << (i ? " " : "") << tab[i];
      os << "]\n";
    }
    for (auto& [name, entries] : funs)
      for (auto& [args, v] : entries) {
        os << name << "(";
        for (size_t i = 0; i < args.size(); ++i) os << (i ? " " : "") << args[i];
        os << ") = " << v << "\n";
      }
    return os.str();
  }
};

enum class OracleVerdict { Sat, UnsatUpTo };

struct OracleResult {
  OracleVerdict verdict;
  FiniteModel model;  // Sat only
  bool sat() const { return verdict == OracleVerdict::Sat; }
};

class Oracle {
 public:
  Oracle(const Context& ctx, OracleBounds bounds) : ctx_(ctx), bounds_(std::move(bounds)) {}

  OracleResult check(const std::vector<TermId>& formulas) {
    {
      std::vector<TermId> fs = formulas;
      fs.erase(std::remove(fs.begin(), fs.end(), ctx_.mk_true()), fs.end());
      if (fs.empty()) return {OracleVerdict::Sat, materialize()};
      root_ = fs;
    }
    // The least-first value order treats domain values as interchangeable.
    // diff picks the least differing index, which makes index values
    // order-sensitive, so the shortcut is off for index sorts then.
    no_symmetry_.clear();
    bool has_diff = false;
    std::unordered_set<TermId> nodes;
    for (TermId f : root_) ctx_.collect_subterms(f, nodes);
    for (TermId t : nodes)
      if (ctx_.term(t).kind == Kind::Diff) { has_diff = true; break; }
    if (has_diff)
      for (TermId t : nodes) {
        const Sort& so = ctx_.sort(ctx_.sort_of(t));
        if (so.kind == SortKind::Array) no_symmetry_.insert(so.index);
      }
    nodes_ = 0;
    assign_.clear();
    trail_.clear();
    used_.clear();
    frames_.clear();

    while (true) {
      if (++nodes_ > bounds_.budget)
        throw BoundTooLarge("oracle enumeration budget exceeded");
      pending_.reset();
      cache_.clear();
      acache_.clear();
      int v = eval_root();
      if (v == kTrue) return {OracleVerdict::Sat, materialize()};
      if (v == kFalse) {
        if (!advance()) return {OracleVerdict::UnsatUpTo, {}};
      } else {
        push_frame(*pending_);
      }
    }
  }

  uint64_t nodes_explored() const { return nodes_; }

 private:
  static constexpr int kTrue = 1, kFalse = 0, kUnknown = -1;

  // Choice points are keyed by flat vectors:
  //   {0, 0x80000000|aux}      auxiliary variable (non-array)
  //   {1, base, idx}           array cell; base encodes fun/aux below
  //   {2, fun, args...}        function entry; nullary entries are constants
  //   {3, sort, xv, tv...}     EQ entry over value pair
  using Key = std::vector<uint32_t>;
  struct KeyHash {
    size_t operator()(const Key& k) const {
      size_t h = 1469598103934665603ull;
      for (uint32_t x : k) { h ^= x; h *= 1099511628211ull; }
      return h;
    }
  };

  // Base arrays: declared constants get 2*fun, aux vars 2*aux+1.
  static uint32_t base_of_fun(uint32_t f) { return 2 * f; }
  static uint32_t base_of_aux(uint32_t a) { return 2 * a + 1; }

  struct ArrayRef {
    uint32_t base;
    std::vector<std::pair<uint32_t, uint32_t>> over;  // idx value -> elem value
    std::optional<uint32_t> over_at(uint32_t i) const {
      for (auto it = over.rbegin(); it != over.rend(); ++it)
        if (it->first == i) return it->second;
      return std::nullopt;
    }
  };

  struct Frame {
    Key key;
    SortId sort;       // result sort of the point (Bool handled separately)
    uint32_t next;     // next value to try
    size_t trail_mark;
  };

  int eval_root() {
    // Conjunction with early false.
    bool unknown = false;
    for (TermId f : root_) {
      int v = eval(f);
      if (v == kFalse) return kFalse;
      if (v == kUnknown) unknown = true;
    }
    return unknown ? kUnknown : kTrue;
  }

  int eval(TermId t) {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    int r = eval_uncached(t);
    cache_.emplace(t, r);
    return r;
  }

  int eval_uncached(TermId t) {
    const Term& n = ctx_.term(t);
    switch (n.kind) {
      case Kind::True: return kTrue;
      case Kind::False: return kFalse;
      case Kind::Not: {
        int v = eval(n.args[0]);
        return v == kUnknown ? kUnknown : (v == kTrue ? kFalse : kTrue);
      }
      case Kind::And: {
        bool unknown = false;
        for (TermId a : n.args) {
          int v = eval(a);
          if (v == kFalse) return kFalse;
          if (v == kUnknown) unknown = true;
        }
        return unknown ? kUnknown : kTrue;
      }
      case Kind::Or: {
        bool unknown = false;
        for (TermId a : n.args) {
          int v = eval(a);
          if (v == kTrue) return kTrue;
          if (v == kUnknown) unknown = true;
        }
        return unknown ? kUnknown : kFalse;
      }
      case Kind::Eq: {
        if (ctx_.sort(ctx_.sort_of(n.args[0])).kind == SortKind::Array)
          return eval_array_eq(n.args[0], n.args[1]);
        auto a = value(n.args[0]);
        auto b = value(n.args[1]);
        if (!a || !b) return kUnknown;
        return *a == *b ? kTrue : kFalse;
      }
      case Kind::EqPred: {
        SortId s = ctx_.sort_of(n.args[0]);
        std::optional<Key> suffix = value_key(n.args[0]);
        if (!suffix) return kUnknown;
        std::optional<Key> tv = value_key(n.args[1]);
        if (!tv) return kUnknown;
        Key key{3, s};
        key.insert(key.end(), suffix->begin(), suffix->end());
        key.insert(key.end(), tv->begin(), tv->end());
        auto v = lookup_bool(key);
        if (!v) return kUnknown;
        return *v ? kTrue : kFalse;
      }
      case Kind::App: {
        if (ctx_.sort_of(t) != ctx_.bool_sort()) break;  // handled via value() below
        auto v = value(t);
        if (!v) return kUnknown;
        return *v ? kTrue : kFalse;
      }
      default: break;
    }
    throw std::logic_error("oracle: not a formula node");
  }

  int eval_array_eq(TermId ta, TermId tb) {
    auto a = eval_array(ta);
    auto b = eval_array(tb);
    if (!a || !b) return kUnknown;
    uint32_t ni = index_size(ta);
    bool unknown = false;
    for (uint32_t i = 0; i < ni; ++i) {
      auto va = cell(*a, i, ta);
      auto vb = cell(*b, i, tb);
      if (!va || !vb) { unknown = true; continue; }
      if (*va != *vb) return kFalse;
    }
    return unknown ? kUnknown : kTrue;
  }

  uint32_t index_size(TermId arrayTerm) const {
    return bounds_.size_of(ctx_.sort(ctx_.sort_of(arrayTerm)).index);
  }
  uint32_t elem_size(TermId arrayTerm) const {
    return bounds_.size_of(ctx_.sort(ctx_.sort_of(arrayTerm)).elem);
  }

  std::optional<uint32_t> cell(const ArrayRef& a, uint32_t i, TermId arrayTerm) {
    if (auto o = a.over_at(i)) return o;
    Key key{1, a.base, i};
    return lookup(key, ctx_.sort(ctx_.sort_of(arrayTerm)).elem);
  }

  std::optional<ArrayRef> eval_array(TermId t) {
    auto it = acache_.find(t);
    if (it != acache_.end()) return it->second;
    auto r = eval_array_uncached(t);
    if (r) acache_.emplace(t, *r);
    return r;
  }

  std::optional<ArrayRef> eval_array_uncached(TermId t) {
    const Term& n = ctx_.term(t);
    switch (n.kind) {
      case Kind::App:
        if (!n.args.empty())
          throw UnsupportedFeature("oracle: array-valued functions are not supported");
        return ArrayRef{base_of_fun(n.sym), {}};
      case Kind::Aux:
        return ArrayRef{base_of_aux(n.sym), {}};
      case Kind::Store: {
        auto a = eval_array(n.args[0]);
        auto i = value(n.args[1]);
        auto v = value(n.args[2]);
        if (!a || !i || !v) return std::nullopt;
        ArrayRef r = *a;
        r.over.emplace_back(*i, *v);
        return r;
      }
      default:
        throw std::logic_error("oracle: unsupported array term");
    }
  }

  // Value of a non-array, non-Bool-structure term; Bool atoms map to 0/1.
  std::optional<uint32_t> value(TermId t) {
    const Term& n = ctx_.term(t);
    switch (n.kind) {
      case Kind::True: return 1;
      case Kind::False: return 0;
      case Kind::Not: case Kind::And: case Kind::Or: case Kind::Eq: case Kind::EqPred: {
        int v = eval(t);
        if (v == kUnknown) return std::nullopt;
        return v == kTrue ? 1u : 0u;
      }
      case Kind::App: {
        Key key{2, n.sym};
        for (TermId a : n.args) {
          auto av = value_key(a);
          if (!av) return std::nullopt;
          key.insert(key.end(), av->begin(), av->end());
        }
        SortId ret = ctx_.fun(n.sym).ret;
        if (ret == ctx_.bool_sort()) {
          auto v = lookup_bool(key);
          if (!v) return std::nullopt;
          return *v ? 1u : 0u;
        }
        return lookup(key, ret);
      }
      case Kind::Aux: {
        Key key{0, 0x80000000u | n.sym};
        return lookup(key, n.sort);
      }
      case Kind::Select: {
        auto a = eval_array(n.args[0]);
        auto i = value(n.args[1]);
        if (!a || !i) return std::nullopt;
        return cell(*a, *i, n.args[0]);
      }
      case Kind::Diff: {
        auto a = eval_array(n.args[0]);
        auto b = eval_array(n.args[1]);
        if (!a || !b) return std::nullopt;
        uint32_t ni = index_size(n.args[0]);
        for (uint32_t i = 0; i < ni; ++i) {
          auto va = cell(*a, i, n.args[0]);
          auto vb = cell(*b, i, n.args[1]);
          if (!va || !vb) return std::nullopt;  // least index needs the prefix
          if (*va != *vb) return i;
        }
        return 0;  // equal arrays: an arbitrary fixed index
      }
      case Kind::Hole:
        throw std::logic_error("oracle: template hole in a formula");
      case Kind::Store:
        throw std::logic_error("oracle: array term in value position");
    }
    return std::nullopt;
  }

  // Canonical value of a term used inside a choice-point key. Arrays
  // materialize to their full table.
  std::optional<Key> value_key(TermId t) {
    if (ctx_.sort(ctx_.sort_of(t)).kind == SortKind::Array) {
      auto a = eval_array(t);
      if (!a) return std::nullopt;
      uint32_t ni = index_size(t);
      Key k;
      k.reserve(ni);
      for (uint32_t i = 0; i < ni; ++i) {
        auto v = cell(*a, i, t);
        if (!v) return std::nullopt;
        k.push_back(*v);
      }
      return k;
    }
    auto v = value(t);
    if (!v) return std::nullopt;
    return Key{*v};
  }

  std::optional<uint32_t> lookup(const Key& key, SortId sort) {
    auto it = assign_.find(key);
    if (it != assign_.end()) return it->second;
    if (!pending_) pending_ = Pending{key, sort, false};
    return std::nullopt;
  }

  std::optional<bool> lookup_bool(const Key& key) {
    auto it = assign_.find(key);
    if (it != assign_.end()) return it->second != 0;
    if (!pending_) pending_ = Pending{key, kNoSort, true};
    return std::nullopt;
  }

  struct Pending {
    Key key;
    SortId sort;
    bool boolean;
  };

  // Least-first value order: at most one fresh value beyond those in use.
  uint32_t value_limit(const Frame& f) const {
    if (f.sort == kNoSort) return 2;  // boolean
    uint32_t n = bounds_.size_of(f.sort);
    if (no_symmetry_.count(f.sort)) return n;
    auto it = used_.find(f.sort);
    uint32_t used = it == used_.end() ? 0 : it->second;
    return std::min(n, used + 1);
  }

  void push_frame(const Pending& p) {
    Frame f{p.key, p.boolean ? kNoSort : p.sort, 0, trail_.size()};
    set_value(f, 0);
    f.next = 1;
    frames_.push_back(std::move(f));
  }

  void set_value(const Frame& f, uint32_t v) {
    assign_[f.key] = v;
    uint32_t prev_used = 0xffffffffu;
    if (f.sort != kNoSort) {
      uint32_t& u = used_[f.sort];
      prev_used = u;
      if (v >= u) u = v + 1;
    }
    trail_.push_back({f.key, f.sort, prev_used});
  }

  bool advance() {
    while (!frames_.empty()) {
      Frame& f = frames_.back();
      undo_to(f.trail_mark);
      if (f.next < value_limit(f)) {
        uint32_t v = f.next++;
        set_value(f, v);
        return true;
      }
      frames_.pop_back();
    }
    return false;
  }

  void undo_to(size_t mark) {
    while (trail_.size() > mark) {
      auto& e = trail_.back();
      assign_.erase(e.key);
      if (e.sort != kNoSort) used_[e.sort] = e.prev_used;
      trail_.pop_back();
    }
  }

  FiniteModel materialize() {
    FiniteModel m;
    m.sizes = bounds_.sizes;
    for (auto& [key, v] : assign_) {
      if (key[0] == 0) {
        uint32_t id = key[1];
        std::string name = (id & 0x80000000u) ? ctx_.aux(id & 0x7fffffffu).name
                                              : ctx_.fun(id).name;
        m.consts[name] = v;
      } else if (key[0] == 2 && key.size() == 2) {
        m.consts[ctx_.fun(key[1]).name] = v;
      }
    }
    // Tables: unread cells default to 0, which never introduces a new
    // difference between arrays on any accepting path.
    for (size_t f = 0; f < ctx_.num_funs(); ++f) {
      const FunDecl& d = ctx_.fun(static_cast<uint32_t>(f));
      if (!d.args.empty()) continue;
      const Sort& so = ctx_.sort(d.ret);
      if (so.kind != SortKind::Array) continue;
      uint32_t ni = bounds_.size_of(so.index);
      std::vector<uint32_t> tab(ni, 0);
      for (uint32_t i = 0; i < ni; ++i) {
        auto it = assign_.find(Key{1, base_of_fun(static_cast<uint32_t>(f)), i});
        if (it != assign_.end()) tab[i] = it->second;
      }
      m.arrays[d.name] = std::move(tab);
    }
    for (auto& [key, v] : assign_) {
      if (key[0] != 2 || key.size() == 2) continue;
      const FunDecl& d = ctx_.fun(key[1]);
      m.funs[d.name][std::vector<uint32_t>(key.begin() + 2, key.end())] = v;
    }
    return m;
  }

  const Context& ctx_;
  OracleBounds bounds_;
  std::vector<TermId> root_;

  std::unordered_map<Key, uint32_t, KeyHash> assign_;
  struct TrailEntry {
    Key key;
    SortId sort;
    uint32_t prev_used;
  };
  std::vector<TrailEntry> trail_;
  std::map<SortId, uint32_t> used_;
  std::unordered_set<SortId> no_symmetry_;
  std::vector<Frame> frames_;
  std::optional<Pending> pending_;
  uint64_t nodes_ = 0;

  std::unordered_map<TermId, int> cache_;
  std::unordered_map<TermId, ArrayRef> acache_;
};

inline OracleResult oracle_sat(const Context& ctx, const std::vector<TermId>& formulas,
                               const OracleBounds& bounds) {
  Oracle o(ctx, bounds);
  return o.check(formulas);
}

inline OracleResult oracle_sat(const Context& ctx, const std::vector<TermId>& formulas,
                               uint32_t cap = 0) {
  return oracle_sat(ctx, formulas, derive_bounds(ctx, formulas, cap));
}

}  // namespace weqinterp

#endif  // WEQINTERP_ORACLE_HPP
