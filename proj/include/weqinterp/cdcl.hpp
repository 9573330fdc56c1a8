// CDCL SAT core with theory hooks and resolution proof logging.
// Fixed decision order (ascending atom id), 1UIP learning, no restarts.

#ifndef WEQINTERP_CDCL_HPP
#define WEQINTERP_CDCL_HPP

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weqinterp/lemmas.hpp"

namespace weqinterp {

struct TimeoutExceeded : std::runtime_error {
  TimeoutExceeded() : std::runtime_error("timeout exceeded") {}
};

using ProofId = uint32_t;
constexpr ProofId kNoProof = 0xffffffffu;

struct ProofNode {
  enum Kind : uint8_t { Leaf, Theory, Res } kind;
  std::vector<Lit> clause;
  uint32_t assertion = 0;            // Leaf: source assertion index
  std::shared_ptr<LemmaInfo> lemma;  // Theory
  TermId pivot = kNoTerm;            // Res: atom; positive in left, negative in right
  ProofId left = kNoProof, right = kNoProof;
};

class Proof {
 public:
  ProofId add_leaf(std::vector<Lit> clause, uint32_t assertion) {
    ProofNode n;
    n.kind = ProofNode::Leaf;
    n.clause = std::move(clause);
    n.assertion = assertion;
    nodes_.push_back(std::move(n));
    return static_cast<ProofId>(nodes_.size() - 1);
  }

  ProofId add_theory(std::vector<Lit> clause, LemmaInfo info) {
    ProofNode n;
    n.kind = ProofNode::Theory;
    n.clause = std::move(clause);
    n.lemma = std::make_shared<LemmaInfo>(std::move(info));
    nodes_.push_back(std::move(n));
    return static_cast<ProofId>(nodes_.size() - 1);
  }

  ProofId add_res(TermId pivot, ProofId left, ProofId right) {
    ProofNode n;
    n.kind = ProofNode::Res;
    n.pivot = pivot;
    n.left = left;
    n.right = right;
    n.clause = resolvent(nodes_[left].clause, nodes_[right].clause, pivot);
    nodes_.push_back(std::move(n));
    return static_cast<ProofId>(nodes_.size() - 1);
  }

  static std::vector<Lit> resolvent(const std::vector<Lit>& left,
                                    const std::vector<Lit>& right, TermId pivot) {
    std::vector<Lit> out;
    std::unordered_set<uint64_t> seen;
    auto push = [&](const Lit& l) {
      uint64_t k = (uint64_t(l.atom) << 1) | (l.pos ? 1 : 0);
      if (seen.insert(k).second) out.push_back(l);
    };
    for (const Lit& l : left)
      if (!(l.atom == pivot && l.pos)) push(l);
    for (const Lit& l : right)
      if (!(l.atom == pivot && !l.pos)) push(l);
    return out;
  }

  const ProofNode& node(ProofId id) const { return nodes_.at(id); }
  size_t size() const { return nodes_.size(); }
  ProofId root() const { return root_; }
  void set_root(ProofId r) { root_ = r; }

  uint64_t structural_hash() const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](uint64_t x) { h ^= x; h *= 1099511628211ull; };
    for (const ProofNode& n : nodes_) {
      mix(n.kind);
      mix(n.pivot);
      mix(n.left);
      mix(n.right);
      mix(n.assertion);
      for (const Lit& l : n.clause) mix((uint64_t(l.atom) << 1) | (l.pos ? 1 : 0));
    }
    mix(root_);
    return h;
  }

 private:
  std::vector<ProofNode> nodes_;
  ProofId root_ = kNoProof;
};

// Callbacks into the theory side. on_assert may queue new clauses through
// the solver; it never makes the boolean trail inconsistent by itself.
class TheoryClient {
 public:
  virtual ~TheoryClient() = default;
  virtual void on_assert(Lit l) = 0;
  virtual void on_backtrack(size_t trail_size) = 0;
  virtual bool final_check() = 0;  // true: new clauses were queued
};

class Cdcl {
 public:
  explicit Cdcl(Context& ctx) : ctx_(ctx) {}

  void set_theory(TheoryClient* t) { theory_ = t; }
  Proof& proof() { return proof_; }
  const Proof& proof() const { return proof_; }

  enum class AddStatus { Added, Duplicate, Tautology };

  AddStatus add_clause(const std::vector<Lit>& lits, ProofId origin) {
    std::vector<uint32_t> els;
    els.reserve(lits.size());
    for (const Lit& l : lits) {
      if (l.atom == ctx_.mk_true()) {
        if (l.pos) return AddStatus::Tautology;
        continue;
      }
      if (l.atom == ctx_.mk_false()) {
        if (!l.pos) return AddStatus::Tautology;
        continue;
      }
      els.push_back(encode(var_of(l.atom), l.pos));
    }
    std::sort(els.begin(), els.end());
    els.erase(std::unique(els.begin(), els.end()), els.end());
    for (size_t k = 0; k + 1 < els.size(); ++k)
      if ((els[k] ^ 1) == els[k + 1]) return AddStatus::Tautology;
    auto it = clause_set_.find(els);
    if (it != clause_set_.end()) {
      fresh_.push_back(it->second);  // re-attach for pending propagation
      return AddStatus::Duplicate;
    }
    uint32_t idx = static_cast<uint32_t>(clauses_.size());
    clause_set_.emplace(els, idx);
    clauses_.push_back({els, origin, 0, 0});
    fresh_.push_back(idx);
    return AddStatus::Added;
  }

  enum class Status { Sat, Unsat };

  Status solve(uint64_t timeout_ms = 0) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
      if (timeout_ms && std::chrono::steady_clock::now() > deadline) throw TimeoutExceeded();
      std::optional<uint32_t> confl = propagate();
      if (confl) {
        if (level_of_conflict(*confl) == 0) {
          finalize_unsat(*confl);
          return Status::Unsat;
        }
        auto [learned, pid, bl] = analyze(*confl);
        backjump(bl);
        std::vector<Lit> lits;
        for (uint32_t el : learned) lits.push_back({var_atom_[el >> 1], (el & 1) == 0});
        add_clause(lits, pid);
        continue;
      }
      uint32_t next = pick_branch();
      if (next == kNoVar) {
        if (theory_ && theory_->final_check()) continue;
        return Status::Sat;
      }
      ++decision_level_;
      level_marks_.push_back(trail_.size());
      enqueue(encode(next, false), kNoClause);  // decide false first
    }
  }

  bool value_of(TermId atom) const {
    auto it = atom_var_.find(atom);
    assert(it != atom_var_.end());
    return val_[it->second] == 1;
  }

  bool has_var(TermId atom) const { return atom_var_.count(atom) != 0; }

  // Assigned atoms in trail order.
  std::vector<Lit> assignment() const {
    std::vector<Lit> out;
    for (uint32_t el : trail_) out.push_back({var_atom_[el >> 1], (el & 1) == 0});
    return out;
  }

  size_t num_clauses() const { return clauses_.size(); }
  const std::vector<Lit> clause_lits(uint32_t idx) const {
    std::vector<Lit> out;
    for (uint32_t el : clauses_[idx].els) out.push_back({var_atom_[el >> 1], (el & 1) == 0});
    return out;
  }
  ProofId clause_proof(uint32_t idx) const { return clauses_[idx].proof; }

 private:
  static constexpr uint32_t kNoVar = 0xffffffffu;
  static constexpr uint32_t kNoClause = 0xffffffffu;

  struct CClause {
    std::vector<uint32_t> els;
    ProofId proof;
    uint32_t w0 = 0, w1 = 0;  // watched positions
  };

  struct VecHash {
    size_t operator()(const std::vector<uint32_t>& v) const {
      size_t h = 1469598103934665603ull;
      for (uint32_t x : v) { h ^= x; h *= 1099511628211ull; }
      return h;
    }
  };

  static uint32_t encode(uint32_t var, bool pos) { return (var << 1) | (pos ? 0u : 1u); }

  uint32_t var_of(TermId atom) {
    auto it = atom_var_.find(atom);
    if (it != atom_var_.end()) return it->second;
    uint32_t v = static_cast<uint32_t>(var_atom_.size());
    var_atom_.push_back(atom);
    atom_var_.emplace(atom, v);
    val_.push_back(-1);
    level_.push_back(0);
    reason_.push_back(kNoClause);
    watches_.resize(2 * var_atom_.size());
    // Decision order is by atom id.
    auto pos = std::lower_bound(order_.begin(), order_.end(), v,
                                [&](uint32_t x, uint32_t y) { return var_atom_[x] < var_atom_[y]; });
    order_.insert(pos, v);
    return v;
  }

  int lit_val(uint32_t el) const {
    int8_t v = val_[el >> 1];
    if (v < 0) return -1;
    return (el & 1) ? (v == 0 ? 1 : 0) : v;
  }

  void enqueue(uint32_t el, uint32_t reason) {
    uint32_t v = el >> 1;
    assert(val_[v] < 0);
    val_[v] = (el & 1) ? 0 : 1;
    level_[v] = decision_level_;
    reason_[v] = reason;
    trail_.push_back(el);
    if (theory_) theory_->on_assert({var_atom_[v], (el & 1) == 0});
  }

  std::optional<uint32_t> propagate() {
    while (true) {
      // Integrate freshly added clauses first.
      if (!fresh_.empty()) {
        uint32_t idx = fresh_.back();
        fresh_.pop_back();
        if (auto c = attach(idx)) return c;
        continue;
      }
      if (qhead_ == trail_.size()) return std::nullopt;
      uint32_t p = trail_[qhead_++];
      uint32_t np = p ^ 1;
      std::vector<uint32_t> ws;
      ws.swap(watches_[np]);
      std::vector<uint32_t> keep;
      std::optional<uint32_t> confl;
      for (size_t wi = 0; wi < ws.size(); ++wi) {
        uint32_t ci = ws[wi];
        if (confl) { keep.push_back(ci); continue; }
        CClause& c = clauses_[ci];
        if (c.els[c.w0] != np && c.els[c.w1] != np) continue;  // stale watch
        uint32_t other = (c.els[c.w0] == np) ? c.w1 : c.w0;
        uint32_t self = (c.els[c.w0] == np) ? c.w0 : c.w1;
        if (lit_val(c.els[other]) == 1) { keep.push_back(ci); continue; }
        bool moved = false;
        for (uint32_t k = 0; k < c.els.size(); ++k) {
          if (k == other || k == self) continue;
          if (lit_val(c.els[k]) != 0) {
            (c.w0 == self ? c.w0 : c.w1) = k;
            watches_[c.els[k]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        keep.push_back(ci);
        int ov = lit_val(c.els[other]);
        if (ov == 0) {
          confl = ci;
        } else if (ov == -1) {
          enqueue(c.els[other], ci);
        }
      }
      for (uint32_t ci : keep) watches_[np].push_back(ci);
      if (confl) return confl;
    }
  }

  // Attaches a new clause under the current assignment.
  std::optional<uint32_t> attach(uint32_t idx) {
    CClause& c = clauses_[idx];
    if (c.els.empty()) {
      empty_clause_ = idx;
      return idx;
    }
    // Rank: non-false first, then by assignment level (latest first).
    auto rank = [&](uint32_t el) -> int64_t {
      int v = lit_val(el);
      if (v != 0) return INT64_MAX;
      return level_[el >> 1];
    };
    uint32_t best0 = 0, best1 = (c.els.size() > 1) ? 1 : 0;
    if (c.els.size() > 1) {
      for (uint32_t k = 0; k < c.els.size(); ++k) {
        if (rank(c.els[k]) > rank(c.els[best0])) { best1 = best0; best0 = k; }
        else if (k != best0 && rank(c.els[k]) > rank(c.els[best1])) best1 = k;
      }
      if (best0 == best1) best1 = (best0 == 0) ? 1 : 0;
    }
    c.w0 = best0;
    c.w1 = best1;
    watches_[c.els[c.w0]].push_back(idx);
    if (c.els.size() > 1) watches_[c.els[c.w1]].push_back(idx);

    int v0 = lit_val(c.els[c.w0]);
    if (c.els.size() == 1) {
      if (v0 == 0) return idx;
      if (v0 == -1) enqueue(c.els[c.w0], idx);
      return std::nullopt;
    }
    int v1 = lit_val(c.els[c.w1]);
    if (v0 == 0 && v1 == 0) return idx;   // conflicting
    if (v0 != 0 && v1 == 0 && v0 == -1) enqueue(c.els[c.w0], idx);
    if (v1 != 0 && v0 == 0 && v1 == -1) enqueue(c.els[c.w1], idx);
    return std::nullopt;
  }

  int level_of_conflict(uint32_t ci) const {
    if (clauses_[ci].els.empty()) return 0;
    int lvl = 0;
    for (uint32_t el : clauses_[ci].els) lvl = std::max(lvl, level_[el >> 1]);
    return lvl;
  }

  uint32_t pick_branch() const {
    for (uint32_t v : order_)
      if (val_[v] < 0) return v;
    return kNoVar;
  }

  // 1UIP learning with a recorded resolution chain.
  std::tuple<std::vector<uint32_t>, ProofId, int> analyze(uint32_t confl) {
    std::vector<uint32_t> learnt;
    std::vector<char> seen(var_atom_.size(), 0);
    int pathc = 0;
    uint32_t p = 0;
    bool have_p = false;
    size_t index = trail_.size();
    ProofId running = clauses_[confl].proof;
    const std::vector<uint32_t>* creason = &clauses_[confl].els;

    while (true) {
      for (uint32_t q : *creason) {
        if (have_p && q == p) continue;
        uint32_t v = q >> 1;
        // Level-0 literals stay in the learned clause so that the recorded
        // resolution chain derives exactly the clause that is added.
        if (!seen[v]) {
          seen[v] = 1;
          if (level_[v] == decision_level_ && level_[v] > 0) ++pathc;
          else learnt.push_back(q);
        }
      }
      // Next literal to resolve on.
      while (index > 0 && !seen[trail_[index - 1] >> 1]) --index;
      assert(index > 0);
      p = trail_[--index];
      uint32_t v = p >> 1;
      seen[v] = 0;
      --pathc;
      if (pathc <= 0) {
        learnt.insert(learnt.begin(), p ^ 1);
        break;
      }
      uint32_t rc = reason_[v];
      assert(rc != kNoClause);
      // Resolve running with reason on pivot var v.
      TermId atom = var_atom_[v];
      bool p_pos = (p & 1) == 0;
      // reason contains p (the propagated literal), running contains ~p.
      ProofId reason_pid = clauses_[rc].proof;
      running = p_pos ? proof_.add_res(atom, reason_pid, running)
                      : proof_.add_res(atom, running, reason_pid);
      creason = &clauses_[rc].els;
      // p itself must not be re-added.
      have_p = true;
    }

    int bl = 0;
    for (size_t k = 1; k < learnt.size(); ++k) bl = std::max(bl, level_[learnt[k] >> 1]);
    return {learnt, running, bl};
  }

  void finalize_unsat(uint32_t confl) {
    // Resolve away every literal of the level-0 conflict.
    ProofId running = clauses_[confl].proof;
    std::vector<Lit> cur = proof_.node(running).clause;
    while (!cur.empty()) {
      // Latest assigned literal first keeps the recursion well-founded.
      size_t best = 0;
      size_t best_pos = 0;
      for (size_t k = 0; k < cur.size(); ++k) {
        uint32_t v = atom_var_.at(cur[k].atom);
        size_t pos = trail_pos(v);
        if (k == 0 || pos > best_pos) { best = k; best_pos = pos; }
      }
      uint32_t v = atom_var_.at(cur[best].atom);
      uint32_t rc = reason_[v];
      assert(rc != kNoClause);
      bool assigned_pos = val_[v] == 1;
      // The conflict clause holds the falsified literal (~assignment).
      running = assigned_pos ? proof_.add_res(var_atom_[v], clauses_[rc].proof, running)
                             : proof_.add_res(var_atom_[v], running, clauses_[rc].proof);
      cur = proof_.node(running).clause;
    }
    proof_.set_root(running);
  }

  size_t trail_pos(uint32_t v) const {
    for (size_t k = trail_.size(); k-- > 0;)
      if ((trail_[k] >> 1) == v) return k;
    return 0;
  }

  void backjump(int target) {
    while (decision_level_ > target) {
      size_t mark = level_marks_.back();
      level_marks_.pop_back();
      while (trail_.size() > mark) {
        uint32_t el = trail_.back();
        trail_.pop_back();
        val_[el >> 1] = -1;
        reason_[el >> 1] = kNoClause;
      }
      --decision_level_;
    }
    qhead_ = std::min(qhead_, trail_.size());
    if (theory_) theory_->on_backtrack(trail_.size());
  }

  Context& ctx_;
  Proof proof_;
  TheoryClient* theory_ = nullptr;

  std::vector<TermId> var_atom_;
  std::unordered_map<TermId, uint32_t> atom_var_;
  std::vector<int8_t> val_;
  std::vector<int> level_;
  std::vector<uint32_t> reason_;
  std::vector<uint32_t> order_;  // vars sorted by atom id

  std::vector<CClause> clauses_;
  std::unordered_map<std::vector<uint32_t>, uint32_t, VecHash> clause_set_;
  std::vector<uint32_t> fresh_;
  std::vector<std::vector<uint32_t>> watches_;

  std::vector<uint32_t> trail_;
  size_t qhead_ = 0;
  std::vector<size_t> level_marks_;
  int decision_level_ = 0;
  uint32_t empty_clause_ = kNoClause;
};

}  // namespace weqinterp

#endif  // WEQINTERP_CDCL_HPP
