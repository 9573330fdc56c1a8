// Theory lemma descriptors: the path data recorded at instantiation time
// and consumed by the lemma interpolators.

#ifndef WEQINTERP_LEMMAS_HPP
#define WEQINTERP_LEMMAS_HPP

#include <variant>
#include <vector>

#include "weqinterp/egraph.hpp"

namespace weqinterp {

enum class EdgeKind : uint8_t {
  Strong,       // from ~ to, justified by one equality atom
  StoreStep,    // one endpoint is store(other, index, .)
  SelectBridge, // select(from,k1) ~ select(to,k2) with k1 ~ i ~ k2
};

struct PathEdge {
  EdgeKind kind;
  TermId from = kNoTerm, to = kNoTerm;
  TermId lit_atom = kNoTerm;    // Strong/SelectBridge equality atom (kNoTerm if trivial)
  TermId store_term = kNoTerm;  // StoreStep: the store node (== from or to)
  TermId index = kNoTerm;       // StoreStep: its index term
  TermId diseq_atom = kNoTerm;  // StoreStep on an i-avoiding path: eq(index, i)
  TermId sel_from = kNoTerm, sel_to = kNoTerm;  // SelectBridge select terms
  TermId idx_eq_from = kNoTerm, idx_eq_to = kNoTerm;  // eq(k1,i) / eq(k2,i) atoms
};

struct WeakPath {
  TermId a = kNoTerm, b = kNoTerm;
  std::vector<PathEdge> edges;

  std::vector<TermId> store_indices() const {
    std::vector<TermId> out;
    for (const PathEdge& e : edges)
      if (e.kind == EdgeKind::StoreStep) out.push_back(e.index);
    return out;
  }
};

struct RoweqLemma {
  WeakPath path;              // a weakly-equivalent-on-i b
  TermId i, j;                // select indices; i on the a side
  TermId sel_a, sel_b;        // select(a,i), select(b,j)
  TermId eq_ij_atom;          // eq(i,j), kNoTerm when i and j coincide
  TermId concl_atom;          // eq(sel_a, sel_b)
};

struct IPath {
  TermId index;   // main-path store index this path avoids
  WeakPath path;  // weak congruence between the main endpoints
};

struct WeqExtLemma {
  WeakPath main;
  std::vector<IPath> ipaths;  // one per store edge of main, in edge order
  TermId concl_atom;          // eq(a, b)
};

// Equality chain: links with equality atoms (or axiom steps without one).
struct EufTransLemma {
  struct Link {
    TermId from, to;
    TermId atom;       // eq(from, to); kNoTerm for an axiom step
    TermId store_term; // axiom steps: the store term the instance came from
  };
  std::vector<Link> links;
  TermId goal_atom;  // eq(u0, un)
};

// x_l = y_l (per argument) implies f(xs) = f(ys).
struct EufCongLemma {
  TermId t1, t2;
  std::vector<TermId> premises;  // eq atoms; kNoTerm for identical arguments
  TermId concl_atom;
};

// Boolean application congruence: premises and p(xs) imply p(ys).
struct EufAppCongLemma {
  TermId t1, t2;                 // Bool applications
  std::vector<TermId> premises;  // eq atoms; kNoTerm for identical arguments
};

// select(a, diff(a,b)) = select(b, diff(a,b)) implies a = b.
struct ExtDiffLemma {
  TermId a, b;
  TermId sel_eq_atom;
  TermId concl_atom;
};

using LemmaInfo = std::variant<RoweqLemma, WeqExtLemma, EufTransLemma, EufCongLemma,
                               EufAppCongLemma, ExtDiffLemma>;

}  // namespace weqinterp

#endif  // WEQINTERP_LEMMAS_HPP
