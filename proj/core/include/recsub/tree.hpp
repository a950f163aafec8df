#pragma once

// The semantic model: finite-depth approximations of the possibly-infinite
// tree a type unrolls into, and a depth-bounded equality/subtyping oracle
// over those trees.  The oracle is deliberately naive (eager substitution,
// no coinduction) and serves as ground truth for the two engines.

#include <memory>
#include <string>
#include <vector>

#include "recsub/syntax.hpp"

namespace recsub {

// Child steps: L/R for Fun, B (bound) and D (body) for Forall.
enum class Step { L, R, B, D };
using Path = std::vector<Step>;

std::string pathToString(const Path& p);

enum class TrTag { Cut, Var, Free, Fun, Forall };

class TreeApprox;
using Tr = std::shared_ptr<const TreeApprox>;

class TreeApprox {
 public:
  TrTag tag;
  int dist = 0;      // Var: Forall-distance to the binder
  std::string name;  // Free
  Tr a, b;           // Fun: left/right; Forall: bound/body
};

Tr trCut();
Tr trVar(int dist);
Tr trFree(std::string name);
Tr trFun(Tr left, Tr right);
Tr trForall(Tr bound, Tr body);

bool trEqual(const Tr& a, const Tr& b);

/// Indented text rendering, one node per line.
std::string renderTree(const Tr& t);

/// Single-line rendering, e.g. "A -> (A -> <cut>)".
std::string renderTreeInline(const Tr& t);

/// Depth-d approximation of the tree denoted by t.  Rec binders are
/// eliminated by unrolling, so every VarNode distance counts Forall
/// ancestors only.  d = 0 yields Cut.
Tr treeof(const Ty& t, int depth);

/// Replaces all nodes at depth d by Cut.
Tr truncate(const Tr& t, int depth);

/// True iff t1 equals t2 after replacing some subtrees of t2 by Cut.
bool isPrefixOf(const Tr& t1, const Tr& t2);

// ---------------------------------------------------------------------------
// Depth-bounded oracle
// ---------------------------------------------------------------------------

struct BinderEntry {
  Ty bound;        // in the index space just inside the binder (index 0 = it)
  int depthAtBind; // stack size after this entry was pushed
};
using BinderStack = std::vector<BinderEntry>;

struct OracleResult {
  bool yes = false;  // YesToDepth
  Path witness;      // for No: root-to-clash path
};

/// Depth-bounded reading of the tree relation.  Every constructor consumes
/// one depth unit; promotion (Sub only, left side) consumes fuel instead.
/// fuel < 0 selects the default |stack| + |env| + 1; fuel is re-armed at each
/// structural rule, so it bounds promotion chains, not derivations.
OracleResult oracleCheck(const GlobalEnv& env, const BinderStack& stack, Ty l,
                         Ty r, Relation rel, int depth, int fuel = -1);

}  // namespace recsub
