#pragma once

// Tree automata that generate type trees, and the product-style decision
// procedure over automaton states.
//
// One state per subterm occurrence; Rec nodes contribute no state of their
// own.  A variable bound by a Rec becomes a back-edge to the Rec's body
// state, routed through one Shift state per Forall binder crossed between the
// Rec binder and the occurrence.  Shift states are transparent when
// generating trees; they only adjust binder-distance accounting, which is
// what keeps unfoldings that cross quantifiers representable by a finite
// machine.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "recsub/coinductive.hpp"
#include "recsub/syntax.hpp"
#include "recsub/tree.hpp"

namespace recsub {

class TreeAutomaton {
 public:
  enum class Label { Fun, Forall, Shift, BoundVar, FreeVar };

  struct State {
    Label label;
    int varIndex = -1;   // BoundVar: Forall-distance at the occurrence
    std::string name;    // FreeVar
    // Fun: next[0]=L, next[1]=R; Forall: next[0]=B, next[1]=D;
    // Shift: next[0]=S.
    int next[2] = {-1, -1};
  };

  std::vector<State> states;
  int start = 0;

  int shiftCount() const;
  int maxBoundVarIndex() const;
};

const char* automatonLabelName(TreeAutomaton::Label l);

/// Builds the automaton generating treeof(t, .).  Requires t well-formed.
TreeAutomaton automataof(const Ty& t);

struct InvalidRunError : std::runtime_error {
  explicit InvalidRunError(const std::string& msg)
      : std::runtime_error("invalid run: " + msg) {}
};

struct ResolveResult {
  bool escapes = false;
  int binderPos = -1;  // position in the run of the binding Forall state
  int residual = 0;    // ESCAPES: counter value when the walk passed start
  int distance = 0;    // Forall states strictly between var and binder
};

/// Walks from a BoundVar occurrence in a run toward the start: Forall states
/// decrement the counter (a zero counter means "this is the binder"), Shift
/// states increment it.
ResolveResult resolveBinder(const TreeAutomaton& a, const std::vector<int>& run,
                            int varPos);

struct UnresolvableVarError : std::runtime_error {
  UnresolvableVarError()
      : std::runtime_error(
            "bound variable escapes its run (automaton construction bug)") {}
};

/// Depth-d unfolding of the automaton's runs; Shift states emit nothing and
/// cost no depth.  generate(automataof(t), d) == treeof(t, d).
Tr generate(const TreeAutomaton& a, int depth);

std::string dumpAutomaton(const TreeAutomaton& a);
std::string dumpAutomatonDot(const TreeAutomaton& a);
std::string dumpAutomatonJson(const TreeAutomaton& a);

/// Product-style decision procedure: explores goals pairing configurations
/// of the two automata in lockstep, with a correspondence stack pairing the
/// Forall binders entered together, promotion on the left for Sub, and
/// memoized goals (a revisited goal is accepted — gfp).
Verdict subtypeAutomata(const GlobalEnv& env, const TreeAutomaton& left,
                        const TreeAutomaton& right, Relation rel,
                        std::uint64_t budget = 1'000'000);

}  // namespace recsub
