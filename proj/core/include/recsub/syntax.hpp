#pragma once

// Core representation of second-order equirecursive types with F-bounded
// quantifiers, in de Bruijn form, plus the surface (named) syntax and the
// conversions between the two.
//
// Index convention: a single index space counts both Forall and Rec binders.
// Inside Forall(bound, body), index 0 in BOTH children refers to the Forall's
// own binder (this is what makes bounds F-bounded).  Inside Rec(body), index 0
// refers to the Rec binder.  Rec binders disappear only during unrolling.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace recsub {

enum class Relation { Sub, Eq };

inline const char* relationName(Relation r) {
  return r == Relation::Sub ? "sub" : "eq";
}

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

enum class TyTag { Var, Free, Fun, Forall, Rec };

class TypeExpr;
using Ty = std::shared_ptr<const TypeExpr>;

class TypeExpr {
 public:
  TyTag tag;
  int index = 0;     // Var
  std::string name;  // Free
  Ty a, b;           // Fun: dom/cod; Forall: bound/body; Rec: body in a

  // Cached at construction so memo tables get O(1) hashing.
  std::size_t hash = 0;
  int size = 1;
};

Ty tyVar(int index);
Ty tyFree(std::string name);
Ty tyFun(Ty dom, Ty cod);
Ty tyForall(Ty bound, Ty body);
Ty tyRec(Ty body);

bool tyEqual(const Ty& a, const Ty& b);
inline int tySize(const Ty& t) { return t->size; }
inline std::size_t tyHash(const Ty& t) { return t->hash; }

/// Maximum nesting depth of Forall constructors.
int quantifierDepth(const Ty& t);

/// Free de Bruijn indices of t, relative to t's root, ascending, deduplicated.
std::vector<int> freeIndices(const Ty& t);

/// Free names occurring in t, in first-occurrence order, deduplicated.
std::vector<std::string> freeNames(const Ty& t);

struct NegativeIndexError : std::runtime_error {
  explicit NegativeIndexError(int index)
      : std::runtime_error("shift would produce a negative de Bruijn index"),
        index(index) {}
  int index;
};

/// Every Var(i) with i >= cutoff becomes Var(i + delta); the cutoff increments
/// under each binder.  Throws NegativeIndexError if an index would go below 0.
Ty shiftIndices(const Ty& t, int cutoff, int delta);

/// Capture-avoiding substitution: Var(target) is replaced by s (shifted by
/// the binder depth at each occurrence); indices above target drop by one.
Ty substitute(const Ty& t, int target, const Ty& s);

/// True iff the Rec binder (index 0 of `body`, adjusted through nested Rec
/// binders) does not occur on the exposed spine of `body`.  Occurrences under
/// Fun or Forall are guarded.
bool isContractive(const Ty& body);

struct NotARecError : std::runtime_error {
  NotARecError() : std::runtime_error("unfoldRec applied to a non-Rec type") {}
};

/// Rec(body) -> substitute(body, 0, Rec(body)).  Throws NotARecError.
Ty unfoldRec(const Ty& t);

/// Unrolls Rec heads until the head constructor is not Rec.  Terminates for
/// well-formed (contractive) input.
Ty headNormalize(Ty t);

// ---------------------------------------------------------------------------
// Surface types
// ---------------------------------------------------------------------------

enum class SurfTag { Var, Fun, Forall, Rec };

class SurfaceType;
using Surf = std::shared_ptr<const SurfaceType>;

class SurfaceType {
 public:
  SurfTag tag;
  std::string name;  // Var: the identifier; Forall/Rec: the binder
  Surf a, b;         // Fun: dom/cod; Forall: bound/body; Rec: body in a
};

Surf surfVar(std::string name);
Surf surfFun(Surf dom, Surf cod);
Surf surfForall(std::string binder, Surf bound, Surf body);
Surf surfRec(std::string binder, Surf body);

bool surfEqual(const Surf& a, const Surf& b);

// ---------------------------------------------------------------------------
// Global environment
// ---------------------------------------------------------------------------

/// Ordered declarations `name <= bound`.  Entry i's bound may mention, as
/// FreeVar, the names of entries <= i including its own (the F-bounded global
/// assumption).  `implicitFrees` holds names treated as unbounded opaque
/// constants (non-strict mode); they never promote.
class GlobalEnv {
 public:
  struct Entry {
    std::string name;
    Ty bound;
  };

  std::vector<Entry> entries;
  std::vector<std::string> implicitFrees;

  const Ty* findBound(const std::string& name) const;
  bool isDeclared(const std::string& name) const;
  std::vector<std::string> names() const;
};

struct UnboundVariableError : std::runtime_error {
  explicit UnboundVariableError(std::string n)
      : std::runtime_error("unbound variable: " + n), name(std::move(n)) {}
  std::string name;
};

/// Named-to-de-Bruijn conversion.  Binder lookups resolve innermost-first;
/// identifiers in `scope` become FreeVar; anything else throws.
Ty toCore(const Surf& s, const std::vector<std::string>& scope);

/// Inverse of toCore up to binder renaming.  Out-of-range free indices are
/// named from `hints` (index i at depth d uses hints[i - d]).
Surf fromCore(const Ty& t, const std::vector<std::string>& hints = {});

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

struct WfError {
  enum class Kind {
    NonContractive,
    IndexOutOfRange,
    UndeclaredFree,
    DuplicateName,
    ForwardReference,
    UnguardedSelfBound,
  };
  Kind kind;
  std::string path;  // constructor steps from the root (L/R/B/D, U = rec body)
  std::string name;  // offending identifier, when applicable

  std::string message() const;
};

/// ok (nullopt) iff every Rec sub-body is contractive, every Var index is in
/// range, and every FreeVar is declared in env.
std::optional<WfError> wellFormed(const Ty& t, const GlobalEnv& env);

/// Checks the GlobalEnv invariants: distinct names, self-or-earlier
/// references only, guarded self-bounds, well-formed bounds.
std::optional<WfError> validateEnv(const GlobalEnv& env);

}  // namespace recsub
