#pragma once

// The reference decider: greatest-fixed-point subtyping/equality on type
// syntax.  Assumptions live on the current derivation path (a goal that
// recurs as its own hypothesis is accepted); definitive results are memoized
// globally, keyed by canonicalized assertions.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "recsub/parser.hpp"
#include "recsub/syntax.hpp"
#include "recsub/tree.hpp"

namespace recsub {

enum class VerdictKind { Yes, No, BudgetExceeded };

inline const char* verdictName(VerdictKind k) {
  switch (k) {
    case VerdictKind::Yes: return "yes";
    case VerdictKind::No: return "no";
    case VerdictKind::BudgetExceeded: return "budget-exceeded";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::No;
  Path witness;            // No: root-to-clash path (valid for both inputs)
  std::string clash;       // No: what clashed, including promotions taken
  std::uint64_t assertions = 0;  // distinct assertions created by this check
  std::uint64_t promotions = 0;
};

/// A subtyping/equality goal under a binder environment, both sides
/// head-normalized.  stack[p] holds the bound of the p-th enclosing Forall,
/// expressed in the index space just inside that binder (index 0 = itself).
struct Assertion {
  std::vector<Ty> stack;
  Ty left, right;
  Relation rel = Relation::Sub;
};

/// Deletes stack entries unreachable from the free indices of left, right,
/// and retained bounds (transitively), renumbers the rest densely, and
/// rewrites all indices.  Idempotent; alpha-equivalent assertions with
/// junk-differing stacks canonicalize identically.
Assertion canonicalize(const Assertion& a);

bool assertionEqual(const Assertion& a, const Assertion& b);
std::size_t assertionHash(const Assertion& a);

class Checker {
 public:
  explicit Checker(GlobalEnv env, std::uint64_t budget = 1'000'000);

  Verdict check(const Ty& l, const Ty& r, Relation rel);

  /// Replays check, emitting one line per rule application.  Cycles accepted
  /// by the coinductive hypothesis appear as "assumed (coinduction)" edges.
  std::vector<std::string> explain(const Ty& l, const Ty& r, Relation rel);

  const GlobalEnv& env() const { return env_; }
  std::uint64_t budget() const { return budget_; }

 private:
  friend class CheckRun;
  GlobalEnv env_;
  std::uint64_t budget_;

  struct MemoEntry {
    VerdictKind kind;
    Path witness;  // relative to the memoized assertion
    std::string clash;
  };
  std::unordered_map<std::size_t, std::vector<std::pair<Assertion, MemoEntry>>>
      memo_;
  std::mutex memoMutex_;
};

struct QueryVerdict {
  Query query;
  Verdict verdict;
  std::optional<bool> agreesWithExpected;
  double millis = 0.0;
};

/// Evaluates every query of a parsed file under the file's environment using
/// the coinductive engine.  Throws on conversion/validation errors.
std::vector<QueryVerdict> checkQueryFile(const ParsedQueryFile& file,
                                         std::uint64_t budget = 1'000'000,
                                         bool strictFrees = true);

}  // namespace recsub
