#pragma once

// Corpus and fuzzing infrastructure: seeded random generation of well-formed
// (env, left, right, relation) instances, three-way differential execution
// (coinductive engine, automata engine, depth-bounded oracle), greedy
// shrinking of disagreements, and the benchmark scaling family.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "recsub/automata.hpp"
#include "recsub/coinductive.hpp"
#include "recsub/syntax.hpp"
#include "recsub/tree.hpp"

namespace recsub {

struct RunConfig {
  std::string command;        // check | tree | automaton | fuzz | bench
  std::string engine = "all"; // coinductive | automata | oracle | all
  int depth = 64;
  std::uint64_t budget = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  int sizeMax = 12;
  bool json = false;
  bool strictFrees = true;
  bool dot = false;
};

struct GenCase {
  GlobalEnv env;
  Ty left, right;
  Relation rel = Relation::Sub;
};

/// Deterministic generator of well-formed instances.  Rec bodies are
/// contractive by construction (the recursion variable is only reachable
/// under a guarding Fun or Forall); 30% of cases make the right side a
/// single-node mutation of the left so both outcomes occur.
class CaseGenerator {
 public:
  CaseGenerator(std::uint64_t seed, int sizeMax, int maxEnvEntries = 3);

  GenCase next();

  /// A single random well-formed closed-up-to-env type.
  Ty genType(const GlobalEnv& env, int sizeBudget, int depth);

 private:
  std::uint64_t pick(std::uint64_t n);  // uniform-ish in [0, n)
  GlobalEnv genEnv();
  Ty mutate(const Ty& t, const GlobalEnv& env, int depth);

  std::mt19937_64 rng_;
  int sizeMax_;
  int maxEnvEntries_;
};

struct EngineVerdicts {
  Verdict coinductive;
  Verdict automata;
  OracleResult oracle;  // depth-bounded, only meaningful if oracleRan
  bool oracleRan = false;
};

EngineVerdicts runAllEngines(const GenCase& c, std::uint64_t budget,
                             int oracleDepth, bool withOracle);

struct Disagreement {
  std::uint64_t caseIndex = 0;
  GenCase original;
  GenCase shrunk;
  std::string details;
};

struct FuzzReport {
  std::uint64_t casesRun = 0;
  std::vector<Disagreement> disagreements;
  std::uint64_t budgetExceededCount = 0;
  double millisCoinductive = 0.0;
  double millisAutomata = 0.0;
  double millisOracle = 0.0;
};

/// Engines disagree when both return definitive verdicts that differ, or
/// when a definitive engine verdict contradicts the depth-bounded oracle
/// (engine No must refute at the oracle depth; engine Yes must survive it).
std::optional<std::string> findDisagreement(const GenCase& c,
                                            const EngineVerdicts& v);

FuzzReport runFuzz(std::uint64_t seed, std::uint64_t count, int sizeMax,
                   std::uint64_t budget, int oracleDepth, bool withOracle = true);

/// Greedy single-node shrinking: repeatedly replaces a subterm by a smaller
/// well-formed alternative while the disagreement persists.
GenCase shrinkCase(const GenCase& c, std::uint64_t budget, int oracleDepth,
                   bool withOracle);

// ---------------------------------------------------------------------------
// Benchmark family
// ---------------------------------------------------------------------------

/// F(n): nested alternation of rec / forall / arrow of core size >= n, with
/// every layer shaped rec r. forall x <= (r -> x). (r -> x), so each
/// recursion back-edge crosses a quantifier and the automaton contains Shift
/// states.  Deterministic in n.
Ty benchFamily(int n);

/// F(n) with a single node edited at the deepest layer, forcing the product
/// to traverse the whole structure.
Ty benchFamilyMutated(int n);

struct BenchRow {
  int n = 0;
  int states = 0;
  double millis = 0.0;
  VerdictKind verdict = VerdictKind::No;
  std::uint64_t goals = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double fittedExponent = 0.0;  // slope of log(time) vs log(n)
};

BenchReport runBench(const std::vector<int>& sizes, std::uint64_t budget);

std::string describeCase(const GenCase& c);

}  // namespace recsub
