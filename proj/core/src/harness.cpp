#include "recsub/harness.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "recsub/parser.hpp"

namespace recsub {

namespace {

double elapsedMs(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

const char* kEnvNames[3] = {"A", "B", "C"};

/// Ensures the exposed spine of `bound` is not exactly FreeVar(name).
Ty guardBound(Ty bound, const std::string& name) {
  const TypeExpr* spine = bound.get();
  while (spine->tag == TyTag::Rec) spine = spine->a.get();
  if (spine->tag == TyTag::Free && spine->name == name)
    return tyFun(bound, bound);
  return bound;
}

}  // namespace

CaseGenerator::CaseGenerator(std::uint64_t seed, int sizeMax, int maxEnvEntries)
    : rng_(seed), sizeMax_(sizeMax), maxEnvEntries_(maxEnvEntries) {}

std::uint64_t CaseGenerator::pick(std::uint64_t n) { return rng_() % n; }

GlobalEnv CaseGenerator::genEnv() {
  GlobalEnv env;
  std::uint64_t count = pick(static_cast<std::uint64_t>(maxEnvEntries_) + 1);
  for (std::uint64_t i = 0; i < count; ++i) {
    GlobalEnv visible = env;  // earlier entries
    visible.implicitFrees.push_back(kEnvNames[i]);  // allow self-reference
    Ty bound = genType(visible, 1 + static_cast<int>(pick(4)), 0);
    env.entries.push_back({kEnvNames[i], guardBound(std::move(bound), kEnvNames[i])});
  }
  return env;
}

Ty CaseGenerator::genType(const GlobalEnv& env, int sizeBudget, int depth) {
  bool haveNames = !env.entries.empty() || !env.implicitFrees.empty();
  auto leaf = [&]() -> Ty {
    bool canVar = depth > 0;
    if (canVar && (!haveNames || pick(2) == 0))
      return tyVar(static_cast<int>(pick(static_cast<std::uint64_t>(depth))));
    if (haveNames) {
      auto names = env.names();
      return tyFree(names[pick(names.size())]);
    }
    // No binder and no names in scope: smallest closed type.
    return tyRec(tyFun(tyVar(0), tyVar(0)));
  };
  if (sizeBudget <= 1) return leaf();
  std::uint64_t roll = pick(100);
  if (roll < 40) {  // Fun
    int ls = 1 + static_cast<int>(pick(static_cast<std::uint64_t>(sizeBudget - 1)));
    return tyFun(genType(env, ls, depth),
                 genType(env, sizeBudget - 1 - ls, depth));
  }
  if (roll < 65) {  // Forall
    int bs = 1 + static_cast<int>(pick(2));
    return tyForall(genType(env, bs, depth + 1),
                    genType(env, std::max(1, sizeBudget - 1 - bs), depth + 1));
  }
  if (roll < 85) {  // Rec, guarded by construction
    if (sizeBudget < 4) return leaf();
    if (pick(4) == 0) {
      int bs = 1 + static_cast<int>(pick(2));
      return tyRec(tyForall(
          genType(env, bs, depth + 2),
          genType(env, std::max(1, sizeBudget - 2 - bs), depth + 2)));
    }
    int ls = 1 + static_cast<int>(pick(static_cast<std::uint64_t>(sizeBudget - 2)));
    return tyRec(tyFun(genType(env, ls, depth + 1),
                       genType(env, std::max(1, sizeBudget - 2 - ls), depth + 1)));
  }
  return leaf();
}

namespace {

int countNodes(const Ty& t) { return t->size; }

/// Applies `edit` to the node numbered `target` in preorder; depth-aware.
Ty editNode(const Ty& t, int& counter, int target, int depth,
            const std::function<Ty(const Ty&, int)>& edit) {
  int mine = counter++;
  if (mine == target) return edit(t, depth);
  if (counter > target) return t;  // already edited somewhere on the left
  switch (t->tag) {
    case TyTag::Var:
    case TyTag::Free:
      return t;
    case TyTag::Fun: {
      Ty a = editNode(t->a, counter, target, depth, edit);
      Ty b = editNode(t->b, counter, target, depth, edit);
      return tyFun(std::move(a), std::move(b));
    }
    case TyTag::Forall: {
      Ty a = editNode(t->a, counter, target, depth + 1, edit);
      Ty b = editNode(t->b, counter, target, depth + 1, edit);
      return tyForall(std::move(a), std::move(b));
    }
    case TyTag::Rec: {
      Ty a = editNode(t->a, counter, target, depth + 1, edit);
      return tyRec(std::move(a));
    }
  }
  return t;
}

}  // namespace

Ty CaseGenerator::mutate(const Ty& t, const GlobalEnv& env, int) {
  auto names = env.names();
  for (int attempt = 0; attempt < 8; ++attempt) {
    int target = static_cast<int>(pick(static_cast<std::uint64_t>(countNodes(t))));
    auto edit = [&](const Ty& node, int depth) -> Ty {
      switch (node->tag) {
        case TyTag::Var:
          if (depth > 1) return tyVar(static_cast<int>(pick(static_cast<std::uint64_t>(depth))));
          if (!names.empty()) return tyFree(names[pick(names.size())]);
          return node;
        case TyTag::Free:
          if (!names.empty()) return tyFree(names[pick(names.size())]);
          return node;
        case TyTag::Fun:
          return tyFun(node->b, node->a);
        case TyTag::Forall:
          return tyForall(node->b, node->a);
        case TyTag::Rec:
          return node;  // editing the binder risks contractivity
      }
      return node;
    };
    int counter = 0;
    Ty candidate = editNode(t, counter, target, 0, edit);
    if (!tyEqual(candidate, t) && !wellFormed(candidate, env))
      return candidate;
  }
  return genType(env, sizeMax_, 0);
}

GenCase CaseGenerator::next() {
  GenCase c;
  c.env = genEnv();
  c.rel = pick(3) == 0 ? Relation::Eq : Relation::Sub;
  c.left = genType(c.env, 1 + static_cast<int>(pick(static_cast<std::uint64_t>(sizeMax_))), 0);
  if (pick(100) < 30) {
    c.right = mutate(c.left, c.env, 0);
  } else if (pick(100) < 15) {
    c.right = c.left;
  } else {
    c.right = genType(c.env, 1 + static_cast<int>(pick(static_cast<std::uint64_t>(sizeMax_))), 0);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Differential execution
// ---------------------------------------------------------------------------

EngineVerdicts runAllEngines(const GenCase& c, std::uint64_t budget,
                             int oracleDepth, bool withOracle) {
  EngineVerdicts v;
  Checker checker(c.env, budget);
  v.coinductive = checker.check(c.left, c.right, c.rel);
  TreeAutomaton la = automataof(c.left);
  TreeAutomaton ra = automataof(c.right);
  v.automata = subtypeAutomata(c.env, la, ra, c.rel, budget);
  if (withOracle) {
    v.oracle = oracleCheck(c.env, {}, c.left, c.right, c.rel, oracleDepth);
    v.oracleRan = true;
  }
  return v;
}

std::optional<std::string> findDisagreement(const GenCase&,
                                            const EngineVerdicts& v) {
  bool cDef = v.coinductive.kind != VerdictKind::BudgetExceeded;
  bool aDef = v.automata.kind != VerdictKind::BudgetExceeded;
  if (cDef && aDef && v.coinductive.kind != v.automata.kind)
    return std::string("engine mismatch: coinductive=") +
           verdictName(v.coinductive.kind) +
           " automata=" + verdictName(v.automata.kind);
  if (v.oracleRan) {
    if (cDef && (v.coinductive.kind == VerdictKind::Yes) != v.oracle.yes)
      return std::string("oracle mismatch: coinductive=") +
             verdictName(v.coinductive.kind) +
             " oracle=" + (v.oracle.yes ? "yes-to-depth" : "no");
    if (aDef && (v.automata.kind == VerdictKind::Yes) != v.oracle.yes)
      return std::string("oracle mismatch: automata=") +
             verdictName(v.automata.kind) +
             " oracle=" + (v.oracle.yes ? "yes-to-depth" : "no");
  }
  return std::nullopt;
}

namespace {

/// All one-step smaller variants of t that keep indices legal.
std::vector<Ty> shrinkVariants(const Ty& t, const GlobalEnv& env) {
  std::vector<Ty> out;
  auto tryAdd = [&](Ty cand) {
    if (!wellFormed(cand, env)) out.push_back(std::move(cand));
  };
  int total = t->size;
  for (int target = 0; target < total; ++target) {
    auto edit = [&](const Ty& node, int depth) -> Ty {
      (void)depth;
      switch (node->tag) {
        case TyTag::Fun:
          return node->a;
        case TyTag::Forall:
          try {
            return shiftIndices(node->b, 0, -1);
          } catch (const NegativeIndexError&) {
            return node;
          }
        case TyTag::Rec:
          try {
            return shiftIndices(node->a, 0, -1);
          } catch (const NegativeIndexError&) {
            return node;
          }
        default:
          return node;
      }
    };
    auto edit2 = [&](const Ty& node, int depth) -> Ty {
      (void)depth;
      if (node->tag == TyTag::Fun) return node->b;
      return node;
    };
    for (const auto& e : {std::function<Ty(const Ty&, int)>(edit),
                          std::function<Ty(const Ty&, int)>(edit2)}) {
      int counter = 0;
      Ty cand = editNode(t, counter, target, 0, e);
      if (!tyEqual(cand, t)) tryAdd(std::move(cand));
    }
  }
  return out;
}

bool disagrees(const GenCase& c, std::uint64_t budget, int oracleDepth,
               bool withOracle) {
  EngineVerdicts v = runAllEngines(c, budget, oracleDepth, withOracle);
  return findDisagreement(c, v).has_value();
}

}  // namespace

GenCase shrinkCase(const GenCase& c, std::uint64_t budget, int oracleDepth,
                   bool withOracle) {
  GenCase cur = c;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    // Try dropping env entries (last first, so earlier references survive).
    for (std::size_t i = cur.env.entries.size(); i-- > 0;) {
      GenCase cand = cur;
      cand.env.entries.erase(cand.env.entries.begin() + static_cast<long>(i));
      if (validateEnv(cand.env) || wellFormed(cand.left, cand.env) ||
          wellFormed(cand.right, cand.env))
        continue;
      if (disagrees(cand, budget, oracleDepth, withOracle)) {
        cur = std::move(cand);
        progressed = true;
        break;
      }
    }
    if (progressed) continue;
    for (bool leftSide : {true, false}) {
      const Ty& side = leftSide ? cur.left : cur.right;
      for (Ty& variant : shrinkVariants(side, cur.env)) {
        GenCase cand = cur;
        (leftSide ? cand.left : cand.right) = variant;
        if (disagrees(cand, budget, oracleDepth, withOracle)) {
          cur = std::move(cand);
          progressed = true;
          break;
        }
      }
      if (progressed) break;
    }
  }
  return cur;
}

FuzzReport runFuzz(std::uint64_t seed, std::uint64_t count, int sizeMax,
                   std::uint64_t budget, int oracleDepth, bool withOracle) {
  FuzzReport report;
  CaseGenerator gen(seed, sizeMax);
  for (std::uint64_t i = 0; i < count; ++i) {
    GenCase c = gen.next();
    EngineVerdicts v;
    {
      Checker checker(c.env, budget);
      auto t0 = std::chrono::steady_clock::now();
      v.coinductive = checker.check(c.left, c.right, c.rel);
      report.millisCoinductive += elapsedMs(t0);
    }
    {
      auto t0 = std::chrono::steady_clock::now();
      TreeAutomaton la = automataof(c.left);
      TreeAutomaton ra = automataof(c.right);
      v.automata = subtypeAutomata(c.env, la, ra, c.rel, budget);
      report.millisAutomata += elapsedMs(t0);
    }
    if (withOracle) {
      auto t0 = std::chrono::steady_clock::now();
      v.oracle = oracleCheck(c.env, {}, c.left, c.right, c.rel, oracleDepth);
      v.oracleRan = true;
      report.millisOracle += elapsedMs(t0);
    }
    ++report.casesRun;
    if (v.coinductive.kind == VerdictKind::BudgetExceeded ||
        v.automata.kind == VerdictKind::BudgetExceeded)
      ++report.budgetExceededCount;
    if (auto why = findDisagreement(c, v)) {
      Disagreement d;
      d.caseIndex = i;
      d.original = c;
      d.shrunk = shrinkCase(c, budget, oracleDepth, withOracle);
      d.details = *why;
      report.disagreements.push_back(std::move(d));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Benchmark family
// ---------------------------------------------------------------------------

namespace {

Ty benchLayers(int n, bool mutated) {
  // Innermost layer; the mutated family replaces it by an
  // unrolling-equivalent variant, so the product must traverse everything.
  // Both variants use the same layer count (derived from n and the plain
  // base) so the relation still holds.
  Ty t = mutated ? tyRec(tyFun(tyVar(0), tyFun(tyVar(0), tyVar(0))))
                 : tyRec(tyFun(tyVar(0), tyVar(0)));
  int layers = 0;
  for (int size = 3; size < n; size += 9) ++layers;
  for (int i = 0; i < layers; ++i) {
    // rec r. forall x <= (r -> x). r -> (x -> t)
    Ty bound = tyFun(tyVar(1), tyVar(0));
    Ty body = tyFun(tyVar(1), tyFun(tyVar(0), t));
    t = tyRec(tyForall(std::move(bound), std::move(body)));
  }
  return t;
}

}  // namespace

Ty benchFamily(int n) { return benchLayers(n, false); }
Ty benchFamilyMutated(int n) { return benchLayers(n, true); }

BenchReport runBench(const std::vector<int>& sizes, std::uint64_t budget) {
  BenchReport report;
  GlobalEnv env;
  for (int n : sizes) {
    Ty l = benchFamily(n);
    Ty r = benchFamilyMutated(n);
    TreeAutomaton la = automataof(l);
    TreeAutomaton ra = automataof(r);
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = subtypeAutomata(env, la, ra, Relation::Sub, budget);
    BenchRow row;
    row.n = n;
    row.states = static_cast<int>(la.states.size());
    row.millis = elapsedMs(t0);
    row.verdict = v.kind;
    row.goals = v.assertions;
    report.rows.push_back(row);
  }
  // Least-squares slope of log(time) against log(n).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = static_cast<int>(report.rows.size());
  for (const auto& row : report.rows) {
    double x = std::log(static_cast<double>(row.n));
    double y = std::log(std::max(row.millis, 1e-3));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (m >= 2) {
    double denom = m * sxx - sx * sx;
    report.fittedExponent = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  }
  return report;
}

std::string describeCase(const GenCase& c) {
  std::string out;
  for (const auto& e : c.env.entries)
    out += e.name + " <= " + printType(fromCore(e.bound)) + "; ";
  out += printType(fromCore(c.left));
  out += c.rel == Relation::Sub ? " <= " : " == ";
  out += printType(fromCore(c.right));
  out += ";";
  return out;
}

}  // namespace recsub
