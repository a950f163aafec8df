// Acceptance gate: seven checks, one PASS/FAIL line each; exit 0 iff all
// pass.  Thresholds are fixed here on purpose — do not loosen them to make a
// run green.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "recsub/automata.hpp"
#include "recsub/coinductive.hpp"
#include "recsub/harness.hpp"
#include "recsub/parser.hpp"
#include "recsub/tree.hpp"

using namespace recsub;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s - %s (%s)\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double secondsSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shared corpus run for criteria 1 and 2.
FuzzReport fuzzReport;
double fuzzSeconds = 0.0;

void criterionEngineAgreement() {
  auto t0 = std::chrono::steady_clock::now();
  fuzzReport = runFuzz(42, 10000, 12, 1000000, 64, true);
  fuzzSeconds = secondsSince(t0);
  std::uint64_t engineMismatches = 0;
  for (const auto& d : fuzzReport.disagreements)
    if (d.details.rfind("engine mismatch", 0) == 0) ++engineMismatches;
  bool budgetOk = fuzzReport.budgetExceededCount * 1000 <
                  fuzzReport.casesRun;  // < 0.1%
  bool ok = fuzzReport.casesRun == 10000 && engineMismatches == 0 &&
            budgetOk && fuzzSeconds < 300.0;
  char detail[256];
  std::snprintf(detail, sizeof detail,
                "10000 cases seed 42 sizeMax 12: %llu engine mismatches, "
                "%llu budget-exceeded, %.1fs",
                static_cast<unsigned long long>(engineMismatches),
                static_cast<unsigned long long>(fuzzReport.budgetExceededCount),
                fuzzSeconds);
  report(ok, "engine agreement on the random corpus", detail);
}

void criterionOracleConsistency() {
  std::uint64_t oracleMismatches = 0;
  for (const auto& d : fuzzReport.disagreements)
    if (d.details.rfind("oracle mismatch", 0) == 0) ++oracleMismatches;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "%llu oracle violations at depth 64 across 10000 cases",
                static_cast<unsigned long long>(oracleMismatches));
  report(fuzzReport.casesRun == 10000 && oracleMismatches == 0,
         "oracle consistency on the same corpus", detail);
}

void criterionGenerationCorrectness() {
  CaseGenerator gen(42, 12);
  std::uint64_t violations = 0, types = 0;
  for (int i = 0; i < 10000; ++i) {
    GenCase c = gen.next();
    for (const Ty& t : {c.left, c.right}) {
      ++types;
      if (!trEqual(generate(automataof(t), 16), treeof(t, 16))) ++violations;
    }
  }
  // Curated shift-exercising family.
  Ty shifty = tyForall(
      tyFree("A"), tyRec(tyFun(tyVar(1), tyForall(tyFree("A"), tyVar(1)))));
  ++types;
  if (!trEqual(generate(automataof(shifty), 16), treeof(shifty, 16)))
    ++violations;
  for (int n : {50, 100, 200, 400}) {
    for (const Ty& t : {benchFamily(n), benchFamilyMutated(n)}) {
      ++types;
      if (!trEqual(generate(automataof(t), 16), treeof(t, 16))) ++violations;
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "%llu violations over %llu automata at depth 16",
                static_cast<unsigned long long>(violations),
                static_cast<unsigned long long>(types));
  report(violations == 0, "automata generate the same trees as unrolling",
         detail);
}

void criterionCuratedCorpus() {
  try {
    ParsedQueryFile file =
        parseQueryFile(readFile(std::string(RECSUB_DATA_DIR) + "/corpus.q"));
    GlobalEnv env = buildEnv(file, true);
    std::size_t bad = 0;
    if (validateEnv(env)) ++bad;
    auto scope = env.names();
    std::size_t yesCount = 0, noCount = 0;
    for (const auto& q : file.queries) {
      Ty l = toCore(q.left, scope);
      Ty r = toCore(q.right, scope);
      bool expected = q.expected.value_or(true);
      (expected ? yesCount : noCount)++;
      Checker ch(env);
      bool coin = ch.check(l, r, q.rel).kind == VerdictKind::Yes;
      bool aut = subtypeAutomata(env, automataof(l), automataof(r), q.rel)
                     .kind == VerdictKind::Yes;
      bool orc = oracleCheck(env, {}, l, r, q.rel, 64).yes;
      if (coin != expected || aut != expected || orc != expected) ++bad;
    }
    // Non-contractive inputs must be rejected before any engine runs.
    ParsedQueryFile nc = parseQueryFile(
        readFile(std::string(RECSUB_DATA_DIR) + "/noncontractive.q"));
    GlobalEnv ncEnv = buildEnv(nc, false);
    Ty ncTy = toCore(nc.queries.at(0).left, ncEnv.names());
    if (!wellFormed(ncTy, ncEnv)) ++bad;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "%zu queries (%zu yes, %zu no), %zu failures, "
                  "non-contractive rejected",
                  file.queries.size(), yesCount, noCount, bad);
    report(file.queries.size() >= 20 && bad == 0,
           "curated corpus passes with every engine", detail);
  } catch (const std::exception& e) {
    report(false, "curated corpus passes with every engine", e.what());
  }
}

void criterionProperties() {
  std::uint64_t bad = 0;
  // Reflexivity on 1000 random types.
  {
    CaseGenerator gen(4242, 12);
    GlobalEnv env;
    env.entries.push_back({"C", tyFun(tyFree("C"), tyFree("C"))});
    env.entries.push_back({"A", tyFun(tyFree("A"), tyFree("C"))});
    Checker ch(env);
    for (int i = 0; i < 1000; ++i) {
      Ty t = gen.genType(env, 1 + i % 12, 0);
      if (ch.check(t, t, Relation::Sub).kind != VerdictKind::Yes) ++bad;
    }
  }
  // Eq implies mutual Sub on every corpus-file Eq query expected yes.
  {
    ParsedQueryFile file =
        parseQueryFile(readFile(std::string(RECSUB_DATA_DIR) + "/corpus.q"));
    GlobalEnv env = buildEnv(file, true);
    auto scope = env.names();
    Checker ch(env);
    for (const auto& q : file.queries) {
      if (q.rel != Relation::Eq || q.expected != true) continue;
      Ty l = toCore(q.left, scope);
      Ty r = toCore(q.right, scope);
      if (ch.check(l, r, Relation::Sub).kind != VerdictKind::Yes) ++bad;
      if (ch.check(r, l, Relation::Sub).kind != VerdictKind::Yes) ++bad;
    }
  }
  // Unrolling invariance of check on 1000 cases.
  {
    CaseGenerator gen(777, 10);
    for (int i = 0; i < 1000; ++i) {
      GenCase c = gen.next();
      Ty recT = tyRec(tyFun(shiftIndices(c.left, 0, 1), tyVar(0)));
      Checker ch(c.env);
      if (ch.check(recT, c.right, c.rel).kind !=
          ch.check(unfoldRec(recT), c.right, c.rel).kind)
        ++bad;
    }
  }
  // Approximation monotonicity of treeof on 1000 cases.
  {
    CaseGenerator gen(888, 12);
    GlobalEnv env;
    for (int i = 0; i < 1000; ++i) {
      Ty t = gen.genType(env, 1 + i % 12, 0);
      for (int d = 0; d < 8; ++d)
        if (!isPrefixOf(treeof(t, d), treeof(t, d + 1))) ++bad;
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "%llu property violations",
                static_cast<unsigned long long>(bad));
  report(bad == 0,
         "reflexivity, Eq=>Sub, unrolling invariance, tree monotonicity",
         detail);
}

void criterionComplexity() {
  BenchReport rep = runBench({50, 100, 200, 400}, 100000000);
  bool ok = rep.rows.size() == 4;
  double worst = 0.0;
  for (const auto& row : rep.rows) {
    if (row.verdict != VerdictKind::Yes) ok = false;
    worst = std::max(worst, row.millis);
    if (row.millis > 60000.0) ok = false;
  }
  if (rep.fittedExponent > 4.5) ok = false;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "fitted exponent %.2f (limit 4.5), slowest run %.1fms",
                rep.fittedExponent, worst);
  report(ok, "polynomial growth of the automata engine on F(n)", detail);
}

void criterionParserRoundTrip() {
  CaseGenerator gen(2024, 14);
  GlobalEnv env;
  env.entries.push_back({"A", tyFun(tyFree("A"), tyFree("A"))});
  env.entries.push_back({"B", tyFree("A")});
  auto scope = env.names();
  std::uint64_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    Ty t = gen.genType(env, 1 + i % 14, 0);
    try {
      if (!tyEqual(toCore(parseType(printType(fromCore(t))), scope), t)) ++bad;
    } catch (const std::exception&) {
      ++bad;
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "%llu failures in 10000 round trips",
                static_cast<unsigned long long>(bad));
  report(bad == 0, "parser/printer round trip", detail);
}

}  // namespace

int main() {
  criterionEngineAgreement();
  criterionOracleConsistency();
  criterionGenerationCorrectness();
  criterionCuratedCorpus();
  criterionProperties();
  criterionComplexity();
  criterionParserRoundTrip();
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
