#include <doctest.h>

#include <algorithm>

#include "recsub/coinductive.hpp"
#include "recsub/harness.hpp"
#include "recsub/parser.hpp"

using namespace recsub;

namespace {

GlobalEnv envACB() {
  GlobalEnv env;
  env.entries.push_back({"C", tyFun(tyFree("C"), tyFree("C"))});
  env.entries.push_back({"A", tyFun(tyFree("A"), tyFree("C"))});
  env.entries.push_back({"B", tyFree("A")});
  return env;
}

bool traceContains(const std::vector<std::string>& trace,
                   const std::string& needle) {
  return std::any_of(trace.begin(), trace.end(), [&](const std::string& line) {
    return line.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("check: unrolling equality") {
  Ty a1 = tyRec(tyFun(tyFree("A"), tyVar(0)));
  Ty a2 = tyRec(tyFun(tyFree("A"), tyFun(tyFree("A"), tyVar(0))));
  GlobalEnv env;
  env.entries.push_back({"A", tyFun(tyFree("A"), tyFree("A"))});
  Checker withA(env);
  // Both denote A -> A -> A -> ...
  CHECK(withA.check(a1, a2, Relation::Eq).kind == VerdictKind::Yes);
}

TEST_CASE("check: reflexivity on random types") {
  GlobalEnv env = envACB();
  CaseGenerator gen(17, 12);
  Checker ch(env);
  for (int i = 0; i < 300; ++i) {
    Ty t = gen.genType(env, 1 + i % 12, 0);
    CHECK(ch.check(t, t, Relation::Sub).kind == VerdictKind::Yes);
    CHECK(ch.check(t, t, Relation::Eq).kind == VerdictKind::Yes);
  }
}

TEST_CASE("check: promotion is left-side only") {
  GlobalEnv env;
  env.entries.push_back({"C", tyFun(tyFree("C"), tyFree("C"))});
  env.entries.push_back({"A", tyFun(tyFree("A"), tyFree("C"))});
  Checker ch(env);
  Ty arrow = tyFun(tyFree("A"), tyFree("C"));
  CHECK(ch.check(tyFree("A"), arrow, Relation::Sub).kind == VerdictKind::Yes);
  Verdict no = ch.check(arrow, tyFree("A"), Relation::Sub);
  CHECK(no.kind == VerdictKind::No);
}

TEST_CASE("check: promotion cycles refute") {
  // a <= b, b <= a style cycles cannot appear in a GlobalEnv (self-or-earlier
  // references only), but a quantifier bound cycling through itself can.
  GlobalEnv empty;
  Checker ch(empty);
  // forall x <= x. x <= forall x <= x. (x -> x): body goal promotes x
  // forever without progress; fuel must refute, not loop.
  Ty l = tyForall(tyVar(0), tyVar(0));
  Ty r = tyForall(tyVar(0), tyFun(tyVar(0), tyVar(0)));
  Verdict v = ch.check(l, r, Relation::Sub);
  CHECK(v.kind == VerdictKind::No);
}

TEST_CASE("check: kernel rule requires equal bounds") {
  GlobalEnv env = envACB();
  Checker ch(env);
  Ty l = tyForall(tyFree("A"), tyVar(0));
  Ty r = tyForall(tyFree("B"), tyVar(0));
  Verdict v = ch.check(l, r, Relation::Sub);
  CHECK(v.kind == VerdictKind::No);
  CHECK(pathToString(v.witness) == "B");
  // Even when the left bound is a subtype of the right bound.
  Ty sub = tyForall(tyFree("B"), tyVar(0));
  Ty sup = tyForall(tyFree("A"), tyVar(0));
  CHECK(ch.check(sub, sup, Relation::Sub).kind == VerdictKind::No);
}

TEST_CASE("check: determinism including witness") {
  GlobalEnv env = envACB();
  Ty l = tyRec(tyFun(tyVar(0), tyFree("A")));
  Ty r = tyRec(tyFun(tyVar(0), tyFree("B")));
  Checker c1(env), c2(env);
  Verdict v1 = c1.check(l, r, Relation::Eq);
  Verdict v2 = c2.check(l, r, Relation::Eq);
  CHECK(v1.kind == v2.kind);
  CHECK(pathToString(v1.witness) == pathToString(v2.witness));
  CHECK(v1.clash == v2.clash);
}

TEST_CASE("check: budget is reported, not converted") {
  GlobalEnv env = envACB();
  Checker tiny(env, 1);
  Ty t = tyRec(tyFun(tyFun(tyFree("A"), tyVar(0)), tyVar(0)));
  Verdict v = tiny.check(t, tyFun(tyFun(tyFree("A"), t), t), Relation::Eq);
  CHECK(v.kind == VerdictKind::BudgetExceeded);
}

TEST_CASE("explain traces") {
  GlobalEnv env = envACB();
  Checker ch(env);
  // Reflexivity on a free constant: single axiom line.
  auto refl = ch.explain(tyFree("A"), tyFree("A"), Relation::Sub);
  CHECK(traceContains(refl, "axiom"));
  CHECK(traceContains(refl, "verdict: yes"));
  // A refutation ends in a clash.
  auto no = ch.explain(tyFree("C"), tyForall(tyFree("C"), tyVar(0)),
                       Relation::Sub);
  CHECK(traceContains(no, "verdict: no"));
  // The unrolling equality needs a coinductive cycle.
  Ty a1 = tyRec(tyFun(tyFree("A"), tyVar(0)));
  Ty a2 = tyFun(tyFree("A"), a1);
  auto cyc = ch.explain(a1, a2, Relation::Eq);
  CHECK(traceContains(cyc, "coinduction"));
  CHECK(traceContains(cyc, "verdict: yes"));
}

TEST_CASE("canonicalize drops unreachable stack entries") {
  Assertion a;
  a.stack = {tyFree("A"), tyFun(tyVar(0), tyFree("A")), tyFree("A")};
  a.left = tyVar(1);   // references stack entry 1
  a.right = tyVar(1);
  a.rel = Relation::Sub;
  Assertion c = canonicalize(a);
  CHECK(c.stack.size() == 1);
  CHECK(c.left->index == 0);
  CHECK(c.right->index == 0);
  // Idempotence.
  CHECK(assertionEqual(canonicalize(c), c));
  // Junk-differing assertions canonicalize identically.
  Assertion b = a;
  b.stack[2] = tyFun(tyFree("A"), tyFree("A"));
  CHECK(assertionEqual(canonicalize(b), c));
  CHECK(assertionHash(canonicalize(b)) == assertionHash(c));
}

TEST_CASE("checkQueryFile") {
  auto empty = checkQueryFile(parseQueryFile(""));
  CHECK(empty.empty());

  auto one = checkQueryFile(parseQueryFile(
      "A <= A -> A; expect yes: rec x. A -> x <= rec x. A -> x;"));
  REQUIRE(one.size() == 1);
  CHECK(one[0].verdict.kind == VerdictKind::Yes);
  CHECK(one[0].agreesWithExpected == true);

  CHECK_THROWS(checkQueryFile(parseQueryFile("A <= A; A == A;")));
}

TEST_CASE("check agrees with oracle on refutation depth") {
  GlobalEnv env = envACB();
  CaseGenerator gen(23, 10);
  Checker ch(env);
  for (int i = 0; i < 300; ++i) {
    Ty l = gen.genType(env, 1 + i % 10, 0);
    Ty r = gen.genType(env, 1 + (i / 2) % 10, 0);
    Verdict v = ch.check(l, r, Relation::Sub);
    if (v.kind == VerdictKind::No) {
      int depth = static_cast<int>(v.witness.size() + v.promotions) + 1;
      OracleResult o = oracleCheck(env, {}, l, r, Relation::Sub, depth);
      CHECK_FALSE(o.yes);
    } else if (v.kind == VerdictKind::Yes) {
      CHECK(oracleCheck(env, {}, l, r, Relation::Sub, 64).yes);
    }
  }
}

TEST_CASE("check: stability under unrolling") {
  GlobalEnv env = envACB();
  CaseGenerator gen(29, 10);
  Checker ch(env);
  for (int i = 0; i < 200; ++i) {
    Ty inner = gen.genType(env, 1 + i % 8, 0);
    Ty recT = tyRec(tyFun(shiftIndices(inner, 0, 1), tyVar(0)));
    Ty r = gen.genType(env, 1 + (i / 3) % 8, 0);
    for (Relation rel : {Relation::Sub, Relation::Eq}) {
      CHECK(ch.check(recT, r, rel).kind ==
            ch.check(unfoldRec(recT), r, rel).kind);
      CHECK(ch.check(r, recT, rel).kind ==
            ch.check(r, unfoldRec(recT), rel).kind);
    }
  }
}

TEST_CASE("check: Eq implies mutual Sub") {
  CaseGenerator gen(31, 10);
  int hits = 0;
  for (int i = 0; i < 400; ++i) {
    GenCase c = gen.next();
    Checker ch(c.env);
    if (ch.check(c.left, c.right, Relation::Eq).kind == VerdictKind::Yes) {
      ++hits;
      CHECK(ch.check(c.left, c.right, Relation::Sub).kind == VerdictKind::Yes);
      CHECK(ch.check(c.right, c.left, Relation::Sub).kind == VerdictKind::Yes);
    }
  }
  CHECK(hits > 20);
}
