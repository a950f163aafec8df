#include "recsub/coinductive.hpp"

#include <chrono>
#include <climits>
#include <functional>
#include <stdexcept>

namespace recsub {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

/// Rewrites free indices (relative to the root) through fn, leaving bound
/// ones alone.
Ty remapFree(const Ty& t, int cutoff, const std::function<int(int)>& fn) {
  switch (t->tag) {
    case TyTag::Var:
      if (t->index >= cutoff) return tyVar(fn(t->index - cutoff) + cutoff);
      return t;
    case TyTag::Free:
      return t;
    case TyTag::Fun:
      return tyFun(remapFree(t->a, cutoff, fn), remapFree(t->b, cutoff, fn));
    case TyTag::Forall:
      return tyForall(remapFree(t->a, cutoff + 1, fn),
                      remapFree(t->b, cutoff + 1, fn));
    case TyTag::Rec:
      return tyRec(remapFree(t->a, cutoff + 1, fn));
  }
  return t;
}

std::string headName(const Ty& t) {
  switch (t->tag) {
    case TyTag::Var: return "var " + std::to_string(t->index);
    case TyTag::Free: return "'" + t->name + "'";
    case TyTag::Fun: return "fun";
    case TyTag::Forall: return "forall";
    case TyTag::Rec: return "rec";
  }
  return "?";
}

}  // namespace

Assertion canonicalize(const Assertion& a) {
  const int depth = static_cast<int>(a.stack.size());
  std::vector<char> marked(a.stack.size(), 0);
  std::vector<int> worklist;
  auto markFrom = [&](const Ty& t, int base) {
    for (int i : freeIndices(t)) {
      int p = base - 1 - i;
      if (p < 0 || p >= depth)
        throw std::logic_error("canonicalize: index out of stack range");
      if (!marked[static_cast<std::size_t>(p)]) {
        marked[static_cast<std::size_t>(p)] = 1;
        worklist.push_back(p);
      }
    }
  };
  markFrom(a.left, depth);
  markFrom(a.right, depth);
  while (!worklist.empty()) {
    int p = worklist.back();
    worklist.pop_back();
    markFrom(a.stack[static_cast<std::size_t>(p)], p + 1);
  }

  std::vector<int> newPos(a.stack.size(), -1);
  std::vector<int> kept;
  for (int p = 0; p < depth; ++p) {
    if (marked[static_cast<std::size_t>(p)]) {
      newPos[static_cast<std::size_t>(p)] = static_cast<int>(kept.size());
      kept.push_back(p);
    }
  }
  const int newDepth = static_cast<int>(kept.size());

  Assertion out;
  out.rel = a.rel;
  auto mapTop = [&](int i) {
    return newDepth - 1 - newPos[static_cast<std::size_t>(depth - 1 - i)];
  };
  out.left = remapFree(a.left, 0, mapTop);
  out.right = remapFree(a.right, 0, mapTop);
  out.stack.reserve(kept.size());
  for (int p : kept) {
    int q = newPos[static_cast<std::size_t>(p)];
    auto mapBound = [&, p, q](int j) {
      return q - newPos[static_cast<std::size_t>(p - j)];
    };
    out.stack.push_back(remapFree(a.stack[static_cast<std::size_t>(p)], 0, mapBound));
  }
  return out;
}

bool assertionEqual(const Assertion& a, const Assertion& b) {
  if (a.rel != b.rel || a.stack.size() != b.stack.size()) return false;
  if (!tyEqual(a.left, b.left) || !tyEqual(a.right, b.right)) return false;
  for (std::size_t i = 0; i < a.stack.size(); ++i)
    if (!tyEqual(a.stack[i], b.stack[i])) return false;
  return true;
}

std::size_t assertionHash(const Assertion& a) {
  std::size_t h = static_cast<std::size_t>(a.rel) + 0x51ed;
  for (const auto& b : a.stack) h = mix(h, b->hash);
  h = mix(h, a.left->hash);
  h = mix(h, a.right->hash);
  return h;
}

// ---------------------------------------------------------------------------
// CheckRun: one top-level check invocation
// ---------------------------------------------------------------------------

class CheckRun {
 public:
  CheckRun(Checker& checker, std::vector<std::string>* trace)
      : checker_(checker), trace_(trace) {}

  static constexpr int kClosed = INT_MAX;

  struct Out {
    VerdictKind kind;
    Path witness;       // relative to the assertion it was produced for
    std::string clash;
    int low = kClosed;  // lowest on-path assertion index this result used
  };

  Verdict run(const Ty& l, const Ty& r, Relation rel) {
    Out out = solve({}, l, r, rel, 0);
    Verdict v;
    v.kind = out.kind;
    v.witness = std::move(out.witness);
    v.clash = std::move(out.clash);
    v.assertions = created_;
    v.promotions = promotions_;
    return v;
  }

 private:
  Out solve(const std::vector<Ty>& stack, Ty l, Ty r, Relation rel,
            int indent) {
    l = headNormalize(std::move(l));
    r = headNormalize(std::move(r));
    Assertion canon = canonicalize({stack, l, r, rel});
    std::size_t h = assertionHash(canon);

    if (!trace_) {
      std::lock_guard<std::mutex> lock(checker_.memoMutex_);
      auto bucket = checker_.memo_.find(h);
      if (bucket != checker_.memo_.end()) {
        for (const auto& [key, entry] : bucket->second) {
          if (assertionEqual(key, canon))
            return {entry.kind, entry.witness, entry.clash, kClosed};
        }
      }
    } else {
      auto bucket = localMemo_.find(h);
      if (bucket != localMemo_.end()) {
        for (const auto& [key, entry] : bucket->second) {
          if (assertionEqual(key, canon)) {
            emit(indent, describe(stack, l, r, rel) + "  [memoized: " +
                             verdictName(entry.kind) + "]");
            return {entry.kind, entry.witness, entry.clash, kClosed};
          }
        }
      }
    }

    auto& pathBucket = onPath_[h];
    for (const auto& [key, idx] : pathBucket) {
      if (assertionEqual(key, canon)) {
        emit(indent, describe(stack, l, r, rel) + "  [assumed (coinduction)]");
        return {VerdictKind::Yes, {}, {}, idx};
      }
    }

    if (++created_ > checker_.budget_)
      return {VerdictKind::BudgetExceeded, {}, {}, kClosed};

    int myIndex = pathDepth_++;
    pathBucket.emplace_back(canon, myIndex);
    emit(indent, describe(stack, l, r, rel));
    Out out = rules(stack, std::move(l), std::move(r), rel, indent);
    --pathDepth_;
    auto& bucketRef = onPath_[h];
    bucketRef.pop_back();

    // No results are definitive regardless of open assumptions (assumptions
    // only help acceptance); Yes results are memoized only when the
    // derivation did not lean on an assumption above this assertion.
    bool memoizable = out.kind == VerdictKind::No ||
                      (out.kind == VerdictKind::Yes && out.low >= myIndex);
    if (memoizable) {
      Checker::MemoEntry entry{out.kind, out.witness, out.clash};
      if (!trace_) {
        std::lock_guard<std::mutex> lock(checker_.memoMutex_);
        checker_.memo_[h].emplace_back(canon, entry);
      } else {
        localMemo_[h].emplace_back(canon, entry);
      }
      out.low = kClosed;
    }
    return out;
  }

  Out rules(const std::vector<Ty>& stack, Ty l, Ty r, Relation rel,
            int indent) {
    int fuel = static_cast<int>(stack.size() + checker_.env_.entries.size()) + 1;
    std::uint64_t promos = 0;
    for (;;) {
      if (l->tag == TyTag::Free && r->tag == TyTag::Free &&
          l->name == r->name) {
        emit(indent + 1, "axiom free '" + l->name + "'");
        return {VerdictKind::Yes, {}, {}, kClosed};
      }
      if (l->tag == TyTag::Var && r->tag == TyTag::Var &&
          l->index == r->index) {
        emit(indent + 1, "axiom var " + std::to_string(l->index));
        return {VerdictKind::Yes, {}, {}, kClosed};
      }
      if (l->tag == TyTag::Fun && r->tag == TyTag::Fun) {
        emit(indent + 1, rel == Relation::Eq ? "rule fun (eq)"
                                             : "rule fun (contra/co)");
        Out dom = rel == Relation::Eq
                      ? solve(stack, l->a, r->a, Relation::Eq, indent + 1)
                      : solve(stack, r->a, l->a, Relation::Sub, indent + 1);
        if (dom.kind != VerdictKind::Yes) return prepend(Step::L, dom, promos);
        Out cod = solve(stack, l->b, r->b, rel, indent + 1);
        if (cod.kind != VerdictKind::Yes) return prepend(Step::R, cod, promos);
        return {VerdictKind::Yes, {}, {}, std::min(dom.low, cod.low)};
      }
      if (l->tag == TyTag::Forall && r->tag == TyTag::Forall) {
        emit(indent + 1, "rule forall (kernel)");
        std::vector<Ty> extended = stack;
        extended.push_back(l->a);
        Out bound = solve(extended, l->a, r->a, Relation::Eq, indent + 1);
        if (bound.kind != VerdictKind::Yes)
          return prepend(Step::B, bound, promos);
        Out body = solve(extended, l->b, r->b, rel, indent + 1);
        if (body.kind != VerdictKind::Yes)
          return prepend(Step::D, body, promos);
        return {VerdictKind::Yes, {}, {}, std::min(bound.low, body.low)};
      }
      if (rel == Relation::Sub) {
        if (l->tag == TyTag::Var && l->index < static_cast<int>(stack.size())) {
          if (fuel-- == 0)
            return {VerdictKind::No, {},
                    "promotion cycle (fuel exhausted after " +
                        std::to_string(promos) + " promotions)",
                    kClosed};
          ++promos;
          ++promotions_;
          emit(indent + 1, "promote var " + std::to_string(l->index));
          std::size_t pos =
              stack.size() - 1 - static_cast<std::size_t>(l->index);
          l = headNormalize(shiftIndices(stack[pos], 0, l->index));
          continue;
        }
        if (l->tag == TyTag::Free) {
          if (const Ty* bound = checker_.env_.findBound(l->name)) {
            if (fuel-- == 0)
              return {VerdictKind::No, {},
                      "promotion cycle (fuel exhausted after " +
                          std::to_string(promos) + " promotions)",
                      kClosed};
            ++promos;
            ++promotions_;
            emit(indent + 1, "promote '" + l->name + "'");
            l = headNormalize(*bound);
            continue;
          }
        }
      }
      std::string clash = "head mismatch: " + headName(l) + " vs " +
                          headName(r);
      if (promos > 0)
        clash += " (after " + std::to_string(promos) + " promotions)";
      emit(indent + 1, "clash: " + clash);
      return {VerdictKind::No, {}, clash, kClosed};
    }
  }

  static Out prepend(Step s, Out child, std::uint64_t promos) {
    if (child.kind == VerdictKind::No) {
      Path p;
      p.reserve(child.witness.size() + 1);
      p.push_back(s);
      p.insert(p.end(), child.witness.begin(), child.witness.end());
      child.witness = std::move(p);
      if (promos > 0)
        child.clash += " [after " + std::to_string(promos) +
                       " promotions above]";
    }
    return child;
  }

  std::string describe(const std::vector<Ty>& stack, const Ty& l, const Ty& r,
                       Relation rel) {
    if (!trace_) return {};
    std::vector<std::string> hints;
    for (std::size_t i = 0; i < stack.size() + 8; ++i)
      hints.push_back("?" + std::to_string(i));
    return printType(fromCore(l, hints)) +
           (rel == Relation::Sub ? " <= " : " == ") +
           printType(fromCore(r, hints)) + "  [stack " +
           std::to_string(stack.size()) + "]";
  }

  void emit(int indent, const std::string& line) {
    if (trace_)
      trace_->push_back(std::string(static_cast<std::size_t>(indent) * 2, ' ') +
                        line);
  }

  Checker& checker_;
  std::vector<std::string>* trace_;
  std::unordered_map<std::size_t, std::vector<std::pair<Assertion, int>>>
      onPath_;
  std::unordered_map<std::size_t,
                     std::vector<std::pair<Assertion, Checker::MemoEntry>>>
      localMemo_;
  std::uint64_t created_ = 0;
  std::uint64_t promotions_ = 0;
  int pathDepth_ = 0;
};

Checker::Checker(GlobalEnv env, std::uint64_t budget)
    : env_(std::move(env)), budget_(budget) {}

Verdict Checker::check(const Ty& l, const Ty& r, Relation rel) {
  CheckRun run(*this, nullptr);
  return run.run(l, r, rel);
}

std::vector<std::string> Checker::explain(const Ty& l, const Ty& r,
                                          Relation rel) {
  std::vector<std::string> trace;
  CheckRun run(*this, &trace);
  Verdict v = run.run(l, r, rel);
  trace.push_back(std::string("verdict: ") + verdictName(v.kind) +
                  (v.kind == VerdictKind::No
                       ? " at path \"" + pathToString(v.witness) + "\" (" +
                             v.clash + ")"
                       : ""));
  return trace;
}

std::vector<QueryVerdict> checkQueryFile(const ParsedQueryFile& file,
                                         std::uint64_t budget,
                                         bool strictFrees) {
  GlobalEnv env = buildEnv(file, strictFrees);
  if (auto err = validateEnv(env))
    throw std::runtime_error("bad environment: " + err->message());
  std::vector<std::string> scope = env.names();

  Checker checker(env, budget);
  std::vector<QueryVerdict> out;
  for (const auto& q : file.queries) {
    Ty l = toCore(q.left, scope);
    Ty r = toCore(q.right, scope);
    if (auto err = wellFormed(l, env))
      throw std::runtime_error("ill-formed left type in '" + q.source +
                               "': " + err->message());
    if (auto err = wellFormed(r, env))
      throw std::runtime_error("ill-formed right type in '" + q.source +
                               "': " + err->message());
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = checker.check(l, r, q.rel);
    auto t1 = std::chrono::steady_clock::now();
    QueryVerdict qv;
    qv.query = q;
    qv.verdict = std::move(v);
    if (q.expected) {
      qv.agreesWithExpected =
          qv.verdict.kind != VerdictKind::BudgetExceeded &&
          (qv.verdict.kind == VerdictKind::Yes) == *q.expected;
    }
    qv.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out.push_back(std::move(qv));
  }
  return out;
}

}  // namespace recsub
