#include "recsub/automata.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <memory>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace recsub {

using Label = TreeAutomaton::Label;

int TreeAutomaton::shiftCount() const {
  int n = 0;
  for (const auto& s : states)
    if (s.label == Label::Shift) ++n;
  return n;
}

int TreeAutomaton::maxBoundVarIndex() const {
  int m = -1;
  for (const auto& s : states)
    if (s.label == Label::BoundVar) m = std::max(m, s.varIndex);
  return m;
}

const char* automatonLabelName(Label l) {
  switch (l) {
    case Label::Fun: return "fun";
    case Label::Forall: return "forall";
    case Label::Shift: return "shift";
    case Label::BoundVar: return "boundvar";
    case Label::FreeVar: return "freevar";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {

class Builder {
 public:
  TreeAutomaton build(const Ty& t) {
    aut_.start = buildNode(t);
    return std::move(aut_);
  }

 private:
  struct CtxEntry {
    bool isRec;
    int state;  // Forall state id, or the Rec's body head state
  };

  int alloc(Label label, int varIndex = -1, std::string name = {}) {
    int id = static_cast<int>(aut_.states.size());
    TreeAutomaton::State s;
    s.label = label;
    s.varIndex = varIndex;
    s.name = std::move(name);
    aut_.states.push_back(std::move(s));
    // This state is the body head of any Rec binder still awaiting one.
    for (int p : awaitingHead_) ctx_[static_cast<std::size_t>(p)].state = id;
    awaitingHead_.clear();
    return id;
  }

  int buildNode(const Ty& t) {
    switch (t->tag) {
      case TyTag::Free:
        return alloc(Label::FreeVar, -1, t->name);
      case TyTag::Fun: {
        int id = alloc(Label::Fun);
        int l = buildNode(t->a);
        int r = buildNode(t->b);
        aut_.states[static_cast<std::size_t>(id)].next[0] = l;
        aut_.states[static_cast<std::size_t>(id)].next[1] = r;
        return id;
      }
      case TyTag::Forall: {
        int id = alloc(Label::Forall);
        ctx_.push_back({false, id});
        int b = buildNode(t->a);
        int d = buildNode(t->b);
        ctx_.pop_back();
        aut_.states[static_cast<std::size_t>(id)].next[0] = b;
        aut_.states[static_cast<std::size_t>(id)].next[1] = d;
        return id;
      }
      case TyTag::Rec: {
        ctx_.push_back({true, -1});
        awaitingHead_.push_back(static_cast<int>(ctx_.size()) - 1);
        int id = buildNode(t->a);
        ctx_.pop_back();
        return id;
      }
      case TyTag::Var: {
        int i = t->index;
        if (i < 0 || i >= static_cast<int>(ctx_.size()))
          throw std::invalid_argument("automataof: index out of range");
        std::size_t p = ctx_.size() - 1 - static_cast<std::size_t>(i);
        // Forall binders strictly between the occurrence and the binder.
        int k = 0;
        for (std::size_t q = p + 1; q < ctx_.size(); ++q)
          if (!ctx_[q].isRec) ++k;
        if (!ctx_[p].isRec) return alloc(Label::BoundVar, k);
        int target = ctx_[p].state;
        // A known head implies the variable is guarded; contractivity
        // guarantees this for well-formed input.
        if (target < 0)
          throw std::invalid_argument("automataof: non-contractive input");
        if (k == 0) return target;
        int first = alloc(Label::Shift);
        int cur = first;
        for (int j = 1; j < k; ++j) {
          int nxt = alloc(Label::Shift);
          aut_.states[static_cast<std::size_t>(cur)].next[0] = nxt;
          cur = nxt;
        }
        aut_.states[static_cast<std::size_t>(cur)].next[0] = target;
        return first;
      }
    }
    throw std::logic_error("unreachable core tag");
  }

  TreeAutomaton aut_;
  std::vector<CtxEntry> ctx_;
  std::vector<int> awaitingHead_;
};

}  // namespace

TreeAutomaton automataof(const Ty& t) { return Builder().build(t); }

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

ResolveResult resolveBinder(const TreeAutomaton& a, const std::vector<int>& run,
                            int varPos) {
  if (varPos < 0 || varPos >= static_cast<int>(run.size()))
    throw InvalidRunError("varPos out of range");
  auto label = [&](int pos) {
    int id = run[static_cast<std::size_t>(pos)];
    if (id < 0 || id >= static_cast<int>(a.states.size()))
      throw InvalidRunError("state id out of range");
    return a.states[static_cast<std::size_t>(id)].label;
  };
  if (label(varPos) != Label::BoundVar)
    throw InvalidRunError("state at varPos is not a BoundVar");
  int c = a.states[static_cast<std::size_t>(run[static_cast<std::size_t>(varPos)])]
              .varIndex;
  int distance = 0;
  for (int pos = varPos - 1; pos >= 0; --pos) {
    switch (label(pos)) {
      case Label::Shift:
        ++c;
        break;
      case Label::Forall:
        if (c == 0) return {false, pos, 0, distance};
        --c;
        ++distance;
        break;
      default:
        break;
    }
  }
  return {true, -1, c, distance};
}

namespace {

Tr generateRec(const TreeAutomaton& a, int s, int depth,
               std::vector<char>& events) {
  const auto& st = a.states[static_cast<std::size_t>(s)];
  if (st.label == Label::Shift) {
    events.push_back('S');
    Tr out = generateRec(a, st.next[0], depth, events);
    events.pop_back();
    return out;
  }
  if (depth <= 0) return trCut();
  switch (st.label) {
    case Label::FreeVar:
      return trFree(st.name);
    case Label::BoundVar: {
      int c = st.varIndex;
      int distance = 0;
      for (auto it = events.rbegin(); it != events.rend(); ++it) {
        if (*it == 'S') {
          ++c;
        } else {
          if (c == 0) return trVar(distance);
          --c;
          ++distance;
        }
      }
      throw UnresolvableVarError();
    }
    case Label::Fun: {
      Tr l = generateRec(a, st.next[0], depth - 1, events);
      Tr r = generateRec(a, st.next[1], depth - 1, events);
      return trFun(std::move(l), std::move(r));
    }
    case Label::Forall: {
      events.push_back('F');
      Tr b = generateRec(a, st.next[0], depth - 1, events);
      Tr d = generateRec(a, st.next[1], depth - 1, events);
      events.pop_back();
      return trForall(std::move(b), std::move(d));
    }
    case Label::Shift:
      break;
  }
  throw std::logic_error("unreachable label");
}

}  // namespace

Tr generate(const TreeAutomaton& a, int depth) {
  std::vector<char> events;
  return generateRec(a, a.start, depth, events);
}

// ---------------------------------------------------------------------------
// Dumps
// ---------------------------------------------------------------------------

std::string dumpAutomaton(const TreeAutomaton& a) {
  std::ostringstream out;
  out << "start: q" << a.start << "\n";
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const auto& s = a.states[i];
    out << "q" << i << ": " << automatonLabelName(s.label);
    switch (s.label) {
      case Label::Fun:
        out << " L->q" << s.next[0] << " R->q" << s.next[1];
        break;
      case Label::Forall:
        out << " B->q" << s.next[0] << " D->q" << s.next[1];
        break;
      case Label::Shift:
        out << " S->q" << s.next[0];
        break;
      case Label::BoundVar:
        out << "(" << s.varIndex << ")";
        break;
      case Label::FreeVar:
        out << "(" << s.name << ")";
        break;
    }
    out << "\n";
  }
  return out.str();
}

std::string dumpAutomatonDot(const TreeAutomaton& a) {
  std::ostringstream out;
  out << "digraph automaton {\n  rankdir=TB;\n";
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const auto& s = a.states[i];
    std::string label;
    switch (s.label) {
      case Label::Fun: label = "->"; break;
      case Label::Forall: label = "forall"; break;
      case Label::Shift: label = "shift"; break;
      case Label::BoundVar: label = "$" + std::to_string(s.varIndex); break;
      case Label::FreeVar: label = s.name; break;
    }
    out << "  q" << i << " [label=\"q" << i << ": " << label << "\""
        << (static_cast<int>(i) == a.start ? ", shape=doublecircle" : "")
        << "];\n";
    const char* names[2] = {"", ""};
    switch (s.label) {
      case Label::Fun: names[0] = "L"; names[1] = "R"; break;
      case Label::Forall: names[0] = "B"; names[1] = "D"; break;
      case Label::Shift: names[0] = "S"; break;
      default: break;
    }
    for (int e = 0; e < 2; ++e)
      if (s.next[e] >= 0)
        out << "  q" << i << " -> q" << s.next[e] << " [label=\"" << names[e]
            << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string dumpAutomatonJson(const TreeAutomaton& a) {
  nlohmann::ordered_json j;
  j["start"] = a.start;
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (const auto& s : a.states) {
    nlohmann::ordered_json js;
    js["label"] = automatonLabelName(s.label);
    if (s.label == Label::BoundVar) js["index"] = s.varIndex;
    if (s.label == Label::FreeVar) js["name"] = s.name;
    switch (s.label) {
      case Label::Fun:
        js["L"] = s.next[0];
        js["R"] = s.next[1];
        break;
      case Label::Forall:
        js["B"] = s.next[0];
        js["D"] = s.next[1];
        break;
      case Label::Shift:
        js["S"] = s.next[0];
        break;
      default:
        break;
    }
    states.push_back(std::move(js));
  }
  j["states"] = std::move(states);
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Product decision procedure
// ---------------------------------------------------------------------------

namespace {

struct StateRef {
  int aut = -1;
  int id = -1;
  bool operator==(const StateRef& o) const {
    return aut == o.aut && id == o.id;
  }
};

// A configuration's trail: the Forall and Shift states passed on the path
// from the automaton's start, as a persistent stack.  An adjacent pair
// "Forall then Shift" is dropped on push: a walk through such a pair passes
// unchanged and can never match that Forall, so the reduction preserves
// resolution behaviour while keeping trails (and memo keys) bounded along
// automaton cycles, where shifts balance the quantifiers crossed.
struct TrailNode {
  bool isShift;
  int corrIndex = -1;   // Forall nodes: correspondence entry
  StateRef bound;       // Forall nodes: this side's bound state
  std::shared_ptr<const TrailNode> parent;
};
using Trail = std::shared_ptr<const TrailNode>;

Trail pushShift(const Trail& t) {
  if (t && !t->isShift) return t->parent;
  auto n = std::make_shared<TrailNode>();
  n->isShift = true;
  n->parent = t;
  return n;
}

Trail pushForall(const Trail& t, int corrIndex, StateRef bound) {
  auto n = std::make_shared<TrailNode>();
  n->isShift = false;
  n->corrIndex = corrIndex;
  n->bound = bound;
  n->parent = t;
  return n;
}

const TrailNode* resolveTrail(const Trail& t, int c) {
  const TrailNode* cur = t.get();
  while (cur) {
    if (cur->isShift) {
      ++c;
    } else {
      if (c == 0) return cur;
      --c;
    }
    cur = cur->parent.get();
  }
  return nullptr;
}

int forallCount(const Trail& t) {
  int n = 0;
  for (const TrailNode* cur = t.get(); cur; cur = cur->parent.get())
    if (!cur->isShift) ++n;
  return n;
}

void appendInt(std::string& s, int v) {
  s.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

// For each state, an upper bound on how many entries of the goal's trail any
// continuation from that state can observe — through BoundVar resolution,
// promotion to a binder's bound (which truncates the trail at the binder),
// or shifts cancelling trail entries.  Entries deeper than this bound cannot
// influence behaviour and are dropped from memo keys, which is what keeps
// the number of distinct goals polynomial.  Values clamped at `cap` mean
// "keep the whole trail".
std::vector<int> trailRelevance(const TreeAutomaton& a, int cap) {
  std::vector<int> d(a.states.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    int maxBoundD = 0;  // relevance of any Forall's bound continuation
    for (const auto& s : a.states)
      if (s.label == Label::Forall)
        maxBoundD = std::max(maxBoundD, d[static_cast<std::size_t>(s.next[0])]);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      const auto& s = a.states[i];
      int v = 0;
      switch (s.label) {
        case Label::Fun:
          v = std::max(d[static_cast<std::size_t>(s.next[0])],
                       d[static_cast<std::size_t>(s.next[1])]);
          break;
        case Label::Forall:
          // Children run with one extra entry pushed on the trail.
          v = std::max({0, d[static_cast<std::size_t>(s.next[0])] - 1,
                        d[static_cast<std::size_t>(s.next[1])] - 1});
          break;
        case Label::Shift:
          v = d[static_cast<std::size_t>(s.next[0])] + 1;
          break;
        case Label::BoundVar:
          // Resolution reads entry varIndex; promotion continues from some
          // binder's bound with the trail truncated at that entry.
          v = s.varIndex + std::max(1, maxBoundD);
          break;
        case Label::FreeVar:
          v = 0;  // promotion restarts with an empty trail
          break;
      }
      v = std::min(v, cap);
      if (v > d[i]) {
        d[i] = v;
        changed = true;
      }
    }
  }
  return d;
}

class ProductEngine {
 public:
  ProductEngine(const GlobalEnv& env, const TreeAutomaton& left,
                const TreeAutomaton& right, std::uint64_t budget)
      : env_(env), budget_(budget) {
    addAutomaton(&left);
    addAutomaton(&right);
  }

  Verdict run(Relation rel) {
    Out out = solve({0, auts_[0]->start}, nullptr, {1, auts_[1]->start},
                    nullptr, rel, 0);
    Verdict v;
    v.kind = out.kind;
    v.witness = std::move(out.witness);
    v.clash = std::move(out.clash);
    v.assertions = created_;
    v.promotions = promotions_;
    return v;
  }

 private:
  static constexpr int kClosed = INT_MAX;

  struct Out {
    VerdictKind kind;
    Path witness;
    std::string clash;
    int low = kClosed;
  };

  struct CorrEntry {
    Trail lNode, rNode;  // the Forall trail nodes (binder included)
  };

  struct MemoEntry {
    VerdictKind kind;
    Path witness;
    std::string clash;
  };

  const TreeAutomaton::State& state(StateRef r) const {
    return auts_[static_cast<std::size_t>(r.aut)]
        ->states[static_cast<std::size_t>(r.id)];
  }

  void stepShifts(StateRef& s, Trail& t) const {
    while (state(s).label == Label::Shift) {
      t = pushShift(t);
      s = {s.aut, state(s).next[0]};
    }
  }

  void addAutomaton(const TreeAutomaton* a) {
    auts_.push_back(a);
    int cap = 0;
    for (const auto& s : a->states)
      if (s.label == Label::Forall) ++cap;
    cap += a->maxBoundVarIndex() + 2;
    relev_.push_back(trailRelevance(*a, cap));
    relevCap_.push_back(cap);
  }

  // Trail entries beyond what continuations from `s` can observe.
  int relevantDepth(StateRef s) const {
    int d = relev_[static_cast<std::size_t>(s.aut)]
                  [static_cast<std::size_t>(s.id)];
    // A clamped value means the analysis gave up: keep the whole trail.
    return d >= relevCap_[static_cast<std::size_t>(s.aut)] ? INT_MAX : d;
  }

  // Canonical goal key: states, relation, and the resolution behaviour of
  // both trails truncated to the observable depth, with correspondence
  // entries garbage-collected and densely renumbered.
  std::string canonKey(StateRef ls, const Trail& lt, StateRef rs,
                       const Trail& rt, Relation rel) {
    std::vector<int> reachable;  // arena indices, in discovery order
    std::unordered_map<int, int> newIdx;
    auto resolveAll = [&](const Trail& t, int limit, std::vector<int>& f) {
      int range = std::min(forallCount(t), limit);
      f.reserve(static_cast<std::size_t>(range));
      for (int c = 0; c < range; ++c) {
        const TrailNode* n = resolveTrail(t, c);
        int idx = n ? n->corrIndex : -1;
        if (idx >= 0 && !newIdx.count(idx)) {
          newIdx.emplace(idx, -1);  // placeholder, renumbered below
          reachable.push_back(idx);
        }
        f.push_back(idx);
      }
    };

    std::vector<int> fLeft, fRight;
    resolveAll(lt, relevantDepth(ls), fLeft);
    resolveAll(rt, relevantDepth(rs), fRight);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> entryFs;
    for (std::size_t i = 0; i < reachable.size(); ++i) {
      const CorrEntry& e = arena_[static_cast<std::size_t>(reachable[i])];
      std::vector<int> fl, fr;
      // An entry's trail only matters to promotions continuing from its
      // bound state with the trail truncated at the entry.
      resolveAll(e.lNode, relevantDepth(e.lNode->bound), fl);
      resolveAll(e.rNode, relevantDepth(e.rNode->bound), fr);
      entryFs.emplace_back(std::move(fl), std::move(fr));
    }
    // Renumber by arena order (outermost first) for a stable dense naming.
    std::vector<int> ordered = reachable;
    std::sort(ordered.begin(), ordered.end());
    for (std::size_t i = 0; i < ordered.size(); ++i)
      newIdx[ordered[i]] = static_cast<int>(i);

    std::string key;
    appendInt(key, rel == Relation::Sub ? 0 : 1);
    appendInt(key, ls.aut);
    appendInt(key, ls.id);
    appendInt(key, rs.aut);
    appendInt(key, rs.id);
    auto appendF = [&](const std::vector<int>& f) {
      appendInt(key, static_cast<int>(f.size()));
      for (int v : f) appendInt(key, v >= 0 ? newIdx[v] : -1);
    };
    appendF(fLeft);
    appendF(fRight);
    appendInt(key, static_cast<int>(reachable.size()));
    // Entries serialized in renumbered order.
    std::vector<std::size_t> order(reachable.size());
    for (std::size_t i = 0; i < reachable.size(); ++i)
      order[static_cast<std::size_t>(newIdx[reachable[i]])] = i;
    for (std::size_t pos : order) {
      const CorrEntry& e = arena_[static_cast<std::size_t>(reachable[pos])];
      appendInt(key, e.lNode->bound.aut);
      appendInt(key, e.lNode->bound.id);
      appendInt(key, e.rNode->bound.aut);
      appendInt(key, e.rNode->bound.id);
      appendF(entryFs[pos].first);
      appendF(entryFs[pos].second);
    }
    return key;
  }

  Out solve(StateRef ls, Trail lt, StateRef rs, Trail rt, Relation rel,
            int corrDepth) {
    stepShifts(ls, lt);
    stepShifts(rs, rt);
    std::string key = canonKey(ls, lt, rs, rt, rel);

    auto memoIt = memo_.find(key);
    if (memoIt != memo_.end())
      return {memoIt->second.kind, memoIt->second.witness,
              memoIt->second.clash, kClosed};
    auto pathIt = onPath_.find(key);
    if (pathIt != onPath_.end())
      return {VerdictKind::Yes, {}, {}, pathIt->second};

    if (++created_ > budget_) return {VerdictKind::BudgetExceeded, {}, {}, kClosed};

    int myIndex = pathDepth_++;
    onPath_.emplace(key, myIndex);
    Out out = rules(ls, std::move(lt), rs, std::move(rt), rel, corrDepth);
    --pathDepth_;
    onPath_.erase(key);

    bool memoizable = out.kind == VerdictKind::No ||
                      (out.kind == VerdictKind::Yes && out.low >= myIndex);
    if (memoizable) {
      memo_.emplace(std::move(key), MemoEntry{out.kind, out.witness, out.clash});
      out.low = kClosed;
    }
    return out;
  }

  Out rules(StateRef ls, Trail lt, StateRef rs, Trail rt, Relation rel,
            int corrDepth) {
    int fuel = corrDepth + static_cast<int>(env_.entries.size()) + 1;
    std::uint64_t promos = 0;
    for (;;) {
      const auto& lst = state(ls);
      const auto& rst = state(rs);
      if (lst.label == Label::FreeVar && rst.label == Label::FreeVar &&
          lst.name == rst.name)
        return {VerdictKind::Yes, {}, {}, kClosed};
      if (lst.label == Label::BoundVar && rst.label == Label::BoundVar) {
        const TrailNode* le = resolveTrail(lt, lst.varIndex);
        const TrailNode* re = resolveTrail(rt, rst.varIndex);
        if (!le || !re) throw UnresolvableVarError();
        if (le->corrIndex == re->corrIndex)
          return {VerdictKind::Yes, {}, {}, kClosed};
      }
      if (lst.label == Label::Fun && rst.label == Label::Fun) {
        Out dom =
            rel == Relation::Eq
                ? solve({ls.aut, lst.next[0]}, lt, {rs.aut, rst.next[0]}, rt,
                        Relation::Eq, corrDepth)
                : solve({rs.aut, rst.next[0]}, rt, {ls.aut, lst.next[0]}, lt,
                        Relation::Sub, corrDepth);
        if (dom.kind != VerdictKind::Yes) return prepend(Step::L, dom, promos);
        Out cod = solve({ls.aut, lst.next[1]}, lt, {rs.aut, rst.next[1]}, rt,
                        rel, corrDepth);
        if (cod.kind != VerdictKind::Yes) return prepend(Step::R, cod, promos);
        return {VerdictKind::Yes, {}, {}, std::min(dom.low, cod.low)};
      }
      if (lst.label == Label::Forall && rst.label == Label::Forall) {
        int corrIndex = static_cast<int>(arena_.size());
        StateRef lb{ls.aut, lst.next[0]};
        StateRef rb{rs.aut, rst.next[0]};
        Trail lNode = pushForall(lt, corrIndex, lb);
        Trail rNode = pushForall(rt, corrIndex, rb);
        arena_.push_back({lNode, rNode});
        Out bound = solve(lb, lNode, rb, rNode, Relation::Eq, corrDepth + 1);
        if (bound.kind != VerdictKind::Yes)
          return prepend(Step::B, bound, promos);
        Out body = solve({ls.aut, lst.next[1]}, lNode, {rs.aut, rst.next[1]},
                         rNode, rel, corrDepth + 1);
        if (body.kind != VerdictKind::Yes)
          return prepend(Step::D, body, promos);
        return {VerdictKind::Yes, {}, {}, std::min(bound.low, body.low)};
      }
      if (rel == Relation::Sub) {
        if (lst.label == Label::BoundVar) {
          const TrailNode* binder = resolveTrail(lt, lst.varIndex);
          if (!binder) throw UnresolvableVarError();
          if (fuel-- == 0)
            return {VerdictKind::No, {},
                    "promotion cycle (fuel exhausted after " +
                        std::to_string(promos) + " promotions)",
                    kClosed};
          ++promos;
          ++promotions_;
          ls = binder->bound;
          // The bound lives just inside the binder: truncate the trail.
          lt = trailAt(lt, binder);
          stepShifts(ls, lt);
          continue;
        }
        if (lst.label == Label::FreeVar) {
          if (const Ty* bound = env_.findBound(lst.name)) {
            if (fuel-- == 0)
              return {VerdictKind::No, {},
                      "promotion cycle (fuel exhausted after " +
                          std::to_string(promos) + " promotions)",
                      kClosed};
            ++promos;
            ++promotions_;
            int aut = envAutomaton(lst.name, *bound);
            ls = {aut, auts_[static_cast<std::size_t>(aut)]->start};
            lt = nullptr;
            stepShifts(ls, lt);
            continue;
          }
        }
      }
      std::string clash = std::string("label mismatch: ") +
                          automatonLabelName(lst.label) + " vs " +
                          automatonLabelName(rst.label);
      if (promos > 0)
        clash += " (after " + std::to_string(promos) + " promotions)";
      return {VerdictKind::No, {}, clash, kClosed};
    }
  }

  /// Shared suffix of `t` whose head is `node`.
  static Trail trailAt(const Trail& t, const TrailNode* node) {
    for (Trail cur = t; cur; cur = cur->parent)
      if (cur.get() == node) return cur;
    throw std::logic_error("trailAt: node not on trail");
  }

  int envAutomaton(const std::string& name, const Ty& bound) {
    auto it = envAuts_.find(name);
    if (it != envAuts_.end()) return it->second;
    owned_.push_back(std::make_unique<TreeAutomaton>(automataof(bound)));
    addAutomaton(owned_.back().get());
    int idx = static_cast<int>(auts_.size()) - 1;
    envAuts_.emplace(name, idx);
    return idx;
  }

  static Out prepend(Step s, Out child, std::uint64_t promos) {
    if (child.kind == VerdictKind::No) {
      Path p;
      p.reserve(child.witness.size() + 1);
      p.push_back(s);
      p.insert(p.end(), child.witness.begin(), child.witness.end());
      child.witness = std::move(p);
      if (promos > 0)
        child.clash +=
            " [after " + std::to_string(promos) + " promotions above]";
    }
    return child;
  }

  const GlobalEnv& env_;
  std::uint64_t budget_;
  std::vector<const TreeAutomaton*> auts_;
  std::vector<std::vector<int>> relev_;
  std::vector<int> relevCap_;
  std::vector<std::unique_ptr<TreeAutomaton>> owned_;
  std::unordered_map<std::string, int> envAuts_;
  std::vector<CorrEntry> arena_;
  std::unordered_map<std::string, MemoEntry> memo_;
  std::unordered_map<std::string, int> onPath_;
  std::uint64_t created_ = 0;
  std::uint64_t promotions_ = 0;
  int pathDepth_ = 0;
};

}  // namespace

Verdict subtypeAutomata(const GlobalEnv& env, const TreeAutomaton& left,
                        const TreeAutomaton& right, Relation rel,
                        std::uint64_t budget) {
  ProductEngine engine(env, left, right, budget);
  return engine.run(rel);
}

}  // namespace recsub
