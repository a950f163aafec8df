#include "recsub/tree.hpp"

#include <functional>
#include <unordered_map>

#include "recsub/coinductive.hpp"  // canonicalize, for memo-key hygiene

namespace recsub {

std::string pathToString(const Path& p) {
  static const char names[] = {'L', 'R', 'B', 'D'};
  std::string out;
  for (Step s : p) out.push_back(names[static_cast<int>(s)]);
  return out;
}

namespace {

Tr makeTree(TrTag tag, int dist, std::string name, Tr a, Tr b) {
  auto n = std::make_shared<TreeApprox>();
  n->tag = tag;
  n->dist = dist;
  n->name = std::move(name);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace

Tr trCut() { return makeTree(TrTag::Cut, 0, {}, nullptr, nullptr); }
Tr trVar(int dist) { return makeTree(TrTag::Var, dist, {}, nullptr, nullptr); }
Tr trFree(std::string name) {
  return makeTree(TrTag::Free, 0, std::move(name), nullptr, nullptr);
}
Tr trFun(Tr left, Tr right) {
  return makeTree(TrTag::Fun, 0, {}, std::move(left), std::move(right));
}
Tr trForall(Tr bound, Tr body) {
  return makeTree(TrTag::Forall, 0, {}, std::move(bound), std::move(body));
}

bool trEqual(const Tr& a, const Tr& b) {
  if (a.get() == b.get()) return true;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case TrTag::Cut:
      return true;
    case TrTag::Var:
      return a->dist == b->dist;
    case TrTag::Free:
      return a->name == b->name;
    case TrTag::Fun:
    case TrTag::Forall:
      return trEqual(a->a, b->a) && trEqual(a->b, b->b);
  }
  return false;
}

namespace {

void renderRec(const Tr& t, int indent, std::string& out) {
  out.append(static_cast<std::size_t>(indent) * 2, ' ');
  switch (t->tag) {
    case TrTag::Cut:
      out += "<cut>\n";
      return;
    case TrTag::Var:
      out += "$" + std::to_string(t->dist) + "\n";
      return;
    case TrTag::Free:
      out += t->name + "\n";
      return;
    case TrTag::Fun:
      out += "->\n";
      renderRec(t->a, indent + 1, out);
      renderRec(t->b, indent + 1, out);
      return;
    case TrTag::Forall:
      out += "forall\n";
      renderRec(t->a, indent + 1, out);
      renderRec(t->b, indent + 1, out);
      return;
  }
}

void renderInlineRec(const Tr& t, bool atom, std::string& out) {
  switch (t->tag) {
    case TrTag::Cut:
      out += "<cut>";
      return;
    case TrTag::Var:
      out += "$" + std::to_string(t->dist);
      return;
    case TrTag::Free:
      out += t->name;
      return;
    case TrTag::Fun:
      if (atom) out += '(';
      renderInlineRec(t->a, true, out);
      out += " -> ";
      renderInlineRec(t->b, true, out);
      if (atom) out += ')';
      return;
    case TrTag::Forall:
      if (atom) out += '(';
      out += "forall <= ";
      renderInlineRec(t->a, true, out);
      out += ". ";
      renderInlineRec(t->b, false, out);
      if (atom) out += ')';
      return;
  }
}

}  // namespace

std::string renderTree(const Tr& t) {
  std::string out;
  renderRec(t, 0, out);
  return out;
}

std::string renderTreeInline(const Tr& t) {
  std::string out;
  renderInlineRec(t, false, out);
  return out;
}

Tr treeof(const Ty& t, int depth) {
  if (depth <= 0) return trCut();
  Ty h = headNormalize(t);
  switch (h->tag) {
    case TyTag::Free:
      return trFree(h->name);
    case TyTag::Var:
      return trVar(h->index);
    case TyTag::Fun:
      return trFun(treeof(h->a, depth - 1), treeof(h->b, depth - 1));
    case TyTag::Forall:
      return trForall(treeof(h->a, depth - 1), treeof(h->b, depth - 1));
    case TyTag::Rec:
      break;
  }
  throw std::logic_error("treeof: Rec head after normalization");
}

Tr truncate(const Tr& t, int depth) {
  if (depth <= 0) return trCut();
  switch (t->tag) {
    case TrTag::Cut:
    case TrTag::Var:
    case TrTag::Free:
      return t;
    case TrTag::Fun:
      return trFun(truncate(t->a, depth - 1), truncate(t->b, depth - 1));
    case TrTag::Forall:
      return trForall(truncate(t->a, depth - 1), truncate(t->b, depth - 1));
  }
  return t;
}

bool isPrefixOf(const Tr& t1, const Tr& t2) {
  if (t1->tag == TrTag::Cut) return true;
  if (t1->tag != t2->tag) return false;
  switch (t1->tag) {
    case TrTag::Var:
      return t1->dist == t2->dist;
    case TrTag::Free:
      return t1->name == t2->name;
    case TrTag::Fun:
    case TrTag::Forall:
      return isPrefixOf(t1->a, t2->a) && isPrefixOf(t1->b, t2->b);
    case TrTag::Cut:
      break;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

struct OracleKey {
  std::vector<Ty> stack;
  Ty l, r;
  Relation rel;
  int depth;
  std::size_t hash;

  bool operator==(const OracleKey& o) const {
    if (hash != o.hash || rel != o.rel || depth != o.depth) return false;
    if (stack.size() != o.stack.size()) return false;
    if (!tyEqual(l, o.l) || !tyEqual(r, o.r)) return false;
    for (std::size_t i = 0; i < stack.size(); ++i)
      if (!tyEqual(stack[i], o.stack[i])) return false;
    return true;
  }
};

struct OracleKeyHash {
  std::size_t operator()(const OracleKey& k) const { return k.hash; }
};

OracleKey makeKey(const BinderStack& stack, const Ty& l, const Ty& r,
                  Relation rel, int depth) {
  OracleKey k;
  k.stack.reserve(stack.size());
  std::size_t h = mix(static_cast<std::size_t>(rel),
                      static_cast<std::size_t>(depth));
  for (const auto& e : stack) {
    k.stack.push_back(e.bound);
    h = mix(h, e.bound->hash);
  }
  h = mix(h, l->hash);
  h = mix(h, r->hash);
  k.l = l;
  k.r = r;
  k.rel = rel;
  k.depth = depth;
  k.hash = h;
  return k;
}

class Oracle {
 public:
  explicit Oracle(const GlobalEnv& env) : env_(env) {}

  OracleResult go(const BinderStack& stack, Ty l, Ty r, Relation rel, int depth,
                  int fuelOverride) {
    if (depth <= 0) return {true, {}};
    l = headNormalize(std::move(l));
    r = headNormalize(std::move(r));
    if (fuelOverride >= 0)
      return rules(stack, std::move(l), std::move(r), rel, depth, fuelOverride);
    // Drop stack entries the goal cannot reach before keying the memo table;
    // otherwise path-dependent junk entries defeat caching and the search
    // degenerates to exponential in the depth.
    Assertion raw;
    raw.left = l;
    raw.right = r;
    raw.rel = rel;
    raw.stack.reserve(stack.size());
    for (const auto& e : stack) raw.stack.push_back(e.bound);
    Assertion canon = canonicalize(raw);
    BinderStack cstack;
    cstack.reserve(canon.stack.size());
    for (std::size_t i = 0; i < canon.stack.size(); ++i)
      cstack.push_back({canon.stack[i], static_cast<int>(i) + 1});
    OracleKey key = makeKey(cstack, canon.left, canon.right, rel, depth);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    int fuel = static_cast<int>(cstack.size() + env_.entries.size()) + 1;
    OracleResult result =
        rules(cstack, canon.left, canon.right, rel, depth, fuel);
    memo_.emplace(std::move(key), result);
    return result;
  }

 private:
  OracleResult rules(const BinderStack& stack, Ty l, Ty r, Relation rel,
                     int depth, int fuel) {
    for (;;) {
      if (l->tag == TyTag::Free && r->tag == TyTag::Free && l->name == r->name)
        return {true, {}};
      if (l->tag == TyTag::Var && r->tag == TyTag::Var && l->index == r->index)
        return {true, {}};
      if (l->tag == TyTag::Fun && r->tag == TyTag::Fun) {
        OracleResult dom =
            rel == Relation::Eq
                ? go(stack, l->a, r->a, Relation::Eq, depth - 1, -1)
                : go(stack, r->a, l->a, Relation::Sub, depth - 1, -1);
        if (!dom.yes) return no(Step::L, dom);
        OracleResult cod = go(stack, l->b, r->b, rel, depth - 1, -1);
        if (!cod.yes) return no(Step::R, cod);
        return {true, {}};
      }
      if (l->tag == TyTag::Forall && r->tag == TyTag::Forall) {
        BinderStack extended = stack;
        extended.push_back({l->a, static_cast<int>(stack.size()) + 1});
        OracleResult bound =
            go(extended, l->a, r->a, Relation::Eq, depth - 1, -1);
        if (!bound.yes) return no(Step::B, bound);
        OracleResult body = go(extended, l->b, r->b, rel, depth - 1, -1);
        if (!body.yes) return no(Step::D, body);
        return {true, {}};
      }
      if (rel == Relation::Sub) {
        // Promotion: replace a left-side variable by its bound.
        if (l->tag == TyTag::Var &&
            l->index < static_cast<int>(stack.size())) {
          if (fuel-- == 0) return {false, {}};
          std::size_t pos = stack.size() - 1 - static_cast<std::size_t>(l->index);
          const BinderEntry& entry = stack[pos];
          int delta = static_cast<int>(stack.size()) - entry.depthAtBind;
          l = headNormalize(shiftIndices(entry.bound, 0, delta));
          continue;
        }
        if (l->tag == TyTag::Free) {
          if (const Ty* bound = env_.findBound(l->name)) {
            if (fuel-- == 0) return {false, {}};
            l = headNormalize(*bound);
            continue;
          }
        }
      }
      return {false, {}};
    }
  }

  static OracleResult no(Step s, const OracleResult& child) {
    OracleResult out{false, {}};
    out.witness.reserve(child.witness.size() + 1);
    out.witness.push_back(s);
    out.witness.insert(out.witness.end(), child.witness.begin(),
                       child.witness.end());
    return out;
  }

  const GlobalEnv& env_;
  std::unordered_map<OracleKey, OracleResult, OracleKeyHash> memo_;
};

}  // namespace

OracleResult oracleCheck(const GlobalEnv& env, const BinderStack& stack, Ty l,
                         Ty r, Relation rel, int depth, int fuel) {
  Oracle oracle(env);
  return oracle.go(stack, std::move(l), std::move(r), rel, depth, fuel);
}

}  // namespace recsub
