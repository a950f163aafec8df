#include "recsub/syntax.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_set>

namespace recsub {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

Ty makeNode(TypeExpr node) {
  std::size_t h = static_cast<std::size_t>(node.tag) * 0x9e3779b97f4a7c15ULL;
  int sz = 1;
  switch (node.tag) {
    case TyTag::Var:
      h = mix(h, static_cast<std::size_t>(node.index));
      break;
    case TyTag::Free:
      h = mix(h, std::hash<std::string>{}(node.name));
      break;
    case TyTag::Fun:
    case TyTag::Forall:
      h = mix(h, node.a->hash);
      h = mix(h, node.b->hash);
      sz += node.a->size + node.b->size;
      break;
    case TyTag::Rec:
      h = mix(h, node.a->hash);
      sz += node.a->size;
      break;
  }
  node.hash = h;
  node.size = sz;
  return std::make_shared<const TypeExpr>(std::move(node));
}

}  // namespace

Ty tyVar(int index) {
  TypeExpr n;
  n.tag = TyTag::Var;
  n.index = index;
  return makeNode(std::move(n));
}

Ty tyFree(std::string name) {
  TypeExpr n;
  n.tag = TyTag::Free;
  n.name = std::move(name);
  return makeNode(std::move(n));
}

Ty tyFun(Ty dom, Ty cod) {
  TypeExpr n;
  n.tag = TyTag::Fun;
  n.a = std::move(dom);
  n.b = std::move(cod);
  return makeNode(std::move(n));
}

Ty tyForall(Ty bound, Ty body) {
  TypeExpr n;
  n.tag = TyTag::Forall;
  n.a = std::move(bound);
  n.b = std::move(body);
  return makeNode(std::move(n));
}

Ty tyRec(Ty body) {
  TypeExpr n;
  n.tag = TyTag::Rec;
  n.a = std::move(body);
  return makeNode(std::move(n));
}

bool tyEqual(const Ty& a, const Ty& b) {
  if (a.get() == b.get()) return true;
  if (a->hash != b->hash || a->tag != b->tag || a->size != b->size) return false;
  switch (a->tag) {
    case TyTag::Var:
      return a->index == b->index;
    case TyTag::Free:
      return a->name == b->name;
    case TyTag::Fun:
    case TyTag::Forall:
      return tyEqual(a->a, b->a) && tyEqual(a->b, b->b);
    case TyTag::Rec:
      return tyEqual(a->a, b->a);
  }
  return false;
}

int quantifierDepth(const Ty& t) {
  switch (t->tag) {
    case TyTag::Var:
    case TyTag::Free:
      return 0;
    case TyTag::Fun:
      return std::max(quantifierDepth(t->a), quantifierDepth(t->b));
    case TyTag::Forall:
      return 1 + std::max(quantifierDepth(t->a), quantifierDepth(t->b));
    case TyTag::Rec:
      return quantifierDepth(t->a);
  }
  return 0;
}

namespace {

void collectFreeIndices(const Ty& t, int cutoff, std::set<int>& out) {
  switch (t->tag) {
    case TyTag::Var:
      if (t->index >= cutoff) out.insert(t->index - cutoff);
      break;
    case TyTag::Free:
      break;
    case TyTag::Fun:
      collectFreeIndices(t->a, cutoff, out);
      collectFreeIndices(t->b, cutoff, out);
      break;
    case TyTag::Forall:
      collectFreeIndices(t->a, cutoff + 1, out);
      collectFreeIndices(t->b, cutoff + 1, out);
      break;
    case TyTag::Rec:
      collectFreeIndices(t->a, cutoff + 1, out);
      break;
  }
}

void collectFreeNames(const Ty& t, std::vector<std::string>& out,
                      std::unordered_set<std::string>& seen) {
  switch (t->tag) {
    case TyTag::Var:
      break;
    case TyTag::Free:
      if (seen.insert(t->name).second) out.push_back(t->name);
      break;
    case TyTag::Fun:
    case TyTag::Forall:
      collectFreeNames(t->a, out, seen);
      collectFreeNames(t->b, out, seen);
      break;
    case TyTag::Rec:
      collectFreeNames(t->a, out, seen);
      break;
  }
}

}  // namespace

std::vector<int> freeIndices(const Ty& t) {
  std::set<int> s;
  collectFreeIndices(t, 0, s);
  return {s.begin(), s.end()};
}

std::vector<std::string> freeNames(const Ty& t) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  collectFreeNames(t, out, seen);
  return out;
}

Ty shiftIndices(const Ty& t, int cutoff, int delta) {
  switch (t->tag) {
    case TyTag::Var:
      if (t->index >= cutoff) {
        int shifted = t->index + delta;
        if (shifted < 0) throw NegativeIndexError(shifted);
        return tyVar(shifted);
      }
      return t;
    case TyTag::Free:
      return t;
    case TyTag::Fun:
      return tyFun(shiftIndices(t->a, cutoff, delta),
                   shiftIndices(t->b, cutoff, delta));
    case TyTag::Forall:
      return tyForall(shiftIndices(t->a, cutoff + 1, delta),
                      shiftIndices(t->b, cutoff + 1, delta));
    case TyTag::Rec:
      return tyRec(shiftIndices(t->a, cutoff + 1, delta));
  }
  return t;
}

Ty substitute(const Ty& t, int target, const Ty& s) {
  switch (t->tag) {
    case TyTag::Var:
      if (t->index == target) return shiftIndices(s, 0, target);
      if (t->index > target) return tyVar(t->index - 1);
      return t;
    case TyTag::Free:
      return t;
    case TyTag::Fun:
      return tyFun(substitute(t->a, target, s), substitute(t->b, target, s));
    case TyTag::Forall:
      return tyForall(substitute(t->a, target + 1, s),
                      substitute(t->b, target + 1, s));
    case TyTag::Rec:
      return tyRec(substitute(t->a, target + 1, s));
  }
  return t;
}

bool isContractive(const Ty& body) {
  // Walk the exposed spine: the term itself plus the spine of Rec bodies.
  const TypeExpr* cur = body.get();
  int tracked = 0;
  for (;;) {
    if (cur->tag == TyTag::Var) return cur->index != tracked;
    if (cur->tag == TyTag::Rec) {
      cur = cur->a.get();
      ++tracked;
      continue;
    }
    return true;
  }
}

Ty unfoldRec(const Ty& t) {
  if (t->tag != TyTag::Rec) throw NotARecError();
  return substitute(t->a, 0, t);
}

Ty headNormalize(Ty t) {
  while (t->tag == TyTag::Rec) t = unfoldRec(t);
  return t;
}

// ---------------------------------------------------------------------------
// Surface types
// ---------------------------------------------------------------------------

Surf surfVar(std::string name) {
  auto n = std::make_shared<SurfaceType>();
  n->tag = SurfTag::Var;
  n->name = std::move(name);
  return n;
}

Surf surfFun(Surf dom, Surf cod) {
  auto n = std::make_shared<SurfaceType>();
  n->tag = SurfTag::Fun;
  n->a = std::move(dom);
  n->b = std::move(cod);
  return n;
}

Surf surfForall(std::string binder, Surf bound, Surf body) {
  auto n = std::make_shared<SurfaceType>();
  n->tag = SurfTag::Forall;
  n->name = std::move(binder);
  n->a = std::move(bound);
  n->b = std::move(body);
  return n;
}

Surf surfRec(std::string binder, Surf body) {
  auto n = std::make_shared<SurfaceType>();
  n->tag = SurfTag::Rec;
  n->name = std::move(binder);
  n->a = std::move(body);
  return n;
}

bool surfEqual(const Surf& a, const Surf& b) {
  if (a.get() == b.get()) return true;
  if (a->tag != b->tag || a->name != b->name) return false;
  switch (a->tag) {
    case SurfTag::Var:
      return true;
    case SurfTag::Fun:
    case SurfTag::Forall:
      return surfEqual(a->a, b->a) && surfEqual(a->b, b->b);
    case SurfTag::Rec:
      return surfEqual(a->a, b->a);
  }
  return false;
}

// ---------------------------------------------------------------------------
// GlobalEnv
// ---------------------------------------------------------------------------

const Ty* GlobalEnv::findBound(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e.bound;
  return nullptr;
}

bool GlobalEnv::isDeclared(const std::string& name) const {
  if (findBound(name)) return true;
  return std::find(implicitFrees.begin(), implicitFrees.end(), name) !=
         implicitFrees.end();
}

std::vector<std::string> GlobalEnv::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.name);
  for (const auto& n : implicitFrees) out.push_back(n);
  return out;
}

// ---------------------------------------------------------------------------
// toCore / fromCore
// ---------------------------------------------------------------------------

namespace {

Ty toCoreRec(const Surf& s, std::vector<std::string>& binders,
             const std::vector<std::string>& scope) {
  switch (s->tag) {
    case SurfTag::Var: {
      for (int i = static_cast<int>(binders.size()) - 1; i >= 0; --i) {
        if (binders[static_cast<std::size_t>(i)] == s->name)
          return tyVar(static_cast<int>(binders.size()) - 1 - i);
      }
      if (std::find(scope.begin(), scope.end(), s->name) != scope.end())
        return tyFree(s->name);
      throw UnboundVariableError(s->name);
    }
    case SurfTag::Fun:
      return tyFun(toCoreRec(s->a, binders, scope),
                   toCoreRec(s->b, binders, scope));
    case SurfTag::Forall: {
      binders.push_back(s->name);
      Ty bound = toCoreRec(s->a, binders, scope);
      Ty body = toCoreRec(s->b, binders, scope);
      binders.pop_back();
      return tyForall(std::move(bound), std::move(body));
    }
    case SurfTag::Rec: {
      binders.push_back(s->name);
      Ty body = toCoreRec(s->a, binders, scope);
      binders.pop_back();
      return tyRec(std::move(body));
    }
  }
  throw std::logic_error("unreachable surface tag");
}

std::string freshName(int counter, const std::unordered_set<std::string>& used) {
  // a, b, ..., z, a1, b1, ...
  for (;;) {
    std::string candidate(1, static_cast<char>('a' + counter % 26));
    if (counter >= 26) candidate += std::to_string(counter / 26);
    if (!used.count(candidate)) return candidate;
    ++counter;
  }
}

Surf fromCoreRec(const Ty& t, std::vector<std::string>& binders,
                 const std::vector<std::string>& hints,
                 std::unordered_set<std::string>& used, int& counter) {
  switch (t->tag) {
    case TyTag::Var: {
      int depth = static_cast<int>(binders.size());
      if (t->index < depth)
        return surfVar(binders[static_cast<std::size_t>(depth - 1 - t->index)]);
      std::size_t hi = static_cast<std::size_t>(t->index - depth);
      if (hi < hints.size()) return surfVar(hints[hi]);
      throw std::invalid_argument("fromCore: free index without a hint");
    }
    case TyTag::Free:
      return surfVar(t->name);
    case TyTag::Fun:
      return surfFun(fromCoreRec(t->a, binders, hints, used, counter),
                     fromCoreRec(t->b, binders, hints, used, counter));
    case TyTag::Forall: {
      std::string n = freshName(counter++, used);
      used.insert(n);
      binders.push_back(n);
      Surf bound = fromCoreRec(t->a, binders, hints, used, counter);
      Surf body = fromCoreRec(t->b, binders, hints, used, counter);
      binders.pop_back();
      return surfForall(n, std::move(bound), std::move(body));
    }
    case TyTag::Rec: {
      std::string n = freshName(counter++, used);
      used.insert(n);
      binders.push_back(n);
      Surf body = fromCoreRec(t->a, binders, hints, used, counter);
      binders.pop_back();
      return surfRec(n, std::move(body));
    }
  }
  throw std::logic_error("unreachable core tag");
}

}  // namespace

Ty toCore(const Surf& s, const std::vector<std::string>& scope) {
  std::vector<std::string> binders;
  return toCoreRec(s, binders, scope);
}

Surf fromCore(const Ty& t, const std::vector<std::string>& hints) {
  std::unordered_set<std::string> used;
  for (const auto& n : freeNames(t)) used.insert(n);
  for (const auto& n : hints) used.insert(n);
  std::vector<std::string> binders;
  int counter = 0;
  return fromCoreRec(t, binders, hints, used, counter);
}

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

std::string WfError::message() const {
  std::string where = path.empty() ? "at root" : "at path " + path;
  switch (kind) {
    case Kind::NonContractive:
      return "non-contractive recursive type " + where;
    case Kind::IndexOutOfRange:
      return "de Bruijn index out of range " + where;
    case Kind::UndeclaredFree:
      return "undeclared free variable '" + name + "' " + where;
    case Kind::DuplicateName:
      return "duplicate declaration of '" + name + "'";
    case Kind::ForwardReference:
      return "bound of '" + name + "' references a later declaration";
    case Kind::UnguardedSelfBound:
      return "bound of '" + name + "' is exactly its own variable";
  }
  return "malformed type";
}

namespace {

std::optional<WfError> wfRec(const Ty& t, int depth, const GlobalEnv& env,
                             std::string& path) {
  auto step = [&](char c, const Ty& child, int d) -> std::optional<WfError> {
    path.push_back(c);
    auto r = wfRec(child, d, env, path);
    path.pop_back();
    return r;
  };
  switch (t->tag) {
    case TyTag::Var:
      if (t->index < 0 || t->index >= depth)
        return WfError{WfError::Kind::IndexOutOfRange, path, {}};
      return std::nullopt;
    case TyTag::Free:
      if (!env.isDeclared(t->name))
        return WfError{WfError::Kind::UndeclaredFree, path, t->name};
      return std::nullopt;
    case TyTag::Fun:
      if (auto e = step('L', t->a, depth)) return e;
      return step('R', t->b, depth);
    case TyTag::Forall:
      if (auto e = step('B', t->a, depth + 1)) return e;
      return step('D', t->b, depth + 1);
    case TyTag::Rec:
      if (!isContractive(t->a))
        return WfError{WfError::Kind::NonContractive, path, {}};
      return step('U', t->a, depth + 1);
  }
  return std::nullopt;
}

/// The exposed spine of a bound must not be exactly the entry's own FreeVar.
bool selfBoundUnguarded(const Ty& bound, const std::string& name) {
  const TypeExpr* cur = bound.get();
  while (cur->tag == TyTag::Rec) cur = cur->a.get();
  return cur->tag == TyTag::Free && cur->name == name;
}

}  // namespace

std::optional<WfError> wellFormed(const Ty& t, const GlobalEnv& env) {
  std::string path;
  return wfRec(t, 0, env, path);
}

std::optional<WfError> validateEnv(const GlobalEnv& env) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < env.entries.size(); ++i) {
    const auto& e = env.entries[i];
    if (!seen.insert(e.name).second)
      return WfError{WfError::Kind::DuplicateName, {}, e.name};
    // Visible names: entries up to and including this one, plus implicits.
    GlobalEnv prefix;
    prefix.entries.assign(env.entries.begin(),
                          env.entries.begin() + static_cast<long>(i) + 1);
    prefix.implicitFrees = env.implicitFrees;
    for (const auto& n : freeNames(e.bound)) {
      if (!prefix.isDeclared(n))
        return WfError{WfError::Kind::ForwardReference, {}, e.name};
    }
    if (selfBoundUnguarded(e.bound, e.name))
      return WfError{WfError::Kind::UnguardedSelfBound, {}, e.name};
    if (auto w = wellFormed(e.bound, prefix)) return w;
  }
  return std::nullopt;
}

}  // namespace recsub
