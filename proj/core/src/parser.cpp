#include "recsub/parser.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace recsub {

namespace {

enum class Tok { Ident, Arrow, Le, EqEq, Dot, Semi, LParen, RParen, Colon, End };

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) throw SyntaxError(tok_.pos, std::string("expected ") + what);
    advance();
  }

 private:
  void advance() {
    skipTrivia();
    tok_.pos = pos_;
    if (pos_.offset >= text_.size()) {
      tok_ = {Tok::End, "", pos_};
      return;
    }
    char c = text_[pos_.offset];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (pos_.offset < text_.size()) {
        char d = text_[pos_.offset];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'') {
          ident.push_back(d);
          bump();
        } else {
          break;
        }
      }
      tok_.kind = Tok::Ident;
      tok_.text = std::move(ident);
      return;
    }
    switch (c) {
      case '-':
        if (pos_.offset + 1 < text_.size() && text_[pos_.offset + 1] == '>') {
          bump();
          bump();
          tok_ = {Tok::Arrow, "->", tok_.pos};
          return;
        }
        break;
      case '<':
        if (pos_.offset + 1 < text_.size() && text_[pos_.offset + 1] == '=') {
          bump();
          bump();
          tok_ = {Tok::Le, "<=", tok_.pos};
          return;
        }
        break;
      case '=':
        if (pos_.offset + 1 < text_.size() && text_[pos_.offset + 1] == '=') {
          bump();
          bump();
          tok_ = {Tok::EqEq, "==", tok_.pos};
          return;
        }
        break;
      case '.':
        bump();
        tok_ = {Tok::Dot, ".", tok_.pos};
        return;
      case ';':
        bump();
        tok_ = {Tok::Semi, ";", tok_.pos};
        return;
      case ':':
        bump();
        tok_ = {Tok::Colon, ":", tok_.pos};
        return;
      case '(':
        bump();
        tok_ = {Tok::LParen, "(", tok_.pos};
        return;
      case ')':
        bump();
        tok_ = {Tok::RParen, ")", tok_.pos};
        return;
      default:
        break;
    }
    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  void skipTrivia() {
    while (pos_.offset < text_.size()) {
      char c = text_[pos_.offset];
      if (c == '#') {
        while (pos_.offset < text_.size() && text_[pos_.offset] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_.offset] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++pos_.offset;
  }

  std::string_view text_;
  SourcePos pos_;
  Token tok_{Tok::End, "", {}};
};

bool isKeyword(const std::string& s) { return s == "rec" || s == "forall"; }

Surf parseTypeExpr(Lexer& lx);

Surf parseAtom(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.kind == Tok::LParen) {
    lx.take();
    Surf inner = parseTypeExpr(lx);
    lx.expect(Tok::RParen, "')'");
    return inner;
  }
  if (t.kind == Tok::Ident) {
    if (isKeyword(t.text)) throw SyntaxError(t.pos, "'" + t.text + "' is a reserved keyword");
    if (t.text.empty()) throw SyntaxError(t.pos, "empty identifier");
    return surfVar(lx.take().text);
  }
  throw SyntaxError(t.pos, "expected a type");
}

Surf parseArrow(Lexer& lx) {
  Surf lhs = parseAtom(lx);
  if (lx.peek().kind == Tok::Arrow) {
    lx.take();
    return surfFun(std::move(lhs), parseArrow(lx));
  }
  return lhs;
}

std::string parseBinderName(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.kind != Tok::Ident || isKeyword(t.text))
    throw SyntaxError(t.pos, "expected a binder name");
  return lx.take().text;
}

Surf parseTypeExpr(Lexer& lx) {
  const Token& t = lx.peek();
  if (t.kind == Tok::Ident && t.text == "rec") {
    lx.take();
    std::string binder = parseBinderName(lx);
    lx.expect(Tok::Dot, "'.'");
    return surfRec(std::move(binder), parseTypeExpr(lx));
  }
  if (t.kind == Tok::Ident && t.text == "forall") {
    lx.take();
    std::string binder = parseBinderName(lx);
    lx.expect(Tok::Le, "'<='");
    Surf bound = parseTypeExpr(lx);
    lx.expect(Tok::Dot, "'.'");
    return surfForall(std::move(binder), std::move(bound), parseTypeExpr(lx));
  }
  return parseArrow(lx);
}

enum class Ctx { Top, ArrowLhs, ArrowRhs };

void printRec(const Surf& s, Ctx ctx, std::string& out) {
  switch (s->tag) {
    case SurfTag::Var:
      out += s->name;
      return;
    case SurfTag::Fun: {
      bool parens = ctx == Ctx::ArrowLhs;
      if (parens) out += '(';
      printRec(s->a, Ctx::ArrowLhs, out);
      out += " -> ";
      printRec(s->b, Ctx::ArrowRhs, out);
      if (parens) out += ')';
      return;
    }
    case SurfTag::Forall: {
      bool parens = ctx != Ctx::Top;
      if (parens) out += '(';
      out += "forall " + s->name + " <= ";
      printRec(s->a, Ctx::Top, out);
      out += ". ";
      printRec(s->b, Ctx::Top, out);
      if (parens) out += ')';
      return;
    }
    case SurfTag::Rec: {
      bool parens = ctx != Ctx::Top;
      if (parens) out += '(';
      out += "rec " + s->name + ". ";
      printRec(s->a, Ctx::Top, out);
      if (parens) out += ')';
      return;
    }
  }
}

void collectSurfaceFrees(const Surf& s, std::vector<std::string>& binders,
                         std::unordered_set<std::string>& out) {
  switch (s->tag) {
    case SurfTag::Var:
      if (std::find(binders.begin(), binders.end(), s->name) == binders.end())
        out.insert(s->name);
      return;
    case SurfTag::Fun:
      collectSurfaceFrees(s->a, binders, out);
      collectSurfaceFrees(s->b, binders, out);
      return;
    case SurfTag::Forall:
      binders.push_back(s->name);
      collectSurfaceFrees(s->a, binders, out);
      collectSurfaceFrees(s->b, binders, out);
      binders.pop_back();
      return;
    case SurfTag::Rec:
      binders.push_back(s->name);
      collectSurfaceFrees(s->a, binders, out);
      binders.pop_back();
      return;
  }
}

}  // namespace

Surf parseType(std::string_view text) {
  Lexer lx(text);
  Surf s = parseTypeExpr(lx);
  if (lx.peek().kind != Tok::End)
    throw SyntaxError(lx.peek().pos, "trailing input after type");
  return s;
}

std::string printType(const Surf& s) {
  std::string out;
  printRec(s, Ctx::Top, out);
  return out;
}

ParsedQueryFile parseQueryFile(std::string_view text) {
  ParsedQueryFile file;
  Lexer lx(text);
  std::unordered_set<std::string> declared;
  bool sawQuery = false;
  while (lx.peek().kind != Tok::End) {
    std::optional<bool> expected;
    if (lx.peek().kind == Tok::Ident && lx.peek().text == "expect") {
      lx.take();
      const Token& v = lx.peek();
      if (v.kind != Tok::Ident || (v.text != "yes" && v.text != "no"))
        throw SyntaxError(v.pos, "expected 'yes' or 'no' after 'expect'");
      expected = lx.take().text == "yes";
      lx.expect(Tok::Colon, "':'");
    }
    Surf left = parseTypeExpr(lx);
    const Token& op = lx.peek();
    Relation rel;
    if (op.kind == Tok::Le) {
      rel = Relation::Sub;
    } else if (op.kind == Tok::EqEq) {
      rel = Relation::Eq;
    } else {
      throw SyntaxError(op.pos, "expected '<=' or '=='");
    }
    lx.take();
    Surf right = parseTypeExpr(lx);
    lx.expect(Tok::Semi, "';'");

    bool isDecl = !expected && !sawQuery && rel == Relation::Sub &&
                  left->tag == SurfTag::Var && !declared.count(left->name);
    if (isDecl) {
      declared.insert(left->name);
      file.decls.emplace_back(left->name, std::move(right));
    } else {
      sawQuery = true;
      Query q;
      q.left = std::move(left);
      q.right = std::move(right);
      q.rel = rel;
      q.expected = expected;
      q.source = printType(q.left) + (rel == Relation::Sub ? " <= " : " == ") +
                 printType(q.right);
      file.queries.push_back(std::move(q));
    }
  }
  return file;
}

GlobalEnv buildEnv(const ParsedQueryFile& file, bool strictFrees) {
  GlobalEnv env;
  std::vector<std::string> declNames;
  for (const auto& [name, bound] : file.decls) declNames.push_back(name);

  if (!strictFrees) {
    std::unordered_set<std::string> frees;
    std::vector<std::string> binders;
    for (const auto& [name, bound] : file.decls)
      collectSurfaceFrees(bound, binders, frees);
    for (const auto& q : file.queries) {
      collectSurfaceFrees(q.left, binders, frees);
      collectSurfaceFrees(q.right, binders, frees);
    }
    for (const auto& n : frees)
      if (std::find(declNames.begin(), declNames.end(), n) == declNames.end())
        env.implicitFrees.push_back(n);
    std::sort(env.implicitFrees.begin(), env.implicitFrees.end());
  }

  std::vector<std::string> scope = env.implicitFrees;
  scope.insert(scope.end(), declNames.begin(), declNames.end());
  for (const auto& [name, bound] : file.decls)
    env.entries.push_back({name, toCore(bound, scope)});
  return env;
}

std::string renderQuery(const Query& q) {
  if (!q.left || !q.right) return {};
  std::string out;
  if (q.expected) out += std::string("expect ") + (*q.expected ? "yes" : "no") + ": ";
  out += printType(q.left);
  out += q.rel == Relation::Sub ? " <= " : " == ";
  out += printType(q.right);
  return out;
}

}  // namespace recsub
