#pragma once

// Concrete text syntax for types, environments, and query files.
//
//   type   ::= 'rec' IDENT '.' type | 'forall' IDENT '<=' type '.' type | arrow
//   arrow  ::= atom '->' arrow | atom            (right-associative)
//   atom   ::= IDENT | '(' type ')'
//   IDENT  ::= [A-Za-z_][A-Za-z0-9_']*           ('rec', 'forall' reserved)
//
// Query files are line-oriented: declarations `IDENT <= type ;` first, then
// queries `type <= type ;` or `type == type ;`, each optionally prefixed with
// `expect yes:` or `expect no:`.  `#` starts a comment.  A clause of the form
// `IDENT <= type ;` counts as a declaration only while no query has appeared
// and the identifier is not yet declared; afterwards it is a Sub query.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recsub/syntax.hpp"

namespace recsub {

struct SourcePos {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  std::size_t offset = 0;
};

struct SyntaxError : std::runtime_error {
  SyntaxError(SourcePos p, const std::string& msg)
      : std::runtime_error("syntax error at " + std::to_string(p.line) + ":" +
                           std::to_string(p.column) + ": " + msg),
        pos(p) {}
  SourcePos pos;
};

Surf parseType(std::string_view text);

/// Minimal parenthesization; parseType(printType(s)) == s.
std::string printType(const Surf& s);

struct Query {
  Surf left, right;
  Relation rel = Relation::Sub;
  std::optional<bool> expected;
  std::string source;  // rendered form, for reports
};

struct ParsedQueryFile {
  std::vector<std::pair<std::string, Surf>> decls;
  std::vector<Query> queries;
};

ParsedQueryFile parseQueryFile(std::string_view text);

/// Converts the declarations to a GlobalEnv.  With strictFrees, any name used
/// but not declared is an error (UnboundVariableError surfaces from toCore at
/// query conversion); otherwise undeclared names become implicit unbounded
/// constants related only to themselves.
GlobalEnv buildEnv(const ParsedQueryFile& file, bool strictFrees);

std::string renderQuery(const Query& q);

}  // namespace recsub
