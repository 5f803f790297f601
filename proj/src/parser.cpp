//
// Copyright 2026 The sqleq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Two stages: a syntax parser producing an unresolved tree (RStmt/RExpr),
// then a binder that resolves names, assigns static types and builds the
// algebraic Query tree.

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>

#include "sqleq/parser.hpp"

namespace sqleq {

ParseError::ParseError(Kind kind, std::string reason, size_t offset, int line, int column,
                       std::string feature)
    : std::runtime_error(std::string(parse_error_kind_name(kind)) + " at " +
                         std::to_string(line) + ":" + std::to_string(column) + ": " + reason),
      kind_(kind),
      reason_(std::move(reason)),
      feature_(std::move(feature)),
      offset_(offset),
      line_(line),
      column_(column) {}

const char* parse_error_kind_name(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::Syntax:
      return "SyntaxError";
    case ParseError::Kind::Unsupported:
      return "Unsupported";
    case ParseError::Kind::UnresolvedName:
      return "UnresolvedName";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, QuotedIdent, Int, Decimal, String, Op, End };

struct Token {
  Tok kind;
  std::string text;  // identifiers keep their spelling; Op is the symbol
  size_t pos;
};

class ErrorSite {
 public:
  explicit ErrorSite(std::string_view src) : src_(src) {}

  [[noreturn]] void fail(ParseError::Kind kind, const std::string& reason, size_t pos,
                         const std::string& feature = {}) const {
    int line = 1, col = 1;
    for (size_t i = 0; i < pos && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(kind, reason, pos, line, col, feature);
  }

  std::string_view src() const { return src_; }

 private:
  std::string_view src_;
};

std::vector<Token> lex(std::string_view s, const ErrorSite& site) {
  std::vector<Token> out;
  size_t i = 0;
  auto is_ident_start = [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  };
  auto is_ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
  };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      size_t end = s.find("*/", i + 2);
      if (end == std::string_view::npos) site.fail(ParseError::Kind::Syntax, "unterminated comment", i);
      i = end + 2;
      continue;
    }
    size_t start = i;
    if (is_ident_start(c)) {
      while (i < s.size() && is_ident_char(s[i])) ++i;
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (c == '"' || c == '`') {
      char q = c;
      std::string text;
      ++i;
      while (true) {
        if (i >= s.size()) site.fail(ParseError::Kind::Syntax, "unterminated identifier", start);
        if (s[i] == q) {
          if (i + 1 < s.size() && s[i + 1] == q) {
            text += q;
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text += s[i++];
      }
      out.push_back({Tok::QuotedIdent, text, start});
      continue;
    }
    if (c == '[') {
      site.fail(ParseError::Kind::Unsupported, "bracket-quoted identifier", start,
                "bracket identifier");
    }
    if (c == '\'') {
      std::string text;
      ++i;
      while (true) {
        if (i >= s.size()) site.fail(ParseError::Kind::Syntax, "unterminated string literal", start);
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            text += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text += s[i++];
      }
      out.push_back({Tok::String, text, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      bool dot = false;
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
        if (s[i] == '.') {
          if (dot) break;
          dot = true;
        }
        ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E' || s[i] == 'x' || s[i] == 'X')) {
        site.fail(ParseError::Kind::Unsupported, "exponent or hex numeric literal", start,
                  "numeric literal form");
      }
      if (i < s.size() && is_ident_start(s[i])) {
        site.fail(ParseError::Kind::Syntax, "malformed number", start);
      }
      out.push_back({dot ? Tok::Decimal : Tok::Int, std::string(s.substr(start, i - start)), start});
      continue;
    }
    static const char* kTwoChar[] = {"<=", ">=", "<>", "!=", "==", "||", "<<", ">>"};
    bool matched = false;
    for (const char* op : kTwoChar) {
      if (s.substr(i, 2) == op) {
        out.push_back({Tok::Op, op, start});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("(),.;*+-/%=<>&|~?:@").find(c) != std::string_view::npos) {
      out.push_back({Tok::Op, std::string(1, c), start});
      ++i;
      continue;
    }
    site.fail(ParseError::Kind::Syntax, std::string("unexpected character '") + c + "'", start);
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> kWords = {
      "ALL",     "AND",    "AS",      "ASC",       "BETWEEN", "BY",     "CASE",    "CAST",
      "COLLATE", "CROSS",  "DESC",    "DISTINCT",  "ELSE",    "END",    "ESCAPE",  "EXCEPT",
      "EXISTS",  "FALSE",  "FROM",    "FULL",      "GLOB",    "GROUP",  "HAVING",  "IN",
      "INNER",   "INTERSECT", "IS",   "ISNULL",    "JOIN",    "LEFT",   "LIKE",    "LIMIT",
      "MATCH",   "NATURAL", "NOT",    "NOTNULL",   "NULL",    "OFFSET", "ON",      "OR",
      "ORDER",   "OUTER",  "OVER",    "REGEXP",    "RIGHT",   "SELECT", "THEN",    "TRUE",
      "UNION",   "USING",  "VALUES",  "WHEN",      "WHERE",   "WINDOW", "WITH",    "RECURSIVE"};
  return kWords;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

// ---------------------------------------------------------- syntax tree

struct RStmt;
struct RExpr;
using RStmtPtr = std::shared_ptr<RStmt>;
using RExprPtr = std::shared_ptr<RExpr>;

enum class RK {
  Column,
  Literal,
  BoolLit,
  Star,
  Func,
  Neg,
  Not,
  Binary,
  Between,
  InList,
  InSub,
  IsNull,
  Like,
  Glob,
  Case,
  Cast,
  Unsupported
};

struct RExpr {
  RK kind;
  size_t begin = 0, end = 0;
  std::string qualifier, name;  // Column; Func name (upper); Binary op; Cast type
  Value literal;
  bool bool_value = false;
  std::vector<RExprPtr> args;
  RStmtPtr sub;
  bool distinct = false;
  bool negated = false;
  bool has_operand = false;  // CASE x WHEN ...
  bool has_else = false;
  std::string feature;
};

struct RFrom {
  std::string table;
  RStmtPtr sub;
  std::string alias;
  bool has_alias = false;
  size_t pos = 0;
};

struct RJoin {
  JoinKind kind;
  RFrom item;
  RExprPtr on;
};

struct RSelectItem {
  bool star = false;
  std::string star_qualifier;
  RExprPtr expr;
  std::string alias;
  size_t pos = 0;
};

struct RCore {
  bool distinct = false;
  std::vector<RSelectItem> items;
  bool has_from = false;
  RFrom first;
  std::vector<RJoin> joins;
  RExprPtr where;
  std::vector<RExprPtr> group_by;
  RExprPtr having;
  std::vector<std::string> unsupported;
  size_t pos = 0;
};

struct ROrder {
  RExprPtr expr;
  bool desc = false;
};

struct RStmt {
  std::vector<std::pair<std::string, RStmtPtr>> ctes;
  std::vector<RCore> cores;
  std::vector<SetOpKind> ops;
  std::vector<ROrder> order;
  std::optional<int64_t> limit;
  std::vector<std::string> unsupported;
  size_t pos = 0;
};

class SyntaxParser {
 public:
  SyntaxParser(const ErrorSite& site, std::vector<Token> toks, bool tolerant)
      : site_(site), toks_(std::move(toks)), tolerant_(tolerant) {}

  RStmtPtr parse_top() {
    if (peek().kind == Tok::End) fail("empty statement");
    RStmtPtr st = parse_stmt();
    while (accept_op(";")) {
    }
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after statement");
    return st;
  }

 private:
  const Token& peek(size_t k = 0) const {
    size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_kw(const char* kw, size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == Tok::Ident && upper(t.text) == kw;
  }
  bool accept_kw(const char* kw) {
    if (is_kw(kw)) {
      next();
      return true;
    }
    return false;
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw)) fail(std::string("expected ") + kw);
  }
  bool is_op(const char* op, size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == Tok::Op && t.text == op;
  }
  bool accept_op(const char* op) {
    if (is_op(op)) {
      next();
      return true;
    }
    return false;
  }
  void expect_op(const char* op) {
    if (!accept_op(op)) fail(std::string("expected '") + op + "'");
  }
  [[noreturn]] void fail(const std::string& reason) const {
    site_.fail(ParseError::Kind::Syntax, reason, peek().pos);
  }
  // Strict mode raises; tolerant mode lets the caller record the feature.
  void unsupported(const std::string& feature, size_t pos) const {
    if (!tolerant_) {
      site_.fail(ParseError::Kind::Unsupported, feature + " is outside the supported subset",
                 pos, feature);
    }
  }
  bool is_reserved(const Token& t) const {
    return t.kind == Tok::Ident && reserved_words().count(upper(t.text)) > 0;
  }
  bool is_name_token(size_t k = 0) const {
    const Token& t = peek(k);
    return t.kind == Tok::QuotedIdent || (t.kind == Tok::Ident && !is_reserved(t));
  }
  std::string expect_name() {
    if (!is_name_token()) fail("expected identifier");
    return next().text;
  }
  void skip_balanced() {
    expect_op("(");
    int depth = 1;
    while (depth > 0) {
      if (peek().kind == Tok::End) fail("unbalanced parentheses");
      const Token& t = next();
      if (t.kind == Tok::Op && t.text == "(") ++depth;
      if (t.kind == Tok::Op && t.text == ")") --depth;
    }
  }
  bool starts_select() const { return is_kw("SELECT") || is_kw("WITH") || is_kw("VALUES"); }

  RExprPtr mk(RK kind, size_t begin) {
    auto e = std::make_shared<RExpr>();
    e->kind = kind;
    e->begin = begin;
    e->end = prev_end();
    return e;
  }
  size_t prev_end() const {
    if (pos_ == 0) return 0;
    const Token& t = toks_[pos_ - 1];
    // Approximate: the token's source span.
    size_t end = t.pos + t.text.size();
    if (t.kind == Tok::String || t.kind == Tok::QuotedIdent) end += 2;
    return end;
  }
  RExprPtr mk_unsupported(const std::string& feature, size_t begin) {
    unsupported(feature, begin);
    auto e = mk(RK::Unsupported, begin);
    e->feature = feature;
    return e;
  }

  RStmtPtr parse_stmt() {
    auto st = std::make_shared<RStmt>();
    st->pos = peek().pos;
    if (accept_kw("WITH")) {
      if (is_kw("RECURSIVE")) {
        unsupported("recursive CTE", peek().pos);
        st->unsupported.push_back("recursive CTE");
        next();
      }
      do {
        std::string name = expect_name();
        if (is_op("(")) {
          unsupported("CTE column list", peek().pos);
          st->unsupported.push_back("CTE column list");
          skip_balanced();
        }
        expect_kw("AS");
        if (accept_kw("NOT")) expect_kw("MATERIALIZED");
        else accept_kw("MATERIALIZED");
        expect_op("(");
        RStmtPtr def = parse_stmt();
        expect_op(")");
        st->ctes.emplace_back(name, def);
      } while (accept_op(","));
    }
    st->cores.push_back(parse_core());
    while (true) {
      if (accept_kw("UNION")) {
        st->ops.push_back(accept_kw("ALL") ? SetOpKind::UnionAll : SetOpKind::Union);
      } else if (accept_kw("INTERSECT")) {
        st->ops.push_back(SetOpKind::Intersect);
      } else if (accept_kw("EXCEPT")) {
        st->ops.push_back(SetOpKind::Except);
      } else {
        break;
      }
      st->cores.push_back(parse_core());
    }
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        ROrder o;
        o.expr = parse_expr();
        if (accept_kw("COLLATE")) {
          unsupported("COLLATE", peek().pos);
          st->unsupported.push_back("COLLATE");
          next();
        }
        if (accept_kw("DESC")) {
          o.desc = true;
        } else {
          accept_kw("ASC");
        }
        if (is_kw("NULLS")) {
          unsupported("NULLS FIRST/LAST", peek().pos);
          st->unsupported.push_back("NULLS FIRST/LAST");
          next();
          next();
        }
        st->order.push_back(o);
      } while (accept_op(","));
    }
    if (accept_kw("LIMIT")) {
      size_t at = peek().pos;
      if (peek().kind == Tok::Int) {
        try {
          st->limit = std::stoll(next().text);
        } catch (const std::out_of_range&) {
          fail("LIMIT out of range");
        }
      } else {
        unsupported("non-literal LIMIT", at);
        st->unsupported.push_back("non-literal LIMIT");
        parse_expr();
      }
      if (accept_kw("OFFSET") || accept_op(",")) {
        unsupported("OFFSET", at);
        st->unsupported.push_back("OFFSET");
        parse_expr();
      }
    }
    return st;
  }

  RCore parse_core() {
    RCore core;
    core.pos = peek().pos;
    if (is_kw("VALUES")) {
      unsupported("VALUES clause", peek().pos);
      fail("VALUES clause");
    }
    expect_kw("SELECT");
    if (accept_kw("DISTINCT")) {
      core.distinct = true;
    } else {
      accept_kw("ALL");
    }
    do {
      RSelectItem item;
      item.pos = peek().pos;
      if (accept_op("*")) {
        item.star = true;
      } else if (is_name_token() && is_op(".", 1) && is_op("*", 2)) {
        item.star = true;
        item.star_qualifier = next().text;
        next();
        next();
      } else {
        item.expr = parse_expr();
        if (accept_kw("AS")) {
          if (peek().kind == Tok::String) {
            item.alias = next().text;
          } else {
            item.alias = expect_name();
          }
        } else if (is_name_token()) {
          item.alias = next().text;
        }
      }
      core.items.push_back(std::move(item));
    } while (accept_op(","));
    if (accept_kw("FROM")) {
      core.has_from = true;
      core.first = parse_from_item(core);
      while (true) {
        JoinKind kind;
        size_t at = peek().pos;
        if (accept_op(",")) {
          kind = JoinKind::Cross;
        } else {
          if (accept_kw("NATURAL")) {
            unsupported("NATURAL JOIN", at);
            core.unsupported.push_back("NATURAL JOIN");
          }
          if (accept_kw("LEFT")) {
            accept_kw("OUTER");
            kind = JoinKind::Left;
          } else if (accept_kw("RIGHT")) {
            accept_kw("OUTER");
            kind = JoinKind::Right;
          } else if (accept_kw("FULL")) {
            accept_kw("OUTER");
            kind = JoinKind::Full;
          } else if (accept_kw("INNER")) {
            kind = JoinKind::Inner;
          } else if (accept_kw("CROSS")) {
            kind = JoinKind::Cross;
          } else if (is_kw("JOIN")) {
            kind = JoinKind::Inner;
          } else {
            break;
          }
          expect_kw("JOIN");
        }
        RJoin j;
        j.kind = kind;
        j.item = parse_from_item(core);
        if (accept_kw("ON")) {
          j.on = parse_expr();
        } else if (is_kw("USING")) {
          unsupported("JOIN USING", peek().pos);
          core.unsupported.push_back("JOIN USING");
          next();
          skip_balanced();
        }
        core.joins.push_back(std::move(j));
      }
    }
    if (accept_kw("WHERE")) core.where = parse_expr();
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        core.group_by.push_back(parse_expr());
      } while (accept_op(","));
    }
    if (accept_kw("HAVING")) core.having = parse_expr();
    if (is_kw("WINDOW")) {
      unsupported("window function", peek().pos);
      fail("WINDOW clause");
    }
    return core;
  }

  RFrom parse_from_item(RCore& core) {
    RFrom f;
    f.pos = peek().pos;
    if (accept_op("(")) {
      if (!starts_select()) {
        unsupported("parenthesized join", f.pos);
        fail("parenthesized join");
      }
      f.sub = parse_stmt();
      expect_op(")");
    } else {
      f.table = expect_name();
      if (is_op(".")) {
        unsupported("schema-qualified table", f.pos);
        core.unsupported.push_back("schema-qualified table");
        next();
        f.table = expect_name();
      }
      if (is_op("(")) {
        unsupported("table-valued function", f.pos);
        core.unsupported.push_back("table-valued function");
        skip_balanced();
      }
    }
    if (accept_kw("AS")) {
      f.alias = expect_name();
      f.has_alias = true;
    } else if (is_name_token()) {
      f.alias = next().text;
      f.has_alias = true;
    }
    if (is_kw("INDEXED") || (is_kw("NOT") && is_kw("INDEXED", 1))) {
      unsupported("INDEXED BY", peek().pos);
      fail("INDEXED BY");
    }
    return f;
  }

  RExprPtr parse_expr() { return parse_or(); }

  RExprPtr binary(const std::string& op, RExprPtr l, RExprPtr r) {
    auto e = std::make_shared<RExpr>();
    e->kind = RK::Binary;
    e->name = op;
    e->begin = l->begin;
    e->end = r->end;
    e->args = {std::move(l), std::move(r)};
    return e;
  }

  RExprPtr parse_or() {
    RExprPtr l = parse_and();
    while (accept_kw("OR")) l = binary("OR", l, parse_and());
    return l;
  }

  RExprPtr parse_and() {
    RExprPtr l = parse_not();
    while (accept_kw("AND")) l = binary("AND", l, parse_not());
    return l;
  }

  RExprPtr parse_not() {
    size_t begin = peek().pos;
    if (accept_kw("NOT")) {
      RExprPtr inner = parse_not();
      auto e = mk(RK::Not, begin);
      e->args = {inner};
      e->end = inner->end;
      return e;
    }
    return parse_equality();
  }

  RExprPtr parse_equality() {
    RExprPtr l = parse_relational();
    while (true) {
      size_t at = peek().pos;
      if (is_op("=") || is_op("==") || is_op("!=") || is_op("<>")) {
        std::string op = next().text;
        if (op == "==") op = "=";
        if (op == "<>") op = "!=";
        l = binary(op, l, parse_relational());
        continue;
      }
      bool negated = false;
      if (is_kw("NOT") && (is_kw("IN", 1) || is_kw("LIKE", 1) || is_kw("GLOB", 1) ||
                           is_kw("BETWEEN", 1) || is_kw("NULL", 1) || is_kw("REGEXP", 1) ||
                           is_kw("MATCH", 1))) {
        next();
        negated = true;
      }
      if (accept_kw("IS")) {
        bool is_not = accept_kw("NOT");
        if (accept_kw("NULL")) {
          auto e = mk(RK::IsNull, l->begin);
          e->args = {l};
          e->negated = is_not;
          l = e;
        } else {
          accept_kw("DISTINCT") && (expect_kw("FROM"), true);
          RExprPtr r = parse_relational();
          l = mk_unsupported("IS comparison", at);
          l->args = {r};
        }
        continue;
      }
      if (accept_kw("ISNULL") || (negated && accept_kw("NULL"))) {
        auto e = mk(RK::IsNull, l->begin);
        e->args = {l};
        e->negated = negated;
        l = e;
        continue;
      }
      if (accept_kw("NOTNULL")) {
        auto e = mk(RK::IsNull, l->begin);
        e->args = {l};
        e->negated = true;
        l = e;
        continue;
      }
      if (accept_kw("IN")) {
        if (!is_op("(")) {
          l = mk_unsupported("IN table", at);
          next();
          continue;
        }
        next();
        if (starts_select()) {
          RStmtPtr sub = parse_stmt();
          expect_op(")");
          auto e = mk(RK::InSub, l->begin);
          e->args = {l};
          e->sub = sub;
          e->negated = negated;
          l = e;
        } else {
          auto e = std::make_shared<RExpr>();
          e->kind = RK::InList;
          e->begin = l->begin;
          e->args = {l};
          if (!is_op(")")) {
            do {
              e->args.push_back(parse_expr());
            } while (accept_op(","));
          }
          expect_op(")");
          e->end = prev_end();
          e->negated = negated;
          l = e;
        }
        continue;
      }
      if (is_kw("LIKE") || is_kw("GLOB")) {
        bool like = upper(next().text) == "LIKE";
        RExprPtr pat = parse_relational();
        if (accept_kw("ESCAPE")) {
          parse_relational();
          l = mk_unsupported("LIKE ESCAPE", at);
          continue;
        }
        auto e = mk(like ? RK::Like : RK::Glob, l->begin);
        e->args = {l, pat};
        e->negated = negated;
        l = e;
        continue;
      }
      if (accept_kw("BETWEEN")) {
        RExprPtr lo = parse_relational();
        expect_kw("AND");
        RExprPtr hi = parse_relational();
        auto e = mk(RK::Between, l->begin);
        e->args = {l, lo, hi};
        e->negated = negated;
        l = e;
        continue;
      }
      if (accept_kw("REGEXP") || accept_kw("MATCH")) {
        parse_relational();
        l = mk_unsupported("REGEXP/MATCH", at);
        continue;
      }
      if (negated) fail("unexpected NOT");
      break;
    }
    return l;
  }

  RExprPtr parse_relational() {
    RExprPtr l = parse_bitwise();
    while (is_op("<") || is_op("<=") || is_op(">") || is_op(">=")) {
      std::string op = next().text;
      l = binary(op, l, parse_bitwise());
    }
    return l;
  }

  RExprPtr parse_bitwise() {
    RExprPtr l = parse_additive();
    while (is_op("&") || is_op("|") || is_op("<<") || is_op(">>")) {
      size_t at = peek().pos;
      next();
      parse_additive();
      l = mk_unsupported("bitwise operator", at);
    }
    return l;
  }

  RExprPtr parse_additive() {
    RExprPtr l = parse_multiplicative();
    while (is_op("+") || is_op("-")) {
      std::string op = next().text;
      l = binary(op, l, parse_multiplicative());
    }
    return l;
  }

  RExprPtr parse_multiplicative() {
    RExprPtr l = parse_concat();
    while (is_op("*") || is_op("/") || is_op("%")) {
      std::string op = next().text;
      l = binary(op, l, parse_concat());
    }
    return l;
  }

  RExprPtr parse_concat() {
    RExprPtr l = parse_unary();
    while (is_op("||")) {
      size_t at = peek().pos;
      next();
      parse_unary();
      l = mk_unsupported("string concatenation", at);
    }
    return l;
  }

  RExprPtr parse_unary() {
    size_t begin = peek().pos;
    if (accept_op("-")) {
      RExprPtr inner = parse_unary();
      if (inner->kind == RK::Literal && inner->literal.is_int()) {
        if (inner->literal.as_int() == std::numeric_limits<int64_t>::min()) fail("integer overflow");
        inner->literal = Value::integer(-inner->literal.as_int());
        inner->begin = begin;
        return inner;
      }
      if (inner->kind == RK::Literal && inner->literal.is_real()) {
        inner->literal = Value::real(-inner->literal.as_real());
        inner->begin = begin;
        return inner;
      }
      auto e = mk(RK::Neg, begin);
      e->args = {inner};
      e->end = inner->end;
      return e;
    }
    if (accept_op("+")) return parse_unary();
    if (accept_op("~")) {
      parse_unary();
      return mk_unsupported("bitwise operator", begin);
    }
    RExprPtr e = parse_primary();
    if (accept_kw("COLLATE")) {
      next();
      return mk_unsupported("COLLATE", begin);
    }
    return e;
  }

  RExprPtr parse_primary() {
    const Token& t = peek();
    size_t begin = t.pos;
    switch (t.kind) {
      case Tok::Int: {
        next();
        auto e = mk(RK::Literal, begin);
        try {
          e->literal = Value::integer(std::stoll(t.text));
        } catch (const std::out_of_range&) {
          site_.fail(ParseError::Kind::Syntax, "integer literal out of range", begin);
        }
        return e;
      }
      case Tok::Decimal: {
        next();
        auto r = Rational::parse_decimal(t.text);
        if (!r) site_.fail(ParseError::Kind::Unsupported, "decimal literal precision", begin,
                           "numeric literal form");
        auto e = mk(RK::Literal, begin);
        e->literal = Value::real(*r);
        return e;
      }
      case Tok::String: {
        next();
        auto e = mk(RK::Literal, begin);
        e->literal = Value::str(t.text);
        return e;
      }
      case Tok::Op: {
        if (t.text == "(") {
          next();
          if (starts_select()) {
            parse_stmt();
            expect_op(")");
            return mk_unsupported("scalar subquery", begin);
          }
          RExprPtr e = parse_expr();
          if (is_op(",")) {
            while (accept_op(",")) parse_expr();
            expect_op(")");
            return mk_unsupported("row value", begin);
          }
          expect_op(")");
          return e;
        }
        if (t.text == "?" || t.text == ":" || t.text == "@") {
          next();
          if (is_name_token() || peek().kind == Tok::Int) next();
          return mk_unsupported("bound parameter", begin);
        }
        fail("unexpected '" + t.text + "'");
      }
      case Tok::End:
        fail("unexpected end of input");
      case Tok::Ident:
      case Tok::QuotedIdent:
        break;
    }
    std::string up = t.kind == Tok::Ident ? upper(t.text) : "";
    if (up == "NULL") {
      next();
      auto e = mk(RK::Literal, begin);
      return e;
    }
    if (up == "TRUE" || up == "FALSE") {
      next();
      auto e = mk(RK::BoolLit, begin);
      e->bool_value = up == "TRUE";
      return e;
    }
    if (up == "CASE") return parse_case();
    if (up == "CAST") {
      next();
      expect_op("(");
      RExprPtr arg = parse_expr();
      expect_kw("AS");
      std::string type;
      while (peek().kind == Tok::Ident && !is_op(")")) {
        if (!type.empty()) type += " ";
        type += upper(next().text);
      }
      if (type.empty()) fail("expected type name");
      if (is_op("(")) skip_balanced();
      expect_op(")");
      auto e = mk(RK::Cast, begin);
      e->name = type;
      e->args = {arg};
      return e;
    }
    if (up == "EXISTS") {
      next();
      expect_op("(");
      parse_stmt();
      expect_op(")");
      return mk_unsupported("EXISTS", begin);
    }
    if (up == "NOT" || (is_reserved(t) && up != "LEFT" && up != "RIGHT" && up != "GLOB" &&
                        up != "LIKE" && up != "REPLACE")) {
      fail("unexpected keyword " + up);
    }
    if (t.kind == Tok::Ident && is_op("(", 1)) return parse_call();
    std::string first = next().text;
    if (accept_op(".")) {
      std::string second = expect_name();
      if (is_op(".")) {
        next();
        expect_name();
        return mk_unsupported("schema-qualified column", begin);
      }
      auto e = mk(RK::Column, begin);
      e->qualifier = first;
      e->name = second;
      return e;
    }
    auto e = mk(RK::Column, begin);
    e->name = first;
    return e;
  }

  RExprPtr parse_call() {
    size_t begin = peek().pos;
    std::string name = upper(next().text);
    expect_op("(");
    auto e = std::make_shared<RExpr>();
    e->kind = RK::Func;
    e->begin = begin;
    e->name = name;
    if (accept_op("*")) {
      auto star = mk(RK::Star, begin);
      e->args.push_back(star);
    } else if (!is_op(")")) {
      if (accept_kw("DISTINCT")) e->distinct = true;
      do {
        e->args.push_back(parse_expr());
      } while (accept_op(","));
    }
    expect_op(")");
    e->end = prev_end();
    if (is_kw("FILTER")) {
      next();
      skip_balanced();
      return mk_unsupported("aggregate FILTER", begin);
    }
    if (accept_kw("OVER")) {
      if (is_op("(")) {
        skip_balanced();
      } else {
        expect_name();
      }
      return mk_unsupported("window function", begin);
    }
    return e;
  }

  RExprPtr parse_case() {
    size_t begin = peek().pos;
    expect_kw("CASE");
    auto e = std::make_shared<RExpr>();
    e->kind = RK::Case;
    e->begin = begin;
    if (!is_kw("WHEN")) {
      e->has_operand = true;
      e->args.push_back(parse_expr());
    }
    if (!is_kw("WHEN")) fail("expected WHEN");
    while (accept_kw("WHEN")) {
      e->args.push_back(parse_expr());
      expect_kw("THEN");
      e->args.push_back(parse_expr());
    }
    if (accept_kw("ELSE")) {
      e->has_else = true;
      e->args.push_back(parse_expr());
    }
    expect_kw("END");
    e->end = prev_end();
    return e;
  }

  const ErrorSite& site_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  bool tolerant_;
};

// --------------------------------------------------------------- binder

struct ScopeCol {
  std::string qualifier;
  std::string name;
  ExprType type;
};

struct Scope {
  std::vector<ScopeCol> cols;
  const Scope* parent = nullptr;
};

struct CteInfo {
  std::string name;
  int id;
  std::vector<OutColumn> columns;
};

struct ExprCtx {
  const Scope* scope;
  bool allow_agg;
};

std::optional<ExprType> unify_types(ExprType a, ExprType b) {
  if (a == ExprType::Null) return b;
  if (b == ExprType::Null) return a;
  if (a == b) return a;
  auto numeric = [](ExprType t) { return t == ExprType::Int || t == ExprType::Real; };
  if (numeric(a) && numeric(b)) return ExprType::Real;
  return std::nullopt;
}

ExprType type_of_value(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
      return ExprType::Null;
    case ValueKind::Int:
      return ExprType::Int;
    case ValueKind::Real:
      return ExprType::Real;
    case ValueKind::Str:
      return ExprType::Str;
    case ValueKind::Date:
      return ExprType::Date;
  }
  return ExprType::Null;
}

ExprType type_of_column(SqlType t) {
  switch (t) {
    case SqlType::Int:
      return ExprType::Int;
    case SqlType::Str:
      return ExprType::Str;
    case SqlType::Date:
      return ExprType::Date;
  }
  return ExprType::Null;
}

bool raw_has_aggregate(const RExpr& e) {
  if (e.kind == RK::Func) {
    static const std::set<std::string> kAggs = {"COUNT", "SUM", "AVG", "MIN", "MAX"};
    if (kAggs.count(e.name) && (e.args.size() == 1)) return true;
  }
  for (const auto& a : e.args) {
    if (a && raw_has_aggregate(*a)) return true;
  }
  return false;
}

ExprPtr column_ref(int depth, int index, const std::string& qualifier, const std::string& name,
                   ExprType type) {
  return make_expr(ast::ColumnRef{depth, index, qualifier, name}, type);
}

class Binder {
 public:
  Binder(const DatabaseSchema& schema, const ErrorSite& site, bool tolerant)
      : schema_(schema), site_(site), tolerant_(tolerant) {}

  QueryPtr bind_stmt(const RStmt& st, const Scope* outer) {
    size_t saved = ctes_.size();
    std::vector<int> ids;
    std::vector<std::string> names;
    std::vector<QueryPtr> defs;
    for (const auto& [name, def] : st.ctes) {
      QueryPtr q = bind_stmt(*def, outer);
      int id = next_cte_id_++;
      std::vector<OutColumn> cols = q->columns;
      for (auto& c : cols) c.qualifier = to_lower(name);
      ctes_.push_back({to_lower(name), id, cols});
      ids.push_back(id);
      names.push_back(to_lower(name));
      defs.push_back(q);
    }
    QueryPtr body;
    if (st.cores.size() == 1) {
      body = bind_core(st.cores[0], outer, &st.order, st.limit);
    } else {
      body = bind_core(st.cores[0], outer, nullptr, std::nullopt);
      for (size_t i = 1; i < st.cores.size(); ++i) {
        QueryPtr rhs = bind_core(st.cores[i], outer, nullptr, std::nullopt);
        SetOpKind kind = st.ops[i - 1];
        if (rhs->arity() != body->arity()) {
          site_.fail(ParseError::Kind::Syntax,
                     std::string("SELECTs to the left and right of ") + set_op_name(kind) +
                         " do not have the same number of result columns",
                     st.cores[i].pos);
        }
        std::vector<OutColumn> cols = body->columns;
        bool mixed = false;
        for (size_t c = 0; c < cols.size(); ++c) {
          auto t = unify_types(cols[c].type, rhs->columns[c].type);
          if (!t) {
            mixed = true;
          } else {
            cols[c].type = *t;
          }
          cols[c].qualifier.clear();
        }
        body = make_query(ast::SetOp{kind, body, rhs}, cols);
        if (mixed) body = unsupported_query("mixed-type set operation", body, st.cores[i].pos);
      }
      if (!st.order.empty() || st.limit) body = bind_compound_order(st, body);
    }
    if (!defs.empty()) {
      std::vector<OutColumn> cols = body->columns;
      body = make_query(ast::With{ids, names, defs, body}, cols);
    }
    ctes_.resize(saved);
    for (const auto& f : st.unsupported) body = unsupported_query(f, body, st.pos);
    return body;
  }

 private:
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& reason, size_t pos) const {
    site_.fail(kind, reason, pos);
  }

  ExprPtr unsupported_expr(const std::string& feature, size_t pos) const {
    if (!tolerant_) {
      site_.fail(ParseError::Kind::Unsupported, feature + " is outside the supported subset",
                 pos, feature);
    }
    return make_expr(ast::UnsupportedExpr{feature}, ExprType::Null);
  }

  QueryPtr unsupported_query(const std::string& feature, QueryPtr input, size_t pos) const {
    if (!tolerant_) {
      site_.fail(ParseError::Kind::Unsupported, feature + " is outside the supported subset",
                 pos, feature);
    }
    std::vector<OutColumn> cols = input ? input->columns : std::vector<OutColumn>{};
    return make_query(ast::UnsupportedQuery{feature, input}, cols);
  }

  std::string source_text(const RExpr& e) const {
    std::string_view src = site_.src();
    if (e.end > e.begin && e.end <= src.size()) return to_lower(src.substr(e.begin, e.end - e.begin));
    return "expr";
  }

  // ---- FROM

  std::pair<QueryPtr, Scope> bind_from_item(const RFrom& f) {
    QueryPtr q;
    if (f.sub) {
      q = bind_stmt(*f.sub, nullptr);
      std::vector<OutColumn> cols = q->columns;
      std::string alias = f.has_alias ? to_lower(f.alias) : "";
      for (auto& c : cols) c.qualifier = alias;
      q = make_query(ast::Rename{q, alias}, cols);
    } else {
      std::string name = to_lower(f.table);
      const CteInfo* cte = nullptr;
      for (auto it = ctes_.rbegin(); it != ctes_.rend(); ++it) {
        if (it->name == name) {
          cte = &*it;
          break;
        }
      }
      if (cte) {
        q = make_query(ast::CteRef{cte->id, cte->name}, cte->columns);
      } else {
        const TableSchema* t = schema_.find(name);
        if (t == nullptr) fail(ParseError::Kind::UnresolvedName, "no such table: " + f.table, f.pos);
        std::vector<OutColumn> cols;
        for (const auto& c : t->columns) cols.push_back({t->name, c.name, type_of_column(c.type)});
        q = make_query(ast::TableScan{t->name}, cols);
      }
      if (f.has_alias) {
        std::string alias = to_lower(f.alias);
        std::vector<OutColumn> cols = q->columns;
        for (auto& c : cols) c.qualifier = alias;
        q = make_query(ast::Rename{q, alias}, cols);
      }
    }
    Scope s;
    for (const auto& c : q->columns) s.cols.push_back({c.qualifier, c.name, c.type});
    return {q, s};
  }

  std::pair<QueryPtr, Scope> bind_from(const RCore& core, const Scope* outer) {
    auto [q, scope] = bind_from_item(core.first);
    scope.parent = outer;
    for (const auto& j : core.joins) {
      auto [rq, rscope] = bind_from_item(j.item);
      for (const auto& c : rscope.cols) scope.cols.push_back(c);
      std::vector<OutColumn> cols = q->columns;
      cols.insert(cols.end(), rq->columns.begin(), rq->columns.end());
      ExprPtr on;
      JoinKind kind = j.kind;
      if (j.on) {
        on = bind_pred(*j.on, {&scope, false});
        if (kind == JoinKind::Cross) kind = JoinKind::Inner;
      } else if (kind == JoinKind::Inner) {
        kind = JoinKind::Cross;
      }
      q = make_query(ast::Join{kind, q, rq, on}, cols);
    }
    return {q, scope};
  }

  // ---- expressions

  ExprPtr resolve_column(const RExpr& e, const Scope* scope) {
    std::string q = to_lower(e.qualifier);
    std::string n = to_lower(e.name);
    int depth = 0;
    for (const Scope* s = scope; s != nullptr; s = s->parent, ++depth) {
      int found = -1;
      for (size_t i = 0; i < s->cols.size(); ++i) {
        const ScopeCol& c = s->cols[i];
        if (c.name == n && (q.empty() || c.qualifier == q)) {
          if (found >= 0) {
            fail(ParseError::Kind::UnresolvedName,
                 "ambiguous column name: " + (q.empty() ? n : q + "." + n), e.begin);
          }
          found = static_cast<int>(i);
        }
      }
      if (found >= 0) {
        const ScopeCol& c = s->cols[found];
        return column_ref(depth, found, c.qualifier, c.name, c.type);
      }
    }
    fail(ParseError::Kind::UnresolvedName,
         "no such column: " + (q.empty() ? e.name : e.qualifier + "." + e.name), e.begin);
  }

  ExprPtr as_value(ExprPtr e) {
    if (e->type == ExprType::Bool) return make_expr(ast::PredCast{e}, ExprType::Int);
    return e;
  }

  ExprPtr as_pred(ExprPtr e) {
    if (e->type == ExprType::Bool) return e;
    return make_expr(ast::Truth{e}, ExprType::Bool);
  }

  ExprPtr bind_value(const RExpr& e, const ExprCtx& ctx) { return as_value(bind(e, ctx)); }
  ExprPtr bind_pred(const RExpr& e, const ExprCtx& ctx) { return as_pred(bind(e, ctx)); }

  static ExprType arith_type(ExprType a, ExprType b) {
    return (a == ExprType::Real || b == ExprType::Real) ? ExprType::Real : ExprType::Int;
  }

  ExprPtr arith(ArithOp op, ExprPtr l, ExprPtr r) {
    ExprType t = op == ArithOp::Mod ? ExprType::Int : arith_type(l->type, r->type);
    return make_expr(ast::Arith{op, l, r}, t);
  }

  ExprPtr null_literal() { return make_expr(ast::Literal{Value::null()}, ExprType::Null); }

  ExprPtr bind(const RExpr& e, const ExprCtx& ctx) {
    switch (e.kind) {
      case RK::Column:
        return resolve_column(e, ctx.scope);
      case RK::Literal:
        return make_expr(ast::Literal{e.literal}, type_of_value(e.literal));
      case RK::BoolLit:
        return make_expr(ast::BoolLit{e.bool_value}, ExprType::Bool);
      case RK::Star:
        fail(ParseError::Kind::Syntax, "unexpected '*'", e.begin);
      case RK::Unsupported:
        return unsupported_expr(e.feature, e.begin);
      case RK::Neg: {
        ExprPtr inner = bind_value(*e.args[0], ctx);
        return arith(ArithOp::Sub, make_expr(ast::Literal{Value::integer(0)}, ExprType::Int),
                     inner);
      }
      case RK::Not:
        return make_expr(ast::Not{bind_pred(*e.args[0], ctx)}, ExprType::Bool);
      case RK::Binary:
        return bind_binary(e, ctx);
      case RK::Between: {
        ExprPtr x = bind_value(*e.args[0], ctx);
        ExprPtr lo = bind_value(*e.args[1], ctx);
        ExprPtr hi = bind_value(*e.args[2], ctx);
        ExprPtr both = make_expr(
            ast::Logic{LogicOp::And, make_expr(ast::Compare{CmpOp::Ge, x, lo}, ExprType::Bool),
                       make_expr(ast::Compare{CmpOp::Le, x, hi}, ExprType::Bool)},
            ExprType::Bool);
        return e.negated ? make_expr(ast::Not{both}, ExprType::Bool) : both;
      }
      case RK::InList: {
        ExprPtr x = bind_value(*e.args[0], ctx);
        std::vector<ExprPtr> items;
        for (size_t i = 1; i < e.args.size(); ++i) items.push_back(bind_value(*e.args[i], ctx));
        ExprPtr in = make_expr(ast::InList{x, items}, ExprType::Bool);
        return e.negated ? make_expr(ast::Not{in}, ExprType::Bool) : in;
      }
      case RK::InSub: {
        ExprPtr x = bind_value(*e.args[0], ctx);
        QueryPtr sub = bind_stmt(*e.sub, ctx.scope);
        if (sub->arity() != 1) {
          fail(ParseError::Kind::Syntax,
               "sub-select returns " + std::to_string(sub->arity()) + " columns - expected 1",
               e.begin);
        }
        ExprPtr in = make_expr(ast::InQuery{x, sub}, ExprType::Bool);
        return e.negated ? make_expr(ast::Not{in}, ExprType::Bool) : in;
      }
      case RK::IsNull: {
        ExprPtr x = bind_value(*e.args[0], ctx);
        ExprPtr is = make_expr(ast::IsNull{x}, ExprType::Bool);
        return e.negated ? make_expr(ast::Not{is}, ExprType::Bool) : is;
      }
      case RK::Like:
      case RK::Glob:
        return bind_match(e, ctx);
      case RK::Case:
        return bind_case(e, ctx);
      case RK::Cast:
        return bind_cast(e, ctx);
      case RK::Func:
        return bind_func(e, ctx);
    }
    fail(ParseError::Kind::Syntax, "unhandled expression", e.begin);
  }

  ExprPtr bind_binary(const RExpr& e, const ExprCtx& ctx) {
    const std::string& op = e.name;
    if (op == "AND" || op == "OR") {
      ExprPtr l = bind_pred(*e.args[0], ctx);
      ExprPtr r = bind_pred(*e.args[1], ctx);
      return make_expr(ast::Logic{op == "AND" ? LogicOp::And : LogicOp::Or, l, r},
                       ExprType::Bool);
    }
    ExprPtr l = bind_value(*e.args[0], ctx);
    ExprPtr r = bind_value(*e.args[1], ctx);
    static const std::map<std::string, CmpOp> kCmp = {{"=", CmpOp::Eq},  {"!=", CmpOp::Ne},
                                                      {"<", CmpOp::Lt},  {"<=", CmpOp::Le},
                                                      {">", CmpOp::Gt},  {">=", CmpOp::Ge}};
    if (auto it = kCmp.find(op); it != kCmp.end()) {
      return make_expr(ast::Compare{it->second, l, r}, ExprType::Bool);
    }
    static const std::map<std::string, ArithOp> kArith = {{"+", ArithOp::Add},
                                                          {"-", ArithOp::Sub},
                                                          {"*", ArithOp::Mul},
                                                          {"/", ArithOp::Div},
                                                          {"%", ArithOp::Mod}};
    auto it = kArith.find(op);
    if (it == kArith.end()) fail(ParseError::Kind::Syntax, "unknown operator " + op, e.begin);
    return arith(it->second, l, r);
  }

  ExprPtr bind_match(const RExpr& e, const ExprCtx& ctx) {
    bool like = e.kind == RK::Like;
    ExprPtr x = bind_value(*e.args[0], ctx);
    const RExpr& pat = *e.args[1];
    if (pat.kind != RK::Literal || !pat.literal.is_str()) {
      return unsupported_expr(like ? "non-constant LIKE pattern" : "non-constant GLOB pattern",
                              e.begin);
    }
    if (x->type == ExprType::Real) return unsupported_expr("pattern match on a real", e.begin);
    std::string p = pat.literal.as_str();
    ExprPtr m;
    if (like) {
      m = make_expr(ast::StrMatch{MatchKind::Like, p, x}, ExprType::Bool);
    } else {
      auto has_meta = [](std::string_view s) {
        return s.find_first_of("*?[") != std::string_view::npos;
      };
      if (p.size() >= 1 && p.back() == '*' && !has_meta(std::string_view(p).substr(0, p.size() - 1))) {
        m = make_expr(ast::StrMatch{MatchKind::Prefix, p.substr(0, p.size() - 1), x},
                      ExprType::Bool);
      } else if (p.size() >= 1 && p.front() == '*' && !has_meta(std::string_view(p).substr(1))) {
        m = make_expr(ast::StrMatch{MatchKind::Suffix, p.substr(1), x}, ExprType::Bool);
      } else {
        return unsupported_expr("GLOB pattern", e.begin);
      }
    }
    return e.negated ? make_expr(ast::Not{m}, ExprType::Bool) : m;
  }

  ExprPtr bind_case(const RExpr& e, const ExprCtx& ctx) {
    size_t i = 0;
    ExprPtr operand;
    if (e.has_operand) operand = bind_value(*e.args[i++], ctx);
    size_t end = e.args.size() - (e.has_else ? 1 : 0);
    std::vector<ExprPtr> conds, results;
    for (; i + 1 < end + 1 && i < end; i += 2) {
      if (operand) {
        ExprPtr w = bind_value(*e.args[i], ctx);
        conds.push_back(make_expr(ast::Compare{CmpOp::Eq, operand, w}, ExprType::Bool));
      } else {
        conds.push_back(bind_pred(*e.args[i], ctx));
      }
      results.push_back(bind_value(*e.args[i + 1], ctx));
    }
    ExprPtr else_expr = e.has_else ? bind_value(*e.args.back(), ctx) : null_literal();
    std::optional<ExprType> t = else_expr->type;
    for (const auto& r : results) {
      if (t) t = unify_types(*t, r->type);
    }
    if (!t) return unsupported_expr("mixed-type CASE", e.begin);
    return make_expr(ast::Case{conds, results, else_expr}, *t);
  }

  ExprPtr bind_cast(const RExpr& e, const ExprCtx& ctx) {
    ExprPtr x = bind_value(*e.args[0], ctx);
    std::string t = e.name.substr(0, e.name.find(' '));
    if (t == "INT" || t == "INTEGER" || t == "BIGINT" || t == "SMALLINT" || t == "TINYINT") {
      return make_expr(ast::Convert{ConvertKind::ToInt, x}, ExprType::Int);
    }
    if (t == "TEXT" || t == "VARCHAR" || t == "CHAR" || t == "CLOB" || t == "NVARCHAR") {
      if (x->type == ExprType::Real) return unsupported_expr("CAST of a real to TEXT", e.begin);
      return make_expr(ast::Convert{ConvertKind::ToStr, x}, ExprType::Str);
    }
    if (t == "REAL" || t == "FLOAT" || t == "DOUBLE") {
      if (x->type == ExprType::Str || x->type == ExprType::Date) {
        return unsupported_expr("CAST of text to REAL", e.begin);
      }
      return make_expr(ast::Convert{ConvertKind::ToReal, x}, ExprType::Real);
    }
    return unsupported_expr("CAST AS " + e.name, e.begin);
  }

  ExprPtr bind_func(const RExpr& e, const ExprCtx& ctx) {
    const std::string& f = e.name;
    size_t n = e.args.size();
    static const std::map<std::string, AggFunc> kAggs = {{"COUNT", AggFunc::Count},
                                                         {"SUM", AggFunc::Sum},
                                                         {"AVG", AggFunc::Avg},
                                                         {"MIN", AggFunc::Min},
                                                         {"MAX", AggFunc::Max}};
    if (auto it = kAggs.find(f); it != kAggs.end()) {
      if (n != 1) {
        if (f == "MIN" || f == "MAX") return unsupported_expr("scalar " + f, e.begin);
        fail(ParseError::Kind::Syntax, "wrong number of arguments to function " + f, e.begin);
      }
      if (!ctx.allow_agg) fail(ParseError::Kind::Syntax, "misuse of aggregate function " + f, e.begin);
      ExprCtx inner{ctx.scope, false};
      ExprPtr arg;
      if (e.args[0]->kind == RK::Star) {
        if (f != "COUNT" || e.distinct) fail(ParseError::Kind::Syntax, "misuse of '*'", e.begin);
      } else {
        arg = bind_value(*e.args[0], inner);
      }
      ExprType t = ExprType::Int;
      switch (it->second) {
        case AggFunc::Count:
          t = ExprType::Int;
          break;
        case AggFunc::Sum:
          t = arg->type == ExprType::Real ? ExprType::Real : ExprType::Int;
          break;
        case AggFunc::Avg:
          t = ExprType::Real;
          break;
        case AggFunc::Min:
        case AggFunc::Max:
          t = arg->type;
          break;
      }
      return make_expr(ast::Aggregate{it->second, e.distinct, arg}, t);
    }
    if (e.distinct) fail(ParseError::Kind::Syntax, "DISTINCT in non-aggregate function " + f, e.begin);
    auto arity = [&](size_t lo, size_t hi) {
      if (n < lo || n > hi) {
        fail(ParseError::Kind::Syntax, "wrong number of arguments to function " + f, e.begin);
      }
    };
    if (f == "SUBSTR" || f == "SUBSTRING") {
      arity(2, 3);
      ExprPtr s = bind_value(*e.args[0], ctx);
      if (s->type == ExprType::Real) return unsupported_expr("SUBSTR of a real", e.begin);
      ExprPtr start = bind_value(*e.args[1], ctx);
      ExprPtr len = n == 3 ? bind_value(*e.args[2], ctx)
                           : make_expr(ast::Literal{Value::integer(1000000000)}, ExprType::Int);
      return make_expr(ast::SubStr{s, start, len}, ExprType::Str);
    }
    if (f == "STRFTIME") {
      if (n < 2) arity(2, 2);
      if (n > 2) return unsupported_expr("STRFTIME modifier", e.begin);
      const RExpr& fmt = *e.args[0];
      if (fmt.kind != RK::Literal || !fmt.literal.is_str()) {
        return unsupported_expr("non-constant STRFTIME format", e.begin);
      }
      DatePart part;
      const std::string& k = fmt.literal.as_str();
      if (k == "%Y") {
        part = DatePart::Year;
      } else if (k == "%m") {
        part = DatePart::Month;
      } else if (k == "%d") {
        part = DatePart::Day;
      } else {
        return unsupported_expr("STRFTIME format " + k, e.begin);
      }
      ExprPtr arg = bind_value(*e.args[1], ctx);
      if (arg->type == ExprType::Real) return unsupported_expr("STRFTIME of a real", e.begin);
      return make_expr(ast::Strftime{part, arg}, ExprType::Int);
    }
    if (f == "JULIANDAY") {
      if (n > 1) return unsupported_expr("JULIANDAY modifier", e.begin);
      arity(1, 1);
      ExprPtr arg = bind_value(*e.args[0], ctx);
      if (arg->type == ExprType::Real) return unsupported_expr("JULIANDAY of a real", e.begin);
      return make_expr(ast::JulianDay{arg}, ExprType::Real);
    }
    if (f == "DATE") {
      if (n > 1) return unsupported_expr("DATE modifier", e.begin);
      arity(1, 1);
      ExprPtr arg = bind_value(*e.args[0], ctx);
      if (arg->type == ExprType::Real) return unsupported_expr("DATE of a real", e.begin);
      return make_expr(ast::Convert{ConvertKind::ToDate, arg}, ExprType::Date);
    }
    if (f == "IIF") {
      arity(3, 3);
      ExprPtr c = bind_pred(*e.args[0], ctx);
      ExprPtr a = bind_value(*e.args[1], ctx);
      ExprPtr b = bind_value(*e.args[2], ctx);
      auto t = unify_types(a->type, b->type);
      if (!t) return unsupported_expr("mixed-type IIF", e.begin);
      return make_expr(ast::Ite{c, a, b}, *t);
    }
    if (f == "COALESCE" || f == "IFNULL") {
      if (f == "IFNULL") arity(2, 2);
      if (n < 2) arity(2, 2);
      std::vector<ExprPtr> vals;
      for (const auto& a : e.args) vals.push_back(bind_value(*a, ctx));
      std::optional<ExprType> t = ExprType::Null;
      for (const auto& v : vals) {
        if (t) t = unify_types(*t, v->type);
      }
      if (!t) return unsupported_expr("mixed-type COALESCE", e.begin);
      std::vector<ExprPtr> conds, results;
      for (size_t i = 0; i + 1 < vals.size(); ++i) {
        conds.push_back(make_expr(
            ast::Not{make_expr(ast::IsNull{vals[i]}, ExprType::Bool)}, ExprType::Bool));
        results.push_back(vals[i]);
      }
      return make_expr(ast::Case{conds, results, vals.back()}, *t);
    }
    return unsupported_expr("function " + f, e.begin);
  }

  // ---- SELECT cores

  // True when every column reference outside aggregates sits inside a
  // grouping expression.
  bool is_grouped(const ExprPtr& e, const std::vector<std::string>& key_dumps) {
    std::string d = dump(*e);
    if (std::find(key_dumps.begin(), key_dumps.end(), d) != key_dumps.end()) return true;
    if (e->is<ast::Aggregate>()) return true;
    if (const auto* c = e->as<ast::ColumnRef>()) return c->depth > 0;
    bool ok = true;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          auto check = [&](const ExprPtr& x) {
            if (x && !is_grouped(x, key_dumps)) ok = false;
          };
          if constexpr (std::is_same_v<T, ast::Arith> || std::is_same_v<T, ast::Compare> ||
                        std::is_same_v<T, ast::Logic>) {
            check(n.lhs);
            check(n.rhs);
          } else if constexpr (std::is_same_v<T, ast::Ite>) {
            check(n.cond);
            check(n.then_expr);
            check(n.else_expr);
          } else if constexpr (std::is_same_v<T, ast::Case>) {
            for (const auto& x : n.conds) check(x);
            for (const auto& x : n.results) check(x);
            check(n.else_expr);
          } else if constexpr (std::is_same_v<T, ast::SubStr>) {
            check(n.str);
            check(n.start);
            check(n.length);
          } else if constexpr (std::is_same_v<T, ast::Strftime> ||
                               std::is_same_v<T, ast::JulianDay> ||
                               std::is_same_v<T, ast::Convert> || std::is_same_v<T, ast::Truth> ||
                               std::is_same_v<T, ast::IsNull> || std::is_same_v<T, ast::Not> ||
                               std::is_same_v<T, ast::StrMatch>) {
            check(n.arg);
          } else if constexpr (std::is_same_v<T, ast::PredCast>) {
            check(n.pred);
          } else if constexpr (std::is_same_v<T, ast::InList>) {
            check(n.lhs);
            for (const auto& x : n.items) check(x);
          } else if constexpr (std::is_same_v<T, ast::InQuery>) {
            check(n.lhs);
          }
        },
        e->node);
    return ok;
  }

  QueryPtr bind_core(const RCore& core, const Scope* outer, const std::vector<ROrder>* order,
                     std::optional<int64_t> limit) {
    if (!core.has_from) {
      QueryPtr q = unsupported_query("SELECT without FROM", nullptr, core.pos);
      return q;
    }
    auto [src, scope] = bind_from(core, outer);
    if (core.where) {
      ExprPtr p = bind_pred(*core.where, {&scope, false});
      src = make_query(ast::Filter{src, p}, src->columns);
    }
    bool agg_query = !core.group_by.empty() || core.having != nullptr;
    for (const auto& item : core.items) {
      if (item.expr && raw_has_aggregate(*item.expr)) agg_query = true;
    }
    if (order) {
      for (const auto& o : *order) {
        if (raw_has_aggregate(*o.expr)) agg_query = true;
      }
    }
    ExprCtx ctx{&scope, agg_query};

    std::vector<ExprPtr> exprs;
    std::vector<OutColumn> cols;
    std::vector<std::string> aliases;
    for (const auto& item : core.items) {
      if (item.star) {
        std::string q = to_lower(item.star_qualifier);
        bool any = false;
        for (size_t i = 0; i < scope.cols.size(); ++i) {
          const ScopeCol& c = scope.cols[i];
          if (!q.empty() && c.qualifier != q) continue;
          any = true;
          exprs.push_back(column_ref(0, static_cast<int>(i), c.qualifier, c.name, c.type));
          cols.push_back({"", c.name, c.type});
          aliases.push_back("");
        }
        if (!any) fail(ParseError::Kind::UnresolvedName, "no such table: " + item.star_qualifier, item.pos);
        continue;
      }
      ExprPtr e = bind_value(*item.expr, ctx);
      std::string name;
      if (!item.alias.empty()) {
        name = to_lower(item.alias);
      } else if (const auto* c = e->as<ast::ColumnRef>()) {
        name = c->name;
      } else {
        name = source_text(*item.expr);
      }
      exprs.push_back(e);
      cols.push_back({"", name, e->type});
      aliases.push_back(to_lower(item.alias));
    }
    size_t visible = exprs.size();

    std::vector<ExprPtr> keys;
    std::vector<bool> desc;
    if (order) {
      for (const auto& o : *order) {
        int idx = -1;
        const RExpr& r = *o.expr;
        if (r.kind == RK::Literal && r.literal.is_int()) {
          int64_t k = r.literal.as_int();
          if (k < 1 || k > static_cast<int64_t>(visible)) {
            fail(ParseError::Kind::Syntax, "ORDER BY term out of range", r.begin);
          }
          idx = static_cast<int>(k - 1);
        } else if (r.kind == RK::Column && r.qualifier.empty()) {
          std::string n = to_lower(r.name);
          for (size_t i = 0; i < visible; ++i) {
            if (!aliases[i].empty() && aliases[i] == n) {
              idx = static_cast<int>(i);
              break;
            }
          }
        }
        if (idx < 0) {
          ExprPtr e = bind_value(r, ctx);
          std::string d = dump(*e);
          for (size_t i = 0; i < exprs.size(); ++i) {
            if (dump(*exprs[i]) == d) {
              idx = static_cast<int>(i);
              break;
            }
          }
          if (idx < 0) {
            idx = static_cast<int>(exprs.size());
            exprs.push_back(e);
            cols.push_back({"", source_text(r), e->type});
          }
        }
        keys.push_back(column_ref(0, idx, "", cols[idx].name, cols[idx].type));
        desc.push_back(o.desc);
      }
    }
    bool hidden = exprs.size() > visible;

    QueryPtr q;
    bool not_grouped = false;
    if (agg_query) {
      std::vector<ExprPtr> group_keys;
      for (const auto& g : core.group_by) {
        if (g->kind == RK::Literal && g->literal.is_int()) {
          int64_t k = g->literal.as_int();
          if (k < 1 || k > static_cast<int64_t>(visible)) {
            fail(ParseError::Kind::Syntax, "GROUP BY term out of range", g->begin);
          }
          if (contains_aggregate(*exprs[k - 1])) {
            fail(ParseError::Kind::Syntax, "aggregate functions are not allowed in the GROUP BY clause", g->begin);
          }
          group_keys.push_back(exprs[k - 1]);
        } else {
          group_keys.push_back(bind_value(*g, {&scope, false}));
        }
      }
      ExprPtr having;
      if (core.having) having = bind_pred(*core.having, ctx);
      std::vector<std::string> key_dumps;
      for (const auto& k : group_keys) key_dumps.push_back(dump(*k));
      for (const auto& e : exprs) {
        if (!is_grouped(e, key_dumps)) not_grouped = true;
      }
      if (having && !is_grouped(having, key_dumps)) not_grouped = true;
      q = make_query(ast::GroupBy{src, group_keys, exprs, having}, cols);
    } else {
      q = make_query(ast::Project{src, exprs}, cols);
    }
    if (not_grouped) q = unsupported_query("non-aggregated column outside GROUP BY", q, core.pos);
    if (core.distinct) {
      if (hidden) {
        q = unsupported_query("DISTINCT with ORDER BY on a non-selected expression", q, core.pos);
      }
      q = make_query(ast::Distinct{q}, q->columns);
    }
    if (!keys.empty() || limit) {
      q = make_query(ast::OrderBy{q, keys, desc, limit}, q->columns);
    }
    if (hidden) {
      std::vector<ExprPtr> trim;
      std::vector<OutColumn> tcols(cols.begin(), cols.begin() + visible);
      for (size_t i = 0; i < visible; ++i) {
        trim.push_back(column_ref(0, static_cast<int>(i), "", cols[i].name, cols[i].type));
      }
      q = make_query(ast::Project{q, trim}, tcols);
    }
    for (const auto& f : core.unsupported) q = unsupported_query(f, q, core.pos);
    return q;
  }

  QueryPtr bind_compound_order(const RStmt& st, QueryPtr body) {
    std::vector<ExprPtr> keys;
    std::vector<bool> desc;
    for (const auto& o : st.order) {
      const RExpr& r = *o.expr;
      int idx = -1;
      if (r.kind == RK::Literal && r.literal.is_int()) {
        int64_t k = r.literal.as_int();
        if (k < 1 || k > static_cast<int64_t>(body->arity())) {
          fail(ParseError::Kind::Syntax, "ORDER BY term out of range", r.begin);
        }
        idx = static_cast<int>(k - 1);
      } else if (r.kind == RK::Column) {
        std::string n = to_lower(r.name);
        for (size_t i = 0; i < body->arity(); ++i) {
          if (body->columns[i].name == n) {
            idx = static_cast<int>(i);
            break;
          }
        }
      }
      if (idx < 0) {
        return unsupported_query("ORDER BY expression on a compound query", body, r.begin);
      }
      const OutColumn& c = body->columns[idx];
      keys.push_back(column_ref(0, idx, "", c.name, c.type));
      desc.push_back(o.desc);
    }
    return make_query(ast::OrderBy{body, keys, desc, st.limit}, body->columns);
  }

  const DatabaseSchema& schema_;
  const ErrorSite& site_;
  bool tolerant_;
  std::vector<CteInfo> ctes_;
  int next_cte_id_ = 0;
};

}  // namespace

QueryPtr parse_sql(std::string_view text, const DatabaseSchema& schema,
                   const ParseOptions& options) {
  ErrorSite site(text);
  std::vector<Token> toks = lex(text, site);
  SyntaxParser parser(site, std::move(toks), options.tolerant);
  RStmtPtr st = parser.parse_top();
  Binder binder(schema, site, options.tolerant);
  return binder.bind_stmt(*st, nullptr);
}

namespace {

struct FeatureCollector : AstVisitor {
  std::vector<std::string> features;
  void add(const std::string& f) {
    if (std::find(features.begin(), features.end(), f) == features.end()) features.push_back(f);
  }
  void on_expr(const Expr& e) override {
    if (const auto* u = e.as<ast::UnsupportedExpr>()) add(u->feature);
  }
  void on_query(const Query& q) override {
    if (const auto* u = q.as<ast::UnsupportedQuery>()) add(u->feature);
    if (const auto* s = q.as<ast::SetOp>()) {
      if (s->kind == SetOpKind::IntersectAll || s->kind == SetOpKind::ExceptAll) {
        add(set_op_name(s->kind));
      }
    }
  }
};

}  // namespace

SupportReport feature_scan(const Query& q) {
  FeatureCollector c;
  walk(q, c);
  return SupportReport{c.features};
}

SupportReport scan_sql(std::string_view text, const DatabaseSchema& schema) {
  try {
    QueryPtr q = parse_sql(text, schema);
    return feature_scan(*q);
  } catch (const ParseError& e) {
    if (e.kind() != ParseError::Kind::Unsupported) {
      return SupportReport{{std::string(parse_error_kind_name(e.kind())) + ": " + e.reason()}};
    }
  }
  try {
    QueryPtr q = parse_sql(text, schema, ParseOptions{true});
    SupportReport r = feature_scan(*q);
    if (r.unsupported.empty()) r.unsupported.push_back("unknown construct");
    return r;
  } catch (const ParseError& e) {
    std::string f = e.feature().empty() ? e.reason() : e.feature();
    return SupportReport{{f}};
  }
}

namespace {

bool plain_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return reserved_words().count(upper(s)) == 0;
}

std::string ident(const std::string& s) {
  if (plain_identifier(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

[[noreturn]] void not_printable(const std::string& what) {
  throw std::invalid_argument("cannot print " + what + " as SQL");
}

std::string literal_sql(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int:
      return v.as_int() < 0 ? "(" + std::to_string(v.as_int()) + ")" : std::to_string(v.as_int());
    case ValueKind::Real: {
      std::string t = v.as_real().to_string();
      if (t.find('/') != std::string::npos) not_printable("non-decimal real literal");
      if (t.find('.') == std::string::npos) t += ".0";
      return t[0] == '-' ? "(" + t + ")" : t;
    }
    case ValueKind::Date:
      not_printable("date literal");
    default:
      return v.to_string();
  }
}

class Printer {
 public:
  std::string stmt(const Query& q) {
    if (const auto* w = q.as<ast::With>()) {
      std::string out = "WITH ";
      for (size_t i = 0; i < w->defs.size(); ++i) {
        if (i) out += ", ";
        out += ident(w->names[i]) + " AS (" + stmt(*w->defs[i]) + ")";
      }
      return out + " " + stmt(*w->body);
    }
    if (const auto* o = q.as<ast::OrderBy>(); o && o->input->is<ast::SetOp>()) {
      std::string out = compound(*o->input);
      out += order_tail(*o, {});
      return out;
    }
    if (q.is<ast::SetOp>()) return compound(q);
    return core(q);
  }

  std::string expr(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ast::ColumnRef>) {
            return n.qualifier.empty() ? ident(n.name) : ident(n.qualifier) + "." + ident(n.name);
          } else if constexpr (std::is_same_v<T, ast::Literal>) {
            return literal_sql(n.value);
          } else if constexpr (std::is_same_v<T, ast::Arith>) {
            return "(" + expr(*n.lhs) + " " + arith_op_symbol(n.op) + " " + expr(*n.rhs) + ")";
          } else if constexpr (std::is_same_v<T, ast::Ite>) {
            return "IIF(" + expr(*n.cond) + ", " + expr(*n.then_expr) + ", " +
                   expr(*n.else_expr) + ")";
          } else if constexpr (std::is_same_v<T, ast::Case>) {
            std::string out = "CASE";
            for (size_t i = 0; i < n.conds.size(); ++i) {
              out += " WHEN " + expr(*n.conds[i]) + " THEN " + expr(*n.results[i]);
            }
            return out + " ELSE " + expr(*n.else_expr) + " END";
          } else if constexpr (std::is_same_v<T, ast::SubStr>) {
            return "SUBSTR(" + expr(*n.str) + ", " + expr(*n.start) + ", " + expr(*n.length) + ")";
          } else if constexpr (std::is_same_v<T, ast::Strftime>) {
            const char* fmt = n.part == DatePart::Year ? "'%Y'" : n.part == DatePart::Month ? "'%m'" : "'%d'";
            return std::string("STRFTIME(") + fmt + ", " + expr(*n.arg) + ")";
          } else if constexpr (std::is_same_v<T, ast::JulianDay>) {
            return "JULIANDAY(" + expr(*n.arg) + ")";
          } else if constexpr (std::is_same_v<T, ast::Convert>) {
            switch (n.to) {
              case ConvertKind::ToInt:
                return "CAST(" + expr(*n.arg) + " AS INTEGER)";
              case ConvertKind::ToStr:
                return "CAST(" + expr(*n.arg) + " AS TEXT)";
              case ConvertKind::ToReal:
                return "CAST(" + expr(*n.arg) + " AS REAL)";
              case ConvertKind::ToDate:
                return "DATE(" + expr(*n.arg) + ")";
            }
            return "";
          } else if constexpr (std::is_same_v<T, ast::Aggregate>) {
            std::string arg = n.arg ? expr(*n.arg) : "*";
            return std::string(agg_func_name(n.func)) + "(" + (n.distinct ? "DISTINCT " : "") + arg + ")";
          } else if constexpr (std::is_same_v<T, ast::PredCast>) {
            return expr(*n.pred);
          } else if constexpr (std::is_same_v<T, ast::Truth>) {
            return expr(*n.arg);
          } else if constexpr (std::is_same_v<T, ast::BoolLit>) {
            return n.value ? "TRUE" : "FALSE";
          } else if constexpr (std::is_same_v<T, ast::Compare>) {
            return "(" + expr(*n.lhs) + " " + cmp_op_symbol(n.op) + " " + expr(*n.rhs) + ")";
          } else if constexpr (std::is_same_v<T, ast::IsNull>) {
            return "(" + expr(*n.arg) + " IS NULL)";
          } else if constexpr (std::is_same_v<T, ast::InList>) {
            std::string out = "(" + expr(*n.lhs) + " IN (";
            for (size_t i = 0; i < n.items.size(); ++i) {
              if (i) out += ", ";
              out += expr(*n.items[i]);
            }
            return out + "))";
          } else if constexpr (std::is_same_v<T, ast::InQuery>) {
            return "(" + expr(*n.lhs) + " IN (" + stmt(*n.sub) + "))";
          } else if constexpr (std::is_same_v<T, ast::Logic>) {
            return "(" + expr(*n.lhs) + (n.op == LogicOp::And ? " AND " : " OR ") + expr(*n.rhs) + ")";
          } else if constexpr (std::is_same_v<T, ast::Not>) {
            return "(NOT " + expr(*n.arg) + ")";
          } else if constexpr (std::is_same_v<T, ast::StrMatch>) {
            Value p;
            switch (n.kind) {
              case MatchKind::Like:
                return "(" + expr(*n.arg) + " LIKE " + Value::str(n.pattern).to_string() + ")";
              case MatchKind::Prefix:
                p = Value::str(n.pattern + "*");
                break;
              case MatchKind::Suffix:
                p = Value::str("*" + n.pattern);
                break;
            }
            return "(" + expr(*n.arg) + " GLOB " + p.to_string() + ")";
          } else {
            not_printable("unsupported expression '" + n.feature + "'");
          }
        },
        e.node);
  }

 private:
  std::string compound(const Query& q) {
    const auto* s = q.as<ast::SetOp>();
    if (s == nullptr) return core(q);
    if (s->rhs->is<ast::SetOp>()) not_printable("right-nested set operation");
    if (s->kind == SetOpKind::IntersectAll || s->kind == SetOpKind::ExceptAll) {
      not_printable(set_op_name(s->kind));
    }
    return compound(*s->lhs) + " " + set_op_name(s->kind) + " " + core(*s->rhs);
  }

  // Visible ORDER BY keys print as positions, hidden ones as expressions.
  std::string order_tail(const ast::OrderBy& o, const std::vector<std::string>& hidden_text) {
    std::string out;
    for (size_t i = 0; i < o.keys.size(); ++i) {
      out += i == 0 ? " ORDER BY " : ", ";
      const auto* c = o.keys[i]->as<ast::ColumnRef>();
      if (c == nullptr || c->depth != 0) not_printable("ORDER BY key");
      size_t idx = static_cast<size_t>(c->index);
      size_t visible = o.input->arity() - hidden_text.size();
      if (idx < visible) {
        out += std::to_string(idx + 1);
      } else {
        out += hidden_text.at(idx - visible);
      }
      if (o.descending[i]) out += " DESC";
    }
    if (o.limit) out += " LIMIT " + std::to_string(*o.limit);
    return out;
  }

  std::string core(const Query& top) {
    const Query* q = &top;
    size_t visible = q->arity();
    const ast::OrderBy* order = nullptr;
    bool distinct = false;
    if (const auto* p = q->as<ast::Project>(); p && p->input->is<ast::OrderBy>()) {
      for (size_t i = 0; i < p->exprs.size(); ++i) {
        const auto* c = p->exprs[i]->as<ast::ColumnRef>();
        if (c == nullptr || c->depth != 0 || c->index != static_cast<int>(i)) {
          not_printable("projection over ORDER BY");
        }
      }
      visible = p->exprs.size();
      q = p->input.get();
    }
    if (const auto* o = q->as<ast::OrderBy>()) {
      order = o;
      q = o->input.get();
    }
    if (const auto* d = q->as<ast::Distinct>()) {
      distinct = true;
      q = d->input.get();
    }
    const std::vector<ExprPtr>* exprs = nullptr;
    const ast::GroupBy* group = nullptr;
    const Query* input = nullptr;
    if (const auto* p = q->as<ast::Project>()) {
      exprs = &p->exprs;
      input = p->input.get();
    } else if (const auto* g = q->as<ast::GroupBy>()) {
      group = g;
      exprs = &g->exprs;
      input = g->input.get();
    } else {
      not_printable("query shape");
    }
    if (visible > exprs->size()) not_printable("projection width");
    std::string out = distinct ? "SELECT DISTINCT " : "SELECT ";
    for (size_t i = 0; i < visible; ++i) {
      if (i) out += ", ";
      const Expr& e = *(*exprs)[i];
      out += expr(e);
      const std::string& name = q->columns[i].name;
      const auto* c = e.as<ast::ColumnRef>();
      if (c == nullptr || c->name != name) out += " AS " + ident(name);
    }
    const ExprPtr* where = nullptr;
    if (const auto* f = input->as<ast::Filter>()) {
      where = &f->pred;
      input = f->input.get();
    }
    out += " FROM " + from(*input);
    if (where) out += " WHERE " + expr(**where);
    if (group) {
      for (size_t i = 0; i < group->keys.size(); ++i) {
        out += i == 0 ? " GROUP BY " : ", ";
        out += expr(*group->keys[i]);
      }
      if (group->having) out += " HAVING " + expr(*group->having);
    }
    if (order) {
      std::vector<std::string> hidden;
      for (size_t i = visible; i < exprs->size(); ++i) hidden.push_back(expr(*(*exprs)[i]));
      out += order_tail(*order, hidden);
    }
    return out;
  }

  std::string from(const Query& q) {
    if (const auto* j = q.as<ast::Join>()) {
      std::string out = from(*j->lhs);
      if (j->rhs->is<ast::Join>()) not_printable("right-nested join");
      switch (j->kind) {
        case JoinKind::Cross:
          out += " CROSS JOIN ";
          break;
        case JoinKind::Inner:
          out += " INNER JOIN ";
          break;
        default:
          out += std::string(" ") + join_kind_name(j->kind) + " JOIN ";
          break;
      }
      out += from(*j->rhs);
      if (j->on) out += " ON " + expr(*j->on);
      return out;
    }
    if (const auto* t = q.as<ast::TableScan>()) return ident(t->table);
    if (const auto* c = q.as<ast::CteRef>()) return ident(c->name);
    if (const auto* r = q.as<ast::Rename>()) {
      const Query& in = *r->input;
      std::string base;
      if (const auto* t = in.as<ast::TableScan>()) {
        base = ident(t->table);
      } else if (const auto* c = in.as<ast::CteRef>()) {
        base = ident(c->name);
      } else {
        base = "(" + stmt(in) + ")";
      }
      return r->alias.empty() ? base : base + " AS " + ident(r->alias);
    }
    not_printable("FROM item");
  }
};

}  // namespace

std::string to_sql(const Query& q) { return Printer().stmt(q); }
std::string to_sql(const Expr& e) { return Printer().expr(e); }

}  // namespace sqleq
