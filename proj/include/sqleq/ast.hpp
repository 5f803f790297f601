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

// Query and expression trees. Nodes are immutable and shared.
//
// Column references are positional: ColumnRef{depth, index} names column
// `index` of the tuple flowing into the operator that owns the expression
// (depth 0), or of an enclosing query's tuple for correlated subqueries
// (depth >= 1).

#ifndef SQLEQ_AST_HPP_
#define SQLEQ_AST_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sqleq/value.hpp"

namespace sqleq {

// Static type of an expression. Null is the type of the bare NULL literal;
// Bool is the type of predicates.
enum class ExprType { Null, Int, Real, Str, Date, Bool };

const char* expr_type_name(ExprType t);

enum class ArithOp { Add, Sub, Mul, Div, Mod };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class LogicOp { And, Or };
enum class DatePart { Year, Month, Day };
enum class ConvertKind { ToInt, ToDate, ToStr, ToReal };
enum class AggFunc { Count, Min, Max, Sum, Avg };
enum class MatchKind { Prefix, Suffix, Like };
enum class JoinKind { Inner, Left, Right, Full, Cross };
// IntersectAll and ExceptAll are reserved: no surface syntax maps to them
// and the verifier reports them as unsupported.
enum class SetOpKind { Union, UnionAll, Intersect, Except, IntersectAll, ExceptAll };

const char* arith_op_symbol(ArithOp op);
const char* cmp_op_symbol(CmpOp op);
CmpOp flip(CmpOp op);  // a op b  <=>  b flip(op) a
const char* agg_func_name(AggFunc f);
const char* set_op_name(SetOpKind k);
const char* join_kind_name(JoinKind k);

struct Expr;
struct Query;
using ExprPtr = std::shared_ptr<const Expr>;
using QueryPtr = std::shared_ptr<const Query>;

namespace ast {

struct ColumnRef {
  int depth = 0;
  int index = 0;
  std::string qualifier;
  std::string name;
};
struct Literal {
  Value value;
};
struct Arith {
  ArithOp op;
  ExprPtr lhs, rhs;
};
struct Ite {
  ExprPtr cond, then_expr, else_expr;
};
struct Case {
  std::vector<ExprPtr> conds;
  std::vector<ExprPtr> results;
  ExprPtr else_expr;
};
struct SubStr {
  ExprPtr str, start, length;
};
struct Strftime {
  DatePart part;
  ExprPtr arg;
};
struct JulianDay {
  ExprPtr arg;
};
struct Convert {
  ConvertKind to;
  ExprPtr arg;
};
struct Aggregate {
  AggFunc func;
  bool distinct = false;
  ExprPtr arg;  // null for COUNT(*)
};
// A predicate used as a value: 1, 0 or NULL.
struct PredCast {
  ExprPtr pred;
};
// A value used as a predicate: true iff ToInt(v) (or the real) is nonzero.
struct Truth {
  ExprPtr arg;
};
struct BoolLit {
  bool value;
};
struct Compare {
  CmpOp op;
  ExprPtr lhs, rhs;
};
struct IsNull {
  ExprPtr arg;
};
struct InList {
  ExprPtr lhs;
  std::vector<ExprPtr> items;
};
struct InQuery {
  ExprPtr lhs;
  QueryPtr sub;
};
struct Logic {
  LogicOp op;
  ExprPtr lhs, rhs;
};
struct Not {
  ExprPtr arg;
};
struct StrMatch {
  MatchKind kind;
  std::string pattern;
  ExprPtr arg;
};
// Placeholder left by a tolerant parse for a construct outside the subset.
struct UnsupportedExpr {
  std::string feature;
};

using ExprNode =
    std::variant<ColumnRef, Literal, Arith, Ite, Case, SubStr, Strftime, JulianDay,
                 Convert, Aggregate, PredCast, Truth, BoolLit, Compare, IsNull, InList,
                 InQuery, Logic, Not, StrMatch, UnsupportedExpr>;

struct TableScan {
  std::string table;
};
struct Project {
  QueryPtr input;
  std::vector<ExprPtr> exprs;
};
struct Filter {
  QueryPtr input;
  ExprPtr pred;
};
struct Rename {
  QueryPtr input;
  std::string alias;
};
struct SetOp {
  SetOpKind kind;
  QueryPtr lhs, rhs;
};
struct Distinct {
  QueryPtr input;
};
struct Join {
  JoinKind kind;
  QueryPtr lhs, rhs;
  ExprPtr on;  // null for cross joins
};
// Empty `keys` means one group over the whole input (always one output row).
struct GroupBy {
  QueryPtr input;
  std::vector<ExprPtr> keys;
  std::vector<ExprPtr> exprs;
  ExprPtr having;  // may be null
};
struct With {
  std::vector<int> ids;
  std::vector<std::string> names;
  std::vector<QueryPtr> defs;
  QueryPtr body;
};
struct CteRef {
  int id;
  std::string name;
};
// Keys are column refs into the input. No limit means a pure sort.
struct OrderBy {
  QueryPtr input;
  std::vector<ExprPtr> keys;
  std::vector<bool> descending;
  std::optional<int64_t> limit;
};
// Placeholder left by a tolerant parse; `input` is the part that did bind
// (may be null).
struct UnsupportedQuery {
  std::string feature;
  QueryPtr input;
};

using QueryNode = std::variant<TableScan, Project, Filter, Rename, SetOp, Distinct, Join,
                               GroupBy, With, CteRef, OrderBy, UnsupportedQuery>;

}  // namespace ast

struct Expr {
  ast::ExprNode node;
  ExprType type = ExprType::Null;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

struct OutColumn {
  std::string qualifier;
  std::string name;
  ExprType type = ExprType::Null;
};

struct Query {
  ast::QueryNode node;
  std::vector<OutColumn> columns;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
  size_t arity() const { return columns.size(); }
};

template <typename T>
ExprPtr make_expr(T node, ExprType type) {
  return std::make_shared<const Expr>(Expr{ast::ExprNode(std::move(node)), type});
}

template <typename T>
QueryPtr make_query(T node, std::vector<OutColumn> columns) {
  return std::make_shared<const Query>(Query{ast::QueryNode(std::move(node)), std::move(columns)});
}

bool is_predicate(const Expr& e);
bool contains_aggregate(const Expr& e);

// Unambiguous dump including positions and types; two trees are
// structurally identical iff their dumps are equal.
std::string dump(const Expr& e);
std::string dump(const Query& q);

bool structurally_equal(const Query& a, const Query& b);
bool structurally_equal(const Expr& a, const Expr& b);

// Visits every sub-expression and sub-query (pre-order).
struct AstVisitor {
  virtual ~AstVisitor() = default;
  virtual void on_expr(const Expr&) {}
  virtual void on_query(const Query&) {}
};
void walk(const Query& q, AstVisitor& v);
void walk(const Expr& e, AstVisitor& v);

}  // namespace sqleq

#endif  // SQLEQ_AST_HPP_
