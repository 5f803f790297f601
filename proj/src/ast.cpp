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

#include "sqleq/ast.hpp"

#include <sstream>

namespace sqleq {

const char* expr_type_name(ExprType t) {
  switch (t) {
    case ExprType::Null:
      return "null";
    case ExprType::Int:
      return "int";
    case ExprType::Real:
      return "real";
    case ExprType::Str:
      return "str";
    case ExprType::Date:
      return "date";
    case ExprType::Bool:
      return "bool";
  }
  return "?";
}

const char* arith_op_symbol(ArithOp op) {
  switch (op) {
    case ArithOp::Add:
      return "+";
    case ArithOp::Sub:
      return "-";
    case ArithOp::Mul:
      return "*";
    case ArithOp::Div:
      return "/";
    case ArithOp::Mod:
      return "%";
  }
  return "?";
}

const char* cmp_op_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Eq:
      return "=";
    case CmpOp::Ne:
      return "!=";
    case CmpOp::Lt:
      return "<";
    case CmpOp::Le:
      return "<=";
    case CmpOp::Gt:
      return ">";
    case CmpOp::Ge:
      return ">=";
  }
  return "?";
}

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::Lt:
      return CmpOp::Gt;
    case CmpOp::Le:
      return CmpOp::Ge;
    case CmpOp::Gt:
      return CmpOp::Lt;
    case CmpOp::Ge:
      return CmpOp::Le;
    default:
      return op;
  }
}

const char* agg_func_name(AggFunc f) {
  switch (f) {
    case AggFunc::Count:
      return "COUNT";
    case AggFunc::Min:
      return "MIN";
    case AggFunc::Max:
      return "MAX";
    case AggFunc::Sum:
      return "SUM";
    case AggFunc::Avg:
      return "AVG";
  }
  return "?";
}

const char* set_op_name(SetOpKind k) {
  switch (k) {
    case SetOpKind::Union:
      return "UNION";
    case SetOpKind::UnionAll:
      return "UNION ALL";
    case SetOpKind::Intersect:
      return "INTERSECT";
    case SetOpKind::Except:
      return "EXCEPT";
    case SetOpKind::IntersectAll:
      return "INTERSECT ALL";
    case SetOpKind::ExceptAll:
      return "EXCEPT ALL";
  }
  return "?";
}

const char* join_kind_name(JoinKind k) {
  switch (k) {
    case JoinKind::Inner:
      return "INNER";
    case JoinKind::Left:
      return "LEFT";
    case JoinKind::Right:
      return "RIGHT";
    case JoinKind::Full:
      return "FULL";
    case JoinKind::Cross:
      return "CROSS";
  }
  return "?";
}

bool is_predicate(const Expr& e) { return e.type == ExprType::Bool; }

namespace {

struct AggFinder : AstVisitor {
  bool found = false;
  void on_expr(const Expr& e) override {
    if (e.is<ast::Aggregate>()) found = true;
  }
};

// Walks expressions only, not into subqueries: an aggregate inside an
// IN-subquery belongs to that subquery.
void walk_shallow(const Expr& e, AstVisitor& v);

template <typename F>
void for_each_child(const Expr& e, F&& f) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::Arith> || std::is_same_v<T, ast::Compare> ||
                      std::is_same_v<T, ast::Logic>) {
          f(*n.lhs);
          f(*n.rhs);
        } else if constexpr (std::is_same_v<T, ast::Ite>) {
          f(*n.cond);
          f(*n.then_expr);
          f(*n.else_expr);
        } else if constexpr (std::is_same_v<T, ast::Case>) {
          for (size_t i = 0; i < n.conds.size(); ++i) {
            f(*n.conds[i]);
            f(*n.results[i]);
          }
          f(*n.else_expr);
        } else if constexpr (std::is_same_v<T, ast::SubStr>) {
          f(*n.str);
          f(*n.start);
          f(*n.length);
        } else if constexpr (std::is_same_v<T, ast::Strftime> ||
                             std::is_same_v<T, ast::JulianDay> ||
                             std::is_same_v<T, ast::Convert> ||
                             std::is_same_v<T, ast::Truth> ||
                             std::is_same_v<T, ast::IsNull> || std::is_same_v<T, ast::Not> ||
                             std::is_same_v<T, ast::StrMatch>) {
          f(*n.arg);
        } else if constexpr (std::is_same_v<T, ast::Aggregate>) {
          if (n.arg) f(*n.arg);
        } else if constexpr (std::is_same_v<T, ast::PredCast>) {
          f(*n.pred);
        } else if constexpr (std::is_same_v<T, ast::InList>) {
          f(*n.lhs);
          for (const auto& it : n.items) f(*it);
        } else if constexpr (std::is_same_v<T, ast::InQuery>) {
          f(*n.lhs);
        }
      },
      e.node);
}

void walk_shallow(const Expr& e, AstVisitor& v) {
  v.on_expr(e);
  for_each_child(e, [&](const Expr& c) { walk_shallow(c, v); });
}

void dump_expr(const Expr& e, std::ostream& os);
void dump_query(const Query& q, std::ostream& os);

void dump_opt(const ExprPtr& e, std::ostream& os) {
  if (e) {
    dump_expr(*e, os);
  } else {
    os << "_";
  }
}

void dump_list(const std::vector<ExprPtr>& es, std::ostream& os) {
  os << "[";
  for (size_t i = 0; i < es.size(); ++i) {
    if (i) os << " ";
    dump_expr(*es[i], os);
  }
  os << "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void dump_expr(const Expr& e, std::ostream& os) {
  os << "(";
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::ColumnRef>) {
          os << "col " << n.depth << " " << n.index;
        } else if constexpr (std::is_same_v<T, ast::Literal>) {
          os << "lit " << value_kind_name(n.value.kind()) << " " << quoted(n.value.to_string());
        } else if constexpr (std::is_same_v<T, ast::Arith>) {
          os << "arith " << arith_op_symbol(n.op) << " ";
          dump_expr(*n.lhs, os);
          os << " ";
          dump_expr(*n.rhs, os);
        } else if constexpr (std::is_same_v<T, ast::Ite>) {
          os << "ite ";
          dump_expr(*n.cond, os);
          os << " ";
          dump_expr(*n.then_expr, os);
          os << " ";
          dump_expr(*n.else_expr, os);
        } else if constexpr (std::is_same_v<T, ast::Case>) {
          os << "case ";
          dump_list(n.conds, os);
          os << " ";
          dump_list(n.results, os);
          os << " ";
          dump_expr(*n.else_expr, os);
        } else if constexpr (std::is_same_v<T, ast::SubStr>) {
          os << "substr ";
          dump_expr(*n.str, os);
          os << " ";
          dump_expr(*n.start, os);
          os << " ";
          dump_expr(*n.length, os);
        } else if constexpr (std::is_same_v<T, ast::Strftime>) {
          os << "strftime " << static_cast<int>(n.part) << " ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::JulianDay>) {
          os << "julianday ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::Convert>) {
          os << "convert " << static_cast<int>(n.to) << " ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::Aggregate>) {
          os << "agg " << agg_func_name(n.func) << (n.distinct ? " distinct " : " ");
          dump_opt(n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::PredCast>) {
          os << "predcast ";
          dump_expr(*n.pred, os);
        } else if constexpr (std::is_same_v<T, ast::Truth>) {
          os << "truth ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::BoolLit>) {
          os << "bool " << (n.value ? "true" : "false");
        } else if constexpr (std::is_same_v<T, ast::Compare>) {
          os << "cmp " << cmp_op_symbol(n.op) << " ";
          dump_expr(*n.lhs, os);
          os << " ";
          dump_expr(*n.rhs, os);
        } else if constexpr (std::is_same_v<T, ast::IsNull>) {
          os << "isnull ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::InList>) {
          os << "inlist ";
          dump_expr(*n.lhs, os);
          os << " ";
          dump_list(n.items, os);
        } else if constexpr (std::is_same_v<T, ast::InQuery>) {
          os << "inquery ";
          dump_expr(*n.lhs, os);
          os << " ";
          dump_query(*n.sub, os);
        } else if constexpr (std::is_same_v<T, ast::Logic>) {
          os << (n.op == LogicOp::And ? "and " : "or ");
          dump_expr(*n.lhs, os);
          os << " ";
          dump_expr(*n.rhs, os);
        } else if constexpr (std::is_same_v<T, ast::Not>) {
          os << "not ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::StrMatch>) {
          os << "match " << static_cast<int>(n.kind) << " " << quoted(n.pattern) << " ";
          dump_expr(*n.arg, os);
        } else if constexpr (std::is_same_v<T, ast::UnsupportedExpr>) {
          os << "unsupported " << quoted(n.feature);
        }
      },
      e.node);
  os << " :" << expr_type_name(e.type) << ")";
}

void dump_query(const Query& q, std::ostream& os) {
  os << "{";
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::TableScan>) {
          os << "scan " << n.table;
        } else if constexpr (std::is_same_v<T, ast::Project>) {
          os << "project ";
          dump_list(n.exprs, os);
          os << " ";
          dump_query(*n.input, os);
        } else if constexpr (std::is_same_v<T, ast::Filter>) {
          os << "filter ";
          dump_expr(*n.pred, os);
          os << " ";
          dump_query(*n.input, os);
        } else if constexpr (std::is_same_v<T, ast::Rename>) {
          os << "rename " << quoted(n.alias) << " ";
          dump_query(*n.input, os);
        } else if constexpr (std::is_same_v<T, ast::SetOp>) {
          os << "setop " << quoted(set_op_name(n.kind)) << " ";
          dump_query(*n.lhs, os);
          os << " ";
          dump_query(*n.rhs, os);
        } else if constexpr (std::is_same_v<T, ast::Distinct>) {
          os << "distinct ";
          dump_query(*n.input, os);
        } else if constexpr (std::is_same_v<T, ast::Join>) {
          os << "join " << join_kind_name(n.kind) << " ";
          dump_opt(n.on, os);
          os << " ";
          dump_query(*n.lhs, os);
          os << " ";
          dump_query(*n.rhs, os);
        } else if constexpr (std::is_same_v<T, ast::GroupBy>) {
          os << "groupby ";
          dump_list(n.keys, os);
          os << " ";
          dump_list(n.exprs, os);
          os << " ";
          dump_opt(n.having, os);
          os << " ";
          dump_query(*n.input, os);
        } else if constexpr (std::is_same_v<T, ast::With>) {
          os << "with";
          for (size_t i = 0; i < n.defs.size(); ++i) {
            os << " " << n.ids[i] << " " << quoted(n.names[i]) << " ";
            dump_query(*n.defs[i], os);
          }
          os << " ";
          dump_query(*n.body, os);
        } else if constexpr (std::is_same_v<T, ast::CteRef>) {
          os << "cte " << n.id;
        } else if constexpr (std::is_same_v<T, ast::OrderBy>) {
          os << "orderby ";
          dump_list(n.keys, os);
          os << " [";
          for (bool d : n.descending) os << (d ? "d" : "a");
          os << "] " << (n.limit ? std::to_string(*n.limit) : std::string("_")) << " ";
          dump_query(*n.input, os);
        } else if constexpr (std::is_same_v<T, ast::UnsupportedQuery>) {
          os << "unsupported " << quoted(n.feature);
          if (n.input) {
            os << " ";
            dump_query(*n.input, os);
          }
        }
      },
      q.node);
  os << " :[";
  for (size_t i = 0; i < q.columns.size(); ++i) {
    if (i) os << " ";
    os << expr_type_name(q.columns[i].type);
  }
  os << "]}";
}

void walk_query(const Query& q, AstVisitor& v);

void walk_expr(const Expr& e, AstVisitor& v) {
  v.on_expr(e);
  if (const auto* in = e.as<ast::InQuery>()) walk_query(*in->sub, v);
  for_each_child(e, [&](const Expr& c) { walk_expr(c, v); });
}

void walk_exprs(const std::vector<ExprPtr>& es, AstVisitor& v) {
  for (const auto& e : es) walk_expr(*e, v);
}

void walk_query(const Query& q, AstVisitor& v) {
  v.on_query(q);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::Project>) {
          walk_query(*n.input, v);
          walk_exprs(n.exprs, v);
        } else if constexpr (std::is_same_v<T, ast::Filter>) {
          walk_query(*n.input, v);
          walk_expr(*n.pred, v);
        } else if constexpr (std::is_same_v<T, ast::Rename> ||
                             std::is_same_v<T, ast::Distinct>) {
          walk_query(*n.input, v);
        } else if constexpr (std::is_same_v<T, ast::UnsupportedQuery>) {
          if (n.input) walk_query(*n.input, v);
        } else if constexpr (std::is_same_v<T, ast::SetOp>) {
          walk_query(*n.lhs, v);
          walk_query(*n.rhs, v);
        } else if constexpr (std::is_same_v<T, ast::Join>) {
          walk_query(*n.lhs, v);
          walk_query(*n.rhs, v);
          if (n.on) walk_expr(*n.on, v);
        } else if constexpr (std::is_same_v<T, ast::GroupBy>) {
          walk_query(*n.input, v);
          walk_exprs(n.keys, v);
          walk_exprs(n.exprs, v);
          if (n.having) walk_expr(*n.having, v);
        } else if constexpr (std::is_same_v<T, ast::With>) {
          for (const auto& d : n.defs) walk_query(*d, v);
          walk_query(*n.body, v);
        } else if constexpr (std::is_same_v<T, ast::OrderBy>) {
          walk_query(*n.input, v);
          walk_exprs(n.keys, v);
        }
      },
      q.node);
}

}  // namespace

bool contains_aggregate(const Expr& e) {
  AggFinder f;
  walk_shallow(e, f);
  return f.found;
}

std::string dump(const Expr& e) {
  std::ostringstream os;
  dump_expr(e, os);
  return os.str();
}

std::string dump(const Query& q) {
  std::ostringstream os;
  dump_query(q, os);
  return os.str();
}

bool structurally_equal(const Query& a, const Query& b) { return dump(a) == dump(b); }
bool structurally_equal(const Expr& a, const Expr& b) { return dump(a) == dump(b); }

void walk(const Query& q, AstVisitor& v) { walk_query(q, v); }
void walk(const Expr& e, AstVisitor& v) { walk_expr(e, v); }

}  // namespace sqleq
