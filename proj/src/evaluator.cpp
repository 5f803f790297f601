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

#include "sqleq/evaluator.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace sqleq {

namespace {

struct Env {
  const Tuple* row = nullptr;
  // Rows of the current group when evaluating GroupBy outputs.
  const std::vector<const Tuple*>* group = nullptr;
  const Env* parent = nullptr;
};

class Evaluator {
 public:
  explicit Evaluator(const ConcreteDb* db) : db_(db) {}

  Relation query(const Query& q, const Env* outer) {
    return std::visit([&](const auto& n) { return eval(n, q, outer); }, q.node);
  }

  Value value(const Expr& e, const Env& env) {
    return std::visit([&](const auto& n) { return val(n, e, env); }, e.node);
  }

  TriBool pred(const Expr& e, const Env& env) {
    if (e.type != ExprType::Bool) return truthiness(value(e, env));
    if (const auto* b = e.as<ast::BoolLit>()) return tri(b->value);
    if (const auto* c = e.as<ast::Compare>()) {
      return compare(c->op, value(*c->lhs, env), value(*c->rhs, env));
    }
    if (const auto* n = e.as<ast::IsNull>()) return tri(value(*n->arg, env).is_null());
    if (const auto* l = e.as<ast::Logic>()) {
      TriBool a = pred(*l->lhs, env);
      TriBool b = pred(*l->rhs, env);
      return l->op == LogicOp::And ? tri_and(a, b) : tri_or(a, b);
    }
    if (const auto* n = e.as<ast::Not>()) return tri_not(pred(*n->arg, env));
    if (const auto* m = e.as<ast::StrMatch>()) {
      Value v = value(*m->arg, env);
      switch (m->kind) {
        case MatchKind::Like:
          return like_match(m->pattern, v);
        case MatchKind::Prefix:
          return prefix_of(m->pattern, v);
        case MatchKind::Suffix:
          return suffix_of(m->pattern, v);
      }
    }
    if (const auto* in = e.as<ast::InList>()) {
      Value x = value(*in->lhs, env);
      std::vector<Value> items;
      for (const auto& it : in->items) items.push_back(value(*it, env));
      return membership(x, items);
    }
    if (const auto* in = e.as<ast::InQuery>()) {
      Value x = value(*in->lhs, env);
      Relation r = query(*in->sub, &env);
      std::vector<Value> items;
      for (const auto& row : r.rows) items.push_back(row.at(0));
      return membership(x, items);
    }
    if (const auto* t = e.as<ast::Truth>()) return truthiness(value(*t->arg, env));
    if (e.is<ast::UnsupportedExpr>()) throw EvalError("cannot evaluate an unsupported expression");
    throw EvalError("unexpected predicate node");
  }

  std::map<int, Relation> ctes;

 private:
  static TriBool membership(const Value& x, const std::vector<Value>& items) {
    if (items.empty()) return TriBool::False;
    TriBool acc = TriBool::False;
    for (const auto& v : items) acc = tri_or(acc, compare(CmpOp::Eq, x, v));
    return acc;
  }

  // ---- expressions

  Value val(const ast::ColumnRef& c, const Expr&, const Env& env) {
    const Env* e = &env;
    for (int d = 0; d < c.depth; ++d) {
      if (e->parent == nullptr) throw EvalError("dangling outer reference");
      e = e->parent;
    }
    if (e->row == nullptr) return Value::null();
    return e->row->at(static_cast<size_t>(c.index));
  }
  Value val(const ast::Literal& l, const Expr&, const Env&) { return l.value; }
  Value val(const ast::Arith& a, const Expr& e, const Env& env) {
    return arith(a.op, value(*a.lhs, env), value(*a.rhs, env), e.type);
  }
  Value val(const ast::Ite& n, const Expr& e, const Env& env) {
    Value v = pred(*n.cond, env) == TriBool::True ? value(*n.then_expr, env) : value(*n.else_expr, env);
    return coerce_to_type(v, e.type);
  }
  Value val(const ast::Case& n, const Expr& e, const Env& env) {
    for (size_t i = 0; i < n.conds.size(); ++i) {
      if (pred(*n.conds[i], env) == TriBool::True) return coerce_to_type(value(*n.results[i], env), e.type);
    }
    return coerce_to_type(value(*n.else_expr, env), e.type);
  }
  Value val(const ast::SubStr& n, const Expr&, const Env& env) {
    return substr(value(*n.str, env), value(*n.start, env), value(*n.length, env));
  }
  Value val(const ast::Strftime& n, const Expr&, const Env& env) {
    return strftime(n.part, value(*n.arg, env));
  }
  Value val(const ast::JulianDay& n, const Expr&, const Env& env) {
    Value d = cast_to_date(value(*n.arg, env));
    if (d.is_null()) return d;
    return Value::real(julian_day(d));
  }
  Value val(const ast::Convert& n, const Expr&, const Env& env) {
    Value v = value(*n.arg, env);
    switch (n.to) {
      case ConvertKind::ToInt:
        return cast_to_int(v);
      case ConvertKind::ToDate:
        return cast_to_date(v);
      case ConvertKind::ToStr:
        return cast_to_str(v);
      case ConvertKind::ToReal:
        return cast_to_real(v);
    }
    return Value::null();
  }
  Value val(const ast::Aggregate& a, const Expr& e, const Env& env) {
    if (env.group == nullptr) throw EvalError("aggregate outside a grouping context");
    std::vector<Value> vals;
    for (const Tuple* row : *env.group) {
      if (!a.arg) {
        vals.push_back(Value::integer(1));
        continue;
      }
      Env inner{row, nullptr, env.parent};
      Value v = value(*a.arg, inner);
      if (!v.is_null()) vals.push_back(v);
    }
    if (a.distinct) {
      std::vector<Value> uniq;
      std::set<std::string> seen;
      for (auto& v : vals) {
        if (seen.insert(identity_key(v)).second) uniq.push_back(v);
      }
      vals.swap(uniq);
    }
    switch (a.func) {
      case AggFunc::Count:
        return Value::integer(static_cast<int64_t>(vals.size()));
      case AggFunc::Min:
      case AggFunc::Max: {
        if (vals.empty()) return Value::null();
        Value best = vals[0];
        for (const auto& v : vals) {
          int c = sort_compare(v, best);
          if ((a.func == AggFunc::Min && c < 0) || (a.func == AggFunc::Max && c > 0)) best = v;
        }
        return coerce_to_type(best, e.type);
      }
      case AggFunc::Sum:
      case AggFunc::Avg: {
        if (vals.empty()) return Value::null();
        Value acc = Value::integer(0);
        ExprType t = a.func == AggFunc::Avg ? ExprType::Real : e.type;
        for (const auto& v : vals) acc = arith(ArithOp::Add, acc, v, t);
        if (a.func == AggFunc::Sum) return coerce_to_type(acc, e.type);
        return arith(ArithOp::Div, acc, Value::integer(static_cast<int64_t>(vals.size())), ExprType::Real);
      }
    }
    return Value::null();
  }
  Value val(const ast::PredCast& p, const Expr&, const Env& env) {
    switch (pred(*p.pred, env)) {
      case TriBool::True:
        return Value::integer(1);
      case TriBool::False:
        return Value::integer(0);
      case TriBool::Unknown:
        return Value::null();
    }
    return Value::null();
  }
  Value val(const ast::UnsupportedExpr& u, const Expr&, const Env&) {
    throw EvalError("cannot evaluate unsupported construct: " + u.feature);
  }
  // Predicate nodes in value position are not produced by the binder
  // (it inserts PredCast), but handle them for hand-built trees.
  template <typename T>
  Value val(const T&, const Expr& e, const Env& env) {
    switch (pred(e, env)) {
      case TriBool::True:
        return Value::integer(1);
      case TriBool::False:
        return Value::integer(0);
      case TriBool::Unknown:
        return Value::null();
    }
    return Value::null();
  }

  // ---- queries

  Relation eval(const ast::TableScan& t, const Query& q, const Env*) {
    if (db_ == nullptr) throw EvalError("no database");
    const Relation& r = db_->table(t.table);
    if (r.arity != q.arity()) throw EvalError("table '" + t.table + "' has the wrong arity");
    return r;
  }
  Relation eval(const ast::Project& p, const Query& q, const Env* outer) {
    Relation in = query(*p.input, outer);
    Relation out{q.arity(), {}};
    for (const auto& row : in.rows) {
      Env env{&row, nullptr, outer};
      Tuple t;
      for (size_t i = 0; i < p.exprs.size(); ++i) {
        t.push_back(coerce_to_type(value(*p.exprs[i], env), q.columns[i].type));
      }
      out.rows.push_back(std::move(t));
    }
    return out;
  }
  Relation eval(const ast::Filter& f, const Query& q, const Env* outer) {
    Relation in = query(*f.input, outer);
    Relation out{q.arity(), {}};
    for (auto& row : in.rows) {
      Env env{&row, nullptr, outer};
      if (pred(*f.pred, env) == TriBool::True) out.rows.push_back(std::move(row));
    }
    return out;
  }
  Relation eval(const ast::Rename& r, const Query&, const Env* outer) { return query(*r.input, outer); }
  Relation eval(const ast::Distinct& d, const Query&, const Env* outer) {
    return distinct(query(*d.input, outer));
  }
  static Relation distinct(Relation in) {
    Relation out{in.arity, {}};
    std::unordered_set<std::string> seen;
    for (auto& row : in.rows) {
      if (seen.insert(row_identity_key(row)).second) out.rows.push_back(std::move(row));
    }
    return out;
  }
  Relation eval(const ast::SetOp& s, const Query& q, const Env* outer) {
    Relation l = query(*s.lhs, outer);
    Relation r = query(*s.rhs, outer);
    auto coerce = [&](Relation& rel) {
      for (auto& row : rel.rows) {
        for (size_t i = 0; i < row.size(); ++i) row[i] = coerce_to_type(row[i], q.columns[i].type);
      }
    };
    coerce(l);
    coerce(r);
    Relation out{q.arity(), {}};
    switch (s.kind) {
      case SetOpKind::UnionAll:
        out.rows = std::move(l.rows);
        out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
        return out;
      case SetOpKind::Union:
        out.rows = std::move(l.rows);
        out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
        return distinct(std::move(out));
      case SetOpKind::Intersect:
      case SetOpKind::Except: {
        std::unordered_set<std::string> right;
        for (const auto& row : r.rows) right.insert(row_identity_key(row));
        bool keep_present = s.kind == SetOpKind::Intersect;
        for (auto& row : distinct(std::move(l)).rows) {
          if (right.count(row_identity_key(row)) == (keep_present ? 1u : 0u)) out.rows.push_back(row);
        }
        return out;
      }
      case SetOpKind::IntersectAll:
      case SetOpKind::ExceptAll:
        break;
    }
    throw EvalError(std::string("unsupported set operation ") + set_op_name(s.kind));
  }
  Relation eval(const ast::Join& j, const Query& q, const Env* outer) {
    Relation l = query(*j.lhs, outer);
    Relation r = query(*j.rhs, outer);
    Relation out{q.arity(), {}};
    std::vector<char> r_matched(r.rows.size(), 0);
    for (const auto& lr : l.rows) {
      bool matched = false;
      for (size_t i = 0; i < r.rows.size(); ++i) {
        Tuple t = lr;
        t.insert(t.end(), r.rows[i].begin(), r.rows[i].end());
        bool keep = true;
        if (j.on) {
          Env env{&t, nullptr, outer};
          keep = pred(*j.on, env) == TriBool::True;
        }
        if (keep) {
          matched = true;
          r_matched[i] = 1;
          out.rows.push_back(std::move(t));
        }
      }
      if (!matched && (j.kind == JoinKind::Left || j.kind == JoinKind::Full)) {
        Tuple t = lr;
        t.resize(q.arity(), Value::null());
        out.rows.push_back(std::move(t));
      }
    }
    if (j.kind == JoinKind::Right || j.kind == JoinKind::Full) {
      for (size_t i = 0; i < r.rows.size(); ++i) {
        if (r_matched[i]) continue;
        Tuple t(l.arity, Value::null());
        t.insert(t.end(), r.rows[i].begin(), r.rows[i].end());
        out.rows.push_back(std::move(t));
      }
    }
    return out;
  }
  Relation eval(const ast::GroupBy& g, const Query& q, const Env* outer) {
    Relation in = query(*g.input, outer);
    std::vector<std::vector<const Tuple*>> groups;
    if (g.keys.empty()) {
      groups.emplace_back();
      for (const auto& row : in.rows) groups[0].push_back(&row);
    } else {
      std::map<std::string, size_t> index;
      for (const auto& row : in.rows) {
        Env env{&row, nullptr, outer};
        Tuple key;
        for (const auto& k : g.keys) key.push_back(value(*k, env));
        auto [it, fresh] = index.emplace(row_identity_key(key), groups.size());
        if (fresh) groups.emplace_back();
        groups[it->second].push_back(&row);
      }
    }
    Tuple empty_row(in.arity, Value::null());
    Relation out{q.arity(), {}};
    for (const auto& members : groups) {
      const Tuple* rep = members.empty() ? &empty_row : members.front();
      Env env{rep, &members, outer};
      if (g.having && pred(*g.having, env) != TriBool::True) continue;
      Tuple t;
      for (size_t i = 0; i < g.exprs.size(); ++i) {
        t.push_back(coerce_to_type(value(*g.exprs[i], env), q.columns[i].type));
      }
      out.rows.push_back(std::move(t));
    }
    return out;
  }
  Relation eval(const ast::With& w, const Query&, const Env* outer) {
    for (size_t i = 0; i < w.defs.size(); ++i) ctes[w.ids[i]] = query(*w.defs[i], outer);
    return query(*w.body, outer);
  }
  Relation eval(const ast::CteRef& c, const Query&, const Env*) {
    auto it = ctes.find(c.id);
    if (it == ctes.end()) throw EvalError("unbound common table expression '" + c.name + "'");
    return it->second;
  }
  Relation eval(const ast::OrderBy& o, const Query&, const Env* outer) {
    Relation in = query(*o.input, outer);
    std::vector<size_t> idx(in.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<size_t> cols;
    for (const auto& k : o.keys) {
      const auto* c = k->as<ast::ColumnRef>();
      if (c == nullptr || c->depth != 0) throw EvalError("ORDER BY key must be a column");
      cols.push_back(static_cast<size_t>(c->index));
    }
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      const Tuple& x = in.rows[a];
      const Tuple& y = in.rows[b];
      for (size_t i = 0; i < cols.size(); ++i) {
        int c = sort_compare(x[cols[i]], y[cols[i]]);
        if (c != 0) return o.descending[i] ? c > 0 : c < 0;
      }
      return sort_compare_rows(x, y) < 0;
    });
    Relation out{in.arity, {}};
    size_t n = idx.size();
    if (o.limit) n = std::min<size_t>(n, static_cast<size_t>(std::max<int64_t>(0, *o.limit)));
    for (size_t i = 0; i < n; ++i) out.rows.push_back(in.rows[idx[i]]);
    return out;
  }
  Relation eval(const ast::UnsupportedQuery& u, const Query&, const Env*) {
    throw EvalError("cannot evaluate unsupported construct: " + u.feature);
  }

  const ConcreteDb* db_;
};

}  // namespace

Relation eval_query(const ConcreteDb& db, const Query& q) {
  Evaluator ev(&db);
  return ev.query(q, nullptr);
}

Value eval_expr(const Expr& e, const Tuple& row) {
  if (contains_aggregate(e)) throw EvalError("aggregate in a scalar expression");
  Evaluator ev(nullptr);
  Env env{&row, nullptr, nullptr};
  return ev.value(e, env);
}

TriBool eval_pred(const Expr& e, const Tuple& row) {
  if (contains_aggregate(e)) throw EvalError("aggregate in a scalar expression");
  Evaluator ev(nullptr);
  Env env{&row, nullptr, nullptr};
  return ev.pred(e, env);
}

bool same_row_set(const Relation& a, const Relation& b) {
  std::set<std::string> sa, sb;
  for (const auto& r : a.rows) sa.insert(row_identity_key(r));
  for (const auto& r : b.rows) sb.insert(row_identity_key(r));
  return sa == sb;
}

bool is_degenerate_pair(const Relation& a, const Relation& b) {
  auto all_null = [](const Relation& r) {
    if (r.rows.empty()) return false;
    for (const auto& row : r.rows) {
      for (const auto& v : row) {
        if (!v.is_null()) return false;
      }
    }
    return true;
  };
  return (a.rows.empty() && all_null(b)) || (b.rows.empty() && all_null(a));
}

ExOutcome ex_compare(const Query& q1, const Query& q2, const ConcreteDb& db) {
  ExOutcome out;
  try {
    out.r1 = eval_query(db, q1);
    out.r2 = eval_query(db, q2);
  } catch (const std::exception& e) {
    out.ex = 0;
    out.diagnostic = e.what();
    return out;
  }
  out.ex = (q1.arity() == q2.arity() || (out.r1.empty() && out.r2.empty())) &&
                   same_row_set(out.r1, out.r2)
               ? 1
               : 0;
  return out;
}

int ex_metric(const Query& q1, const Query& q2, const ConcreteDb& db) {
  return ex_compare(q1, q2, db).ex;
}

std::string format_relation(const Relation& r, const std::vector<OutColumn>& columns) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header;
  for (const auto& c : columns) header.push_back(c.name);
  cells.push_back(header);
  for (const auto& row : r.rows) {
    std::vector<std::string> line;
    for (const auto& v : row) line.push_back(v.to_string());
    cells.push_back(line);
  }
  std::vector<size_t> width;
  for (const auto& line : cells) {
    if (width.size() < line.size()) width.resize(line.size(), 0);
    for (size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream os;
  for (size_t l = 0; l < cells.size(); ++l) {
    for (size_t i = 0; i < cells[l].size(); ++i) {
      if (i) os << " | ";
      os << cells[l][i];
      if (i + 1 < cells[l].size()) os << std::string(width[i] - cells[l][i].size(), ' ');
    }
    os << "\n";
    if (l == 0) {
      for (size_t i = 0; i < width.size(); ++i) {
        if (i) os << "-+-";
        os << std::string(width[i], '-');
      }
      os << "\n";
    }
  }
  os << "(" << r.rows.size() << (r.rows.size() == 1 ? " row)" : " rows)") << "\n";
  return os.str();
}

}  // namespace sqleq
