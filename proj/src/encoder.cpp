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

#include "sqleq/encoder.hpp"

#include <cctype>

namespace sqleq {

namespace {

struct Member {
  const SymTuple* row;
  z3::expr flag;
};

struct Env {
  const SymTuple* row = nullptr;
  const std::vector<Member>* group = nullptr;
  const Env* parent = nullptr;
};

bool is_numeric_type(ExprType t) { return t == ExprType::Int || t == ExprType::Real; }

// Mirrors str_to_int below: an optional '-' then decimal digits.
std::optional<int64_t> literal_int(const std::string& s) {
  size_t i = !s.empty() && s[0] == '-' ? 1 : 0;
  if (i == s.size() || s.size() - i > 18) return std::nullopt;
  for (size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
  }
  int64_t v = std::stoll(s.substr(i));
  return i ? -v : v;
}

// Smallest valid date whose ISO text is >= c; ISO text order is date order.
std::optional<Date> first_date_not_below(const std::string& c) {
  auto ge = [&](int64_t y, int64_t m, int64_t d) { return format_date(Date{y, m, d}) >= c; };
  if (!ge(kMaxYear, 12, 31)) return std::nullopt;
  int64_t lo = kMinYear, hi = kMaxYear;
  while (lo < hi) {
    int64_t mid = lo + (hi - lo) / 2;
    if (ge(mid, 12, 31)) hi = mid; else lo = mid + 1;
  }
  int64_t m = 1;
  while (!ge(lo, m, days_in_month(lo, m))) ++m;
  int64_t d = 1;
  while (!ge(lo, m, d)) ++d;
  return Date{lo, m, d};
}

// True when some column reference inside `q` escapes it.
struct EscapeFinder {
  bool escapes = false;

  void query(const Query& q, int level) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ast::Project>) {
            query(*n.input, level);
            for (const auto& e : n.exprs) expr(*e, level);
          } else if constexpr (std::is_same_v<T, ast::Filter>) {
            query(*n.input, level);
            expr(*n.pred, level);
          } else if constexpr (std::is_same_v<T, ast::Rename> || std::is_same_v<T, ast::Distinct> ||
                               std::is_same_v<T, ast::OrderBy>) {
            query(*n.input, level);
          } else if constexpr (std::is_same_v<T, ast::SetOp>) {
            query(*n.lhs, level);
            query(*n.rhs, level);
          } else if constexpr (std::is_same_v<T, ast::Join>) {
            query(*n.lhs, level);
            query(*n.rhs, level);
            if (n.on) expr(*n.on, level);
          } else if constexpr (std::is_same_v<T, ast::GroupBy>) {
            query(*n.input, level);
            for (const auto& e : n.keys) expr(*e, level);
            for (const auto& e : n.exprs) expr(*e, level);
            if (n.having) expr(*n.having, level);
          } else if constexpr (std::is_same_v<T, ast::With>) {
            for (const auto& d : n.defs) query(*d, level);
            query(*n.body, level);
          } else if constexpr (std::is_same_v<T, ast::UnsupportedQuery>) {
            if (n.input) query(*n.input, level);
          }
        },
        q.node);
  }

  void expr(const Expr& e, int level) {
    if (const auto* c = e.as<ast::ColumnRef>()) {
      if (c->depth > level) escapes = true;
      return;
    }
    if (const auto* in = e.as<ast::InQuery>()) {
      expr(*in->lhs, level);
      query(*in->sub, level + 1);
      return;
    }
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ast::Arith> || std::is_same_v<T, ast::Compare> ||
                        std::is_same_v<T, ast::Logic>) {
            expr(*n.lhs, level);
            expr(*n.rhs, level);
          } else if constexpr (std::is_same_v<T, ast::Ite>) {
            expr(*n.cond, level);
            expr(*n.then_expr, level);
            expr(*n.else_expr, level);
          } else if constexpr (std::is_same_v<T, ast::Case>) {
            for (const auto& x : n.conds) expr(*x, level);
            for (const auto& x : n.results) expr(*x, level);
            expr(*n.else_expr, level);
          } else if constexpr (std::is_same_v<T, ast::SubStr>) {
            expr(*n.str, level);
            expr(*n.start, level);
            expr(*n.length, level);
          } else if constexpr (std::is_same_v<T, ast::Strftime> || std::is_same_v<T, ast::JulianDay> ||
                               std::is_same_v<T, ast::Convert> || std::is_same_v<T, ast::Truth> ||
                               std::is_same_v<T, ast::IsNull> || std::is_same_v<T, ast::Not> ||
                               std::is_same_v<T, ast::StrMatch>) {
            expr(*n.arg, level);
          } else if constexpr (std::is_same_v<T, ast::Aggregate>) {
            if (n.arg) expr(*n.arg, level);
          } else if constexpr (std::is_same_v<T, ast::PredCast>) {
            expr(*n.pred, level);
          } else if constexpr (std::is_same_v<T, ast::InList>) {
            expr(*n.lhs, level);
            for (const auto& x : n.items) expr(*x, level);
          }
        },
        e.node);
  }
};

bool is_correlated(const Query& sub) {
  EscapeFinder f;
  f.query(sub, 1);
  return f.escapes;
}

}  // namespace

struct Encoder::Impl {
  Impl(z3::context& c, EncodeOptions o) : ctx(c), opts(std::move(o)) {}

  z3::context& ctx;
  EncodeOptions opts;
  std::vector<z3::expr> constraints;
  const SymDb* db = nullptr;
  std::map<int, SymRelation> ctes;
  std::map<const Query*, SymRelation> uncorrelated;
  int fresh_id = 0;

  // ---- helpers

  z3::expr tt() { return ctx.bool_val(true); }
  z3::expr ff() { return ctx.bool_val(false); }
  z3::expr ival(int64_t v) { return ctx.int_val(v); }
  z3::expr sval(const std::string& s) { return ctx.string_val(s.data(), static_cast<unsigned>(s.size())); }
  std::string fresh(const std::string& base) { return base + "!" + std::to_string(fresh_id++); }

  z3::expr str_lt(const z3::expr& a, const z3::expr& b) {
    Z3_ast r = Z3_mk_str_lt(ctx, a, b);
    ctx.check_error();
    return z3::expr(ctx, r);
  }

  z3::expr allchar() {
    z3::sort s = ctx.string_sort();
    Z3_ast r = Z3_mk_re_allchar(ctx, ctx.re_sort(s));
    ctx.check_error();
    return z3::expr(ctx, r);
  }

  z3::expr sum(const std::vector<z3::expr>& xs, bool real) {
    if (xs.empty()) return real ? ctx.real_val(0) : ival(0);
    z3::expr_vector v(ctx);
    for (const auto& x : xs) v.push_back(x);
    return z3::sum(v);
  }

  z3::expr any(const std::vector<z3::expr>& xs) {
    if (xs.empty()) return ff();
    z3::expr_vector v(ctx);
    for (const auto& x : xs) v.push_back(x);
    return z3::mk_or(v);
  }

  z3::expr all(const std::vector<z3::expr>& xs) {
    if (xs.empty()) return tt();
    z3::expr_vector v(ctx);
    for (const auto& x : xs) v.push_back(x);
    return z3::mk_and(v);
  }

  SymValue null_value(ExprType t) {
    SymValue v(ctx);
    v.type = t;
    v.null = tt();
    fill_default(v);
    return v;
  }

  void fill_default(SymValue& v) {
    switch (v.type) {
      case ExprType::Real:
        v.num = ctx.real_val(0);
        break;
      case ExprType::Str:
        v.num = sval("");
        break;
      default:
        v.num = ival(0);
        break;
    }
    v.y = ival(0);
    v.m = ival(1);
    v.d = ival(1);
  }

  SymValue make(ExprType t, const z3::expr& null, const z3::expr& num) {
    SymValue v(ctx);
    v.type = t;
    fill_default(v);
    v.null = null;
    v.num = num;
    return v;
  }

  SymValue make_date(const z3::expr& null, const z3::expr& y, const z3::expr& m, const z3::expr& d) {
    SymValue v(ctx);
    v.type = ExprType::Date;
    v.null = null;
    v.num = ival(0);
    v.y = y;
    v.m = m;
    v.d = d;
    return v;
  }

  SymValue constant(const Value& v) {
    switch (v.kind()) {
      case ValueKind::Null:
        return null_value(ExprType::Null);
      case ValueKind::Int:
        return make(ExprType::Int, ff(), ival(v.as_int()));
      case ValueKind::Real:
        return make(ExprType::Real, ff(), ctx.real_val(v.as_real().num(), v.as_real().den()));
      case ValueKind::Str:
        return make(ExprType::Str, ff(), sval(v.as_str()));
      case ValueKind::Date: {
        const Date& d = v.as_date();
        return make_date(ff(), ival(d.year), ival(d.month), ival(d.day));
      }
    }
    return null_value(ExprType::Null);
  }

  // ---- calendar and casts

  z3::expr leap(const z3::expr& y) {
    return z3::mod(y, 4) == 0 && (z3::mod(y, 100) != 0 || z3::mod(y, 400) == 0);
  }

  z3::expr date_valid(const z3::expr& y, const z3::expr& m, const z3::expr& d) {
    z3::expr days = z3::ite(m == 2, z3::ite(leap(y), ival(29), ival(28)),
                            z3::ite(m == 4 || m == 6 || m == 9 || m == 11, ival(30), ival(31)));
    return y >= ival(kMinYear) && y <= ival(kMaxYear) && m >= 1 && m <= 12 && d >= 1 && d <= days;
  }

  // Integer truncation toward zero of a real.
  z3::expr trunc(const z3::expr& r) {
    auto floor = [&](const z3::expr& x) { return z3::expr(ctx, Z3_mk_real2int(ctx, x)); };
    return z3::ite(r >= 0, floor(r), -floor(-r));
  }

  z3::expr str_is_int(const z3::expr& s) {
    z3::expr rest = s.extract(ival(1), s.length() - 1);
    return s.stoi() >= 0 || (z3::prefixof(sval("-"), s) && rest.stoi() >= 0);
  }

  z3::expr str_to_int(const z3::expr& s) {
    z3::expr n0 = s.stoi();
    z3::expr rest = s.extract(ival(1), s.length() - 1);
    z3::expr n1 = rest.stoi();
    return z3::ite(n0 >= 0, n0, z3::ite(z3::prefixof(sval("-"), s) && n1 >= 0, -n1, ival(0)));
  }

  z3::expr int_to_str(const z3::expr& i) {
    z3::expr general = z3::ite(i >= 0, i.itos(), z3::concat(sval("-"), (-i).itos()));
    if (!opts.domain) return general;
    // Case split over the pool first; the string solver handles literals
    // far better than itos over a small integer range.
    z3::expr out = general;
    for (auto it = opts.domain->ints.rbegin(); it != opts.domain->ints.rend(); ++it) {
      out = z3::ite(i == ival(*it), sval(std::to_string(*it)), out);
    }
    return out;
  }

  z3::expr pad2(const z3::expr& i) { return z3::ite(i <= 9, z3::concat(sval("0"), i.itos()), i.itos()); }

  z3::expr date_to_str(const SymValue& v) {
    z3::expr pad = z3::ite(v.y < 10, sval("000"),
                           z3::ite(v.y < 100, sval("00"), z3::ite(v.y < 1000, sval("0"), sval(""))));
    z3::expr_vector parts(ctx);
    parts.push_back(pad);
    parts.push_back(v.y.itos());
    parts.push_back(sval("-"));
    parts.push_back(pad2(v.m));
    parts.push_back(sval("-"));
    parts.push_back(pad2(v.d));
    return z3::concat(parts);
  }

  z3::expr date_to_int(const SymValue& v) { return v.y * 10000 + v.m * 100 + v.d; }

  SymValue int_to_date(const z3::expr& null, const z3::expr& n) {
    // Euclidean div/mod agree with floor division for positive divisors.
    z3::expr y = n / 10000;
    z3::expr rest = z3::mod(n, 10000);
    z3::expr m = rest / 100;
    z3::expr d = z3::mod(rest, 100);
    return make_date(null || !date_valid(y, m, d), y, m, d);
  }

  z3::expr iso_re() {
    z3::expr digit = z3::range(sval("0"), sval("9"));
    z3::expr_vector parts(ctx);
    for (int i = 0; i < 4; ++i) parts.push_back(digit);
    parts.push_back(z3::to_re(sval("-")));
    parts.push_back(digit);
    parts.push_back(digit);
    parts.push_back(z3::to_re(sval("-")));
    parts.push_back(digit);
    parts.push_back(digit);
    return z3::concat(parts);
  }

  SymValue str_to_date(const z3::expr& null, const z3::expr& s) {
    z3::expr iso = z3::in_re(s, iso_re());
    z3::expr y = s.extract(ival(0), ival(4)).stoi();
    z3::expr m = s.extract(ival(5), ival(2)).stoi();
    z3::expr d = s.extract(ival(8), ival(2)).stoi();
    SymValue fallback = int_to_date(null, str_to_int(s));
    return make_date(z3::ite(iso, null || !date_valid(y, m, d), fallback.null), z3::ite(iso, y, fallback.y),
                     z3::ite(iso, m, fallback.m), z3::ite(iso, d, fallback.d));
  }

  // Numeric view used by arithmetic, aggregates and ToInt.
  z3::expr as_int(const SymValue& v) {
    switch (v.type) {
      case ExprType::Int:
        return v.num;
      case ExprType::Real:
        return trunc(v.num);
      case ExprType::Str:
        return str_to_int(v.num);
      case ExprType::Date:
        return date_to_int(v);
      default:
        return ival(0);
    }
  }

  z3::expr as_numeric(const SymValue& v, bool real) {
    if (v.type == ExprType::Real) return real ? v.num : trunc(v.num);
    z3::expr i = as_int(v);
    return real ? z3::to_real(i) : i;
  }

  z3::expr as_str(const SymValue& v) {
    switch (v.type) {
      case ExprType::Str:
        return v.num;
      case ExprType::Int:
        return int_to_str(v.num);
      case ExprType::Date:
        return date_to_str(v);
      case ExprType::Null:
        return sval("");
      default:
        throw EncodeError(EncodeError::Kind::Unsupported, "conversion of a real to text");
    }
  }

  SymValue as_date(const SymValue& v) {
    switch (v.type) {
      case ExprType::Date:
        return v;
      case ExprType::Str:
        return str_to_date(v.null, v.num);
      case ExprType::Int:
        return int_to_date(v.null, v.num);
      case ExprType::Real:
        return int_to_date(v.null, trunc(v.num));
      default:
        return null_value(ExprType::Date);
    }
  }

  SymValue coerce(const SymValue& v, ExprType t) {
    if (v.type == t || t == ExprType::Null) return v;
    if (v.type == ExprType::Null) return null_value(t);
    if (t == ExprType::Real && v.type == ExprType::Int) return make(ExprType::Real, v.null, z3::to_real(v.num));
    throw EncodeError(EncodeError::Kind::TypeMismatch,
                      std::string("cannot coerce ") + expr_type_name(v.type) + " to " + expr_type_name(t));
  }

  // ---- comparisons

  struct Order {
    z3::expr lt, eq;
  };

  Order date_vs_text(const SymValue& a, const std::string& c) {
    auto before = [&](const Date& t) {
      return a.y < ival(t.year) ||
             (a.y == ival(t.year) && (a.m < ival(t.month) || (a.m == ival(t.month) && a.d < ival(t.day))));
    };
    std::optional<Date> t = first_date_not_below(c);
    z3::expr lt = t ? before(*t) : tt();
    z3::expr eq = ff();
    if (t && format_date(*t) == c) eq = a.y == ival(t->year) && a.m == ival(t->month) && a.d == ival(t->day);
    return {lt, eq};
  }

  Order text_order(const SymValue& a, const SymValue& b) {
    if (a.type == ExprType::Date && b.type == ExprType::Date) {
      z3::expr lt = a.y < b.y || (a.y == b.y && (a.m < b.m || (a.m == b.m && a.d < b.d)));
      return {lt, a.y == b.y && a.m == b.m && a.d == b.d};
    }
    // A date against literal text reduces to a date comparison.
    if (a.type == ExprType::Date && b.type == ExprType::Str && b.num.is_string_value()) {
      return date_vs_text(a, b.num.get_string());
    }
    if (a.type == ExprType::Str && b.type == ExprType::Date && a.num.is_string_value()) {
      Order o = date_vs_text(b, a.num.get_string());
      return {!o.lt && !o.eq, o.eq};
    }
    z3::expr sa = as_str(a), sb = as_str(b);
    return {str_lt(sa, sb), sa == sb};
  }

  // Payload order for the comparison operators.
  Order cmp_order(const SymValue& a, const SymValue& b) {
    if (a.type == ExprType::Null || b.type == ExprType::Null) return {ff(), ff()};
    bool an = is_numeric_type(a.type), bn = is_numeric_type(b.type);
    if (an && bn) {
      bool real = a.type == ExprType::Real || b.type == ExprType::Real;
      z3::expr x = as_numeric(a, real), y = as_numeric(b, real);
      return {x < y, x == y};
    }
    if (!an && !bn) return text_order(a, b);
    const SymValue& num = an ? a : b;
    const SymValue& text = an ? b : a;
    if (text.type == ExprType::Date) return {an ? tt() : ff(), ff()};
    z3::expr lit = str_is_int(text.num);
    z3::expr n0 = str_to_int(text.num);
    if (text.num.is_string_value()) {
      std::optional<int64_t> k = literal_int(text.num.get_string());
      lit = ctx.bool_val(k.has_value());
      n0 = ival(k.value_or(0));
    }
    bool real = num.type == ExprType::Real;
    z3::expr x = num.num;
    z3::expr n = real ? z3::to_real(n0) : n0;
    z3::expr eq = lit && x == n;
    z3::expr lt = an ? z3::ite(lit, x < n, tt()) : z3::ite(lit, n < x, ff());
    return {lt, eq};
  }

  // Payload order for sorting, MIN and MAX: numbers before text.
  Order sort_order(const SymValue& a, const SymValue& b) {
    if (a.type == ExprType::Null || b.type == ExprType::Null) return {ff(), tt()};
    bool an = is_numeric_type(a.type), bn = is_numeric_type(b.type);
    if (an && bn) {
      bool real = a.type == ExprType::Real || b.type == ExprType::Real;
      z3::expr x = as_numeric(a, real), y = as_numeric(b, real);
      return {x < y, x == y};
    }
    if (!an && !bn) return text_order(a, b);
    return {an ? tt() : ff(), ff()};
  }

  SymBool compare(CmpOp op, const SymValue& a, const SymValue& b) {
    z3::expr known = !a.null && !b.null;
    Order o = cmp_order(a, b);
    z3::expr r = ff();
    switch (op) {
      case CmpOp::Eq:
        r = o.eq;
        break;
      case CmpOp::Ne:
        r = !o.eq;
        break;
      case CmpOp::Lt:
        r = o.lt;
        break;
      case CmpOp::Le:
        r = o.lt || o.eq;
        break;
      case CmpOp::Gt:
        r = !o.lt && !o.eq;
        break;
      case CmpOp::Ge:
        r = !o.lt;
        break;
    }
    return {known && r, known && !r};
  }

  z3::expr identity_eq(const SymValue& a, const SymValue& b) {
    z3::expr both_null = a.null && b.null;
    if (a.type == ExprType::Null || b.type == ExprType::Null) return both_null;
    z3::expr peq = ff();
    bool an = is_numeric_type(a.type), bn = is_numeric_type(b.type);
    if (an && bn) {
      bool real = a.type == ExprType::Real || b.type == ExprType::Real;
      peq = as_numeric(a, real) == as_numeric(b, real);
    } else if (!an && !bn) {
      peq = text_order(a, b).eq;
    }
    return both_null || (!a.null && !b.null && peq);
  }

  z3::expr tuple_eq(const SymTuple& a, const SymTuple& b) {
    std::vector<z3::expr> parts;
    for (size_t i = 0; i < a.values.size(); ++i) parts.push_back(identity_eq(a.values[i], b.values[i]));
    return all(parts);
  }

  // a strictly before b, NULL smallest.
  z3::expr sort_lt(const SymValue& a, const SymValue& b) {
    Order o = sort_order(a, b);
    return (a.null && !b.null) || (!a.null && !b.null && o.lt);
  }

  SymBool truth(const SymValue& v) {
    z3::expr known = !v.null;
    z3::expr nz = ff();
    switch (v.type) {
      case ExprType::Int:
        nz = v.num != 0;
        break;
      case ExprType::Real:
        nz = v.num != ctx.real_val(0);
        break;
      case ExprType::Str:
        nz = str_to_int(v.num) != 0;
        break;
      case ExprType::Date:
        nz = date_to_int(v) != 0;
        break;
      default:
        return {ff(), ff()};
    }
    return {known && nz, known && !nz};
  }

  // ---- expressions

  const SymTuple& row_at(const Env& env, int depth) {
    const Env* e = &env;
    for (int i = 0; i < depth; ++i) {
      if (e->parent == nullptr) throw EncodeError(EncodeError::Kind::Unsupported, "dangling outer reference");
      e = e->parent;
    }
    if (e->row == nullptr) throw EncodeError(EncodeError::Kind::Unsupported, "column reference without a row");
    return *e->row;
  }

  SymValue expr(const Expr& e, const Env& env) {
    if (e.type == ExprType::Bool) {
      SymBool b = pred(e, env);
      return make(ExprType::Int, !b.t && !b.f, z3::ite(b.t, ival(1), ival(0)));
    }
    return std::visit([&](const auto& n) { return val(n, e, env); }, e.node);
  }

  SymValue val(const ast::ColumnRef& c, const Expr&, const Env& env) {
    const SymTuple& row = row_at(env, c.depth);
    return row.values.at(static_cast<size_t>(c.index));
  }
  SymValue val(const ast::Literal& l, const Expr&, const Env&) { return constant(l.value); }
  SymValue val(const ast::Arith& a, const Expr& e, const Env& env) {
    SymValue x = expr(*a.lhs, env), y = expr(*a.rhs, env);
    z3::expr null = x.null || y.null;
    if (a.op == ArithOp::Mod) {
      z3::expr p = as_numeric(x, false), q = as_numeric(y, false);
      // Truncated remainder: sign follows the dividend.
      z3::expr r = z3::mod(p, q);
      z3::expr tr = z3::ite(p < 0 && r != 0, z3::ite(q > 0, r - q, r + q), r);
      return make(ExprType::Int, null || q == 0, tr);
    }
    bool real = e.type == ExprType::Real;
    z3::expr p = as_numeric(x, real), q = as_numeric(y, real);
    switch (a.op) {
      case ArithOp::Add:
        return make(e.type, null, p + q);
      case ArithOp::Sub:
        return make(e.type, null, p - q);
      case ArithOp::Mul:
        return make(e.type, null, p * q);
      case ArithOp::Div: {
        z3::expr zero = real ? ctx.real_val(0) : ival(0);
        if (real) return make(e.type, null || q == zero, p / q);
        z3::expr quo = p / q;
        z3::expr r = z3::mod(p, q);
        z3::expr tq = z3::ite(p < 0 && r != 0, z3::ite(q > 0, quo + 1, quo - 1), quo);
        return make(e.type, null || q == zero, tq);
      }
      case ArithOp::Mod:
        break;
    }
    throw EncodeError(EncodeError::Kind::Unsupported, "arithmetic operator");
  }
  SymValue select(const z3::expr& c, const SymValue& a, const SymValue& b) {
    SymValue v(ctx);
    v.type = a.type;
    v.null = z3::ite(c, a.null, b.null);
    v.num = z3::ite(c, a.num, b.num);
    v.y = z3::ite(c, a.y, b.y);
    v.m = z3::ite(c, a.m, b.m);
    v.d = z3::ite(c, a.d, b.d);
    return v;
  }
  SymValue val(const ast::Ite& n, const Expr& e, const Env& env) {
    SymBool c = pred(*n.cond, env);
    return select(c.t, coerce(expr(*n.then_expr, env), e.type), coerce(expr(*n.else_expr, env), e.type));
  }
  SymValue val(const ast::Case& n, const Expr& e, const Env& env) {
    SymValue acc = coerce(expr(*n.else_expr, env), e.type);
    for (size_t i = n.conds.size(); i-- > 0;) {
      SymBool c = pred(*n.conds[i], env);
      acc = select(c.t, coerce(expr(*n.results[i], env), e.type), acc);
    }
    return acc;
  }
  SymValue val(const ast::SubStr& n, const Expr&, const Env& env) {
    SymValue s = expr(*n.str, env);
    SymValue st = expr(*n.start, env);
    SymValue ln = expr(*n.length, env);
    if (!is_numeric_type(st.type) || !is_numeric_type(ln.type)) return null_value(ExprType::Str);
    z3::expr str = as_str(s);
    z3::expr p1 = as_numeric(st, false), p2 = as_numeric(ln, false);
    z3::expr len = str.length();
    z3::expr neg_start = p1 + len;
    z3::expr q1 = z3::ite(p1 < 0, z3::ite(neg_start < 0, ival(0), neg_start), z3::ite(p1 > 0, p1 - 1, ival(0)));
    z3::expr q2 = z3::ite(p1 < 0, z3::ite(neg_start < 0, p2 + neg_start, p2), z3::ite(p1 > 0, p2, p2 - 1));
    z3::expr out = z3::ite(p2 <= 0, sval(""), str.extract(q1, q2));
    return make(ExprType::Str, s.null || st.null || ln.null, out);
  }
  SymValue val(const ast::Strftime& n, const Expr&, const Env& env) {
    SymValue d = as_date(expr(*n.arg, env));
    z3::expr part = n.part == DatePart::Year ? d.y : (n.part == DatePart::Month ? d.m : d.d);
    return make(ExprType::Int, d.null, part);
  }
  SymValue val(const ast::JulianDay& n, const Expr&, const Env& env) {
    SymValue d = as_date(expr(*n.arg, env));
    z3::expr early = d.m <= 2;
    z3::expr y = z3::ite(early, d.y - 1, d.y);
    z3::expr m = z3::ite(early, d.m + 12, d.m);
    z3::expr c = 2 - y / 100 + y / 400;
    z3::expr a1 = (36525 * (y + 4716)) / 100;
    z3::expr a2 = (306001 * (m + 1)) / 10000;
    z3::expr whole = a1 + a2 + d.d + c - 1524;
    return make(ExprType::Real, d.null, z3::to_real(whole) - ctx.real_val(1, 2));
  }
  SymValue val(const ast::Convert& n, const Expr&, const Env& env) {
    SymValue v = expr(*n.arg, env);
    if (v.type == ExprType::Null) {
      switch (n.to) {
        case ConvertKind::ToInt:
          return null_value(ExprType::Int);
        case ConvertKind::ToReal:
          return null_value(ExprType::Real);
        case ConvertKind::ToStr:
          return null_value(ExprType::Str);
        case ConvertKind::ToDate:
          return null_value(ExprType::Date);
      }
    }
    switch (n.to) {
      case ConvertKind::ToInt:
        return make(ExprType::Int, v.null, as_int(v));
      case ConvertKind::ToReal:
        return make(ExprType::Real, v.null, as_numeric(v, true));
      case ConvertKind::ToStr:
        return make(ExprType::Str, v.null, as_str(v));
      case ConvertKind::ToDate:
        return as_date(v);
    }
    throw EncodeError(EncodeError::Kind::Unsupported, "conversion");
  }
  SymValue val(const ast::PredCast& p, const Expr&, const Env& env) {
    SymBool b = pred(*p.pred, env);
    return make(ExprType::Int, !b.t && !b.f, z3::ite(b.t, ival(1), ival(0)));
  }
  SymValue val(const ast::UnsupportedExpr& u, const Expr&, const Env&) {
    throw EncodeError(EncodeError::Kind::Unsupported, "unsupported construct: " + u.feature);
  }
  SymValue val(const ast::Aggregate& a, const Expr& e, const Env& env) {
    if (env.group == nullptr) throw EncodeError(EncodeError::Kind::Unsupported, "aggregate outside a group");
    const auto& members = *env.group;
    std::vector<z3::expr> ok;
    std::vector<SymValue> vals;
    for (const auto& mem : members) {
      if (!a.arg) {
        ok.push_back(mem.flag);
        vals.push_back(make(ExprType::Int, ff(), ival(1)));
        continue;
      }
      Env inner{mem.row, nullptr, env.parent};
      SymValue v = expr(*a.arg, inner);
      ok.push_back(mem.flag && !v.null);
      vals.push_back(v);
    }
    if (a.distinct) {
      std::vector<z3::expr> first;
      for (size_t j = 0; j < vals.size(); ++j) {
        std::vector<z3::expr> dup;
        for (size_t i = 0; i < j; ++i) dup.push_back(ok[i] && identity_eq(vals[i], vals[j]));
        first.push_back(ok[j] && !any(dup));
      }
      ok = first;
    }
    std::vector<z3::expr> ones;
    for (const auto& o : ok) ones.push_back(z3::ite(o, ival(1), ival(0)));
    z3::expr count = sum(ones, false);
    z3::expr none = !any(ok);
    switch (a.func) {
      case AggFunc::Count:
        return make(ExprType::Int, ff(), count);
      case AggFunc::Sum:
      case AggFunc::Avg: {
        bool real = a.func == AggFunc::Avg || e.type == ExprType::Real;
        std::vector<z3::expr> terms;
        z3::expr zero = real ? ctx.real_val(0) : ival(0);
        for (size_t i = 0; i < vals.size(); ++i) terms.push_back(z3::ite(ok[i], as_numeric(vals[i], real), zero));
        z3::expr total = sum(terms, real);
        if (a.func == AggFunc::Sum) return make(e.type, none, total);
        // Division by the count, split on its possible values.
        z3::expr avg = ctx.real_val(0);
        for (size_t c = vals.size(); c >= 1; --c) {
          avg = z3::ite(count == static_cast<int>(c), total / ctx.real_val(static_cast<int64_t>(c)), avg);
        }
        return make(ExprType::Real, none, avg);
      }
      case AggFunc::Min:
      case AggFunc::Max: {
        SymValue acc = null_value(e.type);
        for (size_t i = 0; i < vals.size(); ++i) {
          SymValue v = coerce(vals[i], e.type);
          Order o = a.func == AggFunc::Min ? sort_order(v, acc) : sort_order(acc, v);
          z3::expr take = ok[i] && (acc.null || o.lt);
          acc = select(take, make_nonnull(v), acc);
        }
        return acc;
      }
    }
    throw EncodeError(EncodeError::Kind::Unsupported, "aggregate");
  }
  SymValue make_nonnull(SymValue v) {
    v.null = ff();
    return v;
  }
  // Predicate nodes reach val() only through expr(), which routes Bool
  // typed nodes to pred(); these overloads are never selected at runtime.
  template <typename T>
  SymValue val(const T&, const Expr& e, const Env& env) {
    SymBool b = pred(e, env);
    return make(ExprType::Int, !b.t && !b.f, z3::ite(b.t, ival(1), ival(0)));
  }

  SymBool membership(const SymValue& x, const std::vector<std::pair<SymValue, z3::expr>>& items) {
    std::vector<z3::expr> t, f;
    for (const auto& [v, live] : items) {
      SymBool c = compare(CmpOp::Eq, x, v);
      t.push_back(live && c.t);
      f.push_back(!live || c.f);
    }
    return {any(t), all(f)};
  }

  z3::expr like_re(const std::string& pattern) {
    z3::expr_vector parts(ctx);
    std::string lit;
    auto flush = [&]() {
      if (!lit.empty()) parts.push_back(z3::to_re(sval(lit)));
      lit.clear();
    };
    for (char c : pattern) {
      if (c == '%') {
        flush();
        parts.push_back(z3::star(allchar()));
      } else if (c == '_') {
        flush();
        parts.push_back(allchar());
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        flush();
        std::string lo(1, static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        std::string up(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        parts.push_back(z3::to_re(sval(lo)) + z3::to_re(sval(up)));
      } else {
        lit += c;
      }
    }
    flush();
    if (parts.empty()) return z3::to_re(sval(""));
    if (parts.size() == 1) return parts[0];
    return z3::concat(parts);
  }

  SymBool pred(const Expr& e, const Env& env) {
    if (e.type != ExprType::Bool) return truth(expr(e, env));
    if (const auto* b = e.as<ast::BoolLit>()) return {ctx.bool_val(b->value), ctx.bool_val(!b->value)};
    if (const auto* c = e.as<ast::Compare>()) return compare(c->op, expr(*c->lhs, env), expr(*c->rhs, env));
    if (const auto* n = e.as<ast::IsNull>()) {
      SymValue v = expr(*n->arg, env);
      return {v.null, !v.null};
    }
    if (const auto* l = e.as<ast::Logic>()) {
      SymBool a = pred(*l->lhs, env), b = pred(*l->rhs, env);
      if (l->op == LogicOp::And) return {a.t && b.t, a.f || b.f};
      return {a.t || b.t, a.f && b.f};
    }
    if (const auto* n = e.as<ast::Not>()) {
      SymBool a = pred(*n->arg, env);
      return {a.f, a.t};
    }
    if (const auto* m = e.as<ast::StrMatch>()) {
      SymValue v = expr(*m->arg, env);
      if (v.type == ExprType::Null) return {ff(), ff()};
      z3::expr s = as_str(v);
      z3::expr r = ff();
      switch (m->kind) {
        case MatchKind::Like:
          r = z3::in_re(s, like_re(m->pattern));
          break;
        case MatchKind::Prefix:
          r = z3::prefixof(sval(m->pattern), s);
          break;
        case MatchKind::Suffix:
          r = z3::suffixof(sval(m->pattern), s);
          break;
      }
      return {!v.null && r, !v.null && !r};
    }
    if (const auto* in = e.as<ast::InList>()) {
      SymValue x = expr(*in->lhs, env);
      std::vector<std::pair<SymValue, z3::expr>> items;
      for (const auto& it : in->items) items.emplace_back(expr(*it, env), tt());
      return membership(x, items);
    }
    if (const auto* in = e.as<ast::InQuery>()) {
      SymValue x = expr(*in->lhs, env);
      SymRelation r = subquery(*in->sub, env);
      std::vector<std::pair<SymValue, z3::expr>> items;
      for (const auto& t : r.tuples) items.emplace_back(t.values.at(0), !t.del);
      return membership(x, items);
    }
    if (const auto* t = e.as<ast::Truth>()) return truth(expr(*t->arg, env));
    if (const auto* u = e.as<ast::UnsupportedExpr>()) {
      throw EncodeError(EncodeError::Kind::Unsupported, "unsupported construct: " + u->feature);
    }
    throw EncodeError(EncodeError::Kind::Unsupported, "unexpected predicate node");
  }

  SymRelation subquery(const Query& sub, const Env& env) {
    if (is_correlated(sub)) return query(sub, &env);
    auto it = uncorrelated.find(&sub);
    if (it != uncorrelated.end()) return it->second;
    SymRelation r = query(sub, nullptr);
    uncorrelated.emplace(&sub, r);
    return r;
  }

  // ---- queries

  void check_size(size_t n) {
    if (n > opts.ceiling) {
      throw BoundOverflow("derived relation of " + std::to_string(n) + " tuples exceeds the ceiling of " +
                          std::to_string(opts.ceiling));
    }
  }

  static std::vector<ExprType> types_of(const Query& q) {
    std::vector<ExprType> t;
    for (const auto& c : q.columns) t.push_back(c.type);
    return t;
  }

  SymRelation query(const Query& q, const Env* outer) {
    SymRelation r = std::visit([&](const auto& n) { return enc(n, q, outer); }, q.node);
    check_size(r.tuples.size());
    return r;
  }

  SymRelation enc(const ast::TableScan& t, const Query& q, const Env*) {
    auto it = db->tables.find(t.table);
    if (it == db->tables.end()) throw EncodeError(EncodeError::Kind::Unsupported, "unknown table '" + t.table + "'");
    if (it->second.arity() != q.arity()) throw EncodeError(EncodeError::Kind::ArityMismatch, "table arity");
    return it->second;
  }
  SymRelation enc(const ast::Rename& r, const Query&, const Env* outer) { return query(*r.input, outer); }
  SymRelation enc(const ast::Project& p, const Query& q, const Env* outer) {
    SymRelation in = query(*p.input, outer);
    SymRelation out{types_of(q), {}};
    for (const auto& t : in.tuples) {
      Env env{&t, nullptr, outer};
      SymTuple o{{}, t.del};
      for (size_t i = 0; i < p.exprs.size(); ++i) o.values.push_back(coerce(expr(*p.exprs[i], env), out.types[i]));
      out.tuples.push_back(std::move(o));
    }
    return out;
  }
  SymRelation enc(const ast::Filter& f, const Query&, const Env* outer) {
    SymRelation in = query(*f.input, outer);
    for (auto& t : in.tuples) {
      Env env{&t, nullptr, outer};
      SymBool b = pred(*f.pred, env);
      t.del = t.del || !b.t;
    }
    return in;
  }
  SymRelation distinct(SymRelation in) {
    std::vector<z3::expr> dels;
    for (size_t i = 0; i < in.tuples.size(); ++i) {
      std::vector<z3::expr> dup;
      for (size_t j = 0; j < i; ++j) dup.push_back(!in.tuples[j].del && tuple_eq(in.tuples[j], in.tuples[i]));
      dels.push_back(in.tuples[i].del || any(dup));
    }
    for (size_t i = 0; i < in.tuples.size(); ++i) in.tuples[i].del = dels[i];
    return in;
  }
  SymRelation enc(const ast::Distinct& d, const Query&, const Env* outer) { return distinct(query(*d.input, outer)); }
  SymRelation coerce_rel(SymRelation r, const std::vector<ExprType>& types) {
    for (auto& t : r.tuples) {
      for (size_t i = 0; i < t.values.size(); ++i) t.values[i] = coerce(t.values[i], types[i]);
    }
    r.types = types;
    return r;
  }
  SymRelation enc(const ast::SetOp& s, const Query& q, const Env* outer) {
    std::vector<ExprType> types = types_of(q);
    SymRelation l = coerce_rel(query(*s.lhs, outer), types);
    SymRelation r = coerce_rel(query(*s.rhs, outer), types);
    switch (s.kind) {
      case SetOpKind::UnionAll:
      case SetOpKind::Union: {
        SymRelation out{types, l.tuples};
        out.tuples.insert(out.tuples.end(), r.tuples.begin(), r.tuples.end());
        check_size(out.tuples.size());
        return s.kind == SetOpKind::Union ? distinct(std::move(out)) : out;
      }
      case SetOpKind::Intersect:
      case SetOpKind::Except: {
        SymRelation out = distinct(std::move(l));
        for (auto& t : out.tuples) {
          std::vector<z3::expr> hit;
          for (const auto& u : r.tuples) hit.push_back(!u.del && tuple_eq(t, u));
          z3::expr found = any(hit);
          t.del = t.del || (s.kind == SetOpKind::Intersect ? !found : found);
        }
        return out;
      }
      case SetOpKind::IntersectAll:
      case SetOpKind::ExceptAll:
        break;
    }
    throw EncodeError(EncodeError::Kind::Unsupported, std::string("set operation ") + set_op_name(s.kind));
  }
  SymRelation enc(const ast::Join& j, const Query& q, const Env* outer) {
    SymRelation l = query(*j.lhs, outer);
    SymRelation r = query(*j.rhs, outer);
    bool left = j.kind == JoinKind::Left || j.kind == JoinKind::Full;
    bool right = j.kind == JoinKind::Right || j.kind == JoinKind::Full;
    size_t size = l.tuples.size() * r.tuples.size() + (left ? l.tuples.size() : 0) + (right ? r.tuples.size() : 0);
    check_size(size);
    SymRelation out{types_of(q), {}};
    std::vector<std::vector<z3::expr>> match(l.tuples.size(), std::vector<z3::expr>(r.tuples.size(), ff()));
    for (size_t a = 0; a < l.tuples.size(); ++a) {
      for (size_t b = 0; b < r.tuples.size(); ++b) {
        SymTuple t{l.tuples[a].values, l.tuples[a].del || r.tuples[b].del};
        t.values.insert(t.values.end(), r.tuples[b].values.begin(), r.tuples[b].values.end());
        z3::expr on = tt();
        if (j.on) {
          Env env{&t, nullptr, outer};
          on = pred(*j.on, env).t;
        }
        match[a][b] = !t.del && on;
        t.del = !match[a][b];
        out.tuples.push_back(std::move(t));
      }
    }
    if (left) {
      for (size_t a = 0; a < l.tuples.size(); ++a) {
        SymTuple t{l.tuples[a].values, l.tuples[a].del || any(match[a])};
        for (ExprType ty : r.types) t.values.push_back(null_value(ty));
        out.tuples.push_back(std::move(t));
      }
    }
    if (right) {
      for (size_t b = 0; b < r.tuples.size(); ++b) {
        std::vector<z3::expr> col;
        for (size_t a = 0; a < l.tuples.size(); ++a) col.push_back(match[a][b]);
        SymTuple t{{}, r.tuples[b].del || any(col)};
        for (ExprType ty : l.types) t.values.push_back(null_value(ty));
        t.values.insert(t.values.end(), r.tuples[b].values.begin(), r.tuples[b].values.end());
        out.tuples.push_back(std::move(t));
      }
    }
    return out;
  }
  SymRelation enc(const ast::GroupBy& g, const Query& q, const Env* outer) {
    SymRelation in = query(*g.input, outer);
    SymRelation out{types_of(q), {}};
    auto emit = [&](const SymTuple* rep, const std::vector<Member>& members, z3::expr del) {
      Env env{rep, &members, outer};
      if (g.having) del = del || !pred(*g.having, env).t;
      SymTuple t{{}, del};
      for (size_t i = 0; i < g.exprs.size(); ++i) t.values.push_back(coerce(expr(*g.exprs[i], env), out.types[i]));
      out.tuples.push_back(std::move(t));
    };
    if (g.keys.empty()) {
      std::vector<Member> members;
      for (const auto& t : in.tuples) members.push_back({&t, !t.del});
      SymTuple empty_rep{{}, ff()};
      for (ExprType ty : in.types) empty_rep.values.push_back(null_value(ty));
      emit(&empty_rep, members, ff());
      return out;
    }
    std::vector<std::vector<SymValue>> keys;
    for (const auto& t : in.tuples) {
      Env env{&t, nullptr, outer};
      std::vector<SymValue> k;
      for (const auto& e : g.keys) k.push_back(expr(*e, env));
      keys.push_back(std::move(k));
    }
    for (size_t i = 0; i < in.tuples.size(); ++i) {
      std::vector<Member> members;
      std::vector<z3::expr> earlier;
      for (size_t j = 0; j < in.tuples.size(); ++j) {
        std::vector<z3::expr> eq;
        for (size_t c = 0; c < g.keys.size(); ++c) eq.push_back(identity_eq(keys[i][c], keys[j][c]));
        z3::expr same = !in.tuples[j].del && all(eq);
        members.push_back({&in.tuples[j], same});
        if (j < i) earlier.push_back(same);
      }
      emit(&in.tuples[i], members, in.tuples[i].del || any(earlier));
    }
    return out;
  }
  SymRelation enc(const ast::With& w, const Query&, const Env* outer) {
    for (size_t i = 0; i < w.defs.size(); ++i) ctes[w.ids[i]] = query(*w.defs[i], outer);
    return query(*w.body, outer);
  }
  SymRelation enc(const ast::CteRef& c, const Query&, const Env*) {
    auto it = ctes.find(c.id);
    if (it == ctes.end()) throw EncodeError(EncodeError::Kind::Unsupported, "unbound CTE '" + c.name + "'");
    return it->second;
  }
  SymRelation enc(const ast::OrderBy& o, const Query&, const Env* outer) {
    SymRelation in = query(*o.input, outer);
    if (!o.limit) return in;
    size_t n = in.tuples.size();
    std::vector<size_t> cols;
    for (const auto& k : o.keys) {
      const auto* c = k->as<ast::ColumnRef>();
      if (c == nullptr || c->depth != 0) throw EncodeError(EncodeError::Kind::Unsupported, "ORDER BY key");
      cols.push_back(static_cast<size_t>(c->index));
    }
    auto precedes = [&](const SymTuple& a, const SymTuple& b) {
      z3::expr result = ff();
      z3::expr prefix_eq = tt();
      for (size_t k = 0; k < cols.size(); ++k) {
        const SymValue& x = a.values[cols[k]];
        const SymValue& y = b.values[cols[k]];
        z3::expr lt = o.descending[k] ? sort_lt(y, x) : sort_lt(x, y);
        result = result || (prefix_eq && lt);
        prefix_eq = prefix_eq && identity_eq(x, y);
      }
      return result;
    };
    std::vector<z3::expr> sel;
    std::string base = fresh("sel");
    for (size_t i = 0; i < n; ++i) sel.push_back(ctx.bool_const((base + "_" + std::to_string(i)).c_str()));
    std::vector<z3::expr> sel_ones, live_ones;
    for (size_t i = 0; i < n; ++i) {
      constraints.push_back(z3::implies(sel[i], !in.tuples[i].del));
      sel_ones.push_back(z3::ite(sel[i], ival(1), ival(0)));
      live_ones.push_back(z3::ite(!in.tuples[i].del, ival(1), ival(0)));
    }
    z3::expr live = sum(live_ones, false);
    z3::expr lim = ival(std::max<int64_t>(0, *o.limit));
    constraints.push_back(sum(sel_ones, false) == z3::ite(live < lim, live, lim));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        constraints.push_back(z3::implies(sel[i] && !in.tuples[j].del && !sel[j], !precedes(in.tuples[j], in.tuples[i])));
      }
    }
    for (size_t i = 0; i < n; ++i) in.tuples[i].del = !sel[i];
    return in;
  }
  SymRelation enc(const ast::UnsupportedQuery& u, const Query&, const Env*) {
    throw EncodeError(EncodeError::Kind::Unsupported, "unsupported construct: " + u.feature);
  }
};

Encoder::Encoder(z3::context& ctx, EncodeOptions options)
    : impl_(std::make_unique<Impl>(ctx, std::move(options))) {}

Encoder::~Encoder() = default;

z3::context& Encoder::ctx() { return impl_->ctx; }

const std::vector<z3::expr>& Encoder::constraints() const { return impl_->constraints; }

SymValue Encoder::constant(const Value& v) { return impl_->constant(v); }

z3::expr Encoder::date_valid(const z3::expr& y, const z3::expr& m, const z3::expr& d) {
  return impl_->date_valid(y, m, d);
}

z3::expr Encoder::identity_eq(const SymValue& a, const SymValue& b) { return impl_->identity_eq(a, b); }

SymDb Encoder::alloc_symbolic_db(const DatabaseSchema& schema, int k) {
  if (k < 1) throw EncodeError(EncodeError::Kind::BadBound, "bound must be at least 1");
  Impl& im = *impl_;
  z3::context& c = im.ctx;
  SymDb db;
  db.k = k;
  db.schema = &schema;
  z3::expr printable = z3::star(z3::range(im.sval(" "), im.sval("~")));
  z3::expr bound = c.int_val(im.opts.int_bound);
  for (const auto& table : schema.tables) {
    SymRelation rel;
    for (const auto& col : table.columns) {
      switch (col.type) {
        case SqlType::Int:
          rel.types.push_back(ExprType::Int);
          break;
        case SqlType::Str:
          rel.types.push_back(ExprType::Str);
          break;
        case SqlType::Date:
          rel.types.push_back(ExprType::Date);
          break;
      }
    }
    for (int i = 0; i < k; ++i) {
      std::string prefix = table.name + "." + std::to_string(i) + ".";
      SymTuple t{{}, c.bool_const((prefix + "del").c_str())};
      db.vars.push_back(t.del);
      for (size_t ci = 0; ci < table.columns.size(); ++ci) {
        const ColumnSchema& col = table.columns[ci];
        std::string name = prefix + col.name;
        SymValue v(c);
        v.type = rel.types[ci];
        im.fill_default(v);
        bool not_null = !col.nullable || table.is_key_column(ci);
        if (not_null) {
          v.null = im.ff();
        } else {
          v.null = c.bool_const((name + ".null").c_str());
          db.vars.push_back(v.null);
        }
        std::vector<z3::expr> pool;
        switch (col.type) {
          case SqlType::Int:
            v.num = c.int_const(name.c_str());
            db.vars.push_back(v.num);
            im.constraints.push_back(v.num <= bound && v.num >= -bound);
            if (im.opts.domain) {
              for (int64_t x : im.opts.domain->ints) pool.push_back(v.num == c.int_val(x));
            }
            break;
          case SqlType::Str: {
            v.num = c.string_const(name.c_str());
            db.vars.push_back(v.num);
            im.constraints.push_back(z3::in_re(v.num, printable));
            z3::expr rest = v.num.extract(c.int_val(1), v.num.length() - 1);
            im.constraints.push_back(v.num.stoi() <= bound && rest.stoi() <= bound);
            if (im.opts.domain) {
              for (const auto& s : im.opts.domain->strs) pool.push_back(v.num == im.sval(s));
            }
            break;
          }
          case SqlType::Date:
            v.y = c.int_const((name + ".y").c_str());
            v.m = c.int_const((name + ".m").c_str());
            v.d = c.int_const((name + ".d").c_str());
            db.vars.push_back(v.y);
            db.vars.push_back(v.m);
            db.vars.push_back(v.d);
            im.constraints.push_back(im.date_valid(v.y, v.m, v.d));
            if (im.opts.domain) {
              for (const auto& d : im.opts.domain->dates) {
                pool.push_back(v.y == c.int_val(d.year) && v.m == c.int_val(d.month) && v.d == c.int_val(d.day));
              }
            }
            break;
        }
        if (im.opts.domain) {
          z3::expr in_pool = im.any(pool);
          if (im.opts.domain->include_null && !not_null) {
            im.constraints.push_back(v.null || in_pool);
          } else {
            im.constraints.push_back(!v.null && in_pool);
          }
        }
        t.values.push_back(v);
      }
      rel.tuples.push_back(std::move(t));
    }
    // Absent tuples come last; row order carries no meaning.
    for (int i = 0; i + 1 < k; ++i) {
      im.constraints.push_back(z3::implies(rel.tuples[i].del, rel.tuples[i + 1].del));
    }
    if (!table.primary_key.empty()) {
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          std::vector<z3::expr> same;
          for (const auto& key : table.primary_key) {
            size_t ci = static_cast<size_t>(table.column_index(key));
            same.push_back(im.identity_eq(rel.tuples[i].values[ci], rel.tuples[j].values[ci]));
          }
          im.constraints.push_back(!(!rel.tuples[i].del && !rel.tuples[j].del && im.all(same)));
        }
      }
    }
    db.tables.emplace(table.name, std::move(rel));
  }
  return db;
}

EncodingResult Encoder::encode_query(const SymDb& db, const Query& q) {
  Impl& im = *impl_;
  size_t before = im.constraints.size();
  im.db = &db;
  im.uncorrelated.clear();
  SymRelation r = im.query(q, nullptr);
  EncodingResult out{std::move(r), {}};
  for (size_t i = before; i < im.constraints.size(); ++i) out.constraints.push_back(im.constraints[i]);
  return out;
}

SymValue Encoder::encode_expr(const SymTuple& row, const Expr& e) {
  Env env{&row, nullptr, nullptr};
  return impl_->expr(e, env);
}

SymBool Encoder::encode_pred(const SymTuple& row, const Expr& e) {
  Env env{&row, nullptr, nullptr};
  return impl_->pred(e, env);
}

z3::expr Encoder::set_equiv_constraint(const SymRelation& a, const SymRelation& b) {
  Impl& im = *impl_;
  if (a.arity() != b.arity()) throw EncodeError(EncodeError::Kind::ArityMismatch, "relations differ in arity");
  auto contained = [&](const SymRelation& x, const SymRelation& y) {
    std::vector<z3::expr> parts;
    for (const auto& t : x.tuples) {
      std::vector<z3::expr> hits;
      for (const auto& u : y.tuples) hits.push_back(!u.del && im.tuple_eq(t, u));
      parts.push_back(t.del || im.any(hits));
    }
    return im.all(parts);
  };
  return contained(a, b) && contained(b, a);
}

z3::expr Encoder::degenerate(const SymRelation& a, const SymRelation& b) {
  Impl& im = *impl_;
  auto empty = [&](const SymRelation& r) {
    std::vector<z3::expr> d;
    for (const auto& t : r.tuples) d.push_back(t.del);
    return im.all(d);
  };
  auto all_null = [&](const SymRelation& r) {
    std::vector<z3::expr> rows;
    for (const auto& t : r.tuples) {
      std::vector<z3::expr> nulls;
      for (const auto& v : t.values) nulls.push_back(v.null);
      rows.push_back(t.del || im.all(nulls));
    }
    return im.all(rows);
  };
  z3::expr ea = empty(a), eb = empty(b);
  return (ea && !eb && all_null(b)) || (eb && !ea && all_null(a));
}

SymRelation Encoder::materialize(const SymRelation& r, const std::string& prefix) {
  Impl& im = *impl_;
  z3::context& c = im.ctx;
  SymRelation out{r.types, {}};
  for (size_t i = 0; i < r.tuples.size(); ++i) {
    std::string base = prefix + "." + std::to_string(i) + ".";
    const SymTuple& t = r.tuples[i];
    SymTuple o{{}, c.bool_const((base + "del").c_str())};
    im.constraints.push_back(o.del == t.del);
    for (size_t ci = 0; ci < t.values.size(); ++ci) {
      const SymValue& v = t.values[ci];
      std::string name = base + std::to_string(ci);
      SymValue w(c);
      w.type = v.type;
      im.fill_default(w);
      w.null = c.bool_const((name + ".null").c_str());
      im.constraints.push_back(w.null == v.null);
      switch (v.type) {
        case ExprType::Int:
          w.num = c.int_const(name.c_str());
          im.constraints.push_back(z3::implies(!w.null, w.num == v.num));
          break;
        case ExprType::Real:
          w.num = c.real_const(name.c_str());
          im.constraints.push_back(z3::implies(!w.null, w.num == v.num));
          break;
        case ExprType::Str:
          w.num = c.string_const(name.c_str());
          im.constraints.push_back(z3::implies(!w.null, w.num == v.num));
          break;
        case ExprType::Date:
          w.y = c.int_const((name + ".y").c_str());
          w.m = c.int_const((name + ".m").c_str());
          w.d = c.int_const((name + ".d").c_str());
          im.constraints.push_back(z3::implies(!w.null, w.y == v.y && w.m == v.m && w.d == v.d));
          break;
        default:
          break;
      }
      o.values.push_back(w);
    }
    out.tuples.push_back(std::move(o));
  }
  return out;
}

Formula nonequivalence_formula(z3::context& ctx, const DatabaseSchema& schema, const Query& q1,
                               const Query& q2, int k, const EncodeOptions& options) {
  Encoder enc(ctx, options);
  SymDb db = enc.alloc_symbolic_db(schema, k);
  SymRelation r1 = enc.materialize(enc.encode_query(db, q1).result, "out1");
  SymRelation r2 = enc.materialize(enc.encode_query(db, q2).result, "out2");
  Formula f{{}, std::move(db), r1, r2};
  f.assertions = enc.constraints();
  if (r1.arity() != r2.arity()) {
    z3::expr_vector live(ctx);
    for (const auto& t : r1.tuples) live.push_back(!t.del);
    for (const auto& t : r2.tuples) live.push_back(!t.del);
    f.assertions.push_back(live.empty() ? ctx.bool_val(false) : z3::mk_or(live));
  } else {
    f.assertions.push_back(!enc.set_equiv_constraint(r1, r2));
  }
  if (options.exclude_degenerate) f.assertions.push_back(!enc.degenerate(r1, r2));
  return f;
}

}  // namespace sqleq
