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

#include "sqleq/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <vector>

namespace sqleq {

TriBool tri_and(TriBool a, TriBool b) {
  if (a == TriBool::False || b == TriBool::False) return TriBool::False;
  if (a == TriBool::True && b == TriBool::True) return TriBool::True;
  return TriBool::Unknown;
}

TriBool tri_or(TriBool a, TriBool b) {
  if (a == TriBool::True || b == TriBool::True) return TriBool::True;
  if (a == TriBool::False && b == TriBool::False) return TriBool::False;
  return TriBool::Unknown;
}

TriBool tri_not(TriBool a) {
  switch (a) {
    case TriBool::False:
      return TriBool::True;
    case TriBool::True:
      return TriBool::False;
    case TriBool::Unknown:
      return TriBool::Unknown;
  }
  return TriBool::Unknown;
}

const char* tri_name(TriBool t) {
  switch (t) {
    case TriBool::False:
      return "false";
    case TriBool::True:
      return "true";
    case TriBool::Unknown:
      return "unknown";
  }
  return "?";
}

namespace {

// Floor division and the matching non-negative remainder.
int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int64_t floor_mod(int64_t a, int64_t b) { return a - floor_div(a, b) * b; }

}  // namespace

bool is_int_literal(std::string_view s) {
  size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

int64_t str_to_int(std::string_view s) {
  if (!is_int_literal(s)) return 0;
  bool neg = s[0] == '-';
  __int128 v = 0;
  for (size_t i = neg ? 1 : 0; i < s.size(); ++i) {
    v = v * 10 + (s[i] - '0');
    if (v > (static_cast<__int128>(1) << 63)) throw EvalError("integer overflow in '" + std::string(s) + "'");
  }
  if (neg) v = -v;
  if (v > std::numeric_limits<int64_t>::max()) throw EvalError("integer overflow in '" + std::string(s) + "'");
  return static_cast<int64_t>(v);
}

Value str_to_int(const Value& v) {
  if (v.is_null()) return v;
  return Value::integer(str_to_int(v.as_str()));
}

int64_t date_to_int(const Date& d) { return d.year * 10000 + d.month * 100 + d.day; }

Value int_to_date(const Value& v) {
  if (v.is_null()) return v;
  int64_t n = v.is_real() ? v.as_real().trunc() : v.as_int();
  int64_t y = floor_div(n, 10000);
  int64_t rest = floor_mod(n, 10000);
  int64_t m = floor_div(rest, 100);
  int64_t d = floor_mod(rest, 100);
  if (!is_valid_date(y, m, d)) return Value::null();
  return Value::date(Date{y, m, d});
}

Value str_to_date(const Value& v) {
  if (v.is_null()) return v;
  const std::string& s = v.as_str();
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    bool digits = true;
    for (size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
      if (s[i] < '0' || s[i] > '9') digits = false;
    }
    if (digits) {
      auto d = parse_iso_date(s);
      return d ? Value::date(*d) : Value::null();
    }
  }
  return int_to_date(Value::integer(str_to_int(s)));
}

Value date_to_str(const Value& v) {
  if (v.is_null()) return v;
  return Value::str(format_date(v.as_date()));
}

Value int_to_str(const Value& v) {
  if (v.is_null()) return v;
  return Value::str(std::to_string(v.as_int()));
}

Value cast_to_int(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
    case ValueKind::Int:
      return v;
    case ValueKind::Real:
      return Value::integer(v.as_real().trunc());
    case ValueKind::Str:
      return str_to_int(v);
    case ValueKind::Date:
      return Value::integer(date_to_int(v.as_date()));
  }
  return Value::null();
}

Value cast_to_real(const Value& v) {
  if (v.is_null() || v.is_real()) return v;
  Value i = cast_to_int(v);
  return Value::real(Rational(i.as_int()));
}

Value cast_to_str(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
    case ValueKind::Str:
      return v;
    case ValueKind::Int:
      return int_to_str(v);
    case ValueKind::Real:
      return Value::str(v.as_real().to_string());
    case ValueKind::Date:
      return date_to_str(v);
  }
  return Value::null();
}

Value cast_to_date(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
    case ValueKind::Date:
      return v;
    case ValueKind::Int:
    case ValueKind::Real:
      return int_to_date(v);
    case ValueKind::Str:
      return str_to_date(v);
  }
  return Value::null();
}

Value substr(const Value& s, const Value& start, const Value& length) {
  if (s.is_null() || start.is_null() || length.is_null()) return Value::null();
  auto as_index = [](const Value& v) -> std::optional<int64_t> {
    if (v.is_int()) return v.as_int();
    if (v.is_real()) return v.as_real().trunc();
    return std::nullopt;
  };
  auto p1o = as_index(start);
  auto p2o = as_index(length);
  if (!p1o || !p2o) return Value::null();
  std::string str = cast_to_str(s).as_str();
  // Clamp so the arithmetic below cannot overflow.
  constexpr int64_t kClamp = int64_t{1} << 60;
  int64_t p1 = std::clamp<int64_t>(*p1o, -kClamp, kClamp);
  int64_t p2 = std::clamp<int64_t>(*p2o, -kClamp, kClamp);
  if (p2 <= 0) return Value::str("");
  int64_t len = static_cast<int64_t>(str.size());
  if (p1 < 0) {
    p1 += len;
    if (p1 < 0) {
      p2 += p1;
      if (p2 < 0) p2 = 0;
      p1 = 0;
    }
  } else if (p1 > 0) {
    --p1;
  } else {
    --p2;
  }
  if (p1 >= len) return Value::str("");
  if (p1 + p2 > len) p2 = len - p1;
  return Value::str(str.substr(static_cast<size_t>(p1), static_cast<size_t>(p2)));
}

Value strftime(DatePart part, const Value& v) {
  Value d = cast_to_date(v);
  if (d.is_null()) return d;
  const Date& date = d.as_date();
  switch (part) {
    case DatePart::Year:
      return Value::integer(date.year);
    case DatePart::Month:
      return Value::integer(date.month);
    case DatePart::Day:
      return Value::integer(date.day);
  }
  return Value::null();
}

Value strftime(std::string_view format, const Value& v) {
  if (format == "%Y") return strftime(DatePart::Year, v);
  if (format == "%m" || format == "%M") return strftime(DatePart::Month, v);
  if (format == "%d") return strftime(DatePart::Day, v);
  throw EvalError("unsupported strftime format '" + std::string(format) + "'");
}

Rational julian_day(const Date& date) {
  int64_t y = date.year, m = date.month;
  if (m <= 2) {
    y -= 1;
    m += 12;
  }
  int64_t c = 2 - floor_div(y, 100) + floor_div(y, 400);
  int64_t a1 = floor_div(36525 * (y + 4716), 100);
  int64_t a2 = floor_div(306001 * (m + 1), 10000);
  int64_t whole = a1 + a2 + date.day + c - 1524;
  return Rational(2 * whole - 1, 2);
}

Rational julian_day(const Value& v) {
  if (!v.is_date()) {
    throw DomainError(std::string("julian day of a non-date value (") + value_kind_name(v.kind()) + ")");
  }
  return julian_day(v.as_date());
}

namespace {

char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool like_impl(std::string_view p, std::string_view s) {
  // dp[j]: pattern prefix matches s prefix of length j.
  std::vector<char> dp(s.size() + 1, 0), next(s.size() + 1, 0);
  dp[0] = 1;
  for (char pc : p) {
    std::fill(next.begin(), next.end(), 0);
    if (pc == '%') {
      char any = 0;
      for (size_t j = 0; j <= s.size(); ++j) {
        any = any || dp[j];
        next[j] = any;
      }
    } else {
      for (size_t j = 1; j <= s.size(); ++j) {
        if (dp[j - 1] && (pc == '_' || fold(pc) == fold(s[j - 1]))) next[j] = 1;
      }
    }
    dp.swap(next);
  }
  return dp[s.size()] != 0;
}

}  // namespace

TriBool like_match(std::string_view pattern, const Value& v) {
  if (v.is_null()) return TriBool::Unknown;
  return tri(like_impl(pattern, cast_to_str(v).as_str()));
}

TriBool prefix_of(std::string_view prefix, const Value& v) {
  if (v.is_null()) return TriBool::Unknown;
  std::string s = cast_to_str(v).as_str();
  return tri(s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0);
}

TriBool suffix_of(std::string_view suffix, const Value& v) {
  if (v.is_null()) return TriBool::Unknown;
  std::string s = cast_to_str(v).as_str();
  return tri(s.size() >= suffix.size() &&
             s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0);
}

namespace {

TriBool from_order(CmpOp op, int c) {
  switch (op) {
    case CmpOp::Eq:
      return tri(c == 0);
    case CmpOp::Ne:
      return tri(c != 0);
    case CmpOp::Lt:
      return tri(c < 0);
    case CmpOp::Le:
      return tri(c <= 0);
    case CmpOp::Gt:
      return tri(c > 0);
    case CmpOp::Ge:
      return tri(c >= 0);
  }
  return TriBool::Unknown;
}

int sign(std::strong_ordering o) { return o < 0 ? -1 : (o > 0 ? 1 : 0); }

std::string text_of(const Value& v) { return v.is_date() ? format_date(v.as_date()) : v.as_str(); }

}  // namespace

TriBool compare(CmpOp op, const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return TriBool::Unknown;
  bool an = a.is_numeric(), bn = b.is_numeric();
  if (an && bn) return from_order(op, sign(a.numeric() <=> b.numeric()));
  if (!an && !bn) {
    if (a.is_date() && b.is_date()) return from_order(op, sign(a.as_date() <=> b.as_date()));
    int c = text_of(a).compare(text_of(b));
    return from_order(op, c < 0 ? -1 : (c > 0 ? 1 : 0));
  }
  // One numeric side, one text-like side.
  const Value& text = an ? b : a;
  int c;  // numeric side relative to text side
  if (text.is_str() && is_int_literal(text.as_str())) {
    const Value& num = an ? a : b;
    c = sign(num.numeric() <=> Rational(str_to_int(text.as_str())));
  } else {
    c = -1;
  }
  return from_order(op, an ? c : -c);
}

namespace {

Value numeric_operand(const Value& v) {
  if (v.is_numeric() || v.is_null()) return v;
  return cast_to_int(v);
}

int64_t checked(__int128 v) {
  if (v > std::numeric_limits<int64_t>::max() || v < std::numeric_limits<int64_t>::min()) {
    throw EvalError("integer overflow");
  }
  return static_cast<int64_t>(v);
}

}  // namespace

Value arith(ArithOp op, const Value& a0, const Value& b0, ExprType result) {
  if (a0.is_null() || b0.is_null()) return Value::null();
  Value a = numeric_operand(a0), b = numeric_operand(b0);
  if (op == ArithOp::Mod) {
    int64_t x = cast_to_int(a).as_int(), y = cast_to_int(b).as_int();
    if (y == 0) return Value::null();
    if (y == -1) return Value::integer(0);
    return Value::integer(x % y);
  }
  if (result == ExprType::Real || a.is_real() || b.is_real()) {
    Rational x = a.numeric(), y = b.numeric();
    switch (op) {
      case ArithOp::Add:
        return Value::real(x + y);
      case ArithOp::Sub:
        return Value::real(x - y);
      case ArithOp::Mul:
        return Value::real(x * y);
      case ArithOp::Div:
        if (y == Rational(0)) return Value::null();
        return Value::real(x / y);
      case ArithOp::Mod:
        break;
    }
    return Value::null();
  }
  __int128 x = a.as_int(), y = b.as_int();
  switch (op) {
    case ArithOp::Add:
      return Value::integer(checked(x + y));
    case ArithOp::Sub:
      return Value::integer(checked(x - y));
    case ArithOp::Mul:
      return Value::integer(checked(x * y));
    case ArithOp::Div:
      if (y == 0) return Value::null();
      return Value::integer(checked(x / y));
    case ArithOp::Mod:
      break;
  }
  return Value::null();
}

TriBool truthiness(const Value& v) {
  if (v.is_null()) return TriBool::Unknown;
  if (v.is_real()) return tri(v.as_real() != Rational(0));
  return tri(cast_to_int(v).as_int() != 0);
}

Value coerce_to_type(const Value& v, ExprType t) {
  if (t == ExprType::Real && v.is_int()) return Value::real(Rational(v.as_int()));
  return v;
}

}  // namespace sqleq
