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

#include "sqleq/value.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

namespace sqleq {

bool is_leap_year(int64_t y) {
  return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

int64_t days_in_month(int64_t y, int64_t m) {
  switch (m) {
    case 2:
      return is_leap_year(y) ? 29 : 28;
    case 4:
    case 6:
    case 9:
    case 11:
      return 30;
    default:
      return 31;
  }
}

bool is_valid_date(int64_t y, int64_t m, int64_t d) {
  if (y < kMinYear || y > kMaxYear) return false;
  if (m < 1 || m > 12) return false;
  return d >= 1 && d <= days_in_month(y, m);
}

std::string format_date(const Date& d) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02lld-%02lld",
                static_cast<long long>(d.year), static_cast<long long>(d.month),
                static_cast<long long>(d.day));
  return buf;
}

std::optional<Date> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [&](size_t pos, size_t n) -> std::optional<int64_t> {
    int64_t v = 0;
    for (size_t i = pos; i < pos + n; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  if (!is_valid_date(*y, *m, *d)) return std::nullopt;
  return Date{*y, *m, *d};
}

namespace {

int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<int64_t>::max() ||
      v < std::numeric_limits<int64_t>::min()) {
    throw EvalError("integer overflow");
  }
  return static_cast<int64_t>(v);
}

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make_rational(__int128 num, __int128 den) {
  if (den == 0) throw EvalError("division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(int64_t num, int64_t den) {
  if (den == 0) throw EvalError("division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

Rational Rational::operator+(const Rational& o) const {
  return make_rational(static_cast<__int128>(num_) * o.den_ +
                           static_cast<__int128>(o.num_) * den_,
                       static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return make_rational(static_cast<__int128>(num_) * o.num_,
                       static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  return make_rational(static_cast<__int128>(num_) * o.den_,
                       static_cast<__int128>(den_) * o.num_);
}

Rational Rational::operator-() const {
  return make_rational(-static_cast<__int128>(num_), den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  __int128 l = static_cast<__int128>(a.num_) * b.den_;
  __int128 r = static_cast<__int128>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  int64_t d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
  int digits = std::max(twos, fives);
  __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  __int128 scaled = static_cast<__int128>(num_) * (scale / den_);
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string frac;
  __int128 int_part = scaled / scale;
  __int128 rem = scaled % scale;
  for (int i = 0; i < digits; ++i) {
    frac.insert(frac.begin(), static_cast<char>('0' + static_cast<int>(rem % 10)));
    rem /= 10;
  }
  std::string ip;
  if (int_part == 0) ip = "0";
  while (int_part > 0) {
    ip.insert(ip.begin(), static_cast<char>('0' + static_cast<int>(int_part % 10)));
    int_part /= 10;
  }
  return (neg ? "-" : "") + ip + "." + frac;
}

std::optional<Rational> Rational::parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  size_t i = 0;
  if (s[0] == '-') {
    neg = true;
    i = 1;
  }
  __int128 num = 0, den = 1;
  bool seen_digit = false, seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    if (num > (static_cast<__int128>(1) << 100) || den > (static_cast<__int128>(1) << 100)) {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  try {
    return make_rational(neg ? -num : num, den);
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

const char* value_kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Null:
      return "null";
    case ValueKind::Int:
      return "int";
    case ValueKind::Real:
      return "real";
    case ValueKind::Str:
      return "str";
    case ValueKind::Date:
      return "date";
  }
  return "?";
}

Rational Value::numeric() const {
  if (is_int()) return Rational(as_int());
  return as_real();
}

std::string Value::to_string() const {
  switch (kind()) {
    case ValueKind::Null:
      return "NULL";
    case ValueKind::Int:
      return std::to_string(as_int());
    case ValueKind::Real:
      return as_real().to_string();
    case ValueKind::Str: {
      std::string out = "'";
      for (char c : as_str()) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
    case ValueKind::Date:
      return "DATE '" + format_date(as_date()) + "'";
  }
  return "?";
}

const Relation& ConcreteDb::table(const std::string& name) const {
  auto it = tables.find(name);
  if (it == tables.end()) throw EvalError("database has no table '" + name + "'");
  return it->second;
}

size_t ConcreteDb::max_rows() const {
  size_t n = 0;
  for (const auto& [_, rel] : tables) n = std::max(n, rel.rows.size());
  return n;
}

std::string identity_key(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
      return "N";
    case ValueKind::Int:
    case ValueKind::Real:
      return "n" + v.numeric().to_string();
    case ValueKind::Str:
      return "s" + v.as_str();
    case ValueKind::Date:
      return "s" + format_date(v.as_date());
  }
  return "?";
}

std::string row_identity_key(const Tuple& t) {
  std::string out;
  for (const Value& v : t) {
    std::string k = identity_key(v);
    out += std::to_string(k.size());
    out += ':';
    out += k;
  }
  return out;
}

bool same_identity(const Value& a, const Value& b) {
  return identity_key(a) == identity_key(b);
}

namespace {

int sort_class(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
      return 0;
    case ValueKind::Int:
    case ValueKind::Real:
      return 1;
    default:
      return 2;
  }
}

std::string text_of(const Value& v) {
  return v.is_date() ? format_date(v.as_date()) : v.as_str();
}

}  // namespace

int sort_compare(const Value& a, const Value& b) {
  int ca = sort_class(a), cb = sort_class(b);
  if (ca != cb) return ca < cb ? -1 : 1;
  if (ca == 0) return 0;
  if (ca == 1) {
    auto c = a.numeric() <=> b.numeric();
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  int c = text_of(a).compare(text_of(b));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int sort_compare_rows(const Tuple& a, const Tuple& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    int c = sort_compare(a[i], b[i]);
    if (c != 0) return c;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

}  // namespace sqleq
