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

#ifndef SQLEQ_VALUE_HPP_
#define SQLEQ_VALUE_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sqleq {

inline constexpr int64_t kMinYear = 0;
inline constexpr int64_t kMaxYear = 9999;

// Raised by concrete evaluation (integer overflow, malformed input).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a date-only operation receives something else.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Date {
  int64_t year = 0;
  int64_t month = 1;
  int64_t day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;
};

bool is_leap_year(int64_t year);
int64_t days_in_month(int64_t year, int64_t month);
bool is_valid_date(int64_t year, int64_t month, int64_t day);

// "YYYY-MM-DD" with the year padded to four digits.
std::string format_date(const Date& d);

// Parses exactly "DDDD-DD-DD"; returns nullopt for other shapes or an
// invalid calendar date.
std::optional<Date> parse_iso_date(std::string_view s);

// Exact rational number with a positive, reduced denominator.
class Rational {
 public:
  Rational() = default;
  Rational(int64_t num, int64_t den = 1);  // NOLINT

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  // Truncates toward zero.
  int64_t trunc() const { return num_ / den_; }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational operator-() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b);

  // Decimal text when the expansion terminates, "num/den" otherwise.
  std::string to_string() const;

  // Parses "123", "-4.25".
  static std::optional<Rational> parse_decimal(std::string_view s);

 private:
  int64_t num_ = 0;
  int64_t den_ = 1;
};

enum class ValueKind { Null, Int, Real, Str, Date };

const char* value_kind_name(ValueKind k);

class Value {
 public:
  Value() = default;

  static Value null() { return Value(); }
  static Value integer(int64_t v) { return Value(Rep(v)); }
  static Value real(Rational r) { return Value(Rep(r)); }
  static Value str(std::string s) { return Value(Rep(std::move(s))); }
  static Value date(Date d) { return Value(Rep(d)); }
  static Value date(int64_t y, int64_t m, int64_t d) {
    return Value(Rep(Date{y, m, d}));
  }

  ValueKind kind() const { return static_cast<ValueKind>(rep_.index()); }
  bool is_null() const { return kind() == ValueKind::Null; }
  bool is_int() const { return kind() == ValueKind::Int; }
  bool is_real() const { return kind() == ValueKind::Real; }
  bool is_str() const { return kind() == ValueKind::Str; }
  bool is_date() const { return kind() == ValueKind::Date; }
  bool is_numeric() const { return is_int() || is_real(); }

  int64_t as_int() const { return std::get<int64_t>(rep_); }
  const Rational& as_real() const { return std::get<Rational>(rep_); }
  const std::string& as_str() const { return std::get<std::string>(rep_); }
  const Date& as_date() const { return std::get<Date>(rep_); }

  // Int and Real viewed as a rational.
  Rational numeric() const;

  // Same kind and same payload.
  friend bool operator==(const Value&, const Value&) = default;

  // SQL-ish rendering: NULL, 12, 6.5, 'a''b', DATE '1997-01-27'.
  std::string to_string() const;

 private:
  using Rep = std::variant<std::monostate, int64_t, Rational, std::string, Date>;
  explicit Value(Rep r) : rep_(std::move(r)) {}
  Rep rep_;
};

using Tuple = std::vector<Value>;

struct Relation {
  size_t arity = 0;
  std::vector<Tuple> rows;

  bool empty() const { return rows.empty(); }
  size_t size() const { return rows.size(); }
};

// Table name -> rows. Table names are lower-case.
struct ConcreteDb {
  std::map<std::string, Relation> tables;

  const Relation& table(const std::string& name) const;
  size_t max_rows() const;
};

// Result-row identity used by set comparison: NULL matches NULL, Int and Real
// compare numerically, a Date matches the string holding its ISO text.
std::string identity_key(const Value& v);
std::string row_identity_key(const Tuple& t);
bool same_identity(const Value& a, const Value& b);

// Sort order used by ORDER BY: NULL < numbers < text (dates are text).
int sort_compare(const Value& a, const Value& b);
int sort_compare_rows(const Tuple& a, const Tuple& b);

}  // namespace sqleq

#endif  // SQLEQ_VALUE_HPP_
