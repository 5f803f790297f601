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

// Concrete scalar semantics shared by the evaluator and the tests. The
// symbolic encoder implements the same rules over solver terms.

#ifndef SQLEQ_SCALAR_HPP_
#define SQLEQ_SCALAR_HPP_

#include <string>
#include <string_view>

#include "sqleq/ast.hpp"
#include "sqleq/value.hpp"

namespace sqleq {

// SQL three-valued truth.
enum class TriBool { False, True, Unknown };

inline TriBool tri(bool b) { return b ? TriBool::True : TriBool::False; }
TriBool tri_and(TriBool a, TriBool b);
TriBool tri_or(TriBool a, TriBool b);
TriBool tri_not(TriBool a);
const char* tri_name(TriBool t);

// Casts. All are total and NULL-propagating.
Value cast_to_int(const Value& v);
Value cast_to_real(const Value& v);
Value cast_to_str(const Value& v);
Value cast_to_date(const Value& v);

// "-?[0-9]+" gives that integer; anything else gives 0. Throws EvalError
// when the digits do not fit in 64 bits.
int64_t str_to_int(std::string_view s);
// True iff `s` is an optional '-' followed by one or more digits.
bool is_int_literal(std::string_view s);
Value str_to_int(const Value& v);
int64_t date_to_int(const Date& d);
Value int_to_date(const Value& v);
Value str_to_date(const Value& v);
Value date_to_str(const Value& v);
Value int_to_str(const Value& v);

// SQLite substr over bytes, 1-indexed; length <= 0 gives "". A string (or
// date) typed start or length gives NULL.
Value substr(const Value& s, const Value& start, const Value& length);

// Year, month or day of cast_to_date(v) as an integer. `format` is one of
// "%Y", "%m" (alias "%M") or "%d".
Value strftime(DatePart part, const Value& v);
Value strftime(std::string_view format, const Value& v);

// Julian day number of a date. Throws DomainError on a non-date.
Rational julian_day(const Value& v);
Rational julian_day(const Date& d);

// Pattern matching. NULL subjects give Unknown; non-string subjects are
// matched through cast_to_str. LIKE is ASCII case-insensitive.
TriBool like_match(std::string_view pattern, const Value& v);
TriBool prefix_of(std::string_view prefix, const Value& v);
TriBool suffix_of(std::string_view suffix, const Value& v);

// Comparison after coercion. NULL on either side gives Unknown. Mixed
// numeric/text compares numerically if the text is an integer literal,
// otherwise numbers sort before text; dates compare as their ISO text.
TriBool compare(CmpOp op, const Value& a, const Value& b);

// Arithmetic with static result type `result` (Int or Real). Text and
// date operands go through cast_to_int. Integer / and % truncate toward
// zero; division or modulo by zero gives NULL.
Value arith(ArithOp op, const Value& a, const Value& b, ExprType result);

// Boolean context: NULL is Unknown, otherwise nonzero after cast_to_int
// (reals are tested directly).
TriBool truthiness(const Value& v);

// Converts a value to the static type `t` of its column (Int -> Real
// widening); other values pass through.
Value coerce_to_type(const Value& v, ExprType t);

}  // namespace sqleq

#endif  // SQLEQ_SCALAR_HPP_
