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

// Symbolic encoding of queries over bounded databases.
//
// A symbolic relation is a fixed-length list of tuples, each carrying a
// `del` term; a tuple is present iff its `del` is false. Values carry a
// null flag plus a payload whose sort follows the static type: Int and
// Real use arithmetic sorts, Str the string sort, Date a (y, m, d) triple.
// Predicates are encoded as a pair (t, f) for SQL's three truth values.

#ifndef SQLEQ_ENCODER_HPP_
#define SQLEQ_ENCODER_HPP_

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqleq/ast.hpp"
#include "sqleq/schema.hpp"
#include "sqleq/value.hpp"
#include "z3++.h"

namespace sqleq {

class EncodeError : public std::runtime_error {
 public:
  enum class Kind { Unsupported, TypeMismatch, ArityMismatch, BadBound };
  EncodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// A derived relation would exceed the configured tuple ceiling.
class BoundOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite value pools used to restrict cells (brute-force comparisons).
struct ValuePools {
  std::vector<int64_t> ints;
  std::vector<std::string> strs;
  std::vector<Date> dates;
  bool include_null = true;
};

struct EncodeOptions {
  size_t ceiling = 64;
  bool exclude_degenerate = true;
  std::optional<ValuePools> domain;
  // Magnitude bound on integer cells and on integers spelled by string
  // cells; string cells are also restricted to printable ASCII.
  int64_t int_bound = int64_t{1} << 53;
};

struct SymValue {
  explicit SymValue(z3::context& c) : null(c), num(c), y(c), m(c), d(c) {}

  ExprType type = ExprType::Null;
  z3::expr null;  // Bool
  z3::expr num;   // Int, Real or String payload
  z3::expr y, m, d;
};

struct SymBool {
  z3::expr t;  // definitely true
  z3::expr f;  // definitely false
};

struct SymTuple {
  std::vector<SymValue> values;
  z3::expr del;
};

struct SymRelation {
  std::vector<ExprType> types;
  std::vector<SymTuple> tuples;

  size_t arity() const { return types.size(); }
};

struct SymDb {
  int k = 0;
  std::map<std::string, SymRelation> tables;
  const DatabaseSchema* schema = nullptr;
  std::vector<z3::expr> vars;  // every allocated base variable
};

struct EncodingResult {
  SymRelation result;
  std::vector<z3::expr> constraints;
};

class Encoder {
 public:
  explicit Encoder(z3::context& ctx, EncodeOptions options = {});
  ~Encoder();
  Encoder(const Encoder&) = delete;
  Encoder& operator=(const Encoder&) = delete;

  // Fresh cells for every table; the well-formedness constraints land in
  // constraints(). Throws EncodeError(BadBound) when k < 1.
  SymDb alloc_symbolic_db(const DatabaseSchema& schema, int k);

  // Throws EncodeError(Unsupported) or BoundOverflow.
  EncodingResult encode_query(const SymDb& db, const Query& q);

  // Column references (depth 0) index `row`.
  SymValue encode_expr(const SymTuple& row, const Expr& e);
  SymBool encode_pred(const SymTuple& row, const Expr& e);

  SymValue constant(const Value& v);

  // Mutual containment over present tuples.
  z3::expr set_equiv_constraint(const SymRelation& a, const SymRelation& b);
  // One side empty and the other present with only all-NULL rows.
  z3::expr degenerate(const SymRelation& a, const SymRelation& b);
  // Identity equality: NULL matches NULL.
  z3::expr identity_eq(const SymValue& a, const SymValue& b);

  // Copies `r` onto fresh variables tied to it by equalities.
  SymRelation materialize(const SymRelation& r, const std::string& prefix);

  // Calendar validity of a (y, m, d) triple.
  z3::expr date_valid(const z3::expr& y, const z3::expr& m, const z3::expr& d);

  const std::vector<z3::expr>& constraints() const;
  z3::context& ctx();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Formula {
  std::vector<z3::expr> assertions;
  SymDb db;
  SymRelation r1, r2;
};

// Satisfiable iff some database with at most k tuples per table makes the
// two queries return different row sets.
Formula nonequivalence_formula(z3::context& ctx, const DatabaseSchema& schema, const Query& q1,
                               const Query& q2, int k, const EncodeOptions& options = {});

}  // namespace sqleq

#endif  // SQLEQ_ENCODER_HPP_
