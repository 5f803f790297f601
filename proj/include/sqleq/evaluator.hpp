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

// Reference evaluator over concrete databases.

#ifndef SQLEQ_EVALUATOR_HPP_
#define SQLEQ_EVALUATOR_HPP_

#include <string>

#include "sqleq/ast.hpp"
#include "sqleq/scalar.hpp"
#include "sqleq/value.hpp"

namespace sqleq {

// Evaluates `q` over `db`. Row order is meaningful only under ORDER BY;
// ties there are broken by the full row (NULL first), then input order.
// Throws EvalError on unsupported nodes, missing tables or overflow.
Relation eval_query(const ConcreteDb& db, const Query& q);

// Evaluates an expression whose column references (depth 0) index `row`.
// Aggregates are rejected.
Value eval_expr(const Expr& e, const Tuple& row);
TriBool eval_pred(const Expr& e, const Tuple& row);

// Row-set equality: duplicates and order ignored, rows compared by
// identity (NULL equals NULL, 1 equals 1.0, a date equals its ISO text).
bool same_row_set(const Relation& a, const Relation& b);

// One side empty, the other non-empty with only all-NULL rows.
bool is_degenerate_pair(const Relation& a, const Relation& b);

struct ExOutcome {
  int ex = 0;              // 1 iff both results hold the same row set
  std::string diagnostic;  // set when evaluation failed (ex is then 0)
  Relation r1, r2;
};

ExOutcome ex_compare(const Query& q1, const Query& q2, const ConcreteDb& db);
int ex_metric(const Query& q1, const Query& q2, const ConcreteDb& db);

// Renders a relation as aligned text, one row per line.
std::string format_relation(const Relation& r, const std::vector<OutColumn>& columns);

}  // namespace sqleq

#endif  // SQLEQ_EVALUATOR_HPP_
