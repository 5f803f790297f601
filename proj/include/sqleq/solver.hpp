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

// Satisfiability checks and model decoding.

#ifndef SQLEQ_SOLVER_HPP_
#define SQLEQ_SOLVER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "sqleq/encoder.hpp"
#include "sqleq/value.hpp"
#include "z3++.h"

namespace sqleq {

struct SolveBudget {
  double cpu_seconds = 600;
  uint64_t memory_bytes = uint64_t{8} << 30;
};

enum class SolveStatus { Sat, Unsat, Timeout, Unknown };

const char* solve_status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::optional<z3::model> model;  // set iff Sat
  std::string reason;              // Unknown / Timeout detail
  double seconds = 0;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checks `assertions` plus `extra`. The wall-clock budget is enforced both
// through the solver's own timeout and a watchdog that interrupts the
// context; exhaustion yields Timeout.
SolveResult solve(z3::context& ctx, const std::vector<z3::expr>& assertions, const SolveBudget& budget,
                  const std::vector<z3::expr>& extra = {});

// Reads a concrete database out of a model. Deleted tuples are dropped,
// rows keep slot order.
ConcreteDb decode_database(const z3::model& model, const SymDb& db);

// Reads a symbolic relation (e.g. a query result) out of a model, dropping
// deleted tuples. Values follow the relation's static column types.
Relation decode_relation(const z3::model& model, const SymRelation& r);

// Equalities pinning every cell of `db` to the concrete database; slots
// past a table's row count are deleted. Throws DecodeError when a table
// holds more rows than the bound.
std::vector<z3::expr> fix_database(const SymDb& db, const ConcreteDb& concrete);

// A clause excluding the model's assignment to the base variables.
z3::expr blocking_clause(z3::context& ctx, const z3::model& model, const SymDb& db);

// SMT-LIB2 script for the assertions (with check-sat).
std::string to_smtlib(z3::context& ctx, const std::vector<z3::expr>& assertions);

}  // namespace sqleq

#endif  // SQLEQ_SOLVER_HPP_
