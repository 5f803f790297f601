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

// Exhaustive enumeration of small databases, used as ground truth.

#ifndef SQLEQ_ORACLE_HPP_
#define SQLEQ_ORACLE_HPP_

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqleq/ast.hpp"
#include "sqleq/encoder.hpp"
#include "sqleq/schema.hpp"
#include "sqleq/value.hpp"

namespace sqleq {

class CeilingExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DomainSpec {
  std::vector<int64_t> ints = {0, 1, 2};
  std::vector<std::string> strs = {"", "a", "+-", "-"};
  std::vector<Date> dates = {Date{2000, 1, 1}};
  int k = 1;
  uint64_t ceiling = 10'000'000;

  // Throws std::invalid_argument on empty pools or invalid dates.
  void validate() const;
};

// Same pools, in the encoder's form.
ValuePools to_pools(const DomainSpec& spec);

// Number of candidate databases before key filtering. Saturates at
// UINT64_MAX.
uint64_t candidate_count(const DatabaseSchema& schema, const DomainSpec& spec);

// Calls `visit` for every database with 0..k rows per table, cells drawn
// from the pools (NULL in nullable, non-key columns). Rows are ordered
// sequences, duplicates included; databases repeating a primary key are
// skipped. Enumeration stops early when `visit` returns false. Returns the
// number of databases visited.
uint64_t enumerate_dbs(const DatabaseSchema& schema, const DomainSpec& spec,
                       const std::function<bool(const ConcreteDb&)>& visit);

struct OracleVerdict {
  bool equivalent = true;
  std::optional<ConcreteDb> witness;
  uint64_t checked = 0;
};

// First enumerated database where the two results differ. Evaluation errors
// propagate. With `exclude_degenerate`, degenerate disagreements are skipped.
OracleVerdict oracle_check(const DatabaseSchema& schema, const Query& q1, const Query& q2, const DomainSpec& spec,
                           bool exclude_degenerate = true);

}  // namespace sqleq

#endif  // SQLEQ_ORACLE_HPP_
