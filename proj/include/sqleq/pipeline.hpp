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

// Bounded equivalence checking with counterexample validation,
// cross-checking across methods, and scoring.

#ifndef SQLEQ_PIPELINE_HPP_
#define SQLEQ_PIPELINE_HPP_

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sqleq/ast.hpp"
#include "sqleq/encoder.hpp"
#include "sqleq/schema.hpp"
#include "sqleq/solver.hpp"
#include "sqleq/value.hpp"

namespace sqleq {

enum class Backend { Reference, ExternalEngine };

const char* backend_name(Backend b);

struct TaskConfig {
  int max_bound = 5;
  SolveBudget budget;
  bool exclude_degenerate = true;
  Backend backend = Backend::Reference;
  int spurious_retries = 3;
  size_t ceiling = 64;
  std::optional<ValuePools> domain;
  bool emit_smtlib = false;

  // Throws std::invalid_argument.
  void validate() const;
  std::string cache_key() const;
};

// Both queries of a pair, with their source text when known. The text is
// what the external engine runs; without it the printed AST is used.
struct QueryPair {
  QueryPtr gold;
  QueryPtr gen;
  std::string gold_sql;
  std::string gen_sql;
};

enum class InconclusiveReason { Timeout, Unsupported, BoundOverflow, SpuriousOnly };

const char* inconclusive_reason_name(InconclusiveReason r);

struct BoundCheck {
  enum class Kind { Equivalent, NotEquivalent, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::optional<ConcreteDb> db;
  InconclusiveReason reason = InconclusiveReason::Unsupported;
  std::string detail;
  double seconds = 0;
  std::string smtlib;  // with cfg.emit_smtlib
};

// Encodes, solves and decodes for one bound; no validation.
BoundCheck check_bounded(const DatabaseSchema& schema, const Query& q1, const Query& q2, int k,
                         const SolveBudget& budget, const TaskConfig& cfg);

struct Verdict {
  enum class Kind { EquivalentUpTo, NotEquivalent, Inconclusive };
  Kind kind = Kind::Inconclusive;
  int bound = 0;  // k_max, the bound the witness was found at, or the last bound tried
  std::optional<ConcreteDb> db;
  bool validated = false;
  InconclusiveReason reason = InconclusiveReason::Unsupported;
  std::string detail;
  int spurious = 0;     // models rejected by validation
  double seconds = 0;   // total wall-clock
  std::string smtlib;   // last formula, with cfg.emit_smtlib
};

const char* verdict_kind_name(Verdict::Kind k);
std::string describe(const Verdict& v);

// Keyed by (schema, gold, generated, config).
class VerdictCache {
 public:
  std::optional<Verdict> find(const std::string& key) const;
  void insert(const std::string& key, const Verdict& v);
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Verdict> map_;
};

std::string verdict_cache_key(const DatabaseSchema& schema, const Query& gold, const Query& gen,
                              const TaskConfig& cfg);

// Tries k = 1..K. A model that fails validation is blocked and the same
// bound is retried up to cfg.spurious_retries times.
Verdict eqcheck(const DatabaseSchema& schema, const QueryPair& pair, const TaskConfig& cfg,
                VerdictCache* cache = nullptr);

struct Validation {
  bool validated = false;  // the two queries disagree on db
  std::string diagnostic;  // evaluation or engine error, fallback warning
  Backend used = Backend::Reference;
};

// EX = 0 on db under the backend. The external engine falls back to the
// reference evaluator when no executable is found.
Validation validate_counterexample(const DatabaseSchema& schema, const QueryPair& pair, const ConcreteDb& db,
                                   Backend backend);

// EX on db computed by the external engine; nullopt when it failed.
std::optional<int> engine_ex(const std::string& executable, const DatabaseSchema& schema, const QueryPair& pair,
                             const ConcreteDb& db, std::string* error = nullptr);

struct MethodResult {
  std::string question_id;
  std::string method;
  const DatabaseSchema* schema = nullptr;
  QueryPair pair;
  bool eligible = true;                  // false keeps the entry out of cross-checking
  std::vector<ConcreteDb> own;           // validated counterexamples from eqcheck
  std::vector<ConcreteDb> borrowed;      // added by cross_check
};

// Pools every question's counterexamples and re-checks each method's
// prediction on the pooled databases it does not hold yet. Results are
// sorted by (question_id, method).
void cross_check(std::vector<MethodResult>& results, const TaskConfig& cfg);

struct Outcome {
  std::string question_id;
  std::string method;
  std::optional<bool> ex_pass;  // nullopt: no static database, counted as a pass
  bool verify_fail = false;     // validated counterexample from eqcheck
  bool cc_fail = false;         // counterexample only via cross-checking
};

struct MethodScore {
  std::string method;
  int questions = 0;
  int ex_pass = 0, verify_pass = 0, cc_pass = 0;
  double ex_acc = 0, verify_acc = 0, cc_acc = 0;
  int ex_rank = 0, verify_rank = 0, cc_rank = 0;
};

struct ScoreTable {
  std::vector<MethodScore> methods;  // sorted by name
  // Number of methods whose EX pass was demoted -> number of questions.
  std::map<int, int> verify_histogram;
  std::map<int, int> cc_histogram;
};

ScoreTable score(const std::vector<Outcome>& outcomes);

// Accuracy drop in points when `demoted` of `total` questions lose their pass.
double demotion_drop(int demoted, int total);

}  // namespace sqleq

#endif  // SQLEQ_PIPELINE_HPP_
