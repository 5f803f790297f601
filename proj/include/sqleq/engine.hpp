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

// Runs queries in a separate SQLite process.
//
// The executable is taken from $SQLEQ_SQLITE, else `sqlite3` on PATH. It
// receives the INSERT script and the query on stdin and must behave like
// `sqlite3 -batch -bail -quote`: one line per row, values comma separated
// in SQL literal syntax.

#ifndef SQLEQ_ENGINE_HPP_
#define SQLEQ_ENGINE_HPP_

#include <optional>
#include <string>

#include "sqleq/schema.hpp"
#include "sqleq/value.hpp"

namespace sqleq {

struct EngineResult {
  bool ok = false;
  std::string error;  // stderr or launch failure when !ok
  Relation rows;      // arity is taken from the first row (0 when empty)
};

// Path of the engine executable, or nullopt when none is usable.
std::optional<std::string> locate_sqlite();

EngineResult run_in_sqlite(const std::string& executable, const DatabaseSchema& schema, const ConcreteDb& db,
                           const std::string& sql);

// Parses one line of quote-mode output.
Tuple parse_quoted_row(const std::string& line);

}  // namespace sqleq

#endif  // SQLEQ_ENGINE_HPP_
