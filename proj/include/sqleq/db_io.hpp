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

// Concrete database files.
//
// The structured dump is JSON:
//
//   {"tables": {"r": [[{"int": 2}, {"date": "1970-01-01"}], ...], ...}}
//
// with one array per row in column order and the string "null" for NULL;
// other scalars are tagged {"int": n}, {"str": s} or {"date": "YYYY-MM-DD"}.
// Tables appear in schema order. The INSERT script creates every table
// (dates as TEXT) and inserts the rows in order.

#ifndef SQLEQ_DB_IO_HPP_
#define SQLEQ_DB_IO_HPP_

#include <stdexcept>
#include <string>

#include "sqleq/schema.hpp"
#include "sqleq/value.hpp"

namespace sqleq {

class MalformedDump : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string dump_json(const ConcreteDb& db, const DatabaseSchema& schema);
ConcreteDb load_dump(const std::string& text, const DatabaseSchema& schema);
ConcreteDb load_dump_file(const std::string& path, const DatabaseSchema& schema);

// SQL literal for a stored value; dates become ISO text.
std::string sql_literal(const Value& v);

std::string create_script(const DatabaseSchema& schema);
std::string insert_script(const ConcreteDb& db, const DatabaseSchema& schema, bool with_create = true);

// Reads INSERT INTO ... VALUES statements (other statements are skipped).
// Text stored in a date column must be an ISO date.
ConcreteDb load_insert_script(const std::string& text, const DatabaseSchema& schema);

// Stable content hash of the canonical dump, 16 hex digits.
std::string dump_hash(const ConcreteDb& db, const DatabaseSchema& schema);

}  // namespace sqleq

#endif  // SQLEQ_DB_IO_HPP_
