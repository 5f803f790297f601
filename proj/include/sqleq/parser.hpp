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

#ifndef SQLEQ_PARSER_HPP_
#define SQLEQ_PARSER_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sqleq/ast.hpp"
#include "sqleq/schema.hpp"

namespace sqleq {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Unsupported, UnresolvedName };

  ParseError(Kind kind, std::string reason, size_t offset, int line, int column,
             std::string feature = {});

  Kind kind() const { return kind_; }
  const std::string& reason() const { return reason_; }
  // Name of the unsupported construct (Kind::Unsupported only).
  const std::string& feature() const { return feature_; }
  size_t offset() const { return offset_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  std::string reason_;
  std::string feature_;
  size_t offset_;
  int line_;
  int column_;
};

const char* parse_error_kind_name(ParseError::Kind k);

struct ParseOptions {
  // When set, constructs outside the subset become Unsupported* marker
  // nodes instead of raising, so feature_scan can list all of them.
  bool tolerant = false;
};

// Parses one SELECT statement (optionally WITH-prefixed, optionally ending
// in ';') and resolves every name against `schema`.
QueryPtr parse_sql(std::string_view text, const DatabaseSchema& schema,
                   const ParseOptions& options = {});

struct SupportReport {
  std::vector<std::string> unsupported;  // offending constructs, in tree order

  bool supported() const { return unsupported.empty(); }
};

SupportReport feature_scan(const Query& q);

// Strict parse if possible; otherwise the tolerant parse's scan. Syntax and
// name errors are reported as a single entry prefixed with the error kind.
SupportReport scan_sql(std::string_view text, const DatabaseSchema& schema);

// Prints SQL that parses back to a structurally identical tree.
std::string to_sql(const Query& q);
std::string to_sql(const Expr& e);

}  // namespace sqleq

#endif  // SQLEQ_PARSER_HPP_
