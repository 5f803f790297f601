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

// Stand-in for `sqlite3 -batch -bail -quote DB`: runs the SQL script on
// stdin and prints every result row in quote mode. Flags are accepted and
// ignored; the last positional argument names the database (default
// ":memory:").

#include <sqlite3.h>

#include <iostream>
#include <iterator>
#include <string>

namespace {

void print_value(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_NULL:
      std::cout << "NULL";
      break;
    case SQLITE_INTEGER:
      std::cout << sqlite3_column_int64(stmt, i);
      break;
    case SQLITE_FLOAT: {
      char* s = sqlite3_mprintf("%!.15g", sqlite3_column_double(stmt, i));
      std::cout << s;
      sqlite3_free(s);
      break;
    }
    case SQLITE_TEXT: {
      const char* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
      int n = sqlite3_column_bytes(stmt, i);
      std::cout << '\'';
      for (int k = 0; k < n; ++k) {
        if (p[k] == '\'') std::cout << '\'';
        std::cout << p[k];
      }
      std::cout << '\'';
      break;
    }
    default: {
      const auto* p = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, i));
      int n = sqlite3_column_bytes(stmt, i);
      static const char* hex = "0123456789abcdef";
      std::cout << "X'";
      for (int k = 0; k < n; ++k) std::cout << hex[p[k] >> 4] << hex[p[k] & 15];
      std::cout << '\'';
      break;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string path = ":memory:";
  for (int i = 1; i < argc; ++i) {
    if (argv[i][0] != '-') path = argv[i];
  }
  sqlite3* db = nullptr;
  if (sqlite3_open(path.c_str(), &db) != SQLITE_OK) {
    std::cerr << "Error: cannot open " << path << "\n";
    return 1;
  }
  std::string sql((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
  const char* tail = sql.c_str();
  while (*tail != '\0') {
    sqlite3_stmt* stmt = nullptr;
    const char* next = nullptr;
    if (sqlite3_prepare_v2(db, tail, -1, &stmt, &next) != SQLITE_OK) {
      std::cerr << "Error: " << sqlite3_errmsg(db) << "\n";
      sqlite3_close(db);
      return 1;
    }
    tail = next;
    if (stmt == nullptr) continue;  // whitespace or comment
    int rc = 0;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
      int n = sqlite3_column_count(stmt);
      for (int i = 0; i < n; ++i) {
        if (i) std::cout << ',';
        print_value(stmt, i);
      }
      std::cout << '\n';
    }
    if (rc != SQLITE_DONE) {
      std::cerr << "Error: " << sqlite3_errmsg(db) << "\n";
      sqlite3_finalize(stmt);
      sqlite3_close(db);
      return 1;
    }
    sqlite3_finalize(stmt);
  }
  sqlite3_close(db);
  return 0;
}
