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

#include "sqleq/engine.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqleq/db_io.hpp"

extern char** environ;

namespace sqleq {

namespace fs = std::filesystem;

std::optional<std::string> locate_sqlite() {
  if (const char* env = std::getenv("SQLEQ_SQLITE"); env != nullptr && *env != '\0') {
    if (::access(env, X_OK) == 0) return std::string(env);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return std::nullopt;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(dir) / "sqlite3";
    if (::access(candidate.c_str(), X_OK) == 0) return candidate.string();
  }
  return std::nullopt;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_name(const std::string& tag) {
  static std::atomic<uint64_t> counter{0};
  return fs::temp_directory_path() /
         ("sqleq-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "." + tag);
}

}  // namespace

Tuple parse_quoted_row(const std::string& line) {
  Tuple row;
  size_t i = 0;
  while (i <= line.size()) {
    if (i < line.size() && line[i] == '\'') {
      std::string s;
      ++i;
      while (i < line.size()) {
        if (line[i] == '\'') {
          if (i + 1 < line.size() && line[i + 1] == '\'') {
            s += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        s += line[i++];
      }
      row.push_back(Value::str(s));
    } else {
      size_t end = line.find(',', i);
      if (end == std::string::npos) end = line.size();
      std::string tok = line.substr(i, end - i);
      i = end;
      if (tok == "NULL") {
        row.push_back(Value::null());
      } else {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (!tok.empty() && ec == std::errc() && p == tok.data() + tok.size()) {
          row.push_back(Value::integer(v));
        } else if (auto r = Rational::parse_decimal(tok)) {
          row.push_back(Value::real(*r));
        } else {
          row.push_back(Value::str(tok));
        }
      }
    }
    if (i >= line.size()) break;
    if (line[i] == ',') ++i;
  }
  return row;
}

EngineResult run_in_sqlite(const std::string& executable, const DatabaseSchema& schema, const ConcreteDb& db,
                           const std::string& sql) {
  EngineResult out;
  fs::path in_path = scratch_name("sql"), out_path = scratch_name("out"), err_path = scratch_name("err");
  {
    std::ofstream in(in_path, std::ios::binary);
    in << insert_script(db, schema) << sql;
    std::string trimmed = sql;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.pop_back();
    if (trimmed.empty() || trimmed.back() != ';') in << ";";
    in << "\n";
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, in_path.c_str(), O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  posix_spawn_file_actions_addopen(&actions, 2, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  std::vector<std::string> args = {executable, "-batch", "-bail", "-quote", ":memory:"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  int rc = posix_spawn(&pid, executable.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    out.error = "cannot start " + executable;
  } else {
    int status = 0;
    ::waitpid(pid, &status, 0);
    std::string err = read_file(err_path);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0 || !err.empty()) {
      out.error = err.empty() ? "engine exited abnormally" : err;
    } else {
      out.ok = true;
      std::stringstream ss(read_file(out_path));
      std::string line;
      while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        Tuple row = parse_quoted_row(line);
        if (out.rows.rows.empty()) out.rows.arity = row.size();
        out.rows.rows.push_back(std::move(row));
      }
    }
  }
  std::error_code ec;
  fs::remove(in_path, ec);
  fs::remove(out_path, ec);
  fs::remove(err_path, ec);
  return out;
}

}  // namespace sqleq
