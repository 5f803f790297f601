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

#include "sqleq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sqleq/db_io.hpp"
#include "sqleq/engine.hpp"
#include "sqleq/evaluator.hpp"
#include "sqleq/parser.hpp"

namespace sqleq {

const char* backend_name(Backend b) { return b == Backend::Reference ? "reference" : "sqlite"; }

const char* inconclusive_reason_name(InconclusiveReason r) {
  switch (r) {
    case InconclusiveReason::Timeout:
      return "timeout";
    case InconclusiveReason::Unsupported:
      return "unsupported";
    case InconclusiveReason::BoundOverflow:
      return "bound-overflow";
    case InconclusiveReason::SpuriousOnly:
      return "spurious-only";
  }
  return "?";
}

const char* verdict_kind_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::EquivalentUpTo:
      return "equivalent";
    case Verdict::Kind::NotEquivalent:
      return "not-equivalent";
    case Verdict::Kind::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string describe(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::EquivalentUpTo:
      return "equivalent up to k=" + std::to_string(v.bound);
    case Verdict::Kind::NotEquivalent:
      return "not equivalent at k=" + std::to_string(v.bound) + (v.validated ? " (validated)" : " (unvalidated)");
    case Verdict::Kind::Inconclusive: {
      std::string s = std::string("inconclusive: ") + inconclusive_reason_name(v.reason);
      if (!v.detail.empty()) s += " (" + v.detail + ")";
      return s;
    }
  }
  return "?";
}

void TaskConfig::validate() const {
  if (max_bound < 1) throw std::invalid_argument("max bound must be at least 1");
  if (!(budget.cpu_seconds > 0)) throw std::invalid_argument("timeout must be positive");
  if (spurious_retries < 0) throw std::invalid_argument("retry count must be non-negative");
  if (ceiling < 1) throw std::invalid_argument("ceiling must be positive");
}

std::string TaskConfig::cache_key() const {
  std::ostringstream os;
  os << "K=" << max_bound << ";t=" << budget.cpu_seconds << ";deg=" << exclude_degenerate
     << ";be=" << backend_name(backend) << ";r=" << spurious_retries << ";c=" << ceiling;
  if (domain) {
    os << ";dom=";
    for (auto i : domain->ints) os << i << ",";
    os << "|";
    for (const auto& s : domain->strs) os << s.size() << ":" << s << ",";
    os << "|";
    for (const auto& d : domain->dates) os << format_date(d) << ",";
    os << "|" << domain->include_null;
  }
  return os.str();
}

std::optional<Verdict> VerdictCache::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void VerdictCache::insert(const std::string& key, const Verdict& v) {
  std::lock_guard<std::mutex> lock(mu_);
  map_.insert_or_assign(key, v);
}

size_t VerdictCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

std::string verdict_cache_key(const DatabaseSchema& schema, const Query& gold, const Query& gen,
                              const TaskConfig& cfg) {
  return schema_fingerprint(schema) + "\x1f" + dump(gold) + "\x1f" + dump(gen) + "\x1f" + cfg.cache_key();
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

EncodeOptions encode_options(const TaskConfig& cfg) {
  EncodeOptions o;
  o.ceiling = cfg.ceiling;
  o.exclude_degenerate = cfg.exclude_degenerate;
  o.domain = cfg.domain;
  return o;
}

// Failures while building the formula, mapped to a reason.
struct Inconclusive {
  InconclusiveReason reason;
  std::string detail;
};

template <typename F>
std::optional<Inconclusive> guarded(F&& f) {
  try {
    f();
  } catch (const BoundOverflow& e) {
    return Inconclusive{InconclusiveReason::BoundOverflow, e.what()};
  } catch (const EncodeError& e) {
    return Inconclusive{InconclusiveReason::Unsupported, e.what()};
  } catch (const z3::exception& e) {
    return Inconclusive{InconclusiveReason::Unsupported, std::string("solver: ") + e.msg()};
  } catch (const DecodeError& e) {
    return Inconclusive{InconclusiveReason::Unsupported, std::string("decode: ") + e.what()};
  }
  return std::nullopt;
}

Inconclusive from_solver(const SolveResult& r) {
  std::string detail = r.status == SolveStatus::Timeout ? "budget exhausted" : "solver returned unknown";
  if (!r.reason.empty()) detail += ": " + r.reason;
  return {InconclusiveReason::Timeout, detail};
}

std::string sql_of(const std::string& text, const Query& q) { return text.empty() ? to_sql(q) : text; }

}  // namespace

BoundCheck check_bounded(const DatabaseSchema& schema, const Query& q1, const Query& q2, int k,
                         const SolveBudget& budget, const TaskConfig& cfg) {
  BoundCheck out;
  auto start = Clock::now();
  z3::context ctx;
  auto failure = guarded([&] {
    Formula f = nonequivalence_formula(ctx, schema, q1, q2, k, encode_options(cfg));
    if (cfg.emit_smtlib) out.smtlib = to_smtlib(ctx, f.assertions);
    SolveResult r = solve(ctx, f.assertions, budget);
    if (r.status == SolveStatus::Unsat) {
      out.kind = BoundCheck::Kind::Equivalent;
    } else if (r.status == SolveStatus::Sat) {
      out.kind = BoundCheck::Kind::NotEquivalent;
      out.db = decode_database(*r.model, f.db);
    } else {
      Inconclusive i = from_solver(r);
      out.reason = i.reason;
      out.detail = i.detail;
    }
  });
  if (failure) {
    out.kind = BoundCheck::Kind::Inconclusive;
    out.reason = failure->reason;
    out.detail = failure->detail;
  }
  out.seconds = since(start);
  return out;
}

std::optional<int> engine_ex(const std::string& executable, const DatabaseSchema& schema, const QueryPair& pair,
                             const ConcreteDb& db, std::string* error) {
  std::string gold_sql, gen_sql;
  try {
    gold_sql = sql_of(pair.gold_sql, *pair.gold);
    gen_sql = sql_of(pair.gen_sql, *pair.gen);
  } catch (const std::exception& e) {
    if (error) *error = std::string("cannot print query: ") + e.what();
    return std::nullopt;
  }
  EngineResult a = run_in_sqlite(executable, schema, db, gold_sql);
  EngineResult b = run_in_sqlite(executable, schema, db, gen_sql);
  if (!a.ok || !b.ok) {
    if (error) *error = "engine: " + (a.ok ? b.error : a.error);
    return std::nullopt;
  }
  bool arity_ok = a.rows.empty() || b.rows.empty() || a.rows.arity == b.rows.arity;
  return arity_ok && same_row_set(a.rows, b.rows) ? 1 : 0;
}

Validation validate_counterexample(const DatabaseSchema& schema, const QueryPair& pair, const ConcreteDb& db,
                                   Backend backend) {
  Validation v;
  if (backend == Backend::ExternalEngine) {
    if (auto exe = locate_sqlite()) {
      v.used = Backend::ExternalEngine;
      std::string error;
      auto ex = engine_ex(*exe, schema, pair, db, &error);
      v.validated = ex.has_value() && *ex == 0;
      v.diagnostic = error;
      return v;
    }
    static std::once_flag warned;
    std::call_once(warned, [] {
      std::cerr << "warning: no SQLite executable found; validating with the reference evaluator\n";
    });
    v.diagnostic = "engine unavailable, used reference evaluator";
  }
  ExOutcome o = ex_compare(*pair.gen, *pair.gold, db);
  v.used = Backend::Reference;
  v.validated = o.ex == 0 && o.diagnostic.empty();
  if (!o.diagnostic.empty()) v.diagnostic = o.diagnostic;
  return v;
}

Verdict eqcheck(const DatabaseSchema& schema, const QueryPair& pair, const TaskConfig& cfg, VerdictCache* cache) {
  cfg.validate();
  std::string key;
  if (cache != nullptr) {
    key = verdict_cache_key(schema, *pair.gold, *pair.gen, cfg);
    if (auto hit = cache->find(key)) return *hit;
  }
  Verdict v;
  auto start = Clock::now();
  z3::context ctx;
  auto finish = [&](Verdict out) {
    out.seconds = since(start);
    if (cache != nullptr) cache->insert(key, out);
    return out;
  };
  for (int k = 1; k <= cfg.max_bound; ++k) {
    v.bound = k;
    std::optional<Formula> f;
    auto failure = guarded([&] {
      f.emplace(nonequivalence_formula(ctx, schema, *pair.gen, *pair.gold, k, encode_options(cfg)));
      if (cfg.emit_smtlib) v.smtlib = to_smtlib(ctx, f->assertions);
    });
    if (failure) {
      v.kind = Verdict::Kind::Inconclusive;
      v.reason = failure->reason;
      v.detail = failure->detail;
      return finish(v);
    }
    std::vector<z3::expr> blocked;
    int spurious_here = 0;
    while (true) {
      SolveBudget budget = cfg.budget;
      budget.cpu_seconds = cfg.budget.cpu_seconds - since(start);
      if (budget.cpu_seconds <= 0) {
        v.kind = Verdict::Kind::Inconclusive;
        v.reason = InconclusiveReason::Timeout;
        v.detail = "budget exhausted";
        return finish(v);
      }
      SolveResult r = solve(ctx, f->assertions, budget, blocked);
      if (r.status == SolveStatus::Unsat) {
        if (spurious_here > 0) {
          v.kind = Verdict::Kind::Inconclusive;
          v.reason = InconclusiveReason::SpuriousOnly;
          v.detail = "every model at k=" + std::to_string(k) + " failed validation";
          return finish(v);
        }
        break;
      }
      if (r.status != SolveStatus::Sat) {
        Inconclusive i = from_solver(r);
        v.kind = Verdict::Kind::Inconclusive;
        v.reason = i.reason;
        v.detail = i.detail;
        return finish(v);
      }
      std::optional<ConcreteDb> db;
      auto decode_failure = guarded([&] { db = decode_database(*r.model, f->db); });
      if (decode_failure) {
        v.kind = Verdict::Kind::Inconclusive;
        v.reason = decode_failure->reason;
        v.detail = decode_failure->detail;
        return finish(v);
      }
      Validation val = validate_counterexample(schema, pair, *db, cfg.backend);
      if (val.validated) {
        v.kind = Verdict::Kind::NotEquivalent;
        v.db = std::move(db);
        v.validated = true;
        return finish(v);
      }
      ++v.spurious;
      ++spurious_here;
      if (spurious_here > cfg.spurious_retries) {
        v.kind = Verdict::Kind::Inconclusive;
        v.reason = InconclusiveReason::SpuriousOnly;
        v.detail = std::to_string(spurious_here) + " spurious model(s) at k=" + std::to_string(k);
        if (!val.diagnostic.empty()) v.detail += "; " + val.diagnostic;
        return finish(v);
      }
      blocked.push_back(blocking_clause(ctx, *r.model, f->db));
    }
  }
  v.kind = Verdict::Kind::EquivalentUpTo;
  v.bound = cfg.max_bound;
  return finish(v);
}

void cross_check(std::vector<MethodResult>& results, const TaskConfig& cfg) {
  std::sort(results.begin(), results.end(), [](const MethodResult& a, const MethodResult& b) {
    return std::tie(a.question_id, a.method) < std::tie(b.question_id, b.method);
  });
  size_t i = 0;
  while (i < results.size()) {
    size_t j = i;
    while (j < results.size() && results[j].question_id == results[i].question_id) ++j;
    // Pool for this question, deduplicated by content.
    std::vector<std::pair<std::string, const ConcreteDb*>> pool;
    std::set<std::string> seen;
    for (size_t m = i; m < j; ++m) {
      if (!results[m].eligible || results[m].schema == nullptr) continue;
      for (const auto& db : results[m].own) {
        std::string h = dump_hash(db, *results[m].schema);
        if (seen.insert(h).second) pool.emplace_back(h, &db);
      }
    }
    std::vector<std::vector<ConcreteDb>> additions(j - i);
    for (size_t m = i; m < j; ++m) {
      MethodResult& r = results[m];
      if (!r.eligible || r.schema == nullptr || !r.pair.gen || !r.pair.gold) continue;
      std::set<std::string> held;
      for (const auto& db : r.own) held.insert(dump_hash(db, *r.schema));
      for (const auto& db : r.borrowed) held.insert(dump_hash(db, *r.schema));
      for (const auto& [h, db] : pool) {
        if (held.count(h)) continue;
        if (validate_counterexample(*r.schema, r.pair, *db, cfg.backend).validated) additions[m - i].push_back(*db);
      }
    }
    for (size_t m = i; m < j; ++m) {
      for (auto& db : additions[m - i]) results[m].borrowed.push_back(std::move(db));
    }
    i = j;
  }
}

ScoreTable score(const std::vector<Outcome>& outcomes) {
  ScoreTable t;
  std::map<std::string, MethodScore> by_method;
  std::map<std::string, std::pair<int, int>> per_question;
  for (const auto& o : outcomes) {
    MethodScore& m = by_method[o.method];
    m.method = o.method;
    ++m.questions;
    bool ex = o.ex_pass.value_or(true);
    bool verify = ex && !o.verify_fail;
    bool cc = verify && !o.cc_fail;
    m.ex_pass += ex;
    m.verify_pass += verify;
    m.cc_pass += cc;
    auto& q = per_question[o.question_id];
    if (ex && !verify) ++q.first;
    if (ex && !cc) ++q.second;
  }
  for (auto& [_, m] : by_method) {
    auto pct = [&](int n) { return m.questions == 0 ? 0.0 : 100.0 * n / m.questions; };
    m.ex_acc = pct(m.ex_pass);
    m.verify_acc = pct(m.verify_pass);
    m.cc_acc = pct(m.cc_pass);
    t.methods.push_back(m);
  }
  auto rank = [&](double MethodScore::*acc, int MethodScore::*out) {
    std::vector<size_t> order(t.methods.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return t.methods[a].*acc > t.methods[b].*acc; });
    for (size_t r = 0; r < order.size(); ++r) t.methods[order[r]].*out = static_cast<int>(r + 1);
  };
  rank(&MethodScore::ex_acc, &MethodScore::ex_rank);
  rank(&MethodScore::verify_acc, &MethodScore::verify_rank);
  rank(&MethodScore::cc_acc, &MethodScore::cc_rank);
  for (const auto& [_, q] : per_question) {
    if (q.first > 0) ++t.verify_histogram[q.first];
    if (q.second > 0) ++t.cc_histogram[q.second];
  }
  return t;
}

double demotion_drop(int demoted, int total) { return total == 0 ? 0.0 : 100.0 * demoted / total; }

}  // namespace sqleq
