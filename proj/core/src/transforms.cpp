// Copyright 2026 The Lineage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lineage/transforms.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lineage {

using pysub::Expr;
using pysub::Module;
using pysub::Stmt;

namespace {

template <typename F>
void walk_expr(Expr& e, F& f) {
  for (auto& a : e.args) walk_expr(a, f);
  f(e);
}

template <typename F>
void walk_block(std::vector<Stmt>& block, F& f) {
  for (auto& s : block) {
    for (auto& e : s.exprs) walk_expr(e, f);
    walk_block(s.body, f);
    walk_block(s.orelse, f);
  }
}

std::string fresh_name(Rng& rng, std::set<std::string>& taken, const std::string& prefix) {
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
  for (;;) {
    std::string name = prefix;
    for (int i = 0; i < 5; ++i) name.push_back(kAlphabet[rng.below(kAlphabet.size())]);
    if (taken.insert(name).second) return name;
  }
}

std::set<std::string> identifier_set(const Module& m) {
  auto ids = identifiers(m);
  return {ids.begin(), ids.end()};
}

bool contains_def(const std::vector<Stmt>& block) {
  bool found = false;
  pysub::for_each_stmt(block, [&](const Stmt& s) { found = found || s.kind == Stmt::Kind::kDef; });
  return found;
}

// Always false for integer n: n * n + n is even.
Expr opaque_false(std::int64_t n) {
  Expr sq = Expr::binop("+", Expr::binop("*", Expr::integer(n), Expr::integer(n)), Expr::integer(n));
  return Expr::compare("==", Expr::binop("%", std::move(sq), Expr::integer(2)), Expr::integer(1));
}

Expr opaque_true(const std::string& var) {
  Expr sq = Expr::binop("+", Expr::binop("*", Expr::name(var), Expr::name(var)), Expr::name(var));
  return Expr::compare("==", Expr::binop("%", std::move(sq), Expr::integer(2)), Expr::integer(0));
}

Stmt assign_stmt(const std::string& name, Expr value, int line) {
  Stmt s;
  s.kind = Stmt::Kind::kAssign;
  s.line = line;
  s.exprs = {Expr::name(name), std::move(value)};
  return s;
}

bool is_table_dispatch(const Expr& callee) {
  return callee.kind == Expr::Kind::kSubscript && !callee.args.empty() &&
         callee.args[0].kind == Expr::Kind::kDict;
}

}  // namespace

std::vector<std::string> identifiers(const Module& m) {
  std::set<std::string> seen;
  pysub::for_each_stmt(m.body, [&](const Stmt& s) {
    if (s.kind == Stmt::Kind::kDef || s.kind == Stmt::Kind::kFor) seen.insert(s.name);
    for (const auto& n : s.names) seen.insert(n);
    for (const auto& e : s.exprs) {
      pysub::for_each_expr(e, [&](const Expr& x) {
        if (x.kind == Expr::Kind::kName || x.kind == Expr::Kind::kAttribute) seen.insert(x.text);
      });
    }
  });
  return {seen.begin(), seen.end()};
}

TransformResult identifier_rename(const Module& m, Rng& rng) {
  TransformResult out{m, false};
  auto taken = identifier_set(m);
  std::function<void(std::vector<Stmt>&)> visit = [&](std::vector<Stmt>& block) {
    for (auto& s : block) {
      if (s.kind != Stmt::Kind::kDef) {
        visit(s.body);
        visit(s.orelse);
        continue;
      }
      if (contains_def(s.body)) continue;
      std::set<std::string> locals(s.names.begin(), s.names.end());
      std::set<std::string> imported;
      pysub::for_each_stmt(s.body, [&](const Stmt& b) {
        if ((b.kind == Stmt::Kind::kAssign || b.kind == Stmt::Kind::kAugAssign) &&
            b.exprs[0].kind == Expr::Kind::kName) {
          locals.insert(b.exprs[0].text);
        }
        if (b.kind == Stmt::Kind::kFor) locals.insert(b.name);
        if (b.kind == Stmt::Kind::kImport) imported.insert(b.names.begin(), b.names.end());
      });
      std::map<std::string, std::string> renames;
      for (const auto& l : locals) {
        if (!imported.count(l)) renames[l] = fresh_name(rng, taken, "_");
      }
      if (renames.empty()) continue;
      out.applied = true;
      for (auto& p : s.names) p = renames.at(p);
      auto rename_expr = [&](Expr& e) {
        if (e.kind != Expr::Kind::kName) return;
        if (auto it = renames.find(e.text); it != renames.end()) e.text = it->second;
      };
      walk_block(s.body, rename_expr);
      std::function<void(std::vector<Stmt>&)> rename_loops = [&](std::vector<Stmt>& b) {
        for (auto& x : b) {
          if (x.kind == Stmt::Kind::kFor) {
            if (auto it = renames.find(x.name); it != renames.end()) x.name = it->second;
          }
          rename_loops(x.body);
          rename_loops(x.orelse);
        }
      };
      rename_loops(s.body);
    }
  };
  visit(out.module.body);
  return out;
}

TransformResult dead_branch_insertion(const Module& m, Rng& rng) {
  TransformResult out{m, false};
  auto taken = identifier_set(m);
  auto make_branch = [&](int line) {
    Stmt branch;
    branch.kind = Stmt::Kind::kIf;
    branch.line = line;
    branch.exprs = {opaque_false(static_cast<std::int64_t>(2 + rng.below(96)))};
    branch.body = {assign_stmt(fresh_name(rng, taken, "_d"),
                               Expr::integer(static_cast<std::int64_t>(rng.below(1000))), line)};
    return branch;
  };
  for (auto& s : out.module.body) {
    if (s.kind != Stmt::Kind::kDef) continue;
    const auto pos = rng.below(s.body.size() + 1);
    s.body.insert(s.body.begin() + static_cast<std::ptrdiff_t>(pos), make_branch(s.line));
    out.applied = true;
  }
  if (!out.applied) {
    auto& body = out.module.body;
    auto it = std::find_if(body.begin(), body.end(),
                           [](const Stmt& s) { return s.kind != Stmt::Kind::kImport; });
    body.insert(it, make_branch(0));
    out.applied = true;
  }
  return out;
}

TransformResult dynamic_attribute_indirection(const Module& m, Rng&) {
  TransformResult out{m, false};
  const auto mods = pysub::imported_modules(m);
  const std::set<std::string> modules(mods.begin(), mods.end());
  std::function<bool(const Expr&)> rooted = [&](const Expr& e) {
    if (e.kind == Expr::Kind::kName) return modules.count(e.text) != 0;
    return e.kind == Expr::Kind::kCall && e.args.size() == 3 &&
           e.args[0].kind == Expr::Kind::kName && e.args[0].text == "getattr" && rooted(e.args[1]);
  };
  auto rewrite = [&](Expr& e) {
    if (e.kind != Expr::Kind::kAttribute || !rooted(e.args[0])) return;
    Expr obj = std::move(e.args[0]);
    std::string attr = std::move(e.text);
    e = Expr::call(Expr::name("getattr"), {std::move(obj), Expr::str(std::move(attr))});
    out.applied = true;
  };
  walk_block(out.module.body, rewrite);
  return out;
}

TransformResult call_table_dispatch(const Module& m, Rng& rng) {
  TransformResult out{m, false};
  std::set<std::string> keys;
  auto rewrite = [&](Expr& e) {
    if (e.kind != Expr::Kind::kCall) return;
    Expr& callee = e.args[0];
    const bool eligible = callee.kind == Expr::Kind::kName ||
                          callee.kind == Expr::Kind::kAttribute ||
                          callee.kind == Expr::Kind::kCall;
    if (!eligible || is_table_dispatch(callee)) return;
    const std::string key = fresh_name(rng, keys, "k");
    Expr table;
    table.kind = Expr::Kind::kDict;
    table.args = {Expr::str(key), std::move(callee)};
    callee = Expr::subscript(std::move(table), Expr::str(key));
    out.applied = true;
  };
  walk_block(out.module.body, rewrite);
  return out;
}

TransformResult opaque_predicate_wrap(const Module& m, Rng& rng) {
  TransformResult out{m, false};
  auto taken = identifier_set(m);
  for (auto& s : out.module.body) {
    if (s.kind != Stmt::Kind::kDef || s.body.empty()) continue;
    const std::string var = fresh_name(rng, taken, "_q");
    Stmt guard;
    guard.kind = Stmt::Kind::kIf;
    guard.line = s.line;
    guard.exprs = {opaque_true(var)};
    guard.body = std::move(s.body);
    s.body.clear();
    s.body.push_back(
        assign_stmt(var, Expr::integer(static_cast<std::int64_t>(3 + rng.below(97))), s.line));
    s.body.push_back(std::move(guard));
    out.applied = true;
  }
  return out;
}

TransformResult string_split_and_join(const Module& m, Rng& rng) {
  TransformResult out{m, false};
  auto rewrite = [&](Expr& e) {
    if (e.kind != Expr::Kind::kStr || e.text.size() < 2) return;
    const auto cut = 1 + rng.below(e.text.size() - 1);
    e = Expr::binop("+", Expr::str(e.text.substr(0, cut)), Expr::str(e.text.substr(cut)));
    out.applied = true;
  };
  walk_block(out.module.body, rewrite);
  return out;
}

const std::vector<BuiltinTransform>& builtin_transforms() {
  static const std::vector<BuiltinTransform> kAll = {
      {"identifier-rename", StrategyCategory::kLayout, 0,
       "Rename function parameters and locals to random identifiers.", identifier_rename},
      {"dead-branch-insertion", StrategyCategory::kLayout, 0,
       "Insert a never-taken branch guarded by an always-false arithmetic predicate.",
       dead_branch_insertion, true},
      {"dynamic-attribute-indirection", StrategyCategory::kControlFlow, 1,
       "Resolve module attributes through getattr with a string name.",
       dynamic_attribute_indirection},
      {"call-table-dispatch", StrategyCategory::kControlFlow, 1,
       "Route every call through a single-entry dispatch table.", call_table_dispatch},
      {"opaque-predicate-wrap", StrategyCategory::kControlFlow, 1,
       "Wrap function bodies in an always-true arithmetic predicate.", opaque_predicate_wrap, true},
      {"string-split-and-join", StrategyCategory::kDataFlow, 1,
       "Split string literals into concatenated fragments.", string_split_and_join},
  };
  return kAll;
}

const BuiltinTransform* find_builtin(std::string_view id) {
  for (const auto& t : builtin_transforms()) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

}  // namespace lineage
