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

#pragma once

// Front end for the small Python subset used by bundled fixture programs:
// tokenizer, recursive-descent parser, canonical printer, and a constant
// folder that undoes the indirections produced by the built-in transformers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/error.hpp"

namespace lineage::pysub {

inline constexpr std::string_view kLanguageTag = "python-subset";

class ParseError : public FormatError {
 public:
  ParseError(const std::string& message, int line)
      : FormatError("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class TokKind { kName, kNumber, kString, kOp, kKeyword, kNewline, kIndent, kDedent, kEnd };

struct Token {
  TokKind kind;
  std::string text;
  int line = 0;
};

std::vector<Token> tokenize(std::string_view source);

struct Expr {
  enum class Kind {
    kName,       // text = identifier
    kInt,        // number
    kStr,        // text = decoded value
    kBool,       // number = 0 / 1
    kNone,
    kBinOp,      // text = operator, args = {lhs, rhs}
    kUnary,      // text = "-" or "not", args = {operand}
    kBoolOp,     // text = "and" / "or", args = {lhs, rhs}
    kCompare,    // text = operator, args = {lhs, rhs}
    kCall,       // args = {callee, arg...}
    kAttribute,  // text = attribute, args = {object}
    kSubscript,  // args = {object, index}
    kList,       // args = elements
    kDict,       // args = key0, value0, key1, value1, ...
  };

  Kind kind = Kind::kNone;
  std::string text;
  std::int64_t number = 0;
  std::vector<Expr> args;

  bool operator==(const Expr&) const = default;

  static Expr name(std::string id);
  static Expr integer(std::int64_t v);
  static Expr str(std::string v);
  static Expr binop(std::string op, Expr lhs, Expr rhs);
  static Expr compare(std::string op, Expr lhs, Expr rhs);
  static Expr call(Expr callee, std::vector<Expr> arguments);
  static Expr attribute(Expr object, std::string attr);
  static Expr subscript(Expr object, Expr index);
};

struct Stmt {
  enum class Kind {
    kExpr,       // exprs = {value}
    kAssign,     // exprs = {target, value}
    kAugAssign,  // name = operator ("+=", ...), exprs = {target, value}
    kIf,         // exprs = {cond}, body, orelse
    kWhile,      // exprs = {cond}, body
    kFor,        // name = loop variable, exprs = {iterable}, body
    kReturn,     // exprs = {} or {value}
    kPass,
    kBreak,
    kContinue,
    kDef,        // name, names = params, body
    kImport,     // names = modules
    kAssert,     // exprs = {cond} or {cond, message}
  };

  Kind kind = Kind::kPass;
  int line = 0;
  std::string name;
  std::vector<std::string> names;
  std::vector<Expr> exprs;
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
  bool elif = false;  // orelse is a single kIf printed as "elif"

  // Line numbers are ignored: two programs that print identically compare
  // equal.
  bool operator==(const Stmt& o) const {
    return kind == o.kind && name == o.name && names == o.names && exprs == o.exprs &&
           body == o.body && orelse == o.orelse && elif == o.elif;
  }
};

struct Module {
  std::vector<Stmt> body;
  bool operator==(const Module&) const = default;
};

Module parse(std::string_view source);
Expr parse_expression(std::string_view source);

/// True when `source` parses; on failure writes the reason to *error.
bool parses(std::string_view source, std::string* error = nullptr);

/// Canonical source: four-space indentation, double-quoted strings,
/// parentheses only where precedence requires them.
std::string print(const Module& module);
std::string print_expr(const Expr& expr);
std::string quote(std::string_view value);

/// Folds string concatenation of literals, getattr with a literal name, and
/// literal-keyed lookups into dict literals, repeatedly, until nothing
/// changes. Statement line numbers are preserved.
Module deobfuscate(const Module& module);
Expr deobfuscate_expr(const Expr& expr);

/// Names bound by "import" anywhere in the module.
std::vector<std::string> imported_modules(const Module& module);

/// Pre-order visit of every statement, including nested blocks.
template <typename F>
void for_each_stmt(const std::vector<Stmt>& block, F&& f) {
  for (const auto& s : block) {
    f(s);
    for_each_stmt(s.body, f);
    for_each_stmt(s.orelse, f);
  }
}

template <typename F>
void for_each_expr(const Expr& e, F&& f) {
  f(e);
  for (const auto& a : e.args) for_each_expr(a, f);
}

}  // namespace lineage::pysub
