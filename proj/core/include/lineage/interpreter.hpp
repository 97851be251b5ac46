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

// Tree-walking evaluator for the Python subset. It exists to run fixture
// test suites before and after transformation, so its "dangerous" library
// modules are inert stubs that only append to an effect log.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lineage/pysub.hpp"

namespace lineage::pysub {

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Interpreter;
struct Value;

using List = std::vector<Value>;
using Dict = std::vector<std::pair<Value, Value>>;

struct Callable {
  std::string name;
  const Stmt* def = nullptr;  // user function
  std::function<Value(Interpreter&, std::vector<Value>&)> builtin;
};

struct ModuleObject {
  std::string name;
  std::map<std::string, Value> attrs;
};

struct Value {
  std::variant<std::monostate, bool, std::int64_t, std::string, std::shared_ptr<List>,
               std::shared_ptr<Dict>, std::shared_ptr<Callable>, std::shared_ptr<ModuleObject>>
      v;

  Value() = default;
  Value(bool b) : v(b) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(static_cast<std::int64_t>(i)) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}

  bool is_none() const { return std::holds_alternative<std::monostate>(v); }
  std::string type_name() const;
  std::string repr() const;
  std::string str() const;
  bool truthy() const;
};

bool values_equal(const Value& a, const Value& b);

class Interpreter {
 public:
  explicit Interpreter(std::uint64_t fuel = 200000);

  /// Executes a module's top-level statements in the global scope.
  void exec_module(std::shared_ptr<const Module> module);
  void exec_source(std::string_view source);

  Value call(const Value& callee, std::vector<Value> args);
  bool has_global(const std::string& name) const { return globals_.count(name) != 0; }
  Value global(const std::string& name) const;

  void record_effect(std::string effect) { effects_.push_back(std::move(effect)); }
  const std::vector<std::string>& effects() const { return effects_; }

  Value eval(const Expr& e, std::map<std::string, Value>* locals);

 private:
  enum class Flow { kNormal, kReturn, kBreak, kContinue };

  Flow exec_block(const std::vector<Stmt>& block, std::map<std::string, Value>* locals,
                  Value& ret);
  Flow exec_stmt(const Stmt& s, std::map<std::string, Value>* locals, Value& ret);
  void assign(const Expr& target, Value value, std::map<std::string, Value>* locals);
  Value lookup(const std::string& name, std::map<std::string, Value>* locals);
  Value get_attribute(const Value& obj, const std::string& attr);
  Value binary(const std::string& op, const Value& a, const Value& b);
  Value compare(const std::string& op, const Value& a, const Value& b);
  void burn();

  std::uint64_t fuel_;
  int call_depth_ = 0;
  std::map<std::string, Value> globals_;
  std::map<std::string, Value> builtins_;
  std::map<std::string, Value> library_;
  std::vector<std::shared_ptr<const Module>> modules_;
  std::vector<std::string> effects_;
};

/// Outcome of running a program followed by its test functions.
struct TestSuiteResult {
  bool parse_ok = false;
  bool loaded = false;  // program and test module executed without error
  std::vector<std::pair<std::string, bool>> tests;
  std::vector<std::string> effects;
  std::string error;

  bool all_passed() const;
};

/// Executes `program`, then `tests`, then every test_* function defined by
/// `tests` in definition order.
TestSuiteResult run_test_suite(std::string_view program, std::string_view tests);

}  // namespace lineage::pysub
