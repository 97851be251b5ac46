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

#include "lineage/interpreter.hpp"

#include <algorithm>
#include <cctype>

namespace lineage::pysub {

namespace {

using Args = std::vector<Value>;
using Locals = std::map<std::string, Value>;

Value make_builtin(std::string name, std::function<Value(Interpreter&, Args&)> fn) {
  auto c = std::make_shared<Callable>();
  c->name = std::move(name);
  c->builtin = std::move(fn);
  Value v;
  v.v = std::move(c);
  return v;
}

Value make_list(List items) {
  Value v;
  v.v = std::make_shared<List>(std::move(items));
  return v;
}

void arity(const std::string& fn, const Args& args, std::size_t lo, std::size_t hi) {
  if (args.size() < lo || args.size() > hi) {
    throw RuntimeError(fn + "() takes " + std::to_string(lo) +
                       (hi != lo ? " to " + std::to_string(hi) : std::string()) +
                       " arguments, got " + std::to_string(args.size()));
  }
}

const std::string& as_str(const Value& v, const std::string& ctx) {
  if (auto* s = std::get_if<std::string>(&v.v)) return *s;
  throw RuntimeError(ctx + ": expected str, got " + v.type_name());
}

std::int64_t as_int(const Value& v, const std::string& ctx) {
  if (auto* i = std::get_if<std::int64_t>(&v.v)) return *i;
  if (auto* b = std::get_if<bool>(&v.v)) return *b ? 1 : 0;
  throw RuntimeError(ctx + ": expected int, got " + v.type_name());
}

std::string join_reprs(const Args& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i].repr();
  }
  return out;
}

// An inert library function: records "module.fn(args)" and returns `result`.
Value stub(const std::string& qualified, std::function<Value(Args&)> result) {
  return make_builtin(qualified, [qualified, result](Interpreter& in, Args& args) {
    in.record_effect(qualified + "(" + join_reprs(args) + ")");
    return result(args);
  });
}

Value prefixed(const std::string& prefix, const Args& args) {
  std::string out = prefix;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i].str();
  }
  return Value(out);
}

std::shared_ptr<ModuleObject> make_module(
    const std::string& name, const std::vector<std::pair<std::string, std::string>>& fns) {
  auto m = std::make_shared<ModuleObject>();
  m->name = name;
  for (const auto& [fn, prefix] : fns) {
    const std::string p = prefix;
    m->attrs[fn] = stub(name + "." + fn, [p](Args& a) { return prefixed(p, a); });
  }
  return m;
}

Value module_value(std::shared_ptr<ModuleObject> m) {
  Value v;
  v.v = std::move(m);
  return v;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  if (b == 0) throw RuntimeError("integer division by zero");
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  if (b == 0) throw RuntimeError("integer modulo by zero");
  std::int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

}  // namespace

std::string Value::type_name() const {
  switch (v.index()) {
    case 0: return "NoneType";
    case 1: return "bool";
    case 2: return "int";
    case 3: return "str";
    case 4: return "list";
    case 5: return "dict";
    case 6: return "function";
    default: return "module";
  }
}

std::string Value::repr() const {
  if (auto* s = std::get_if<std::string>(&v)) return quote(*s);
  return str();
}

std::string Value::str() const {
  switch (v.index()) {
    case 0: return "None";
    case 1: return std::get<bool>(v) ? "True" : "False";
    case 2: return std::to_string(std::get<std::int64_t>(v));
    case 3: return std::get<std::string>(v);
    case 4: {
      std::string out = "[";
      const auto& l = *std::get<std::shared_ptr<List>>(v);
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (i) out += ", ";
        out += l[i].repr();
      }
      return out + "]";
    }
    case 5: {
      std::string out = "{";
      const auto& d = *std::get<std::shared_ptr<Dict>>(v);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) out += ", ";
        out += d[i].first.repr() + ": " + d[i].second.repr();
      }
      return out + "}";
    }
    case 6: return "<function " + std::get<std::shared_ptr<Callable>>(v)->name + ">";
    default: return "<module " + std::get<std::shared_ptr<ModuleObject>>(v)->name + ">";
  }
}

bool Value::truthy() const {
  switch (v.index()) {
    case 0: return false;
    case 1: return std::get<bool>(v);
    case 2: return std::get<std::int64_t>(v) != 0;
    case 3: return !std::get<std::string>(v).empty();
    case 4: return !std::get<std::shared_ptr<List>>(v)->empty();
    case 5: return !std::get<std::shared_ptr<Dict>>(v)->empty();
    default: return true;
  }
}

bool values_equal(const Value& a, const Value& b) {
  // bool and int compare numerically, as in Python.
  const bool a_num = a.v.index() == 1 || a.v.index() == 2;
  const bool b_num = b.v.index() == 1 || b.v.index() == 2;
  if (a_num && b_num) return as_int(a, "==") == as_int(b, "==");
  if (a.v.index() != b.v.index()) return false;
  switch (a.v.index()) {
    case 0: return true;
    case 3: return std::get<std::string>(a.v) == std::get<std::string>(b.v);
    case 4: {
      const auto& x = *std::get<std::shared_ptr<List>>(a.v);
      const auto& y = *std::get<std::shared_ptr<List>>(b.v);
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!values_equal(x[i], y[i])) return false;
      }
      return true;
    }
    case 5: {
      const auto& x = *std::get<std::shared_ptr<Dict>>(a.v);
      const auto& y = *std::get<std::shared_ptr<Dict>>(b.v);
      if (x.size() != y.size()) return false;
      for (const auto& [k, val] : x) {
        auto it = std::find_if(y.begin(), y.end(),
                               [&](const auto& kv) { return values_equal(kv.first, k); });
        if (it == y.end() || !values_equal(it->second, val)) return false;
      }
      return true;
    }
    case 6: return std::get<std::shared_ptr<Callable>>(a.v) == std::get<std::shared_ptr<Callable>>(b.v);
    default:
      return std::get<std::shared_ptr<ModuleObject>>(a.v) ==
             std::get<std::shared_ptr<ModuleObject>>(b.v);
  }
}

Interpreter::Interpreter(std::uint64_t fuel) : fuel_(fuel) {
  builtins_["print"] = make_builtin("print", [](Interpreter& in, Args& a) {
    std::string line;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) line += ' ';
      line += a[i].str();
    }
    in.record_effect("print(" + quote(line) + ")");
    return Value();
  });
  builtins_["len"] = make_builtin("len", [](Interpreter&, Args& a) {
    arity("len", a, 1, 1);
    if (auto* s = std::get_if<std::string>(&a[0].v)) return Value(static_cast<std::int64_t>(s->size()));
    if (auto* l = std::get_if<std::shared_ptr<List>>(&a[0].v)) {
      return Value(static_cast<std::int64_t>((*l)->size()));
    }
    if (auto* d = std::get_if<std::shared_ptr<Dict>>(&a[0].v)) {
      return Value(static_cast<std::int64_t>((*d)->size()));
    }
    throw RuntimeError("len() of " + a[0].type_name());
  });
  builtins_["str"] = make_builtin("str", [](Interpreter&, Args& a) {
    arity("str", a, 0, 1);
    return a.empty() ? Value(std::string()) : Value(a[0].str());
  });
  builtins_["int"] = make_builtin("int", [](Interpreter&, Args& a) {
    arity("int", a, 1, 1);
    if (auto* s = std::get_if<std::string>(&a[0].v)) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(*s, &used);
        if (used != s->size()) throw RuntimeError("invalid literal for int(): " + *s);
        return Value(static_cast<std::int64_t>(v));
      } catch (const std::logic_error&) {
        throw RuntimeError("invalid literal for int(): " + *s);
      }
    }
    return Value(as_int(a[0], "int"));
  });
  builtins_["bool"] = make_builtin("bool", [](Interpreter&, Args& a) {
    arity("bool", a, 1, 1);
    return Value(a[0].truthy());
  });
  builtins_["abs"] = make_builtin("abs", [](Interpreter&, Args& a) {
    arity("abs", a, 1, 1);
    const auto v = as_int(a[0], "abs");
    return Value(v < 0 ? -v : v);
  });
  builtins_["min"] = make_builtin("min", [](Interpreter&, Args& a) {
    arity("min", a, 2, 2);
    return Value(std::min(as_int(a[0], "min"), as_int(a[1], "min")));
  });
  builtins_["max"] = make_builtin("max", [](Interpreter&, Args& a) {
    arity("max", a, 2, 2);
    return Value(std::max(as_int(a[0], "max"), as_int(a[1], "max")));
  });
  builtins_["chr"] = make_builtin("chr", [](Interpreter&, Args& a) {
    arity("chr", a, 1, 1);
    const auto v = as_int(a[0], "chr");
    if (v < 0 || v > 255) throw RuntimeError("chr() arg not in range(256)");
    return Value(std::string(1, static_cast<char>(v)));
  });
  builtins_["ord"] = make_builtin("ord", [](Interpreter&, Args& a) {
    arity("ord", a, 1, 1);
    const auto& s = as_str(a[0], "ord");
    if (s.size() != 1) throw RuntimeError("ord() expected a character");
    return Value(static_cast<std::int64_t>(static_cast<unsigned char>(s[0])));
  });
  builtins_["range"] = make_builtin("range", [](Interpreter&, Args& a) {
    arity("range", a, 1, 2);
    std::int64_t lo = 0, hi = 0;
    if (a.size() == 1) {
      hi = as_int(a[0], "range");
    } else {
      lo = as_int(a[0], "range");
      hi = as_int(a[1], "range");
    }
    if (hi - lo > 100000) throw RuntimeError("range too large");
    List out;
    for (std::int64_t i = lo; i < hi; ++i) out.emplace_back(i);
    return make_list(std::move(out));
  });
  builtins_["list"] = make_builtin("list", [](Interpreter&, Args& a) {
    arity("list", a, 0, 1);
    if (a.empty()) return make_list({});
    if (auto* l = std::get_if<std::shared_ptr<List>>(&a[0].v)) return make_list(**l);
    if (auto* s = std::get_if<std::string>(&a[0].v)) {
      List out;
      for (char c : *s) out.emplace_back(std::string(1, c));
      return make_list(std::move(out));
    }
    throw RuntimeError("list() of " + a[0].type_name());
  });
  builtins_["sorted"] = make_builtin("sorted", [](Interpreter&, Args& a) {
    arity("sorted", a, 1, 1);
    auto* l = std::get_if<std::shared_ptr<List>>(&a[0].v);
    if (!l) throw RuntimeError("sorted() expects a list");
    List out = **l;
    std::stable_sort(out.begin(), out.end(), [](const Value& x, const Value& y) {
      if (x.v.index() == 3 && y.v.index() == 3) {
        return std::get<std::string>(x.v) < std::get<std::string>(y.v);
      }
      return as_int(x, "sorted") < as_int(y, "sorted");
    });
    return make_list(std::move(out));
  });
  builtins_["getattr"] = make_builtin("getattr", [](Interpreter& in, Args& a) {
    arity("getattr", a, 2, 2);
    Expr probe = Expr::attribute(Expr::name("__getattr_target__"), as_str(a[1], "getattr"));
    Locals scope{{"__getattr_target__", a[0]}};
    return in.eval(probe, &scope);
  });
  builtins_["eval"] = make_builtin("eval", [](Interpreter& in, Args& a) {
    arity("eval", a, 1, 1);
    const auto& src = as_str(a[0], "eval");
    in.record_effect("eval(" + quote(src) + ")");
    Expr e;
    try {
      e = parse_expression(src);
    } catch (const ParseError& err) {
      throw RuntimeError(std::string("eval: ") + err.what());
    }
    return in.eval(e, nullptr);
  });
  builtins_["exec"] = make_builtin("exec", [](Interpreter& in, Args& a) {
    arity("exec", a, 1, 1);
    const auto& src = as_str(a[0], "exec");
    in.record_effect("exec(" + quote(src) + ")");
    try {
      in.exec_source(src);
    } catch (const ParseError& err) {
      throw RuntimeError(std::string("exec: ") + err.what());
    }
    return Value();
  });

  // Inert stand-ins for the library surface the fixture programs touch.
  library_["pickle"] = module_value(make_module("pickle", {{"loads", "obj:"}, {"dumps", "pickled:"}}));
  library_["yaml"] = module_value(make_module("yaml", {{"load", "yaml:"}, {"safe_load", "yaml:"}}));
  library_["hashlib"] =
      module_value(make_module("hashlib", {{"md5", "md5:"}, {"sha1", "sha1:"}, {"sha256", "sha256:"}}));
  library_["jinja2"] = module_value(make_module("jinja2", {{"Template", "tpl:"}}));
  library_["subprocess"] = module_value(
      make_module("subprocess", {{"call", "rc:"}, {"run", "rc:"}, {"check_output", "out:"}}));
  library_["socket"] = module_value(make_module("socket", {{"bind", "bound:"}, {"connect", "conn:"}}));
  library_["ssl"] = module_value(make_module(
      "ssl", {{"_create_unverified_context", "ctx:unverified"}, {"wrap_socket", "wrapped:"}}));
  library_["requests"] = module_value(make_module("requests", {{"get", "resp:"}, {"post", "resp:"}}));
  library_["paramiko"] = module_value(
      make_module("paramiko", {{"AutoAddPolicy", "policy:auto"}, {"RejectPolicy", "policy:reject"}}));
  library_["dsa"] = module_value(make_module("dsa", {{"generate", "dsa:"}}));
  library_["flask"] = module_value(make_module("flask", {{"run", "serving:"}, {"escape", "esc:"}}));
  library_["re"] = module_value(make_module("re", {{"compile", "re:"}, {"match", "match:"}}));
  {
    auto os = make_module("os", {{"system", "rc:"}, {"popen", "out:"}, {"getenv", "env:"},
                                 {"remove", "removed:"}});
    auto path = std::make_shared<ModuleObject>();
    path->name = "os.path";
    path->attrs["join"] = stub("os.path.join", [](Args& a) {
      std::string out;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += "/";
        out += a[i].str();
      }
      return Value(out);
    });
    os->attrs["path"] = module_value(path);
    library_["os"] = module_value(os);
  }
}

void Interpreter::burn() {
  if (fuel_ == 0) throw RuntimeError("step budget exhausted");
  --fuel_;
}

Value Interpreter::global(const std::string& name) const {
  auto it = globals_.find(name);
  if (it == globals_.end()) throw RuntimeError("name '" + name + "' is not defined");
  return it->second;
}

void Interpreter::exec_module(std::shared_ptr<const Module> module) {
  modules_.push_back(module);
  Value ret;
  const Flow f = exec_block(module->body, nullptr, ret);
  if (f != Flow::kNormal) throw RuntimeError("'return', 'break' or 'continue' outside function");
}

void Interpreter::exec_source(std::string_view source) {
  exec_module(std::make_shared<const Module>(parse(source)));
}

Value Interpreter::lookup(const std::string& name, Locals* locals) {
  if (locals) {
    auto it = locals->find(name);
    if (it != locals->end()) return it->second;
  }
  if (auto it = globals_.find(name); it != globals_.end()) return it->second;
  if (auto it = builtins_.find(name); it != builtins_.end()) return it->second;
  throw RuntimeError("name '" + name + "' is not defined");
}

void Interpreter::assign(const Expr& target, Value value, Locals* locals) {
  if (target.kind == Expr::Kind::kName) {
    (locals ? *locals : globals_)[target.text] = std::move(value);
    return;
  }
  if (target.kind == Expr::Kind::kSubscript) {
    Value obj = eval(target.args[0], locals);
    Value key = eval(target.args[1], locals);
    if (auto* l = std::get_if<std::shared_ptr<List>>(&obj.v)) {
      auto idx = as_int(key, "list index");
      const auto n = static_cast<std::int64_t>((*l)->size());
      if (idx < 0) idx += n;
      if (idx < 0 || idx >= n) throw RuntimeError("list assignment index out of range");
      (**l)[static_cast<std::size_t>(idx)] = std::move(value);
      return;
    }
    if (auto* d = std::get_if<std::shared_ptr<Dict>>(&obj.v)) {
      for (auto& kv : **d) {
        if (values_equal(kv.first, key)) {
          kv.second = std::move(value);
          return;
        }
      }
      (*d)->emplace_back(std::move(key), std::move(value));
      return;
    }
    throw RuntimeError("'" + obj.type_name() + "' does not support item assignment");
  }
  throw RuntimeError("invalid assignment target");
}

Value Interpreter::get_attribute(const Value& obj, const std::string& attr) {
  if (auto* m = std::get_if<std::shared_ptr<ModuleObject>>(&obj.v)) {
    auto it = (*m)->attrs.find(attr);
    if (it == (*m)->attrs.end()) {
      throw RuntimeError("module '" + (*m)->name + "' has no attribute '" + attr + "'");
    }
    return it->second;
  }
  if (auto* s = std::get_if<std::string>(&obj.v)) {
    const std::string self = *s;
    if (attr == "upper" || attr == "lower" || attr == "strip") {
      return make_builtin("str." + attr, [self, attr](Interpreter&, Args& a) {
        arity("str." + attr, a, 0, 0);
        std::string out = self;
        if (attr == "strip") {
          const auto b = out.find_first_not_of(" \t\n\r");
          const auto e = out.find_last_not_of(" \t\n\r");
          return Value(b == std::string::npos ? std::string() : out.substr(b, e - b + 1));
        }
        for (auto& c : out) {
          c = static_cast<char>(attr == "upper" ? std::toupper(static_cast<unsigned char>(c))
                                                : std::tolower(static_cast<unsigned char>(c)));
        }
        return Value(out);
      });
    }
    if (attr == "replace") {
      return make_builtin("str.replace", [self](Interpreter&, Args& a) {
        arity("str.replace", a, 2, 2);
        const auto& from = as_str(a[0], "replace");
        const auto& to = as_str(a[1], "replace");
        if (from.empty()) return Value(self);
        std::string out;
        std::size_t pos = 0;
        for (;;) {
          auto hit = self.find(from, pos);
          if (hit == std::string::npos) break;
          out += self.substr(pos, hit - pos) + to;
          pos = hit + from.size();
        }
        return Value(out + self.substr(pos));
      });
    }
    if (attr == "startswith" || attr == "endswith") {
      return make_builtin("str." + attr, [self, attr](Interpreter&, Args& a) {
        arity("str." + attr, a, 1, 1);
        const auto& p = as_str(a[0], attr);
        if (p.size() > self.size()) return Value(false);
        return Value(attr == "startswith" ? self.compare(0, p.size(), p) == 0
                                          : self.compare(self.size() - p.size(), p.size(), p) == 0);
      });
    }
    if (attr == "split") {
      return make_builtin("str.split", [self](Interpreter&, Args& a) {
        arity("str.split", a, 1, 1);
        const auto& sep = as_str(a[0], "split");
        if (sep.empty()) throw RuntimeError("empty separator");
        List out;
        std::size_t pos = 0;
        for (;;) {
          auto hit = self.find(sep, pos);
          if (hit == std::string::npos) break;
          out.emplace_back(self.substr(pos, hit - pos));
          pos = hit + sep.size();
        }
        out.emplace_back(self.substr(pos));
        return make_list(std::move(out));
      });
    }
    if (attr == "join") {
      return make_builtin("str.join", [self](Interpreter&, Args& a) {
        arity("str.join", a, 1, 1);
        auto* l = std::get_if<std::shared_ptr<List>>(&a[0].v);
        if (!l) throw RuntimeError("join() expects a list");
        std::string out;
        for (std::size_t i = 0; i < (*l)->size(); ++i) {
          if (i) out += self;
          out += as_str((**l)[i], "join");
        }
        return Value(out);
      });
    }
    if (attr == "format") {
      return make_builtin("str.format", [self](Interpreter&, Args& a) {
        std::string out;
        std::size_t next = 0;
        for (std::size_t i = 0; i < self.size(); ++i) {
          if (self[i] == '{' && i + 1 < self.size() && self[i + 1] == '}') {
            if (next >= a.size()) throw RuntimeError("format: not enough arguments");
            out += a[next++].str();
            ++i;
          } else {
            out += self[i];
          }
        }
        return Value(out);
      });
    }
  }
  if (auto* l = std::get_if<std::shared_ptr<List>>(&obj.v)) {
    auto list = *l;
    if (attr == "append") {
      return make_builtin("list.append", [list](Interpreter&, Args& a) {
        arity("list.append", a, 1, 1);
        list->push_back(a[0]);
        return Value();
      });
    }
    if (attr == "pop") {
      return make_builtin("list.pop", [list](Interpreter&, Args& a) {
        arity("list.pop", a, 0, 0);
        if (list->empty()) throw RuntimeError("pop from empty list");
        Value v = list->back();
        list->pop_back();
        return v;
      });
    }
  }
  if (auto* d = std::get_if<std::shared_ptr<Dict>>(&obj.v)) {
    auto dict = *d;
    if (attr == "get") {
      return make_builtin("dict.get", [dict](Interpreter&, Args& a) {
        arity("dict.get", a, 1, 2);
        for (const auto& kv : *dict) {
          if (values_equal(kv.first, a[0])) return kv.second;
        }
        return a.size() > 1 ? a[1] : Value();
      });
    }
    if (attr == "keys") {
      return make_builtin("dict.keys", [dict](Interpreter&, Args& a) {
        arity("dict.keys", a, 0, 0);
        List out;
        for (const auto& kv : *dict) out.push_back(kv.first);
        return make_list(std::move(out));
      });
    }
  }
  throw RuntimeError("'" + obj.type_name() + "' object has no attribute '" + attr + "'");
}

Value Interpreter::binary(const std::string& op, const Value& a, const Value& b) {
  const bool ints = (a.v.index() == 1 || a.v.index() == 2) && (b.v.index() == 1 || b.v.index() == 2);
  if (ints) {
    const auto x = as_int(a, op), y = as_int(b, op);
    if (op == "+") return Value(x + y);
    if (op == "-") return Value(x - y);
    if (op == "*") return Value(x * y);
    if (op == "//") return Value(floor_div(x, y));
    if (op == "%") return Value(floor_mod(x, y));
    if (op == "/") throw RuntimeError("true division is not supported");
  }
  if (op == "+") {
    if (a.v.index() == 3 && b.v.index() == 3) {
      return Value(std::get<std::string>(a.v) + std::get<std::string>(b.v));
    }
    if (a.v.index() == 4 && b.v.index() == 4) {
      List out = *std::get<std::shared_ptr<List>>(a.v);
      const auto& r = *std::get<std::shared_ptr<List>>(b.v);
      out.insert(out.end(), r.begin(), r.end());
      return make_list(std::move(out));
    }
  }
  if (op == "*" && a.v.index() == 3 && (b.v.index() == 2)) {
    const auto n = std::get<std::int64_t>(b.v);
    if (n > 10000) throw RuntimeError("string repeat too large");
    std::string out;
    for (std::int64_t i = 0; i < n; ++i) out += std::get<std::string>(a.v);
    return Value(out);
  }
  if (op == "%" && a.v.index() == 3) {
    // printf-style with %s only.
    const auto& fmt = std::get<std::string>(a.v);
    std::vector<Value> vals;
    if (auto* l = std::get_if<std::shared_ptr<List>>(&b.v)) {
      vals = **l;
    } else {
      vals.push_back(b);
    }
    std::string out;
    std::size_t next = 0;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
      if (fmt[i] == '%' && i + 1 < fmt.size() && fmt[i + 1] == 's') {
        if (next >= vals.size()) throw RuntimeError("not enough arguments for format string");
        out += vals[next++].str();
        ++i;
      } else {
        out += fmt[i];
      }
    }
    return Value(out);
  }
  throw RuntimeError("unsupported operand types for " + op + ": " + a.type_name() + " and " +
                     b.type_name());
}

Value Interpreter::compare(const std::string& op, const Value& a, const Value& b) {
  if (op == "==") return Value(values_equal(a, b));
  if (op == "!=") return Value(!values_equal(a, b));
  if (op == "in" || op == "not in") {
    bool found = false;
    if (auto* s = std::get_if<std::string>(&b.v)) {
      found = s->find(as_str(a, "in")) != std::string::npos;
    } else if (auto* l = std::get_if<std::shared_ptr<List>>(&b.v)) {
      found = std::any_of((*l)->begin(), (*l)->end(),
                          [&](const Value& x) { return values_equal(x, a); });
    } else if (auto* d = std::get_if<std::shared_ptr<Dict>>(&b.v)) {
      found = std::any_of((*d)->begin(), (*d)->end(),
                          [&](const auto& kv) { return values_equal(kv.first, a); });
    } else {
      throw RuntimeError("argument of type '" + b.type_name() + "' is not iterable");
    }
    return Value(op == "in" ? found : !found);
  }
  int c = 0;
  if (a.v.index() == 3 && b.v.index() == 3) {
    c = std::get<std::string>(a.v).compare(std::get<std::string>(b.v));
  } else {
    const auto x = as_int(a, op), y = as_int(b, op);
    c = x < y ? -1 : (x > y ? 1 : 0);
  }
  if (op == "<") return Value(c < 0);
  if (op == "<=") return Value(c <= 0);
  if (op == ">") return Value(c > 0);
  if (op == ">=") return Value(c >= 0);
  throw RuntimeError("unknown comparison " + op);
}

Value Interpreter::eval(const Expr& e, Locals* locals) {
  burn();
  switch (e.kind) {
    case Expr::Kind::kName: return lookup(e.text, locals);
    case Expr::Kind::kInt: return Value(e.number);
    case Expr::Kind::kStr: return Value(e.text);
    case Expr::Kind::kBool: return Value(e.number != 0);
    case Expr::Kind::kNone: return Value();
    case Expr::Kind::kBinOp:
      return binary(e.text, eval(e.args[0], locals), eval(e.args[1], locals));
    case Expr::Kind::kUnary: {
      Value v = eval(e.args[0], locals);
      if (e.text == "not") return Value(!v.truthy());
      return Value(-as_int(v, "unary -"));
    }
    case Expr::Kind::kBoolOp: {
      Value lhs = eval(e.args[0], locals);
      if (e.text == "and") return lhs.truthy() ? eval(e.args[1], locals) : lhs;
      return lhs.truthy() ? lhs : eval(e.args[1], locals);
    }
    case Expr::Kind::kCompare:
      return compare(e.text, eval(e.args[0], locals), eval(e.args[1], locals));
    case Expr::Kind::kCall: {
      Value callee = eval(e.args[0], locals);
      Args args;
      args.reserve(e.args.size() - 1);
      for (std::size_t i = 1; i < e.args.size(); ++i) args.push_back(eval(e.args[i], locals));
      return call(callee, std::move(args));
    }
    case Expr::Kind::kAttribute: return get_attribute(eval(e.args[0], locals), e.text);
    case Expr::Kind::kSubscript: {
      Value obj = eval(e.args[0], locals);
      Value key = eval(e.args[1], locals);
      if (auto* l = std::get_if<std::shared_ptr<List>>(&obj.v)) {
        auto idx = as_int(key, "list index");
        const auto n = static_cast<std::int64_t>((*l)->size());
        if (idx < 0) idx += n;
        if (idx < 0 || idx >= n) throw RuntimeError("list index out of range");
        return (**l)[static_cast<std::size_t>(idx)];
      }
      if (auto* s = std::get_if<std::string>(&obj.v)) {
        auto idx = as_int(key, "string index");
        const auto n = static_cast<std::int64_t>(s->size());
        if (idx < 0) idx += n;
        if (idx < 0 || idx >= n) throw RuntimeError("string index out of range");
        return Value(std::string(1, (*s)[static_cast<std::size_t>(idx)]));
      }
      if (auto* d = std::get_if<std::shared_ptr<Dict>>(&obj.v)) {
        for (const auto& kv : **d) {
          if (values_equal(kv.first, key)) return kv.second;
        }
        throw RuntimeError("KeyError: " + key.repr());
      }
      throw RuntimeError("'" + obj.type_name() + "' object is not subscriptable");
    }
    case Expr::Kind::kList: {
      List out;
      for (const auto& a : e.args) out.push_back(eval(a, locals));
      return make_list(std::move(out));
    }
    case Expr::Kind::kDict: {
      auto d = std::make_shared<Dict>();
      for (std::size_t i = 0; i + 1 < e.args.size(); i += 2) {
        Value k = eval(e.args[i], locals);
        Value v = eval(e.args[i + 1], locals);
        auto it = std::find_if(d->begin(), d->end(),
                               [&](const auto& kv) { return values_equal(kv.first, k); });
        if (it != d->end()) {
          it->second = std::move(v);
        } else {
          d->emplace_back(std::move(k), std::move(v));
        }
      }
      Value out;
      out.v = std::move(d);
      return out;
    }
  }
  throw RuntimeError("unhandled expression");
}

Value Interpreter::call(const Value& callee, std::vector<Value> args) {
  auto* fn = std::get_if<std::shared_ptr<Callable>>(&callee.v);
  if (!fn) throw RuntimeError("'" + callee.type_name() + "' object is not callable");
  const Callable& c = **fn;
  if (c.builtin) return c.builtin(*this, args);
  if (args.size() != c.def->names.size()) {
    throw RuntimeError(c.name + "() takes " + std::to_string(c.def->names.size()) +
                       " arguments, got " + std::to_string(args.size()));
  }
  if (++call_depth_ > 200) {
    --call_depth_;
    throw RuntimeError("maximum recursion depth exceeded");
  }
  Locals locals;
  for (std::size_t i = 0; i < args.size(); ++i) locals[c.def->names[i]] = std::move(args[i]);
  Value ret;
  try {
    const Flow f = exec_block(c.def->body, &locals, ret);
    if (f == Flow::kBreak || f == Flow::kContinue) {
      throw RuntimeError("'break' or 'continue' outside loop");
    }
  } catch (...) {
    --call_depth_;
    throw;
  }
  --call_depth_;
  return ret;
}

Interpreter::Flow Interpreter::exec_block(const std::vector<Stmt>& block, Locals* locals,
                                          Value& ret) {
  for (const auto& s : block) {
    const Flow f = exec_stmt(s, locals, ret);
    if (f != Flow::kNormal) return f;
  }
  return Flow::kNormal;
}

Interpreter::Flow Interpreter::exec_stmt(const Stmt& s, Locals* locals, Value& ret) {
  burn();
  switch (s.kind) {
    case Stmt::Kind::kExpr:
      eval(s.exprs[0], locals);
      return Flow::kNormal;
    case Stmt::Kind::kAssign:
      assign(s.exprs[0], eval(s.exprs[1], locals), locals);
      return Flow::kNormal;
    case Stmt::Kind::kAugAssign: {
      const std::string op = s.name.substr(0, s.name.size() - 1);
      Value cur = eval(s.exprs[0], locals);
      assign(s.exprs[0], binary(op, cur, eval(s.exprs[1], locals)), locals);
      return Flow::kNormal;
    }
    case Stmt::Kind::kIf:
      if (eval(s.exprs[0], locals).truthy()) return exec_block(s.body, locals, ret);
      return exec_block(s.orelse, locals, ret);
    case Stmt::Kind::kWhile:
      while (eval(s.exprs[0], locals).truthy()) {
        const Flow f = exec_block(s.body, locals, ret);
        if (f == Flow::kBreak) break;
        if (f == Flow::kReturn) return f;
      }
      return Flow::kNormal;
    case Stmt::Kind::kFor: {
      Value iter = eval(s.exprs[0], locals);
      List items;
      if (auto* l = std::get_if<std::shared_ptr<List>>(&iter.v)) {
        items = **l;
      } else if (auto* str = std::get_if<std::string>(&iter.v)) {
        for (char c : *str) items.emplace_back(std::string(1, c));
      } else if (auto* d = std::get_if<std::shared_ptr<Dict>>(&iter.v)) {
        for (const auto& kv : **d) items.push_back(kv.first);
      } else {
        throw RuntimeError("'" + iter.type_name() + "' object is not iterable");
      }
      for (auto& item : items) {
        (locals ? *locals : globals_)[s.name] = item;
        const Flow f = exec_block(s.body, locals, ret);
        if (f == Flow::kBreak) break;
        if (f == Flow::kReturn) return f;
      }
      return Flow::kNormal;
    }
    case Stmt::Kind::kReturn:
      if (!locals) throw RuntimeError("'return' outside function");
      ret = s.exprs.empty() ? Value() : eval(s.exprs[0], locals);
      return Flow::kReturn;
    case Stmt::Kind::kPass: return Flow::kNormal;
    case Stmt::Kind::kBreak: return Flow::kBreak;
    case Stmt::Kind::kContinue: return Flow::kContinue;
    case Stmt::Kind::kDef: {
      auto c = std::make_shared<Callable>();
      c->name = s.name;
      c->def = &s;
      Value v;
      v.v = std::move(c);
      (locals ? *locals : globals_)[s.name] = std::move(v);
      return Flow::kNormal;
    }
    case Stmt::Kind::kImport:
      for (const auto& n : s.names) {
        auto it = library_.find(n);
        if (it == library_.end()) throw RuntimeError("no module named '" + n + "'");
        (locals ? *locals : globals_)[n] = it->second;
      }
      return Flow::kNormal;
    case Stmt::Kind::kAssert:
      if (!eval(s.exprs[0], locals).truthy()) {
        std::string msg = "assertion failed at line " + std::to_string(s.line);
        if (s.exprs.size() > 1) msg += ": " + eval(s.exprs[1], locals).str();
        throw RuntimeError(msg);
      }
      return Flow::kNormal;
  }
  return Flow::kNormal;
}

bool TestSuiteResult::all_passed() const {
  return parse_ok && loaded && !tests.empty() &&
         std::all_of(tests.begin(), tests.end(), [](const auto& t) { return t.second; });
}

TestSuiteResult run_test_suite(std::string_view program, std::string_view tests) {
  TestSuiteResult out;
  std::shared_ptr<const Module> prog, suite;
  try {
    prog = std::make_shared<const Module>(parse(program));
    suite = std::make_shared<const Module>(parse(tests));
  } catch (const ParseError& e) {
    out.error = e.what();
    return out;
  }
  out.parse_ok = true;
  Interpreter in;
  try {
    in.exec_module(prog);
    in.exec_module(suite);
  } catch (const RuntimeError& e) {
    out.error = e.what();
    out.effects = in.effects();
    return out;
  }
  out.loaded = true;
  for (const auto& s : suite->body) {
    if (s.kind != Stmt::Kind::kDef || s.name.rfind("test_", 0) != 0) continue;
    in.record_effect("== " + s.name);
    bool ok = true;
    try {
      in.call(in.global(s.name), {});
    } catch (const RuntimeError& e) {
      ok = false;
      in.record_effect("!! " + std::string(e.what()));
    }
    out.tests.emplace_back(s.name, ok);
  }
  out.effects = in.effects();
  return out;
}

}  // namespace lineage::pysub
