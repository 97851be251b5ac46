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

#include "lineage/pysub.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace lineage::pysub {

namespace {

const std::unordered_set<std::string_view> kKeywords = {
    "def",  "return", "if",     "elif",  "else", "while", "for",  "in",
    "pass", "break",  "continue", "import", "assert", "and", "or", "not",
    "True", "False",  "None",
};

// Longest first so that "//" wins over "/".
const std::vector<std::string_view> kOperators = {
    "//=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "//", "%=", "(", ")", "[",
    "]",   "{",  "}",  ",",  ":",  ".",  "=",  "<",  ">",  "+",  "-",  "*", "/", "%",
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::vector<int> indents{0};
  int line = 1;
  int depth = 0;  // bracket nesting; newlines inside brackets are ignored
  std::vector<int> open_lines;
  std::size_t i = 0;
  bool at_line_start = true;

  while (i < src.size()) {
    if (at_line_start && depth == 0) {
      int width = 0;
      std::size_t j = i;
      while (j < src.size() && (src[j] == ' ' || src[j] == '\t')) {
        width += src[j] == '\t' ? 4 : 1;
        ++j;
      }
      // Blank and comment-only lines do not affect indentation.
      if (j >= src.size() || src[j] == '\n' || src[j] == '\r' || src[j] == '#') {
        while (j < src.size() && src[j] != '\n') ++j;
        if (j < src.size()) {
          ++j;
          ++line;
        }
        i = j;
        continue;
      }
      if (width > indents.back()) {
        indents.push_back(width);
        out.push_back({TokKind::kIndent, "", line});
      } else {
        while (width < indents.back()) {
          indents.pop_back();
          out.push_back({TokKind::kDedent, "", line});
        }
        if (width != indents.back()) throw ParseError("inconsistent dedent", line);
      }
      i = j;
      at_line_start = false;
    }

    const char c = src[i];
    if (c == '\n') {
      if (depth == 0) {
        out.push_back({TokKind::kNewline, "", line});
        at_line_start = true;
      }
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < src.size() && src[i + 1] == '\n') {
      i += 2;
      ++line;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      out.push_back({kKeywords.count(word) ? TokKind::kKeyword : TokKind::kName, word, line});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && is_ident_start(src[j])) throw ParseError("malformed number", line);
      out.push_back({TokKind::kNumber, std::string(src.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      const char q = c;
      std::string value;
      std::size_t j = i + 1;
      for (;;) {
        if (j >= src.size() || src[j] == '\n') throw ParseError("unterminated string", line);
        const char d = src[j];
        if (d == q) break;
        if (d == '\\') {
          if (j + 1 >= src.size()) throw ParseError("unterminated string", line);
          const char e = src[j + 1];
          j += 2;
          switch (e) {
            case 'n': value.push_back('\n'); break;
            case 't': value.push_back('\t'); break;
            case 'r': value.push_back('\r'); break;
            case '0': value.push_back('\0'); break;
            case '\\': value.push_back('\\'); break;
            case '\'': value.push_back('\''); break;
            case '"': value.push_back('"'); break;
            case 'x': {
              if (j + 1 >= src.size() || hex_value(src[j]) < 0 || hex_value(src[j + 1]) < 0) {
                throw ParseError("bad \\x escape", line);
              }
              value.push_back(static_cast<char>(hex_value(src[j]) * 16 + hex_value(src[j + 1])));
              j += 2;
              break;
            }
            default: throw ParseError(std::string("unknown escape \\") + e, line);
          }
          continue;
        }
        value.push_back(d);
        ++j;
      }
      out.push_back({TokKind::kString, std::move(value), line});
      i = j + 1;
      continue;
    }
    bool matched = false;
    for (std::string_view op : kOperators) {
      if (src.substr(i, op.size()) == op) {
        if (op == "(" || op == "[" || op == "{") {
          ++depth;
          open_lines.push_back(line);
        }
        if (op == ")" || op == "]" || op == "}") {
          if (depth == 0) throw ParseError("unbalanced '" + std::string(op) + "'", line);
          --depth;
          open_lines.pop_back();
        }
        out.push_back({TokKind::kOp, std::string(op), line});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", line);
  }
  if (depth != 0) throw ParseError("unclosed bracket", open_lines.back());
  if (!out.empty() && out.back().kind != TokKind::kNewline && out.back().kind != TokKind::kDedent) {
    out.push_back({TokKind::kNewline, "", line});
  }
  while (indents.size() > 1) {
    indents.pop_back();
    out.push_back({TokKind::kDedent, "", line});
  }
  out.push_back({TokKind::kEnd, "", line});
  return out;
}

// ---------------------------------------------------------------------------
// Expr helpers

Expr Expr::name(std::string id) {
  Expr e;
  e.kind = Kind::kName;
  e.text = std::move(id);
  return e;
}

Expr Expr::integer(std::int64_t v) {
  Expr e;
  e.kind = Kind::kInt;
  e.number = v;
  return e;
}

Expr Expr::str(std::string v) {
  Expr e;
  e.kind = Kind::kStr;
  e.text = std::move(v);
  return e;
}

Expr Expr::binop(std::string op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::kBinOp;
  e.text = std::move(op);
  e.args = {std::move(lhs), std::move(rhs)};
  return e;
}

Expr Expr::compare(std::string op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::kCompare;
  e.text = std::move(op);
  e.args = {std::move(lhs), std::move(rhs)};
  return e;
}

Expr Expr::call(Expr callee, std::vector<Expr> arguments) {
  Expr e;
  e.kind = Kind::kCall;
  e.args.reserve(arguments.size() + 1);
  e.args.push_back(std::move(callee));
  for (auto& a : arguments) e.args.push_back(std::move(a));
  return e;
}

Expr Expr::attribute(Expr object, std::string attr) {
  Expr e;
  e.kind = Kind::kAttribute;
  e.text = std::move(attr);
  e.args = {std::move(object)};
  return e;
}

Expr Expr::subscript(Expr object, Expr index) {
  Expr e;
  e.kind = Kind::kSubscript;
  e.args = {std::move(object), std::move(index)};
  return e;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Module parse_module() {
    Module m;
    while (!at(TokKind::kEnd)) {
      if (accept(TokKind::kNewline)) continue;
      m.body.push_back(statement());
    }
    return m;
  }

  Expr parse_single_expression() {
    while (accept(TokKind::kNewline)) {}
    Expr e = expression();
    while (accept(TokKind::kNewline)) {}
    if (!at(TokKind::kEnd)) fail("trailing tokens after expression");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(TokKind k) const { return peek().kind == k; }
  bool at_op(std::string_view op) const { return peek().kind == TokKind::kOp && peek().text == op; }
  bool at_kw(std::string_view kw) const {
    return peek().kind == TokKind::kKeyword && peek().text == kw;
  }
  bool accept(TokKind k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    ++pos_;
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line); }
  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
  }
  std::string expect_name() {
    if (!at(TokKind::kName)) fail("expected identifier");
    return toks_[pos_++].text;
  }
  void expect_newline() {
    if (!accept(TokKind::kNewline) && !at(TokKind::kEnd)) fail("expected end of line");
  }

  std::vector<Stmt> block() {
    expect_op(":");
    std::vector<Stmt> body;
    if (!accept(TokKind::kNewline)) {
      body.push_back(simple_statement());
      return body;
    }
    if (!accept(TokKind::kIndent)) fail("expected an indented block");
    while (!accept(TokKind::kDedent)) {
      if (at(TokKind::kEnd)) fail("unexpected end of input in block");
      if (accept(TokKind::kNewline)) continue;
      body.push_back(statement());
    }
    if (body.empty()) fail("empty block");
    return body;
  }

  Stmt statement() {
    const int line = peek().line;
    if (accept_kw("def")) {
      Stmt s;
      s.kind = Stmt::Kind::kDef;
      s.line = line;
      s.name = expect_name();
      expect_op("(");
      if (!at_op(")")) {
        do {
          s.names.push_back(expect_name());
        } while (accept_op(","));
      }
      expect_op(")");
      std::set<std::string> unique(s.names.begin(), s.names.end());
      if (unique.size() != s.names.size()) fail("duplicate parameter name");
      s.body = block();
      return s;
    }
    if (accept_kw("if")) return if_tail(line);
    if (accept_kw("while")) {
      Stmt s;
      s.kind = Stmt::Kind::kWhile;
      s.line = line;
      s.exprs.push_back(expression());
      s.body = block();
      return s;
    }
    if (accept_kw("for")) {
      Stmt s;
      s.kind = Stmt::Kind::kFor;
      s.line = line;
      s.name = expect_name();
      expect_kw("in");
      s.exprs.push_back(expression());
      s.body = block();
      return s;
    }
    return simple_statement();
  }

  Stmt if_tail(int line) {
    Stmt s;
    s.kind = Stmt::Kind::kIf;
    s.line = line;
    s.exprs.push_back(expression());
    s.body = block();
    if (at_kw("elif")) {
      const int elif_line = peek().line;
      ++pos_;
      s.orelse.push_back(if_tail(elif_line));
      s.elif = true;
    } else if (accept_kw("else")) {
      s.orelse = block();
    }
    return s;
  }

  Stmt simple_statement() {
    Stmt s;
    s.line = peek().line;
    if (accept_kw("pass")) {
      s.kind = Stmt::Kind::kPass;
    } else if (accept_kw("break")) {
      s.kind = Stmt::Kind::kBreak;
    } else if (accept_kw("continue")) {
      s.kind = Stmt::Kind::kContinue;
    } else if (accept_kw("return")) {
      s.kind = Stmt::Kind::kReturn;
      if (!at(TokKind::kNewline) && !at(TokKind::kEnd)) s.exprs.push_back(expression());
    } else if (accept_kw("import")) {
      s.kind = Stmt::Kind::kImport;
      do {
        s.names.push_back(expect_name());
      } while (accept_op(","));
    } else if (accept_kw("assert")) {
      s.kind = Stmt::Kind::kAssert;
      s.exprs.push_back(expression());
      if (accept_op(",")) s.exprs.push_back(expression());
    } else {
      Expr lhs = expression();
      if (accept_op("=")) {
        check_target(lhs);
        s.kind = Stmt::Kind::kAssign;
        s.exprs = {std::move(lhs), expression()};
      } else if (at(TokKind::kOp) && (peek().text == "+=" || peek().text == "-=" ||
                                      peek().text == "*=" || peek().text == "//=" ||
                                      peek().text == "%=")) {
        check_target(lhs);
        s.kind = Stmt::Kind::kAugAssign;
        s.name = toks_[pos_++].text;
        s.exprs = {std::move(lhs), expression()};
      } else {
        s.kind = Stmt::Kind::kExpr;
        s.exprs.push_back(std::move(lhs));
      }
    }
    expect_newline();
    return s;
  }

  void check_target(const Expr& e) const {
    if (e.kind != Expr::Kind::kName && e.kind != Expr::Kind::kSubscript) {
      fail("invalid assignment target");
    }
  }

  Expr expression() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (accept_kw("or")) {
      Expr e;
      e.kind = Expr::Kind::kBoolOp;
      e.text = "or";
      e.args = {std::move(lhs), and_expr()};
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (accept_kw("and")) {
      Expr e;
      e.kind = Expr::Kind::kBoolOp;
      e.text = "and";
      e.args = {std::move(lhs), not_expr()};
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr not_expr() {
    if (accept_kw("not")) {
      Expr e;
      e.kind = Expr::Kind::kUnary;
      e.text = "not";
      e.args = {not_expr()};
      return e;
    }
    return comparison();
  }

  Expr comparison() {
    Expr lhs = additive();
    std::string op;
    if (at(TokKind::kOp) && (peek().text == "==" || peek().text == "!=" || peek().text == "<" ||
                             peek().text == "<=" || peek().text == ">" || peek().text == ">=")) {
      op = toks_[pos_++].text;
    } else if (accept_kw("in")) {
      op = "in";
    } else if (at_kw("not") && peek(1).kind == TokKind::kKeyword && peek(1).text == "in") {
      pos_ += 2;
      op = "not in";
    } else {
      return lhs;
    }
    Expr rhs = additive();
    if (at(TokKind::kOp) && (peek().text == "==" || peek().text == "!=" || peek().text == "<" ||
                             peek().text == "<=" || peek().text == ">" || peek().text == ">=")) {
      fail("chained comparisons are not supported");
    }
    return Expr::compare(op, std::move(lhs), std::move(rhs));
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (at_op("+") || at_op("-")) {
      std::string op = toks_[pos_++].text;
      lhs = Expr::binop(op, std::move(lhs), multiplicative());
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (at_op("*") || at_op("//") || at_op("%") || at_op("/")) {
      std::string op = toks_[pos_++].text;
      lhs = Expr::binop(op, std::move(lhs), unary());
    }
    return lhs;
  }

  Expr unary() {
    if (accept_op("-")) {
      Expr e;
      e.kind = Expr::Kind::kUnary;
      e.text = "-";
      e.args = {unary()};
      return e;
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = atom();
    for (;;) {
      if (accept_op("(")) {
        std::vector<Expr> args;
        if (!at_op(")")) {
          do {
            if (at_op(")")) break;
            args.push_back(expression());
          } while (accept_op(","));
        }
        expect_op(")");
        e = Expr::call(std::move(e), std::move(args));
      } else if (accept_op(".")) {
        e = Expr::attribute(std::move(e), expect_name());
      } else if (accept_op("[")) {
        Expr idx = expression();
        expect_op("]");
        e = Expr::subscript(std::move(e), std::move(idx));
      } else {
        return e;
      }
    }
  }

  Expr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::kName:
        ++pos_;
        return Expr::name(t.text);
      case TokKind::kNumber: {
        ++pos_;
        try {
          return Expr::integer(std::stoll(t.text));
        } catch (const std::exception&) {
          throw ParseError("integer literal out of range", t.line);
        }
      }
      case TokKind::kString: {
        ++pos_;
        std::string v = t.text;
        // Adjacent literals concatenate, as in Python.
        while (at(TokKind::kString)) v += toks_[pos_++].text;
        return Expr::str(std::move(v));
      }
      case TokKind::kKeyword:
        if (t.text == "True" || t.text == "False") {
          ++pos_;
          Expr e;
          e.kind = Expr::Kind::kBool;
          e.number = t.text == "True" ? 1 : 0;
          return e;
        }
        if (t.text == "None") {
          ++pos_;
          return Expr{};
        }
        break;
      case TokKind::kOp:
        if (t.text == "(") {
          ++pos_;
          Expr e = expression();
          expect_op(")");
          return e;
        }
        if (t.text == "[") {
          ++pos_;
          Expr e;
          e.kind = Expr::Kind::kList;
          if (!at_op("]")) {
            do {
              if (at_op("]")) break;
              e.args.push_back(expression());
            } while (accept_op(","));
          }
          expect_op("]");
          return e;
        }
        if (t.text == "{") {
          ++pos_;
          Expr e;
          e.kind = Expr::Kind::kDict;
          if (!at_op("}")) {
            do {
              if (at_op("}")) break;
              e.args.push_back(expression());
              expect_op(":");
              e.args.push_back(expression());
            } while (accept_op(","));
          }
          expect_op("}");
          return e;
        }
        break;
      default:
        break;
    }
    fail(t.kind == TokKind::kEnd ? "unexpected end of input"
                                 : "unexpected token '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

enum Prec { kOr = 1, kAnd, kNot, kCmp, kAdd, kMul, kUnaryPrec, kPostfix, kAtom };

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kBoolOp: return e.text == "or" ? kOr : kAnd;
    case Expr::Kind::kUnary: return e.text == "not" ? kNot : kUnaryPrec;
    case Expr::Kind::kCompare: return kCmp;
    case Expr::Kind::kBinOp: return (e.text == "+" || e.text == "-") ? kAdd : kMul;
    case Expr::Kind::kCall:
    case Expr::Kind::kAttribute:
    case Expr::Kind::kSubscript: return kPostfix;
    case Expr::Kind::kInt: return e.number < 0 ? kUnaryPrec : kAtom;
    default: return kAtom;
  }
}

void print_expr_into(const Expr& e, std::string& out);

void print_with(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_expr_into(e, out);
    out += ')';
  } else {
    print_expr_into(e, out);
  }
}

void print_expr_into(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::kName: out += e.text; break;
    case Expr::Kind::kInt: out += std::to_string(e.number); break;
    case Expr::Kind::kStr: out += quote(e.text); break;
    case Expr::Kind::kBool: out += e.number ? "True" : "False"; break;
    case Expr::Kind::kNone: out += "None"; break;
    case Expr::Kind::kBinOp: {
      const int p = precedence(e);
      print_with(e.args[0], p, out);
      out += ' ' + e.text + ' ';
      print_with(e.args[1], p + 1, out);
      break;
    }
    case Expr::Kind::kBoolOp: {
      const int p = precedence(e);
      print_with(e.args[0], p, out);
      out += ' ' + e.text + ' ';
      print_with(e.args[1], p + 1, out);
      break;
    }
    case Expr::Kind::kCompare:
      print_with(e.args[0], kCmp + 1, out);
      out += ' ' + e.text + ' ';
      print_with(e.args[1], kCmp + 1, out);
      break;
    case Expr::Kind::kUnary:
      if (e.text == "not") {
        out += "not ";
        print_with(e.args[0], kNot, out);
      } else {
        out += '-';
        print_with(e.args[0], kUnaryPrec, out);
      }
      break;
    case Expr::Kind::kCall:
      print_with(e.args[0], kPostfix, out);
      out += '(';
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        if (i > 1) out += ", ";
        print_expr_into(e.args[i], out);
      }
      out += ')';
      break;
    case Expr::Kind::kAttribute:
      print_with(e.args[0], kPostfix, out);
      out += '.';
      out += e.text;
      break;
    case Expr::Kind::kSubscript:
      print_with(e.args[0], kPostfix, out);
      out += '[';
      print_expr_into(e.args[1], out);
      out += ']';
      break;
    case Expr::Kind::kList:
      out += '[';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_expr_into(e.args[i], out);
      }
      out += ']';
      break;
    case Expr::Kind::kDict:
      out += '{';
      for (std::size_t i = 0; i + 1 < e.args.size(); i += 2) {
        if (i) out += ", ";
        print_expr_into(e.args[i], out);
        out += ": ";
        print_expr_into(e.args[i + 1], out);
      }
      out += '}';
      break;
  }
}

void print_block(const std::vector<Stmt>& block, int indent, std::string& out);

void print_stmt(const Stmt& s, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  out += pad;
  switch (s.kind) {
    case Stmt::Kind::kExpr:
      out += print_expr(s.exprs[0]);
      out += '\n';
      break;
    case Stmt::Kind::kAssign:
      out += print_expr(s.exprs[0]) + " = " + print_expr(s.exprs[1]) + '\n';
      break;
    case Stmt::Kind::kAugAssign:
      out += print_expr(s.exprs[0]) + ' ' + s.name + ' ' + print_expr(s.exprs[1]) + '\n';
      break;
    case Stmt::Kind::kIf: {
      out += "if " + print_expr(s.exprs[0]) + ":\n";
      print_block(s.body, indent + 1, out);
      const Stmt* cur = &s;
      while (cur->elif && cur->orelse.size() == 1 && cur->orelse[0].kind == Stmt::Kind::kIf) {
        cur = &cur->orelse[0];
        out += pad + "elif " + print_expr(cur->exprs[0]) + ":\n";
        print_block(cur->body, indent + 1, out);
      }
      if (!cur->orelse.empty()) {
        out += pad + "else:\n";
        print_block(cur->orelse, indent + 1, out);
      }
      break;
    }
    case Stmt::Kind::kWhile:
      out += "while " + print_expr(s.exprs[0]) + ":\n";
      print_block(s.body, indent + 1, out);
      break;
    case Stmt::Kind::kFor:
      out += "for " + s.name + " in " + print_expr(s.exprs[0]) + ":\n";
      print_block(s.body, indent + 1, out);
      break;
    case Stmt::Kind::kReturn:
      out += s.exprs.empty() ? "return" : "return " + print_expr(s.exprs[0]);
      out += '\n';
      break;
    case Stmt::Kind::kPass: out += "pass\n"; break;
    case Stmt::Kind::kBreak: out += "break\n"; break;
    case Stmt::Kind::kContinue: out += "continue\n"; break;
    case Stmt::Kind::kDef: {
      out += "def " + s.name + "(";
      for (std::size_t i = 0; i < s.names.size(); ++i) {
        if (i) out += ", ";
        out += s.names[i];
      }
      out += "):\n";
      print_block(s.body, indent + 1, out);
      break;
    }
    case Stmt::Kind::kImport: {
      out += "import ";
      for (std::size_t i = 0; i < s.names.size(); ++i) {
        if (i) out += ", ";
        out += s.names[i];
      }
      out += '\n';
      break;
    }
    case Stmt::Kind::kAssert:
      out += "assert " + print_expr(s.exprs[0]);
      if (s.exprs.size() > 1) out += ", " + print_expr(s.exprs[1]);
      out += '\n';
      break;
  }
}

void print_block(const std::vector<Stmt>& block, int indent, std::string& out) {
  if (block.empty()) {
    out += std::string(static_cast<std::size_t>(indent) * 4, ' ') + "pass\n";
    return;
  }
  for (const auto& s : block) print_stmt(s, indent, out);
}

// ---------------------------------------------------------------------------
// Constant folding

bool fold_once(Expr& e) {
  bool changed = false;
  for (auto& a : e.args) changed |= fold_once(a);

  if (e.kind == Expr::Kind::kBinOp && e.text == "+" && e.args[0].kind == Expr::Kind::kStr &&
      e.args[1].kind == Expr::Kind::kStr) {
    Expr folded = Expr::str(e.args[0].text + e.args[1].text);
    e = std::move(folded);
    return true;
  }
  if (e.kind == Expr::Kind::kCall && e.args.size() == 3 &&
      e.args[0].kind == Expr::Kind::kName && e.args[0].text == "getattr" &&
      e.args[2].kind == Expr::Kind::kStr) {
    Expr folded = Expr::attribute(std::move(e.args[1]), e.args[2].text);
    e = std::move(folded);
    return true;
  }
  if (e.kind == Expr::Kind::kSubscript && e.args[0].kind == Expr::Kind::kDict) {
    const Expr& key = e.args[1];
    if (key.kind == Expr::Kind::kStr || key.kind == Expr::Kind::kInt) {
      const auto& items = e.args[0].args;
      for (std::size_t i = items.size(); i >= 2; i -= 2) {
        // Last binding wins, as in a dict display.
        if (items[i - 2] == key) {
          Expr folded = items[i - 1];
          e = std::move(folded);
          return true;
        }
      }
    }
  }
  return changed;
}

void fold_block(std::vector<Stmt>& block) {
  for (auto& s : block) {
    for (auto& e : s.exprs) {
      while (fold_once(e)) {}
    }
    fold_block(s.body);
    fold_block(s.orelse);
  }
}

}  // namespace

Module parse(std::string_view source) { return Parser(tokenize(source)).parse_module(); }

Expr parse_expression(std::string_view source) {
  return Parser(tokenize(source)).parse_single_expression();
}

bool parses(std::string_view source, std::string* error) {
  try {
    parse(source);
    return true;
  } catch (const ParseError& e) {
    if (error) *error = e.what();
    return false;
  }
}

std::string quote(std::string_view value) {
  static const char* kHex = "0123456789abcdef";
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u == 0x7f) {
          out += "\\x";
          out += kHex[u >> 4];
          out += kHex[u & 0xf];
        } else {
          out += c;
        }
      }
    }
  }
  out += '"';
  return out;
}

std::string print_expr(const Expr& expr) {
  std::string out;
  print_expr_into(expr, out);
  return out;
}

std::string print(const Module& module) {
  std::string out;
  for (std::size_t i = 0; i < module.body.size(); ++i) {
    const auto& s = module.body[i];
    if (i > 0 && (s.kind == Stmt::Kind::kDef || module.body[i - 1].kind == Stmt::Kind::kDef)) {
      out += '\n';
    }
    print_stmt(s, 0, out);
  }
  return out;
}

Module deobfuscate(const Module& module) {
  Module m = module;
  fold_block(m.body);
  return m;
}

Expr deobfuscate_expr(const Expr& expr) {
  Expr e = expr;
  while (fold_once(e)) {}
  return e;
}

std::vector<std::string> imported_modules(const Module& module) {
  std::vector<std::string> out;
  for_each_stmt(module.body, [&](const Stmt& s) {
    if (s.kind != Stmt::Kind::kImport) return;
    for (const auto& n : s.names) {
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
  });
  return out;
}

}  // namespace lineage::pysub
