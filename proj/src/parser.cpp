// Copyright 2026 The Loomweaver Authors
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

#include <cctype>
#include <charconv>
#include <optional>
#include <set>

#include "loomweaver/frontend.h"

namespace loomweaver {
namespace {

enum class Tok { Ident, Int, Float, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

// Nesting limit for expressions so hostile input cannot exhaust the stack.
constexpr int kMaxDepth = 200;

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (c == '"') {
        lex_string(t);
      } else {
        t.kind = Tok::Punct;
        static const char *two[] = {"..", "+="};
        bool matched = false;
        for (const char *p : two) {
          if (src_.substr(pos_, 2) == p) {
            t.text = p;
            advance();
            advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          if (std::string_view("{}()[];:,.=+-*/").find(c) == std::string_view::npos)
            throw CompileError(error_at(t.line, t.column,
                                        "unexpected character '" + printable(c) + "'"));
          t.text = std::string(1, advance());
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  static std::string printable(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isprint(u))
      return std::string(1, c);
    static const char *hex = "0123456789abcdef";
    return std::string("\\x") + hex[u >> 4] + hex[u & 15];
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
      } else {
        break;
      }
    }
  }

  bool digit_at(size_t p) const {
    return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
  }

  void lex_number(Token &t) {
    t.kind = Tok::Int;
    while (digit_at(pos_))
      t.text += advance();
    // "0..32" is a range, not a float.
    if (pos_ < src_.size() && src_[pos_] == '.' && digit_at(pos_ + 1)) {
      t.kind = Tok::Float;
      t.text += advance();
      while (digit_at(pos_))
        t.text += advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-'))
        ++p;
      if (digit_at(p)) {
        t.kind = Tok::Float;
        while (pos_ < p)
          t.text += advance();
        while (digit_at(pos_))
          t.text += advance();
      }
    }
  }

  void lex_string(Token &t) {
    t.kind = Tok::String;
    advance();
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n')
        throw CompileError(error_at(t.line, t.column, "unterminated string literal"));
      char c = advance();
      if (c == '"')
        return;
      if (c == '\\' && pos_ < src_.size())
        c = advance();
      t.text += c;
    }
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct DirectiveArg {
  enum Kind { Ident, Int, String, List } kind = Ident;
  std::string text;
  int64_t value = 0;
  std::vector<int64_t> list;
  int line = 0, column = 0;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Function run() {
    Function f;
    expect_keyword("func");
    f.name = expect_ident("function name").text;
    expect("{");
    bool seen_schedule = false;
    while (!at("}")) {
      const Token &t = peek();
      if (t.kind == Tok::End)
        fail(t, "expected '}' to close function body");
      if (is_keyword("iter"))
        parse_iter(f);
      else if (is_keyword("array"))
        parse_array(f);
      else if (is_keyword("compute"))
        parse_compute(f);
      else if (is_keyword("schedule")) {
        if (seen_schedule)
          fail(t, "duplicate schedule block");
        seen_schedule = true;
        parse_schedule(f);
      } else
        fail(t, "expected 'iter', 'array', 'compute' or 'schedule', found '" + t.text + "'");
    }
    expect("}");
    if (peek().kind != Tok::End)
      fail(peek(), "unexpected input after function body");
    if (!diags_.empty())
      throw CompileError(diags_);
    return f;
  }

private:
  const Token &peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token &next() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  bool at(std::string_view punct) const {
    return peek().kind == Tok::Punct && peek().text == punct;
  }
  bool is_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }

  [[noreturn]] void fail(const Token &t, std::string msg) {
    diags_.push_back(error_at(t.line, t.column, std::move(msg)));
    throw CompileError(diags_);
  }
  void report(const Token &t, std::string msg) {
    diags_.push_back(error_at(t.line, t.column, std::move(msg)));
  }

  void expect(std::string_view punct) {
    if (!at(punct))
      fail(peek(), "expected '" + std::string(punct) + "', found " + describe(peek()));
    next();
  }
  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw))
      fail(peek(), "expected '" + std::string(kw) + "', found " + describe(peek()));
    next();
  }
  const Token &expect_ident(std::string_view what) {
    if (peek().kind != Tok::Ident)
      fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
    return next();
  }
  static std::string describe(const Token &t) {
    switch (t.kind) {
    case Tok::End:
      return "end of input";
    case Tok::String:
      return "string \"" + t.text + "\"";
    default:
      return "'" + t.text + "'";
    }
  }

  int64_t parse_int_token(const Token &t) {
    int64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
      fail(t, "integer literal '" + t.text + "' out of range");
    return v;
  }

  int64_t expect_signed_int() {
    bool neg = false;
    if (at("-")) {
      next();
      neg = true;
    }
    const Token &t = peek();
    if (t.kind != Tok::Int)
      fail(t, "expected integer, found " + describe(t));
    next();
    int64_t v = parse_int_token(t);
    return neg ? wrap_neg(v) : v;
  }

  void declare(const Token &t, const std::string &name) {
    if (!names_.insert(name).second)
      report(t, "duplicate name '" + name + "'");
  }

  void parse_iter(Function &f) {
    next();
    const Token &name = expect_ident("iterator name");
    expect("=");
    int64_t lo = expect_signed_int();
    expect("..");
    int64_t hi = expect_signed_int();
    expect(";");
    declare(name, name.text);
    if (lo >= hi)
      report(name, "iterator '" + name.text + "' has empty range " + std::to_string(lo) +
                       ".." + std::to_string(hi));
    f.iters.push_back(IterVar{name.text, lo, hi});
  }

  void parse_array(Function &f) {
    next();
    const Token &name = expect_ident("array name");
    expect(":");
    const Token &ty = expect_ident("data type");
    auto dtype = parse_dtype(ty.text);
    if (!dtype)
      fail(ty, "unknown data type '" + ty.text + "'");
    Placeholder p;
    p.name = name.text;
    p.dtype = *dtype;
    if (!at("["))
      fail(peek(), "expected array dimensions for '" + name.text + "'");
    while (at("[")) {
      next();
      const Token &e = peek();
      int64_t extent = expect_signed_int();
      if (extent < 1)
        report(e, "array extent must be positive");
      p.shape.push_back(extent);
      expect("]");
    }
    const Token &dir = expect_ident("array direction");
    if (dir.text == "in")
      p.direction = ArrayDirection::In;
    else if (dir.text == "out")
      p.direction = ArrayDirection::Out;
    else if (dir.text == "inout")
      p.direction = ArrayDirection::InOut;
    else if (dir.text == "temp")
      p.direction = ArrayDirection::Temp;
    else
      fail(dir, "expected 'in', 'out', 'inout' or 'temp', found '" + dir.text + "'");
    expect(";");
    declare(name, name.text);
    f.placeholders.push_back(std::move(p));
  }

  void parse_compute(Function &f) {
    next();
    const Token &name = expect_ident("compute name");
    Compute c;
    c.name = name.text;
    c.line = name.line;
    expect("(");
    std::set<std::string> seen;
    for (;;) {
      const Token &it = expect_ident("iterator");
      const IterVar *decl = nullptr;
      for (const auto &v : f.iters)
        if (v.name == it.text)
          decl = &v;
      if (!decl)
        report(it, "unknown iterator '" + it.text + "'");
      else if (!seen.insert(it.text).second)
        report(it, "iterator '" + it.text + "' listed twice");
      else
        c.iters.push_back(*decl);
      if (at(",")) {
        next();
        continue;
      }
      break;
    }
    expect(")");
    expect("{");
    current_ = &c;
    function_ = &f;
    const Token &dest = expect_ident("destination array");
    c.dest.array = dest.text;
    std::vector<const Token *> index_toks;
    while (at("[")) {
      next();
      const Token &start = peek();
      ExprPtr idx = parse_expr(0);
      c.dest.indices.push_back(to_affine(*idx, start));
      expect("]");
    }
    check_array_ref(dest, c.dest.array, c.dest.indices.size());
    if (at("+=")) {
      c.op = StmtOp::Accumulate;
    } else if (at("=")) {
      c.op = StmtOp::Assign;
    } else {
      fail(peek(), "expected '=' or '+=', found " + describe(peek()));
    }
    next();
    c.rhs = parse_expr(0);
    expect(";");
    expect("}");
    current_ = nullptr;
    declare(name, name.text);
    f.computes.push_back(std::move(c));
  }

  void check_array_ref(const Token &t, const std::string &array, size_t rank) {
    const Placeholder *p = function_->find_array(array);
    if (!p) {
      report(t, "unknown array '" + array + "'");
      return;
    }
    if (static_cast<int>(rank) != p->rank())
      report(t, "rank mismatch: '" + array + "' has rank " + std::to_string(p->rank()) +
                    " but is accessed with " + std::to_string(rank) + " indices");
  }

  ExprPtr parse_expr(int depth) {
    guard(depth);
    ExprPtr lhs = parse_term(depth + 1);
    while (at("+") || at("-")) {
      auto op = next().text == "+" ? Expr::BinOp::Add : Expr::BinOp::Sub;
      lhs = Expr::binary(op, lhs, parse_term(depth + 1));
    }
    return lhs;
  }

  ExprPtr parse_term(int depth) {
    guard(depth);
    ExprPtr lhs = parse_unary(depth + 1);
    while (at("*") || at("/")) {
      auto op = next().text == "*" ? Expr::BinOp::Mul : Expr::BinOp::Div;
      lhs = Expr::binary(op, lhs, parse_unary(depth + 1));
    }
    return lhs;
  }

  ExprPtr parse_unary(int depth) {
    guard(depth);
    if (at("-")) {
      next();
      return Expr::negate(parse_unary(depth + 1));
    }
    return parse_primary(depth + 1);
  }

  ExprPtr parse_primary(int depth) {
    guard(depth);
    const Token &t = peek();
    if (t.kind == Tok::Int) {
      next();
      return Expr::int_constant(parse_int_token(t));
    }
    if (t.kind == Tok::Float) {
      next();
      double v = 0;
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (res.ec != std::errc())
        fail(t, "floating-point literal '" + t.text + "' out of range");
      return Expr::float_constant(v);
    }
    if (at("(")) {
      next();
      ExprPtr e = parse_expr(depth + 1);
      expect(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      next();
      if (at("[")) {
        std::vector<AffineExpr> idx;
        while (at("[")) {
          next();
          const Token &start = peek();
          ExprPtr i = parse_expr(depth + 1);
          idx.push_back(to_affine(*i, start));
          expect("]");
        }
        check_array_ref(t, t.text, idx.size());
        return Expr::load(t.text, std::move(idx));
      }
      if (current_->find_iter(t.text))
        return Expr::iterator(AffineExpr::var(t.text));
      if (function_->find_array(t.text))
        report(t, "rank mismatch: array '" + t.text + "' used without indices");
      else if (declared_iter(t.text))
        report(t, "iterator '" + t.text + "' is not in the iteration list of compute '" +
                      current_->name + "'");
      else
        report(t, "unknown identifier '" + t.text + "'");
      return Expr::int_constant(0);
    }
    fail(t, "expected expression, found " + describe(t));
  }

  bool declared_iter(const std::string &n) const {
    for (const auto &v : function_->iters)
      if (v.name == n)
        return true;
    return false;
  }

  void guard(int depth) {
    if (depth > kMaxDepth)
      fail(peek(), "expression nesting too deep");
  }

  // Linear integer combination of iterators plus a constant, folded with
  // wraparound arithmetic.
  std::optional<AffineExpr> affine_of(const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::Constant:
      if (e.is_float_literal)
        return std::nullopt;
      return AffineExpr(e.int_value);
    case Expr::Kind::Index:
      return e.index;
    case Expr::Kind::Load:
      return std::nullopt;
    case Expr::Kind::Negate: {
      auto v = affine_of(*e.lhs);
      if (!v)
        return std::nullopt;
      return -*v;
    }
    case Expr::Kind::Binary: {
      auto l = affine_of(*e.lhs);
      auto r = affine_of(*e.rhs);
      if (!l || !r)
        return std::nullopt;
      switch (e.op) {
      case Expr::BinOp::Add:
        return *l + *r;
      case Expr::BinOp::Sub:
        return *l - *r;
      case Expr::BinOp::Mul:
        if (l->is_constant())
          return *r * l->constant();
        if (r->is_constant())
          return *l * r->constant();
        return std::nullopt;
      case Expr::BinOp::Div:
        if (l->is_constant() && r->is_constant() && r->constant() != 0 &&
            !(l->constant() == INT64_MIN && r->constant() == -1))
          return AffineExpr(l->constant() / r->constant());
        return std::nullopt;
      }
    }
    }
    return std::nullopt;
  }

  AffineExpr to_affine(const Expr &e, const Token &at_tok) {
    auto a = affine_of(e);
    if (!a) {
      report(at_tok, "non-affine index expression '" + to_string(e) + "'");
      return AffineExpr();
    }
    return *a;
  }

  void parse_schedule(Function &f) {
    next();
    expect("{");
    while (!at("}")) {
      if (peek().kind == Tok::End)
        fail(peek(), "expected '}' to close schedule block");
      f.directives.push_back(parse_directive());
    }
    expect("}");
  }

  DirectiveArg parse_arg() {
    DirectiveArg a;
    const Token &t = peek();
    a.line = t.line;
    a.column = t.column;
    if (t.kind == Tok::Ident) {
      a.kind = DirectiveArg::Ident;
      a.text = next().text;
    } else if (t.kind == Tok::String) {
      a.kind = DirectiveArg::String;
      a.text = next().text;
    } else if (at("{")) {
      next();
      a.kind = DirectiveArg::List;
      if (!at("}")) {
        a.list.push_back(expect_signed_int());
        while (at(",")) {
          next();
          a.list.push_back(expect_signed_int());
        }
      }
      expect("}");
    } else {
      a.kind = DirectiveArg::Int;
      a.value = expect_signed_int();
    }
    return a;
  }

  ScheduleDirective parse_directive() {
    const Token &target = expect_ident("compute, array or function name");
    expect(".");
    const Token &prim = expect_ident("scheduling primitive");
    expect("(");
    std::vector<DirectiveArg> args;
    if (!at(")")) {
      args.push_back(parse_arg());
      while (at(",")) {
        next();
        args.push_back(parse_arg());
      }
    }
    expect(")");
    expect(";");

    ScheduleDirective d;
    d.line = target.line;
    d.column = target.column;
    ArgReader r{*this, prim, args};
    const std::string &s = target.text;
    const std::string &p = prim.text;
    if (p == "interchange") {
      r.arity(2);
      d.value = InterchangeDirective{s, r.ident(0), r.ident(1)};
    } else if (p == "split") {
      r.arity(4);
      d.value = SplitDirective{s, r.ident(0), r.integer(1), r.ident(2), r.ident(3)};
    } else if (p == "tile") {
      r.arity(8);
      d.value = TileDirective{s,           r.ident(0),  r.ident(1),  r.integer(2), r.integer(3),
                              r.ident(4), r.ident(5), r.ident(6), r.ident(7)};
    } else if (p == "skew") {
      r.arity(6);
      d.value = SkewDirective{s,           r.ident(0), r.ident(1), r.integer(2),
                              r.integer(3), r.ident(4), r.ident(5)};
    } else if (p == "after") {
      if (args.size() == 1)
        d.value = AfterDirective{s, r.ident(0), ""};
      else {
        r.arity(2);
        d.value = AfterDirective{s, r.ident(0), r.ident(1)};
      }
    } else if (p == "pipeline") {
      r.arity(2);
      d.value = PipelineDirective{s, r.ident(0), r.integer(1)};
    } else if (p == "unroll") {
      r.arity(2);
      d.value = UnrollDirective{s, r.ident(0), r.integer(1)};
    } else if (p == "partition") {
      r.arity(2);
      PartitionDirective pd;
      pd.array = s;
      pd.factors = r.list(0);
      std::string type = r.string(1);
      if (type == "cyclic")
        pd.type = PartitionType::Cyclic;
      else if (type == "block")
        pd.type = PartitionType::Block;
      else if (type == "complete")
        pd.type = PartitionType::Complete;
      else
        fail(prim, "unknown partition type '" + type + "'");
      d.value = pd;
    } else if (p == "auto_dse" || p == "auto_DSE") {
      if (args.empty())
        d.value = AutoDseDirective{s, ""};
      else {
        r.arity(1);
        d.value = AutoDseDirective{s, r.string(0)};
      }
    } else {
      fail(prim, "unknown scheduling primitive '" + p + "'");
    }
    return d;
  }

  struct ArgReader {
    Parser &p;
    const Token &prim;
    const std::vector<DirectiveArg> &args;

    void arity(size_t n) {
      if (args.size() != n)
        p.fail(prim, "'" + prim.text + "' expects " + std::to_string(n) + " arguments, got " +
                         std::to_string(args.size()));
    }
    const DirectiveArg &get(size_t i, DirectiveArg::Kind k, const char *what) {
      const DirectiveArg &a = args[i];
      if (a.kind != k) {
        Token t;
        t.line = a.line;
        t.column = a.column;
        p.fail(t, "argument " + std::to_string(i + 1) + " of '" + prim.text + "' must be " +
                      what);
      }
      return a;
    }
    std::string ident(size_t i) { return get(i, DirectiveArg::Ident, "an identifier").text; }
    int64_t integer(size_t i) { return get(i, DirectiveArg::Int, "an integer").value; }
    std::string string(size_t i) { return get(i, DirectiveArg::String, "a string").text; }
    std::vector<int64_t> list(size_t i) {
      return get(i, DirectiveArg::List, "a list such as {1, 4}").list;
    }
  };

  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<Diagnostic> diags_;
  std::set<std::string> names_;
  Compute *current_ = nullptr;
  Function *function_ = nullptr;
};

} // namespace

Function parse_program(std::string_view text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.run();
}

} // namespace loomweaver
