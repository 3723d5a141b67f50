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

#include "loomweaver/frontend.h"

#include <charconv>
#include <sstream>

namespace loomweaver {

std::string DataType::str() const {
  switch (kind) {
  case ScalarKind::SignedInt:
    return "i" + std::to_string(bits);
  case ScalarKind::UnsignedInt:
    return "u" + std::to_string(bits);
  case ScalarKind::Float:
    return "f" + std::to_string(bits);
  }
  return "?";
}

std::string DataType::c_type() const {
  switch (kind) {
  case ScalarKind::SignedInt:
    return "int" + std::to_string(bits) + "_t";
  case ScalarKind::UnsignedInt:
    return "uint" + std::to_string(bits) + "_t";
  case ScalarKind::Float:
    return bits == 32 ? "float" : "double";
  }
  return "void";
}

std::optional<DataType> parse_dtype(std::string_view text) {
  if (text == "f32")
    return DataType{ScalarKind::Float, 32};
  if (text == "f64")
    return DataType{ScalarKind::Float, 64};
  if (text.size() < 2 || (text[0] != 'i' && text[0] != 'u'))
    return std::nullopt;
  std::string_view width = text.substr(1);
  int bits = 0;
  if (width == "8")
    bits = 8;
  else if (width == "16")
    bits = 16;
  else if (width == "32")
    bits = 32;
  else if (width == "64")
    bits = 64;
  else
    return std::nullopt;
  return DataType{text[0] == 'i' ? ScalarKind::SignedInt : ScalarKind::UnsignedInt, bits};
}

std::string to_string(ArrayDirection dir) {
  switch (dir) {
  case ArrayDirection::In:
    return "in";
  case ArrayDirection::Out:
    return "out";
  case ArrayDirection::InOut:
    return "inout";
  case ArrayDirection::Temp:
    return "temp";
  }
  return "?";
}

std::string to_string(PartitionType type) {
  switch (type) {
  case PartitionType::Cyclic:
    return "cyclic";
  case PartitionType::Block:
    return "block";
  case PartitionType::Complete:
    return "complete";
  }
  return "?";
}

int64_t Placeholder::num_elements() const {
  int64_t n = 1;
  for (int64_t e : shape)
    n *= e;
  return n;
}

ExprPtr Expr::int_constant(int64_t value) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Constant;
  e->int_value = value;
  return e;
}

ExprPtr Expr::float_constant(double value) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Constant;
  e->is_float_literal = true;
  e->float_value = value;
  return e;
}

ExprPtr Expr::iterator(AffineExpr value) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Index;
  e->index = std::move(value);
  return e;
}

ExprPtr Expr::load(std::string array, std::vector<AffineExpr> indices) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Load;
  e->array = std::move(array);
  e->indices = std::move(indices);
  return e;
}

ExprPtr Expr::binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Binary;
  e->op = op;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

ExprPtr Expr::negate(ExprPtr operand) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Negate;
  e->lhs = std::move(operand);
  return e;
}

bool expr_equal(const Expr &a, const Expr &b) {
  if (a.kind != b.kind)
    return false;
  switch (a.kind) {
  case Expr::Kind::Constant:
    if (a.is_float_literal != b.is_float_literal)
      return false;
    return a.is_float_literal ? a.float_value == b.float_value : a.int_value == b.int_value;
  case Expr::Kind::Index:
    return a.index == b.index;
  case Expr::Kind::Load:
    return a.array == b.array && a.indices == b.indices;
  case Expr::Kind::Binary:
    return a.op == b.op && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
  case Expr::Kind::Negate:
    return expr_equal(*a.lhs, *b.lhs);
  }
  return false;
}

ExprPtr substitute(const ExprPtr &e, const std::map<std::string, AffineExpr> &subst) {
  switch (e->kind) {
  case Expr::Kind::Constant:
    return e;
  case Expr::Kind::Index:
    return Expr::iterator(e->index.substitute(subst));
  case Expr::Kind::Load: {
    std::vector<AffineExpr> idx;
    idx.reserve(e->indices.size());
    for (const auto &i : e->indices)
      idx.push_back(i.substitute(subst));
    return Expr::load(e->array, std::move(idx));
  }
  case Expr::Kind::Binary:
    return Expr::binary(e->op, substitute(e->lhs, subst), substitute(e->rhs, subst));
  case Expr::Kind::Negate:
    return Expr::negate(substitute(e->lhs, subst));
  }
  return e;
}

void for_each_load(const Expr &e, const std::function<void(const Expr &)> &fn) {
  switch (e.kind) {
  case Expr::Kind::Load:
    fn(e);
    break;
  case Expr::Kind::Binary:
    for_each_load(*e.lhs, fn);
    for_each_load(*e.rhs, fn);
    break;
  case Expr::Kind::Negate:
    for_each_load(*e.lhs, fn);
    break;
  default:
    break;
  }
}

std::string format_float_literal(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos)
    s += ".0";
  return s;
}

static int precedence(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Binary:
    return (e.op == Expr::BinOp::Add || e.op == Expr::BinOp::Sub) ? 1 : 2;
  case Expr::Kind::Negate:
    return 3;
  case Expr::Kind::Index:
    return e.index.is_plain_var() || e.index.is_constant() ? 4 : 1;
  default:
    return 4;
  }
}

static std::string access_str(const std::string &array, const std::vector<AffineExpr> &idx) {
  std::string out = array;
  for (const auto &i : idx)
    out += "[" + i.str() + "]";
  return out;
}

std::string to_string(const Expr &e) {
  switch (e.kind) {
  case Expr::Kind::Constant:
    return e.is_float_literal ? format_float_literal(e.float_value)
                              : std::to_string(e.int_value);
  case Expr::Kind::Index:
    return e.index.str();
  case Expr::Kind::Load:
    return access_str(e.array, e.indices);
  case Expr::Kind::Negate: {
    std::string inner = to_string(*e.lhs);
    return precedence(*e.lhs) < 3 ? "-(" + inner + ")" : "-" + inner;
  }
  case Expr::Kind::Binary: {
    static const char *ops[] = {" + ", " - ", " * ", " / "};
    int p = precedence(e);
    std::string l = to_string(*e.lhs), r = to_string(*e.rhs);
    if (precedence(*e.lhs) < p)
      l = "(" + l + ")";
    // Left associative: an equal-precedence right operand needs parentheses.
    if (precedence(*e.rhs) <= p)
      r = "(" + r + ")";
    return l + ops[static_cast<int>(e.op)] + r;
  }
  }
  return "";
}

std::vector<std::string> Compute::iter_names() const {
  std::vector<std::string> out;
  for (const auto &it : iters)
    out.push_back(it.name);
  return out;
}

const IterVar *Compute::find_iter(const std::string &n) const {
  for (const auto &it : iters)
    if (it.name == n)
      return &it;
  return nullptr;
}

bool Compute::operator==(const Compute &o) const {
  if (name != o.name || iters != o.iters || !(dest == o.dest) || op != o.op)
    return false;
  if (!rhs || !o.rhs)
    return rhs == o.rhs;
  return expr_equal(*rhs, *o.rhs);
}

bool ScheduleDirective::is_loop_transform() const {
  return std::holds_alternative<InterchangeDirective>(value) ||
         std::holds_alternative<SplitDirective>(value) ||
         std::holds_alternative<TileDirective>(value) ||
         std::holds_alternative<SkewDirective>(value) ||
         std::holds_alternative<AfterDirective>(value);
}

bool ScheduleDirective::is_hardware() const {
  return std::holds_alternative<PipelineDirective>(value) ||
         std::holds_alternative<UnrollDirective>(value) ||
         std::holds_alternative<PartitionDirective>(value);
}

namespace {
struct DirectivePrinter {
  std::string operator()(const InterchangeDirective &d) const {
    return d.compute + ".interchange(" + d.dim_a + ", " + d.dim_b + ")";
  }
  std::string operator()(const SplitDirective &d) const {
    return d.compute + ".split(" + d.dim + ", " + std::to_string(d.factor) + ", " + d.outer +
           ", " + d.inner + ")";
  }
  std::string operator()(const TileDirective &d) const {
    return d.compute + ".tile(" + d.dim_i + ", " + d.dim_j + ", " + std::to_string(d.factor_i) +
           ", " + std::to_string(d.factor_j) + ", " + d.outer_i + ", " + d.outer_j + ", " +
           d.inner_i + ", " + d.inner_j + ")";
  }
  std::string operator()(const SkewDirective &d) const {
    return d.compute + ".skew(" + d.dim_i + ", " + d.dim_j + ", " + std::to_string(d.factor_i) +
           ", " + std::to_string(d.factor_j) + ", " + d.new_i + ", " + d.new_j + ")";
  }
  std::string operator()(const AfterDirective &d) const {
    if (d.level.empty())
      return d.compute + ".after(" + d.other + ")";
    return d.compute + ".after(" + d.other + ", " + d.level + ")";
  }
  std::string operator()(const PipelineDirective &d) const {
    return d.compute + ".pipeline(" + d.dim + ", " + std::to_string(d.ii) + ")";
  }
  std::string operator()(const UnrollDirective &d) const {
    return d.compute + ".unroll(" + d.dim + ", " + std::to_string(d.factor) + ")";
  }
  std::string operator()(const PartitionDirective &d) const {
    std::string f;
    for (size_t i = 0; i < d.factors.size(); ++i)
      f += (i ? ", " : "") + std::to_string(d.factors[i]);
    return d.array + ".partition({" + f + "}, \"" + to_string(d.type) + "\")";
  }
  std::string operator()(const AutoDseDirective &d) const {
    std::string escaped;
    for (char c : d.path) {
      if (c == '"' || c == '\\')
        escaped += '\\';
      escaped += c;
    }
    return d.function + ".auto_dse(\"" + escaped + "\")";
  }
};
} // namespace

std::string to_string(const ScheduleDirective &d) { return std::visit(DirectivePrinter{}, d.value); }

const Compute *Function::find_compute(const std::string &n) const {
  for (const auto &c : computes)
    if (c.name == n)
      return &c;
  return nullptr;
}

const Placeholder *Function::find_array(const std::string &n) const {
  for (const auto &p : placeholders)
    if (p.name == n)
      return &p;
  return nullptr;
}

int Function::compute_index(const std::string &n) const {
  for (size_t i = 0; i < computes.size(); ++i)
    if (computes[i].name == n)
      return static_cast<int>(i);
  return -1;
}

bool Function::has_auto_dse() const {
  for (const auto &d : directives)
    if (std::holds_alternative<AutoDseDirective>(d.value))
      return true;
  return false;
}

std::string print_program(const Function &f) {
  std::ostringstream os;
  os << "func " << f.name << " {\n";
  for (const auto &it : f.iters)
    os << "  iter " << it.name << " = " << it.lower << ".." << it.upper << ";\n";
  for (const auto &p : f.placeholders) {
    os << "  array " << p.name << ": " << p.dtype.str();
    for (int64_t e : p.shape)
      os << "[" << e << "]";
    os << " " << to_string(p.direction) << ";\n";
  }
  for (const auto &c : f.computes) {
    os << "  compute " << c.name << " (";
    for (size_t i = 0; i < c.iters.size(); ++i)
      os << (i ? ", " : "") << c.iters[i].name;
    os << ") { " << access_str(c.dest.array, c.dest.indices)
       << (c.op == StmtOp::Accumulate ? " += " : " = ") << to_string(*c.rhs) << "; }\n";
  }
  if (!f.directives.empty()) {
    os << "  schedule {\n";
    for (const auto &d : f.directives)
      os << "    " << to_string(d) << ";\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

} // namespace loomweaver
