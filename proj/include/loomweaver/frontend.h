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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loomweaver/affine.h"
#include "loomweaver/diagnostic.h"

namespace loomweaver {

enum class ScalarKind { SignedInt, UnsignedInt, Float };

struct DataType {
  ScalarKind kind = ScalarKind::Float;
  int bits = 32;

  bool is_float() const { return kind == ScalarKind::Float; }
  std::string str() const;       // "f32", "i16", "u8"
  std::string c_type() const;     // "float", "int16_t", ...
  bool operator==(const DataType &) const = default;
};

/// Accepts exactly the widths the DSL allows.
std::optional<DataType> parse_dtype(std::string_view text);

struct IterVar {
  std::string name;
  int64_t lower = 0; // inclusive
  int64_t upper = 0; // exclusive

  int64_t extent() const { return upper - lower; }
  bool operator==(const IterVar &) const = default;
};

enum class ArrayDirection { In, Out, InOut, Temp };
std::string to_string(ArrayDirection dir);

struct Placeholder {
  std::string name;
  DataType dtype;
  std::vector<int64_t> shape;
  ArrayDirection direction = ArrayDirection::In;

  int rank() const { return static_cast<int>(shape.size()); }
  int64_t num_elements() const;
  bool operator==(const Placeholder &) const = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable right-hand-side expression tree. Iterator references are
/// stored as affine expressions so that loop transformations can rewrite
/// them by substitution.
struct Expr {
  enum class Kind { Constant, Index, Load, Binary, Negate };
  enum class BinOp { Add, Sub, Mul, Div };

  Kind kind = Kind::Constant;

  bool is_float_literal = false;
  int64_t int_value = 0;
  double float_value = 0.0;

  AffineExpr index; // Kind::Index

  std::string array;                // Kind::Load
  std::vector<AffineExpr> indices;  // Kind::Load

  BinOp op = BinOp::Add;
  ExprPtr lhs; // Binary, Negate
  ExprPtr rhs; // Binary

  static ExprPtr int_constant(int64_t value);
  static ExprPtr float_constant(double value);
  static ExprPtr iterator(AffineExpr value);
  static ExprPtr load(std::string array, std::vector<AffineExpr> indices);
  static ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
  static ExprPtr negate(ExprPtr operand);
};

bool expr_equal(const Expr &a, const Expr &b);
ExprPtr substitute(const ExprPtr &e, const std::map<std::string, AffineExpr> &subst);
/// Visits loads in evaluation order (left to right, depth first).
void for_each_load(const Expr &e, const std::function<void(const Expr &)> &fn);
std::string to_string(const Expr &e);
std::string format_float_literal(double value);

enum class StmtOp { Assign, Accumulate };

struct Access {
  std::string array;
  std::vector<AffineExpr> indices;
  bool operator==(const Access &) const = default;
};

struct Compute {
  std::string name;
  std::vector<IterVar> iters; // outer to inner
  Access dest;
  StmtOp op = StmtOp::Assign;
  ExprPtr rhs;
  int line = 0;

  std::vector<std::string> iter_names() const;
  const IterVar *find_iter(const std::string &name) const;
  int depth() const { return static_cast<int>(iters.size()); }

  // Source positions do not participate.
  bool operator==(const Compute &o) const;
};

enum class PartitionType { Cyclic, Block, Complete };
std::string to_string(PartitionType type);

struct InterchangeDirective {
  std::string compute, dim_a, dim_b;
  bool operator==(const InterchangeDirective &) const = default;
};
struct SplitDirective {
  std::string compute, dim;
  int64_t factor = 0;
  std::string outer, inner;
  bool operator==(const SplitDirective &) const = default;
};
struct TileDirective {
  std::string compute, dim_i, dim_j;
  int64_t factor_i = 0, factor_j = 0;
  std::string outer_i, outer_j, inner_i, inner_j;
  bool operator==(const TileDirective &) const = default;
};
struct SkewDirective {
  std::string compute, dim_i, dim_j;
  int64_t factor_i = 0, factor_j = 0;
  std::string new_i, new_j;
  bool operator==(const SkewDirective &) const = default;
};
/// `compute` runs after `other` at `level` (a loop of `other`); an empty
/// level means the two nests share no loop.
struct AfterDirective {
  std::string compute, other, level;
  bool operator==(const AfterDirective &) const = default;
};
struct PipelineDirective {
  std::string compute, dim;
  int64_t ii = 1;
  bool operator==(const PipelineDirective &) const = default;
};
struct UnrollDirective {
  std::string compute, dim;
  int64_t factor = 1;
  bool operator==(const UnrollDirective &) const = default;
};
struct PartitionDirective {
  std::string array;
  std::vector<int64_t> factors;
  PartitionType type = PartitionType::Cyclic;
  bool operator==(const PartitionDirective &) const = default;
};
struct AutoDseDirective {
  std::string function, path;
  bool operator==(const AutoDseDirective &) const = default;
};

struct ScheduleDirective {
  using Value = std::variant<InterchangeDirective, SplitDirective, TileDirective,
                             SkewDirective, AfterDirective, PipelineDirective,
                             UnrollDirective, PartitionDirective, AutoDseDirective>;
  Value value;
  int line = 0;
  int column = 0;

  bool is_loop_transform() const;
  bool is_hardware() const;
  bool operator==(const ScheduleDirective &o) const { return value == o.value; }
};

std::string to_string(const ScheduleDirective &d);

struct Function {
  std::string name;
  std::vector<IterVar> iters;
  std::vector<Placeholder> placeholders;
  std::vector<Compute> computes;
  std::vector<ScheduleDirective> directives;

  const Compute *find_compute(const std::string &name) const;
  const Placeholder *find_array(const std::string &name) const;
  int compute_index(const std::string &name) const;
  bool has_auto_dse() const;

  bool operator==(const Function &) const = default;
};

/// Parses DSL source. Throws CompileError carrying every diagnostic found
/// (syntax, unknown identifiers, duplicates, rank mismatch, non-affine
/// indices). Schedule referents are checked by validate().
Function parse_program(std::string_view text);

/// Checks type invariants and directive referents in application order.
/// Never throws.
std::vector<Diagnostic> validate(const Function &f);

/// Canonical DSL text; parse_program(print_program(f)) == f.
std::string print_program(const Function &f);

} // namespace loomweaver
