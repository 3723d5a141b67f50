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

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "loomweaver/frontend.h"
#include "loomweaver/polyhedral.h"

namespace loomweaver {

struct PragmaAttr {
  enum class Kind { Pipeline, Unroll };
  Kind kind = Kind::Pipeline;
  int64_t value = 1; // II or unroll factor
  bool full = false; // unroll covers the whole trip count
  bool operator==(const PragmaAttr &) const = default;
};

struct PartitionAttr {
  PartitionType type = PartitionType::Cyclic;
  int64_t factor = 1;
  int dim = 1; // 1-based
  bool operator==(const PartitionAttr &) const = default;
};

struct Node;

struct LoopNode {
  std::string iv;
  BoundExpr lower, upper; // inclusive
  std::vector<PragmaAttr> attrs;
  std::vector<std::pair<std::string, std::string>> origins; // (stmt, dim)
  std::vector<Node> body;

  const PragmaAttr *find(PragmaAttr::Kind kind) const;
  bool iterates(const std::string &stmt, const std::string &dim) const;
};

struct IfNode {
  std::vector<Constraint> conditions;
  std::vector<Node> body;
};

struct StmtNode {
  std::string name;
  int compute_index = 0;
  Access dest; // indices over enclosing ivs
  StmtOp op = StmtOp::Assign;
  ExprPtr rhs; // iterator references over enclosing ivs
  std::vector<std::string> dims; // current loop dims, outer to inner
  std::map<std::string, std::string> dim_to_iv;
  std::map<std::string, AffineExpr> iter_map; // original iterator -> ivs
  std::vector<DimStep> steps;
};

struct Node {
  std::variant<LoopNode, IfNode, StmtNode> value;
};

struct ArrayDecl {
  Placeholder array;
  std::vector<PartitionAttr> partitions;
  int64_t factor_for(int dim) const; // 1 when unpartitioned
};

struct LoopIR {
  std::string name;
  std::vector<ArrayDecl> arrays;
  std::vector<Node> roots;

  ArrayDecl *find_array(const std::string &name);
  const ArrayDecl *find_array(const std::string &name) const;
};

/// Constant trip-count range of a loop given ranges of enclosing ivs.
struct IvRange {
  int64_t lo = 0, hi = 0;
};
using IvBox = std::map<std::string, IvRange>;
IvRange loop_range(const LoopNode &loop, const IvBox &outer);

LoopIR lower_ast(const AstNode &ast, const std::vector<PolyStmt> &stmts, const Function &f);

/// Records a pipeline, unroll or partition directive. Throws CompileError
/// for an unknown loop/array, a conflicting attribute or an unroll factor
/// above the trip count.
LoopIR attach_hw(LoopIR ir, const ScheduleDirective &d);

/// build_ast, lower_ast and partition attachment in one step.
LoopIR lower_statements(const Function &f, const std::vector<PolyStmt> &stmts,
                        const std::vector<PartitionDirective> &partitions,
                        std::vector<Diagnostic> *warnings = nullptr);

std::string print_loopir(const LoopIR &ir);

/// Visits every statement with its enclosing loops, outermost first.
void for_each_stmt(const LoopIR &ir,
                   const std::function<void(const StmtNode &,
                                            const std::vector<const LoopNode *> &)> &fn);

} // namespace loomweaver
