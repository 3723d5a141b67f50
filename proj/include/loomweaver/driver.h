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

#include <optional>
#include <vector>

#include "loomweaver/depgraph.h"
#include "loomweaver/dse.h"
#include "loomweaver/loopir.h"
#include "loomweaver/perfmodel.h"
#include "loomweaver/polyhedral.h"

namespace loomweaver {

struct CompileOptions {
  bool dse = false; // also enabled by an auto_dse directive
  DseConfig dse_config;
};

struct Compilation {
  DepGraph deps;
  std::vector<PolyStmt> stmts;
  AstNode ast;
  LoopIR ir;
  Estimate estimate;
  std::optional<DseResult> dse;
  std::vector<Diagnostic> warnings;
};

/// Statements with every user directive applied in source order. Pipeline
/// and unroll directives become annotations; partitions are returned
/// separately.
std::vector<PolyStmt> schedule_statements(const Function &f,
                                          std::vector<PartitionDirective> *partitions = nullptr);

/// Runs validation, dependence analysis, scheduling (or DSE), lowering and
/// estimation. Throws CompileError carrying every error diagnostic.
Compilation compile(const Function &f, const CompileOptions &opts = {});

} // namespace loomweaver
