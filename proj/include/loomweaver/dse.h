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

#include <string>
#include <vector>

#include "loomweaver/depgraph.h"
#include "loomweaver/loopir.h"
#include "loomweaver/perfmodel.h"
#include "loomweaver/polyhedral.h"

namespace loomweaver {

struct DseConfig {
  int max_stage1_iterations = 5;
  std::vector<int64_t> ladder = {1, 2, 4, 8, 16, 32};
  ModelConfig model;
  /// Per-dim clamp for the order-preservation oracle.
  int64_t oracle_cap = 8;
};

struct Stage1Step {
  enum class Kind { Split, Interchange, Fuse };
  Kind kind = Kind::Split;
  std::vector<std::string> computes;
  std::string dim_a, dim_b; // Interchange only
  std::string str() const;  // "split(S1,S2)", "interchange(S2,i,j)", "fuse(S1,S2)"
};

/// True when every pair of instances touching a common cell (one of them
/// writing) runs in the same relative order under `stmts` as under the
/// reference schedule. Iterator ranges are clamped to `cap` values.
bool preserves_order(const Function &f, const std::vector<PolyStmt> &stmts, int64_t cap);

struct Stage1Result {
  std::vector<PolyStmt> stmts;
  std::vector<Stage1Step> trace;
};

/// Dependence-aware split / interchange / fuse iterations.
Stage1Result stage1_transform(const Function &f, std::vector<PolyStmt> stmts,
                              const DseConfig &cfg);

/// Loop-level choices for one node (statements sharing an outermost static).
struct NodeChoice {
  std::vector<std::string> computes;
  std::vector<int> levels;        // unrollable levels, innermost first
  std::vector<int64_t> factors;   // per level of the nest, outer to inner
  std::vector<int64_t> extents;   // trip count per level
  bool pipeline = false;
  size_t ladder_level = 0;        // index into `levels` being advanced
};

struct DseStep {
  std::string node;
  std::vector<std::string> directives;
  int64_t node_latency = 0;
  int64_t previous_latency = 0;
  Estimate estimate;
  bool accepted = false;
};

struct DseResult {
  std::vector<PolyStmt> stmts;
  std::vector<PartitionDirective> partitions;
  LoopIR ir;
  std::vector<Stage1Step> trace;
  std::vector<DseStep> steps;
  std::vector<NodeChoice> nodes;
  Estimate estimate;
  std::vector<Diagnostic> warnings;
};

/// Runs both stages from the source schedule (only `after` directives are
/// honoured) and returns the attributed loop IR.
DseResult auto_dse(const Function &f, const DseConfig &cfg);

} // namespace loomweaver
