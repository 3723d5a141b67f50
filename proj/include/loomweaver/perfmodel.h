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

#include <map>
#include <string>
#include <vector>

#include "loomweaver/depgraph.h"
#include "loomweaver/frontend.h"
#include "loomweaver/loopir.h"

namespace loomweaver {

struct OpCost {
  int64_t latency = 1;
  int64_t dsp = 0;
  int64_t lut = 0;
  int64_t ff = 0;
  bool operator==(const OpCost &) const = default;
};

struct Resources {
  int64_t dsp = 0, lut = 0, ff = 0, bram = 0;

  Resources &operator+=(const Resources &o);
  Resources operator*(int64_t k) const;
  bool fits(const Resources &budget) const;
  bool operator==(const Resources &) const = default;
};

/// Defaults model an XC7Z020.
Resources default_budget();

/// Per-operation costs keyed by "<op>.<dtype>" (op is add, mul, div, load or
/// store). Integer types fall back to "<op>.int", everything to "<op>".
class CostTable {
public:
  static CostTable defaults();

  const OpCost &get(const std::string &op, const DataType &t) const;
  void set(const std::string &key, const OpCost &c) { entries_[key] = c; }

  /// Parses "key.field = value" lines (field: latency, dsp, lut, ff) and
  /// "budget.<resource> = value". `#` and `//` start comments.
  void load(const std::string &text, Resources *budget = nullptr);
  void load_file(const std::string &path, Resources *budget = nullptr);

private:
  std::map<std::string, OpCost> entries_;
};

struct ModelConfig {
  CostTable costs = CostTable::defaults();
  Resources budget = default_budget();
  bool reuse = false;
  /// Reductions may be reassociated when their chain is unrolled.
  bool allow_reassoc = true;
};

struct Rational {
  int64_t num = 0, den = 1;
  double value() const { return den ? static_cast<double>(num) / den : 0.0; }
  std::string str() const;
  bool operator==(const Rational &) const = default;
};

/// Product of tile sizes divided by the achieved II, reduced.
Rational parallelism(int64_t achieved_ii, const std::vector<int64_t> &tiles);

struct PipelineEstimate {
  std::string iv;
  int64_t target_ii = 1;
  int64_t recurrence_ii = 0;
  int64_t achieved_ii = 1;
  int64_t iterations = 0; // N
  int64_t depth = 0;      // D
};

struct NestEstimate {
  std::vector<int> computes; // declaration indices inside the nest
  int64_t latency = 0;
  Resources resources; // excludes memories
  std::vector<PipelineEstimate> pipelines;
  std::vector<int64_t> tiles; // per original iterator of the first statement
  int64_t ii = 1;             // worst achieved II (1 without pipelining)
  Rational parallel;
};

struct Estimate {
  int64_t latency = 0;
  Resources resources; // includes memories
  std::vector<NestEstimate> nests; // one per LoopIR root
  std::vector<std::vector<int>> paths;
  std::vector<int64_t> path_latency;
};

/// Critical-path latency of one statement: loads, operators and the store.
int64_t statement_depth(const Compute &c, const DataType &ctx, const CostTable &costs);

/// Latency of the chain carrying `dep` from its read to the write, memory
/// excluded; at least 1.
int64_t dependence_chain(const Compute &c, const SelfDependence &dep, const DataType &ctx,
                         const CostTable &costs);

NestEstimate estimate_node(const Node &root, const Function &f, const DepGraph &g,
                           const ModelConfig &cfg);

/// Memory cost of the arrays with their partitioning.
Resources memory_resources(const LoopIR &ir);

Estimate estimate_function(const LoopIR &ir, const Function &f, const DepGraph &g,
                           const ModelConfig &cfg);

} // namespace loomweaver
