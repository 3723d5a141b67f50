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

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "loomweaver/frontend.h"
#include "loomweaver/polyhedral.h"

namespace loomweaver {

struct DistanceVector {
  std::vector<int64_t> entries; // outer to inner
  bool known = true;
  bool operator==(const DistanceVector &) const = default;
};

/// Entries are '<', '=', '>' or '*' when the distance is unknown.
struct DirectionVector {
  std::vector<char> entries;
  std::string str() const { return std::string(entries.begin(), entries.end()); }
  bool operator==(const DirectionVector &) const = default;
};

DirectionVector direction_of(const DistanceVector &d);

struct SelfDependence {
  DistanceVector distance;
  DirectionVector direction;
  std::string array;
  /// Index of the load (in for_each_load order) at the read end, or -1 for
  /// the implicit read of an accumulate destination.
  int load_index = -1;
  bool reduction = false;
};

struct NodeAttr {
  std::vector<SelfDependence> self_deps;
  std::set<int> reduction_dims;
};

NodeAttr analyze_node(const Compute &c);

struct DepEdge {
  int producer = 0;
  int consumer = 0;
  std::string array;
  bool operator==(const DepEdge &) const = default;
  auto operator<=>(const DepEdge &) const = default;
};

struct DepGraph {
  std::vector<std::string> nodes; // compute names, declaration order
  std::vector<int> depths;
  std::vector<NodeAttr> attrs;
  std::vector<DepEdge> edges;
  /// Declaration indices in coarse execution order.
  std::vector<int> exec_order;
  std::vector<Diagnostic> warnings;
};

/// Coarse execution order: declaration order adjusted by `after`.
std::vector<int> coarse_order(const Function &f);

DepGraph build_dep_graph(const Function &f);

/// Maximal source-to-sink paths, lexicographic by declaration index.
/// Throws CompileError on a cycle.
std::vector<std::vector<int>> collect_paths(const DepGraph &g);

/// Copy of `f` with every iterator range cut to its first `cap` values.
Function clamp_function(const Function &f, int64_t cap);

using InstancePair = std::pair<Point, Point>;

/// Ordered instance pairs touching the same cell with at least one write,
/// the sink after the source in lexicographic order. Each iterator range is
/// clamped to its first `clamp` values.
std::set<InstancePair> brute_force_dependences(const Compute &c, int64_t clamp);

/// Edges recomputed from instances: for every read of a cell by compute c,
/// the compute (earlier than c in coarse order) whose write to that cell is
/// most recent in execution order. Ranges are clamped as above.
std::set<DepEdge> brute_force_edges(const Function &f, int64_t clamp);

} // namespace loomweaver
