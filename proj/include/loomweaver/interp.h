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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loomweaver/frontend.h"
#include "loomweaver/loopir.h"

namespace loomweaver {

/// Dense row-major array contents. Float arrays use `f`, integer arrays `i`;
/// integer values are kept sign- or zero-extended to 64 bits.
struct Buffer {
  DataType dtype;
  std::vector<int64_t> shape;
  std::vector<double> f;
  std::vector<int64_t> i;

  static Buffer zeros(const Placeholder &p);
  size_t size() const;
  bool operator==(const Buffer &) const = default;
};

using ArrayData = std::map<std::string, Buffer>;

/// Floats uniform in [-1, 1], integers uniform in [-8, 8] (wrapped to the
/// element width); temps start at zero.
ArrayData random_inputs(const Function &f, uint64_t seed);

/// Runs every compute instance in source order. Throws CompileError on a
/// shape mismatch or out-of-bounds access.
ArrayData run_reference(const Function &f, ArrayData data);

/// Runs loop nests as written; pragmas have no semantic effect.
ArrayData run_loopir(const LoopIR &ir, const Function &f, ArrayData data);

/// First difference between non-temp arrays, or nullopt when they agree.
/// `rel_tol` == 0 demands bit-exact floats.
std::optional<std::string> compare_outputs(const Function &f, const ArrayData &expected,
                                           const ArrayData &actual, double rel_tol);

/// Rounds a value to the representation of `t` (float rounding or integer
/// wraparound).
double round_to(const DataType &t, double v);
int64_t wrap_to(const DataType &t, int64_t v);

} // namespace loomweaver
