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

#include <json.hpp>

#include "loomweaver/depgraph.h"
#include "loomweaver/driver.h"
#include "loomweaver/loopir.h"
#include "loomweaver/perfmodel.h"

namespace loomweaver {

/// One C function with HLS pragmas. Throws CompileError on a bound form the
/// emitter cannot express.
std::string emit_hls_c(const LoopIR &ir, const Function &f);

/// C literal that parses back to exactly `value` in the given float type.
std::string c_float_literal(double value, const DataType &t);

nlohmann::json diagnostics_json(const std::vector<Diagnostic> &diags);
nlohmann::json deps_json(const DepGraph &g);
nlohmann::json estimate_json(const Estimate &e);

/// Sections of the machine-readable report; absent parts are null.
struct ReportParts {
  const Function *function = nullptr;
  const Compilation *compilation = nullptr;
  const DepGraph *deps = nullptr;
  std::vector<Diagnostic> diagnostics;
  std::optional<uint64_t> seed;
  std::optional<std::string> check; // "ok" or the first mismatch
};

nlohmann::json emit_report(const ReportParts &parts);

} // namespace loomweaver
