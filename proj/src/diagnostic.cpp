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

#include "loomweaver/diagnostic.h"

namespace loomweaver {

std::string Diagnostic::str() const {
  std::string out;
  if (line > 0)
    out += std::to_string(line) + ":" + std::to_string(column) + ": ";
  out += severity == Severity::Error ? "error: " : "warning: ";
  out += message;
  return out;
}

Diagnostic error_at(int line, int column, std::string message) {
  return Diagnostic{Severity::Error, std::move(message), line, column};
}

Diagnostic error(std::string message) {
  return Diagnostic{Severity::Error, std::move(message), 0, 0};
}

Diagnostic warning(std::string message) {
  return Diagnostic{Severity::Warning, std::move(message), 0, 0};
}

static std::string first_message(const std::vector<Diagnostic> &diags) {
  return diags.empty() ? std::string("compilation failed") : diags.front().str();
}

CompileError::CompileError(std::string message)
    : CompileError(error(std::move(message))) {}

CompileError::CompileError(Diagnostic diag)
    : std::runtime_error(diag.str()), diags_{std::move(diag)} {}

CompileError::CompileError(std::vector<Diagnostic> diags)
    : std::runtime_error(first_message(diags)), diags_(std::move(diags)) {}

} // namespace loomweaver
