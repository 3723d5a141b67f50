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

#include <stdexcept>
#include <string>
#include <vector>

namespace loomweaver {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  // 1-based; 0 when the diagnostic has no source position.
  int line = 0;
  int column = 0;

  std::string str() const;
  bool operator==(const Diagnostic &) const = default;
};

Diagnostic error_at(int line, int column, std::string message);
Diagnostic error(std::string message);
Diagnostic warning(std::string message);

/// Thrown by every compilation stage. Carries one or more diagnostics; the
/// what() string is the first one.
class CompileError : public std::runtime_error {
public:
  explicit CompileError(std::string message);
  explicit CompileError(Diagnostic diag);
  explicit CompileError(std::vector<Diagnostic> diags);

  const std::vector<Diagnostic> &diagnostics() const { return diags_; }

private:
  std::vector<Diagnostic> diags_;
};

} // namespace loomweaver
