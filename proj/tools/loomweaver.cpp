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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "loomweaver/driver.h"
#include "loomweaver/emit.h"
#include "loomweaver/frontend.h"
#include "loomweaver/interp.h"

using namespace loomweaver;

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string emit = "hlsc";
  std::string report;
  bool dse = false;
  std::string budget;
  bool allow_reassoc = true;
  bool reuse = false;
  uint64_t seed = 1;
  bool check = false;
  std::string config;
};

void print_diags(const std::string &file, const std::vector<Diagnostic> &diags) {
  for (const auto &d : diags) {
    std::cerr << file;
    if (d.line > 0)
      std::cerr << ":" << d.line << ":" << d.column;
    std::cerr << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": "
              << d.message << "\n";
  }
}

// Writes through a temporary file so a failed run leaves nothing behind.
void write_output(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw CompileError("cannot write '" + path + "'");
    out << text;
    if (!out)
      throw CompileError("cannot write '" + path + "'");
  }
  std::filesystem::rename(tmp, target);
}

Resources parse_budget(const std::string &text, Resources budget) {
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CompileError("budget entry '" + item + "' must look like key=value");
    std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    int64_t v = 0;
    try {
      size_t used = 0;
      v = std::stoll(val, &used);
      if (used != val.size() || v < 0)
        throw std::invalid_argument(val);
    } catch (const std::exception &) {
      throw CompileError("budget value for '" + key + "' must be a non-negative integer");
    }
    if (key == "dsp")
      budget.dsp = v;
    else if (key == "lut")
      budget.lut = v;
    else if (key == "ff")
      budget.ff = v;
    else if (key == "bram")
      budget.bram = v;
    else
      throw CompileError("unknown budget resource '" + key + "'");
  }
  return budget;
}

bool has_loop_transform(const Function &f) {
  for (const auto &d : f.directives)
    if (d.is_loop_transform() && !std::holds_alternative<AfterDirective>(d.value))
      return true;
  return false;
}

double tolerance_for(const Function &f, bool reordered) {
  if (!reordered)
    return 0.0;
  bool f32 = false;
  for (const auto &p : f.placeholders)
    f32 = f32 || (p.dtype.is_float() && p.dtype.bits == 32);
  return f32 ? 1e-5 : 1e-12;
}

int run(const Options &opt) {
  std::ifstream in(opt.input, std::ios::binary);
  if (!in) {
    print_diags(opt.input, {error("cannot read input file")});
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  ReportParts parts;
  Function f;
  try {
    f = parse_program(buf.str());
    parts.function = &f;

    CompileOptions copts;
    copts.dse = opt.dse;
    ModelConfig &model = copts.dse_config.model;
    model.reuse = opt.reuse;
    model.allow_reassoc = opt.allow_reassoc;
    std::string config = opt.config;
    if (config.empty())
      if (const char *env = std::getenv("LOOMWEAVER_COST_TABLE"))
        config = env;
    if (!config.empty())
      model.costs.load_file(config, &model.budget);
    model.budget = parse_budget(opt.budget, model.budget);

    if (opt.emit == "deps") {
      for (const auto &d : validate(f))
        if (d.severity == Severity::Error)
          throw CompileError(validate(f));
      DepGraph g = build_dep_graph(f);
      parts.deps = &g;
      parts.diagnostics = g.warnings;
      print_diags(opt.input, g.warnings);
      write_output(opt.output, emit_report(parts).dump(2) + "\n");
      return 0;
    }

    Compilation c = compile(f, copts);
    parts.compilation = &c;
    parts.diagnostics = c.warnings;
    print_diags(opt.input, c.warnings);

    if (opt.check) {
      parts.seed = opt.seed;
      ArrayData data = random_inputs(f, opt.seed);
      ArrayData expected = run_reference(f, data);
      ArrayData actual = run_loopir(c.ir, f, data);
      bool reordered = c.dse.has_value() || has_loop_transform(f);
      auto diff = compare_outputs(f, expected, actual, tolerance_for(f, reordered));
      parts.check = diff ? *diff : "ok";
      if (diff)
        throw CompileError("equivalence check failed (seed " + std::to_string(opt.seed) +
                           "): " + *diff);
      std::cerr << opt.input << ": check passed (seed " << opt.seed << ")\n";
    }

    std::string text;
    if (opt.emit == "hlsc")
      text = emit_hls_c(c.ir, f);
    else if (opt.emit == "loopir")
      text = print_loopir(c.ir);
    else if (opt.emit == "ast")
      text = ast_to_string(c.ast, c.stmts);
    else
      text = emit_report(parts).dump(2) + "\n";
    write_output(opt.output, text);

    std::string report = opt.report;
    if (report.empty() && c.dse && opt.emit != "json" && !opt.output.empty() && opt.output != "-")
      report = opt.output + ".json";
    if (!report.empty())
      write_output(report, emit_report(parts).dump(2) + "\n");
    return 0;
  } catch (const CompileError &e) {
    print_diags(opt.input, e.diagnostics());
    if (opt.emit == "json" || opt.emit == "deps") {
      parts.compilation = nullptr;
      parts.deps = nullptr;
      parts.diagnostics = e.diagnostics();
      std::cout << emit_report(parts).dump(2) << "\n";
    }
    return 1;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"loomweaver: compile the schedule DSL to HLS C"};
  Options opt;
  app.add_option("input", opt.input, "Input .pom file")->required();
  app.add_option("-o,--output", opt.output, "Output file (default: stdout)");
  app.add_option("--emit", opt.emit, "Output kind")
      ->check(CLI::IsMember({"hlsc", "loopir", "ast", "deps", "json"}));
  app.add_flag("--dse", opt.dse, "Run design space exploration");
  app.add_option("--budget", opt.budget, "Resource budget, e.g. dsp=220,lut=53200,ff=106400");
  app.add_flag("--allow-reassoc,!--no-allow-reassoc", opt.allow_reassoc,
               "Allow unrolling float reductions (default on)");
  app.add_flag("--reuse", opt.reuse, "Model DSP reuse across sequential nests");
  app.add_option("--seed", opt.seed, "Seed for --check inputs");
  app.add_flag("--check", opt.check, "Compare the compiled loops against the reference");
  app.add_option("--config", opt.config, "Cost table / budget file");
  app.add_option("--report", opt.report, "Where to write the JSON report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(opt);
  } catch (const std::exception &e) {
    std::cerr << "loomweaver: internal error: " << e.what() << "\n";
    return 2;
  }
}
