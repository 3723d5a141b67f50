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

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "corpus.h"

namespace loomweaver {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string &args) {
  std::string cmd = std::string(LOOMWEAVER_CLI) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE *p = popen(cmd.c_str(), "r");
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus(const std::string &name) {
  return std::string(LOOMWEAVER_CORPUS_DIR) + "/" + name + ".pom";
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("loomweaver_cli_" + std::to_string(getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string &leaf) const { return (dir_ / leaf).string(); }
  std::string write(const std::string &leaf, const std::string &text) const {
    std::ofstream(path(leaf)) << text;
    return path(leaf);
  }
  fs::path dir_;
};

TEST_F(CliTest, EmitsCFile) {
  CliResult r = cli(corpus("gemm") + " --emit hlsc -o " + path("gemm.c"));
  EXPECT_EQ(r.code, 0);
  std::string text = testing::read_file(path("gemm.c"));
  EXPECT_NE(text.find("void gemm("), std::string::npos);
  EXPECT_FALSE(fs::exists(path("gemm.c.tmp")));
}

TEST_F(CliTest, SyntaxErrorExitsOneWithoutOutput) {
  std::string bad = write("bad.pom", "func f { iter i = 0..4 }");
  CliResult r = cli(bad + " -o " + path("bad.c"));
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(path("bad.c")));
  EXPECT_FALSE(fs::exists(path("bad.c.tmp")));
}

TEST_F(CliTest, InvalidInputJsonDiagnostics) {
  std::string bad = write("bad.pom", "func f { iter i = 0..4; array A: f32[4] inout;\n"
                                     "compute S (i) { A[i] = 1.0; } schedule { T.unroll(i, 2); } }");
  CliResult r = cli(bad + " --emit json");
  EXPECT_EQ(r.code, 1);
  auto j = nlohmann::json::parse(r.out);
  ASSERT_FALSE(j["diagnostics"].empty());
  EXPECT_EQ(j["diagnostics"][0]["line"], 2);
}

TEST_F(CliTest, MissingInputAndBadFlag) {
  EXPECT_EQ(cli(path("none.pom")).code, 1);
  EXPECT_EQ(cli(corpus("gemm") + " --emit nonsense").code, 1);
  EXPECT_EQ(cli(corpus("gemm") + " --budget dsp=lots").code, 1);
}

TEST_F(CliTest, DseReportHasTrace) {
  CliResult r = cli(corpus("bicg") + " --dse --emit json");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["stage1Trace"],
            nlohmann::json::array({"split(S1,S2)", "interchange(S2,i,j)", "fuse(S1,S2)"}));
}

TEST_F(CliTest, DseWritesSidecarReport) {
  CliResult r = cli(corpus("gemm") + " --dse -o " + path("g.c"));
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(testing::read_file(path("g.c.json")));
  EXPECT_FALSE(j["steps"].empty());
}

TEST_F(CliTest, DepsMode) {
  CliResult r = cli(corpus("2mm") + " --emit deps");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["deps"]["nodes"].empty());
  EXPECT_TRUE(j["steps"].is_null());
}

TEST_F(CliTest, CheckPasses) {
  CliResult r = cli(corpus("seidel") + " --check --seed 4 --emit json");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["check"], "ok");
  EXPECT_EQ(j["seed"], 4);
}

TEST_F(CliTest, ZeroDspBudgetAcceptsNothing) {
  CliResult r = cli(corpus("gemm") + " --dse --budget dsp=0 --emit json");
  ASSERT_EQ(r.code, 0);
  for (const auto &s : nlohmann::json::parse(r.out)["steps"]) EXPECT_FALSE(s["accepted"]);
}

TEST_F(CliTest, ConfigFileChangesModel) {
  std::string cfg = write("costs.cfg", "add.f32.latency = 9\n");
  CliResult base = cli(corpus("gemm") + " --emit json");
  CliResult slow = cli(corpus("gemm") + " --emit json --config " + cfg);
  ASSERT_EQ(base.code, 0);
  ASSERT_EQ(slow.code, 0);
  EXPECT_GT(nlohmann::json::parse(slow.out)["final"]["latency"].get<int64_t>(),
            nlohmann::json::parse(base.out)["final"]["latency"].get<int64_t>());
  EXPECT_EQ(cli(corpus("gemm") + " --config " + path("missing.cfg")).code, 1);
}

TEST_F(CliTest, OtherEmitModes) {
  EXPECT_NE(cli(corpus("gemm_tiled") + " --emit ast").out.find("@pipeline"), std::string::npos);
  EXPECT_NE(cli(corpus("gemm_tiled") + " --emit loopir").out.find("j0"), std::string::npos);
}

} // namespace
} // namespace loomweaver
