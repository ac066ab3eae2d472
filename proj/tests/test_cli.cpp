#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(QBAYES_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qbayes_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(run("examples --all --dir " + dir_.string()).code, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_F(Cli, ListsExamples) {
  const Outcome r = run("examples");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("bitflip-half\n"), std::string::npos);
  EXPECT_NE(r.out.find("star-homo-disintegration\n"), std::string::npos);
  EXPECT_EQ(run("examples no-such-example --dir " + dir_.string()).code, 1);
}

TEST_F(Cli, InvertExitCodes) {
  EXPECT_EQ(run("invert " + path("bitflip-half.json")).code, 0);
  EXPECT_EQ(run("invert " + path("bitflip-biased.json")).code, 2);
  EXPECT_EQ(run("invert " + path("support-gap.json")).code, 3);
  EXPECT_EQ(run("invert " + path("grocery.json")).code, 0);
  EXPECT_EQ(run("invert " + path("star-homo-disintegration.json")).code, 0);
  EXPECT_EQ(run("invert " + path("missing.json")).code, 1);
  EXPECT_EQ(run("invert").code, 1);
  std::ofstream(path("bad.json")) << "{\"kind\": \"matrix\", ";
  EXPECT_EQ(run("invert " + path("bad.json")).code, 1);
  EXPECT_EQ(run("invert " + path("bitflip-half.json") + " --tol-eq 2").code, 1);
}

TEST_F(Cli, InvertWritesReportAndChecks) {
  const std::string report = path("report.json");
  EXPECT_EQ(run("invert " + path("bitflip-half.json") + " --out " + report).code, 0);
  const std::string first = slurp(report);
  EXPECT_NE(first.find("\"status\": \"Exists\""), std::string::npos);
  EXPECT_EQ(run("check " + path("bitflip-half.json") + " " + report).code, 0);
  EXPECT_EQ(run("check " + path("bitflip-biased.json") + " " + report).code, 4);

  EXPECT_EQ(run("invert " + path("bitflip-half.json") + " --out " + report).code, 0);
  EXPECT_EQ(slurp(report), first);
}

TEST_F(Cli, TextFormatAndTolerances) {
  const Outcome r = run("invert " + path("support-gap.json") + " --format text --tol-eq 1e-7");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("status: FailsCompletion"), std::string::npos);
  EXPECT_NE(r.out.find("eq"), std::string::npos);
  const Outcome j = run("invert " + path("support-gap.json") + " --tol-eq 1e-7");
  EXPECT_NE(j.out.find("\"eq\": 9.9999999999999995e-08"), std::string::npos) << j.out;
  EXPECT_EQ(run("invert " + path("support-gap.json") + " --format xml").code, 1);
}
