#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SEMIPSO_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string last_line(const std::string& s) {
  std::string t = s;
  while (!t.empty() && t.back() == '\n') t.pop_back();
  const auto pos = t.rfind('\n');
  return pos == std::string::npos ? t : t.substr(pos + 1);
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "semipso_test_cli";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto r = run("gen-data --out " + (dir_ / "data").string() + " --count 6 --size 16 --seed 2");
    ASSERT_EQ(r.status, 0) << r.output;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string data() { return (dir_ / "data" / "manifest.tsv").string(); }
  static const std::string kTiny;
  static fs::path dir_;
};

fs::path Cli::dir_;
const std::string Cli::kTiny = " --iterations 3 --base-channels 2 --depth 2 --label-fraction 0.5";

}  // namespace

TEST_F(Cli, RepeatedTrainIsBitIdentical) {
  for (const char* name : {"a", "b"}) {
    const auto r = run("train --data " + data() + " --out " + (dir_ / name).string() + kTiny);
    ASSERT_EQ(r.status, 0) << r.output;
  }
  EXPECT_EQ(slurp(dir_ / "a" / "history.csv"), slurp(dir_ / "b" / "history.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "checkpoint.bin"), slurp(dir_ / "b" / "checkpoint.bin"));
  EXPECT_EQ(slurp(dir_ / "a" / "history.csv").substr(0, 49),
            "iteration,bce,adv,semi_adv,semi_bce,total,d_loss\n");

  const auto e = run("eval --checkpoint " + (dir_ / "a" / "checkpoint.bin").string() + " --data " + data());
  EXPECT_EQ(e.status, 0) << e.output;
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  {
    std::ofstream conf(dir_ / "run.conf");
    conf << "# toy run\niterations = 2\nbase_channels = 2\ndepth = 2\nlambda-adv = 0.5\nseed = 9\n";
  }
  const auto r = run("train --config " + (dir_ / "run.conf").string() + " --data " + data() +
                     " --out " + (dir_ / "conf").string() + " --seed 11");
  ASSERT_EQ(r.status, 0) << r.output;
  const auto ck = slurp(dir_ / "conf" / "checkpoint.bin");
  EXPECT_NE(ck.find("seed = 11"), std::string::npos);
  EXPECT_NE(ck.find("lambda_adv = 0.5"), std::string::npos);
  EXPECT_NE(ck.find("iterations = 2"), std::string::npos);
}

TEST_F(Cli, ErrorsAreOneParsableLine) {
  const std::regex line(R"(error: [a-z_]+: .+)");
  const auto missing = run("eval --checkpoint " + (dir_ / "absent.bin").string() + " --data " + data());
  EXPECT_EQ(missing.status, 1);
  EXPECT_TRUE(std::regex_match(last_line(missing.output), line)) << missing.output;
  EXPECT_NE(missing.output.find("io_failure"), std::string::npos);

  const auto bad_value = run("train --data " + data() + " --out " + (dir_ / "x").string() +
                             " --lambda-adv -1");
  EXPECT_NE(bad_value.status, 0);
  EXPECT_TRUE(std::regex_match(last_line(bad_value.output), line)) << bad_value.output;

  const auto usage = run("frobnicate");
  EXPECT_EQ(usage.status, 2);
  EXPECT_EQ(last_line(usage.output).rfind("error: usage: ", 0), 0u) << usage.output;
}

TEST_F(Cli, BenchPsoAndTuneWriteTraces) {
  const auto b = run("bench-pso --seeds 3 --out " + (dir_ / "bench.csv").string());
  ASSERT_EQ(b.status, 0) << b.output;
  const auto t1 = run("tune --data " + data() + " --out " + (dir_ / "t1").string() + kTiny +
                      " --generations 1 --population 2 --fitness-iterations 2");
  ASSERT_EQ(t1.status, 0) << t1.output;
  const auto t2 = run("tune --data " + data() + " --out " + (dir_ / "t2").string() + kTiny +
                      " --generations 1 --population 2 --fitness-iterations 2");
  ASSERT_EQ(t2.status, 0) << t2.output;
  const auto trace = slurp(dir_ / "t1" / "pso_trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "generation,best_fitness,mean_personal_best");
  EXPECT_EQ(trace, slurp(dir_ / "t2" / "pso_trace.csv"));
  EXPECT_EQ(slurp(dir_ / "t1" / "best.conf"), slurp(dir_ / "t2" / "best.conf"));
}
