/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fithand/cli.hpp"
#include "fithand/image.hpp"
#include "fithand/threads.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fithand");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = fithand::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fithand_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(Cli, HelpOnEverySubcommand) {
  const std::map<std::string, std::vector<std::string>> flags{
      {"synth", {"--out", "--classes", "--per-class", "--input-size", "--seed"}},
      {"augment", {"--in", "--outdir"}},
      {"train", {"--data", "--out", "--variant", "--split", "--train-subjects", "--classes", "--channels",
                 "--input-size", "--depth-scale", "--lr", "--epochs", "--batch", "--loss", "--seed", "--verbose",
                 "--config"}},
      {"eval", {"--checkpoint", "--data", "--split", "--seed"}},
      {"audit", {"--variant", "--classes", "--channels", "--input-size", "--depth-scale"}},
      {"gradcheck", {"--seed"}},
      {"dump-activations", {"--checkpoint", "--in", "--outdir"}},
  };
  for (const auto& [cmd, names] : flags) {
    const auto r = invoke({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
    for (const auto& f : names) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
  }
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"audit", "--bogus", "1"}).code, 1);
  const auto missing = invoke({"train", "--out", "x.fith"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("--data"), std::string::npos);
  EXPECT_EQ(invoke({"audit", "--depth-scale", "3"}).code, 1);
  EXPECT_EQ(invoke({"audit", "--classes", "ten"}).code, 1);
  EXPECT_EQ(invoke({"audit", "--variant", "nope"}).code, 1);
}

TEST(Cli, AuditStemRow) {
  const auto r = invoke({"audit", "--variant", "full", "--classes", "10", "--channels", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, stem;
  std::getline(lines, header);
  std::getline(lines, stem);
  EXPECT_EQ(stem.rfind("stem1", 0), 0u);
  EXPECT_EQ(stem.substr(stem.find_last_not_of(' ') - 2), "896");
  EXPECT_NE(r.out.find("total_params=2280234"), std::string::npos);
  EXPECT_NE(r.out.find("Stack4"), std::string::npos);
}

TEST(Cli, GradcheckPasses) {
  const auto r = invoke({"gradcheck", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("status=pass"), std::string::npos);
}

TEST_F(CliTest, AugmentWritesTenFiles) {
  fithand::Image img(12, 10, 1);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  fithand::write_pnm(dir_ / "x.pgm", img);
  const auto r = invoke({"augment", "--in", (dir_ / "x.pgm").string(), "--outdir", (dir_ / "d").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& f : fs::directory_iterator(dir_ / "d")) ++n;
  EXPECT_EQ(n, 10u);
  EXPECT_EQ(invoke({"augment", "--in", (dir_ / "missing.pgm").string(), "--outdir", (dir_ / "e").string()}).code, 2);
}

TEST_F(CliTest, ConfigFilePrecedence) {
  std::ofstream(dir_ / "cfg") << "# audit settings\nclasses=5\nchannels=1\n";
  const auto from_file = invoke({"audit", "--config", (dir_ / "cfg").string(), "--verbose"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_NE(from_file.out.find("classes = 5  [config]"), std::string::npos) << from_file.out;
  EXPECT_NE(from_file.out.find("channels=1"), std::string::npos);
  const auto flag = invoke({"audit", "--config", (dir_ / "cfg").string(), "--classes", "6", "--verbose"});
  EXPECT_NE(flag.out.find("classes = 6  [flag]"), std::string::npos);
  EXPECT_NE(flag.out.find("variant = full  [default]"), std::string::npos);
  std::ofstream(dir_ / "bad") << "colour=blue\n";
  EXPECT_EQ(invoke({"audit", "--config", (dir_ / "bad").string()}).code, 1);
}

TEST_F(CliTest, SynthTrainEvalDumpWorkflow) {
  const std::string data = (dir_ / "data").string();
  ASSERT_EQ(invoke({"synth", "--out", data, "--classes", "2", "--per-class", "4", "--input-size", "32"}).code, 0);
  const std::vector<std::string> train{"train", "--data", data, "--out", (dir_ / "m.fith").string(),
                                       "--input-size", "32", "--depth-scale", "8", "--epochs", "2",
                                       "--batch", "4", "--lr", "0.01", "--seed", "3"};
  const auto t1 = invoke(train);
  ASSERT_EQ(t1.code, 0) << t1.err;
  const std::string ckpt = slurp(dir_ / "m.fith");
  const std::string log = slurp(dir_ / "m.fith.csv");
  EXPECT_EQ(log.rfind("epoch,loss,accuracy\n", 0), 0u);
  ASSERT_EQ(invoke(train).code, 0);
  EXPECT_EQ(slurp(dir_ / "m.fith"), ckpt);
  EXPECT_EQ(slurp(dir_ / "m.fith.csv"), log);

  const auto ev = invoke({"eval", "--checkpoint", (dir_ / "m.fith").string(), "--data", data, "--seed", "3"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("macro_f1="), std::string::npos);
  EXPECT_NE(ev.out.find("evaluated=4"), std::string::npos);

  const auto si = invoke({"train", "--data", data, "--out", (dir_ / "si.fith").string(), "--input-size", "32",
                          "--depth-scale", "8", "--epochs", "1", "--split", "si", "--train-subjects", "A"});
  EXPECT_EQ(si.code, 0) << si.err;
  EXPECT_EQ(invoke({"train", "--data", data, "--out", (dir_ / "x.fith").string(), "--split", "si"}).code, 1);
  EXPECT_EQ(invoke({"train", "--data", data, "--out", (dir_ / "x.fith").string(), "--input-size", "32",
                    "--depth-scale", "8", "--classes", "3"})
                .code,
            2);

  const auto img = (dir_ / "data" / "A" / "gesture_00" / "img_000.pgm").string();
  const auto dump = invoke({"dump-activations", "--checkpoint", (dir_ / "m.fith").string(), "--in", img, "--outdir",
                            (dir_ / "act").string()});
  ASSERT_EQ(dump.code, 0) << dump.err;
  EXPECT_TRUE(fs::exists(dir_ / "act" / "stage2.pgm"));

  std::ofstream(dir_ / "junk.fith") << "nope";
  EXPECT_EQ(invoke({"eval", "--checkpoint", (dir_ / "junk.fith").string(), "--data", data}).code, 2);
}

TEST(Threads, ParseCap) {
  EXPECT_EQ(fithand::parse_thread_cap("4"), 4u);
  EXPECT_FALSE(fithand::parse_thread_cap("0").has_value());
  EXPECT_FALSE(fithand::parse_thread_cap("x").has_value());
  EXPECT_FALSE(fithand::parse_thread_cap("").has_value());
}
