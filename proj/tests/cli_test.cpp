// Copyright 2026 The Corrner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "corrner/cli.hpp"
#include "corrner/config.hpp"
#include "corrner/corpus.hpp"
#include "test_support.hpp"

namespace corrner {
namespace {

struct CliResult {
  int code = 0;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "corrner");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  CliResult r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data());
  r.out = ::testing::internal::GetCapturedStdout();
  r.err = ::testing::internal::GetCapturedStderr();
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"help", "train"}).code, kExitOk);
  const CliResult typo = run({"trian"});
  EXPECT_EQ(typo.code, kExitUsage);
  EXPECT_NE(typo.err.find("train"), std::string::npos) << typo.err;
  EXPECT_EQ(suggest_subcommand("calibarte"), "calibrate");
  EXPECT_EQ(suggest_subcommand("zzzzzzzz"), "");
  EXPECT_EQ(run({"train", "--out", "x.json"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
}

TEST(Cli, EvalLengthMismatchIsDataError) {
  testing::TempDir dir("cli_eval");
  write_text(dir / "gold.conll", "甲\tS-PROV\n乙\tO\n\n丙\tO\n\n");
  write_text(dir / "pred.conll", "甲\tS-PROV\n乙\tO\n\n丙\tO\n丁\tO\n\n");
  const CliResult r = run({"eval", "--gold", dir / "gold.conll", "--pred", dir / "pred.conll"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("1"), std::string::npos);
  EXPECT_EQ(run({"eval", "--gold", dir / "missing.conll", "--pred", dir / "pred.conll"}).code,
            kExitData);
}

TEST(Cli, EvalReportsScores) {
  testing::TempDir dir("cli_eval_ok");
  write_text(dir / "gold.conll", "甲\tS-PROV\n乙\tS-CITY\n\n");
  write_text(dir / "pred.conll", "甲\tS-PROV\n乙\tS-PROV\n\n");
  const CliResult r = run({"eval", "--gold", dir / "gold.conll", "--pred", dir / "pred.conll",
                           "--report", dir / "r.json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = read_json(dir / "r.json");
  EXPECT_NEAR(j.at("micro").at("f1").get<double>(), 0.5, 1e-12);
  EXPECT_TRUE(j.contains("tool_version"));
}

TEST(Cli, BadConfigIsUsageError) {
  testing::TempDir dir("cli_cfg");
  write_text(dir / "g.json", R"({"sizes": [1,1,1,1,1], "bogus": 3})");
  EXPECT_EQ(run({"synth", "--config", dir / "g.json", "--out", dir / "s"}).code, kExitUsage);
}

TEST(Cli, EndToEnd) {
  testing::TempDir dir("cli_e2e");
  write_text(dir / "gen.json",
             R"({"sizes": [6, 2, 2, 2, 2], "n_train": 80, "n_dev": 20, "n_test": 20, "n_pool": 1500})");
  write_text(dir / "train.json", R"({"train": {"epochs": 3, "learning_rate": 0.02}})");
  const std::string data = dir / "data";
  ASSERT_EQ(run({"synth", "--config", dir / "gen.json", "--out", data}).code, kExitOk);
  ASSERT_TRUE(std::filesystem::exists(data + "/manifest.json"));

  const CliResult again = run({"synth", "--config", dir / "gen.json", "--out", data});
  EXPECT_EQ(again.code, kExitOk);
  EXPECT_NE((again.out + again.err).find("up to date"), std::string::npos)
      << again.out << again.err;

  const std::string index = dir / "index";
  ASSERT_EQ(run({"index", "build", "--pool", data + "/pool.txt", "--out", index}).code, kExitOk);
  const CliResult q = run({"index", "query", "--index", index, "--text", "江", "--k", "3"});
  EXPECT_EQ(q.code, kExitOk) << q.err;

  const std::string model = dir / "model.json";
  ASSERT_EQ(run({"train", "--train", data + "/train.conll", "--dev", data + "/dev.conll",
                 "--config", dir / "train.json", "--out", model})
                .code,
            kExitOk);
  const auto mtime = std::filesystem::last_write_time(model);
  ASSERT_EQ(run({"train", "--train", data + "/train.conll", "--dev", data + "/dev.conll",
                 "--config", dir / "train.json", "--out", model})
                .code,
            kExitOk);
  EXPECT_EQ(std::filesystem::last_write_time(model), mtime);

  std::string raw;
  for (const auto& s : read_conll(data + "/test.conll")) raw += s.sentence.text() + "\n";
  write_text(dir / "test.txt", raw);

  ASSERT_EQ(run({"tag", "--model", model, "--in", dir / "test.txt", "--out", dir / "tag.conll"})
                .code,
            kExitOk);
  ASSERT_EQ(run({"calibrate", "--model", model, "--index", index, "--in", dir / "test.txt",
                 "--out", dir / "cal.conll", "--k", "10", "--match", "prefix-extension",
                 "--trace", dir / "trace.jsonl"})
                .code,
            kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "trace.jsonl"));
  const CliResult ev = run({"eval", "--gold", data + "/test.conll", "--pred", dir / "cal.conll"});
  EXPECT_EQ(ev.code, kExitOk) << ev.err;
  EXPECT_NE(ev.out.find("micro"), std::string::npos) << ev.out;

  EXPECT_EQ(run({"train", "--train", data + "/train.conll", "--correlate", "--out",
                 dir / "bad.json"})
                .code,
            kExitUsage);
  EXPECT_EQ(run({"timing", "--model", model, "--index", index, "--in", dir / "test.txt",
                 "--k", "5", "--out", dir / "timing.json"})
                .code,
            kExitOk);
  EXPECT_EQ(read_json(dir / "timing.json").at("rows").size(), 3u);
}

}  // namespace
}  // namespace corrner
