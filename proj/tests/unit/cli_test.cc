#include "riskrnn_cli/commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "riskrnn/model.h"

namespace riskrnn::cli {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("riskrnn_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  // Small world and model shared by every command.
  std::vector<std::string> Small(std::vector<std::string> args) const {
    const std::vector<std::string> common = {
        "--split.train", "6", "--split.val", "2", "--split.test", "4",
        "--scenario.frames_per_video", "6", "--scenario.n_regions", "3",
        "--scenario.feature_dim", "8", "--scenario.n_distractor_proposals", "3",
        "--model.d_agent", "8", "--model.d_region", "8", "--model.d_relation", "4",
        "--model.h_agent", "8", "--model.h_anticipation", "8", "--model.horizon", "2",
        "--train.epochs", "2", "--train.lr", "0.01"};
    args.insert(args.end(), common.begin(), common.end());
    return args;
  }

  int Run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return RunCli(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, UnknownKeyIsConfigError) {
  EXPECT_EQ(Run({"generate", "--out", dir_.string(), "--model.wings", "2"}), kExitConfig);
  EXPECT_NE(err_.str().find("model.wings"), std::string::npos);
  EXPECT_EQ(Run({"train", "--train.lr", "soon"}), kExitConfig);
  EXPECT_EQ(Run({"generate", "--config", (dir_ / "missing.ini").string()}), kExitConfig);
  EXPECT_EQ(Run({"fly"}), kExitConfig);
}

TEST_F(CliTest, MissingDataIsRuntimeFailure) {
  EXPECT_EQ(Run(Small({"train", "--data", (dir_ / "nothing").string(), "--out",
                       (dir_ / "m.txt").string()})),
            kExitFailure);
}

TEST_F(CliTest, GenerateTrainEvalInferRiskmap) {
  const std::string data = (dir_ / "data").string();
  const std::string model = (dir_ / "model.txt").string();
  ASSERT_EQ(Run(Small({"generate", "--seed", "3", "--out", data})), kExitOk) << err_.str();
  for (const char* split : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
    EXPECT_TRUE(fs::exists(fs::path(data) / split));
  }
  ASSERT_EQ(Run(Small({"train", "--seed", "3", "--data", data, "--out", model})), kExitOk)
      << err_.str();
  EXPECT_NO_THROW(RiskModel::Load(model));
  EXPECT_TRUE(fs::exists(model + ".log.csv"));

  const std::string out = (dir_ / "eval").string();
  ASSERT_EQ(Run(Small({"eval", "--data", data, "--model", model, "--out", out,
                       "--eval.riskmaps", "true", "--eval.riskmap_width", "8",
                       "--eval.riskmap_height", "8"})),
            kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(Slurp(fs::path(out) / "report.json"));
  for (const char* key : {"anticipation_map", "atta_frames", "atta_seconds", "region_map",
                          "oracle_region_map", "variants"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_TRUE(report["variants"].contains("L-RAI"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "curve_L-RAI.csv"));
  EXPECT_FALSE(fs::is_empty(fs::path(out) / "riskmaps" / "L-RAI"));

  const std::string csv = (dir_ / "infer.csv").string();
  ASSERT_EQ(Run(Small({"infer", "--data", data, "--model", model, "--out", csv})), kExitOk)
      << err_.str();
  EXPECT_FALSE(Slurp(csv).empty());
  const std::string maps = (dir_ / "maps").string();
  ASSERT_EQ(Run(Small({"riskmap", "--data", data, "--model", model, "--out", maps})), kExitOk)
      << err_.str();
  EXPECT_FALSE(fs::is_empty(maps));

  // A model whose widths do not match the data is a configuration error.
  EXPECT_EQ(Run(Small({"eval", "--data", data, "--model", model, "--out", out,
                       "--scenario.feature_dim", "9"})),
            kExitOk);  // dims come from the data files, not the flags
  const std::string wide = (dir_ / "wide.txt").string();
  RiskModel::Initialize(ConfigForVariant(Variant::kRA), 1).Save(wide);
  EXPECT_EQ(Run(Small({"eval", "--data", data, "--model", wide, "--out", out})), kExitConfig);
}

TEST_F(CliTest, GenerateDefaultsAndDeterminism) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(Run({"generate", "--seed", "11", "--out", a.string()}), kExitOk) << err_.str();
  ASSERT_EQ(Run({"generate", "--seed", "11", "--out", b.string()}), kExitOk);
  const std::pair<const char*, int> splits[] = {{"train", 200}, {"val", 50}, {"test", 100}};
  for (const auto& [split, count] : splits) {
    const std::string file = std::string(split) + ".jsonl";
    const std::string text = Slurp(a / file);
    EXPECT_EQ(text, Slurp(b / file)) << split;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    int videos = 0, positives = 0;
    while (std::getline(in, line)) {
      ++videos;
      positives += nlohmann::json::parse(line)["label"] == "positive";
    }
    EXPECT_EQ(videos, count);
    EXPECT_EQ(positives, count / 2);
  }
}

TEST_F(CliTest, OneEpochOnTenVideos) {
  const std::string data = (dir_ / "data").string();
  const std::string model = (dir_ / "m.txt").string();
  ASSERT_EQ(Run(Small({"generate", "--out", data, "--split.train", "10"})), kExitOk);
  ASSERT_EQ(Run(Small({"train", "--data", data, "--out", model, "--split.train", "10",
                       "--train.epochs", "1"})),
            kExitOk)
      << err_.str();
  EXPECT_NO_THROW(RiskModel::Load(model));
}

TEST_F(CliTest, RaModelFileHasNoLstmBlocks) {
  const std::string data = (dir_ / "data").string();
  const std::string model = (dir_ / "ra.txt").string();
  ASSERT_EQ(Run(Small({"generate", "--out", data})), kExitOk);
  ASSERT_EQ(Run(Small({"train", "--data", data, "--variant", "RA", "--out", model})), kExitOk)
      << err_.str();
  const std::string text = Slurp(model);
  EXPECT_EQ(text.find("rnn_a"), std::string::npos);
  EXPECT_EQ(text.find("W_c"), std::string::npos);
  EXPECT_EQ(RiskModel::Load(model).config().variant(), Variant::kRA);
}

TEST_F(CliTest, EvalReportsAreStableAndBounded) {
  const std::string data = (dir_ / "data").string();
  const std::string model = (dir_ / "m.txt").string();
  ASSERT_EQ(Run(Small({"generate", "--out", data})), kExitOk);
  ASSERT_EQ(Run(Small({"train", "--data", data, "--out", model})), kExitOk);
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir_ / ("e" + std::to_string(i));
    ASSERT_EQ(Run(Small({"eval", "--data", data, "--model", model, "--out", out.string()})),
              kExitOk);
    reports[i] = Slurp(out / "report.json");
  }
  EXPECT_EQ(reports[0], reports[1]);
  const auto j = nlohmann::json::parse(reports[0]);
  if (!j.contains("oracle_region_map_defined")) {
    EXPECT_GE(j["oracle_region_map"].get<double>(), j["region_map"].get<double>());
  }
}

TEST_F(CliTest, PipelineIsDeterministic) {
  std::string reports[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path root = dir_ / std::to_string(run);
    const std::string data = (root / "data").string();
    const std::string model = (root / "m.txt").string();
    ASSERT_EQ(Run(Small({"generate", "--seed", "5", "--out", data})), kExitOk);
    ASSERT_EQ(Run(Small({"train", "--seed", "5", "--data", data, "--out", model})), kExitOk);
    ASSERT_EQ(Run(Small({"eval", "--data", data, "--model", model, "--out",
                         (root / "e").string()})),
              kExitOk);
    reports[run] = Slurp(root / "e" / "report.json");
  }
  EXPECT_FALSE(reports[0].empty());
  EXPECT_EQ(reports[0], reports[1]);
}

}  // namespace
}  // namespace riskrnn::cli
