#ifndef RISKRNN_CLI_RUN_CONFIG_H_
#define RISKRNN_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "riskrnn/model.h"
#include "riskrnn/synthworld.h"
#include "riskrnn/tracking.h"

namespace riskrnn::cli {

struct SplitConfig {
  int train = 200;
  int val = 50;
  int test = 100;
};

enum class TrackPool { kAll, kNegatives, kGroundTruth };

std::string TrackPoolName(TrackPool pool);
// Accepts "all", "negatives", "gt". Throws ConfigError otherwise.
TrackPool ParseTrackPool(const std::string& name);

struct TrainConfig {
  double lr = 1e-4;
  int batch = 5;
  int epochs = 100;
  int patience = 10;
  uint64_t seed = 1;
  uint64_t init_seed = 1;
  // Candidate agent tracks per training video, sampled uniformly each epoch:
  // kAll = ground truth plus tracker output, kNegatives = tracker output only
  // for negative videos, kGroundTruth = ground truth alone.
  TrackPool track_pool = TrackPool::kAll;
  double region_iou = 0.4;
  double time_scale = 1.0;
};

struct EvalConfig {
  // Score with the fused (observed + imagined) outputs.
  bool fused = true;
  double fps = 20.0;
  // Average region AP per video instead of pooling all frames.
  bool per_video_region = false;
  bool riskmaps = false;
  int riskmap_width = 64;
  int riskmap_height = 64;
};

struct PathsConfig {
  std::string data_dir = "data";
  std::string model = "model.txt";
  std::string out_dir = "out";
};

struct RunConfig {
  ScenarioConfig scenario;
  SplitConfig split;
  ModelConfig model;
  TrainConfig train;
  TrackerOptions tracker;
  EvalConfig eval;
  PathsConfig paths;

  // Throws ConfigError.
  void Validate() const;
};

// "section.key" -> value. Throws ConfigError naming the key when it is unknown
// or the value does not parse.
void ApplySetting(RunConfig& config, const std::string& key,
                  const std::string& value);

// All recognised "section.key" names, in file order.
std::vector<std::string> SettingKeys();

// INI file with [scenario] [split] [model] [train] [tracker] [eval] [paths]
// sections; then `overrides` in order (later wins).
RunConfig LoadRunConfig(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Parses "0.6,0.4".
std::vector<double> ParseDoubleList(const std::string& text);

}  // namespace riskrnn::cli

#endif  // RISKRNN_CLI_RUN_CONFIG_H_
