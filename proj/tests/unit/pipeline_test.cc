#include "riskrnn_cli/pipeline.h"

#include <gtest/gtest.h>

#include "riskrnn/errors.h"
#include "riskrnn/synthworld.h"

namespace riskrnn::cli {
namespace {

RunConfig TinyRun() {
  RunConfig c;
  c.scenario.seed = 4;
  c.scenario.frames_per_video = 6;
  c.scenario.n_regions = 3;
  c.scenario.feature_dim = 8;
  c.scenario.n_distractor_proposals = 3;
  c.model.d_agent = c.model.d_region = 8;
  c.model.d_u = 4;
  c.model.h_agent = c.model.h_aa = 8;
  c.model.K = 2;
  c.train.lr = 0.01;
  return c;
}

Dataset Split(const RunConfig& c, const std::string& name, int count) {
  Dataset d;
  d.split = name;
  d.scenario = c.scenario;
  d.videos = GenerateSplit(c.scenario, name, count);
  return d;
}

TEST(TrainModelTest, OverfitsFiveVideos) {
  RunConfig c = TinyRun();
  c.train.epochs = 200;
  c.train.patience = 200;
  c.train.track_pool = TrackPool::kGroundTruth;
  const Dataset train = Split(c, "train", 5);
  const auto out = TrainModel(c, train, Dataset{}, nullptr);
  ASSERT_GE(out.log.size(), 2u);
  EXPECT_LT(out.log.back().train_loss, 0.5 * out.log.front().train_loss);
}

TEST(TrainModelTest, DeterministicForFixedSeeds) {
  RunConfig c = TinyRun();
  c.train.epochs = 3;
  const Dataset train = Split(c, "train", 6), val = Split(c, "val", 2);
  const auto a = TrainModel(c, train, val, nullptr);
  const auto b = TrainModel(c, train, val, nullptr);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].val_loss, b.log[i].val_loss);
  }
}

TEST(TrainModelTest, DimensionMismatchIsConfigError) {
  RunConfig c = TinyRun();
  const Dataset train = Split(c, "train", 2);
  c.model.d_agent = c.model.d_region = 16;
  EXPECT_THROW(TrainModel(c, train, Dataset{}, nullptr), ConfigError);
}

TEST(AssessVideoTest, MaxOverTracksAndSelfExclusion) {
  const RunConfig c = TinyRun();
  const Dataset test = Split(c, "test", 2);
  RiskModel model = RiskModel::Initialize(c.model, 3);
  const Scenario& video = test.videos[0];
  const auto tracks = RunTracker(video.proposals, c.tracker);
  ASSERT_FALSE(tracks.empty());
  const VideoResult all = AssessVideo(model, video, tracks, true, 0.7);
  EXPECT_EQ(all.num_tracks, tracks.size());
  for (size_t k = 0; k < tracks.size(); ++k) {
    const VideoResult one = AssessVideo(model, video, std::span(&tracks[k], 1), true, 0.7);
    for (size_t t = 0; t < video.num_frames(); ++t) {
      EXPECT_GE(all.frame_scores[t], one.frame_scores[t]);
    }
  }
  for (size_t t = 0; t < video.num_frames(); ++t) {
    ASSERT_EQ(all.region_scores[t].size(), video.region_boxes[t].size());
    const Track& best = tracks[all.best_track[t]];
    const Box& box = best.points[t - best.start_frame].box;
    for (size_t i = 0; i < video.region_boxes[t].size(); ++i) {
      if (Iou(box, video.region_boxes[t][i]) > 0.7) EXPECT_EQ(all.region_scores[t][i], 0.0);
    }
  }
}

}  // namespace
}  // namespace riskrnn::cli
