#include "riskrnn/synthworld.h"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "oracles.h"
#include "riskrnn/errors.h"

namespace riskrnn {
namespace {

double OracleIou(const Box& a, const Box& b) {
  return oracle::Iou({a.cx, a.cy, a.w, a.h}, {b.cx, b.cy, b.w, b.h});
}

bool InsideFrame(const Box& b) {
  return b.cx - b.w / 2 >= -1e-12 && b.cx + b.w / 2 <= 1 + 1e-12 &&
         b.cy - b.h / 2 >= -1e-12 && b.cy + b.h / 2 <= 1 + 1e-12;
}

ScenarioConfig Seeded(uint64_t seed) {
  ScenarioConfig c;
  c.seed = seed;
  return c;
}

TEST(ScenarioConfigTest, ValidateRejectsBadValues) {
  EXPECT_NO_THROW(ScenarioConfig{}.Validate());
  ScenarioConfig c;
  c.frames_per_video = 1;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.n_regions = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.noise_sigma = -0.1;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = {};
  c.collision_iou = 1.0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

// Labels re-derived from the geometry with an independent IoU.
TEST(GenerateLayoutTest, PositiveCollidesFirstAtLastFrame) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const ScenarioConfig cfg = Seeded(seed);
    const Scenario s = GenerateLayout(cfg, true);
    const int T = cfg.frames_per_video - 1;
    ASSERT_TRUE(s.positive());
    ASSERT_EQ(s.targets.accident_frame, T);
    for (int t = 0; t <= T; ++t) {
      const double iou =
          OracleIou(s.targets.agent_track[t], s.region_boxes[t][s.hazard_region]);
      if (t < T) {
        EXPECT_LE(iou, cfg.collision_iou) << "seed " << seed << " t " << t;
      } else {
        EXPECT_GT(iou, cfg.collision_iou) << "seed " << seed;
      }
      ASSERT_EQ(s.targets.risky_boxes[t].size(), 1u);
      EXPECT_EQ(s.targets.risky_boxes[t][0], s.region_boxes[t][s.hazard_region]);
    }
  }
}

TEST(GenerateLayoutTest, NegativeNeverCollides) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const ScenarioConfig cfg = Seeded(seed);
    const Scenario s = GenerateLayout(cfg, false);
    EXPECT_FALSE(s.positive());
    EXPECT_TRUE(s.targets.risky_boxes.empty());
    for (int t = 0; t < cfg.frames_per_video; ++t) {
      EXPECT_LE(OracleIou(s.targets.agent_track[t],
                          s.region_boxes[t][s.hazard_region]),
                cfg.collision_iou);
    }
  }
}

TEST(GenerateLayoutTest, BoxesStayInFrameAndRegionsAreStatic) {
  for (bool positive : {true, false}) {
    for (uint64_t seed = 0; seed < 50; ++seed) {
      const ScenarioConfig cfg = Seeded(seed);
      const Scenario s = GenerateLayout(cfg, positive);
      ASSERT_EQ(s.num_frames(), static_cast<size_t>(cfg.frames_per_video));
      ASSERT_EQ(s.region_classes.size(), static_cast<size_t>(cfg.n_regions));
      for (size_t t = 0; t < s.num_frames(); ++t) {
        EXPECT_TRUE(InsideFrame(s.targets.agent_track[t]));
        for (size_t i = 0; i < s.region_boxes[t].size(); ++i) {
          EXPECT_TRUE(InsideFrame(s.region_boxes[t][i]));
          EXPECT_EQ(s.region_boxes[t][i], s.region_boxes[0][i]);
        }
      }
    }
  }
}

TEST(GenerateLayoutTest, ExactlyOneHazardClassRegion) {
  const ScenarioConfig cfg;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Scenario s = GenerateLayout(Seeded(seed), seed % 2 == 0);
    int hazards = 0;
    for (size_t i = 0; i < s.region_classes.size(); ++i) {
      const int c = s.region_classes[i];
      EXPECT_GE(c, 0);
      EXPECT_LT(c, cfg.n_classes);
      if (c < cfg.NumHazardClasses()) {
        ++hazards;
        EXPECT_EQ(static_cast<int>(i), s.hazard_region);
      }
    }
    EXPECT_EQ(hazards, 1);
  }
}

TEST(GenerateScenarioTest, DeterministicPerSeed) {
  const Scenario a = GenerateScenario(Seeded(5), true);
  const Scenario b = GenerateScenario(Seeded(5), true);
  const Scenario c = GenerateScenario(Seeded(6), true);
  EXPECT_EQ(a.targets.agent_track, b.targets.agent_track);
  EXPECT_EQ(a.region_feats, b.region_feats);
  EXPECT_EQ(a.proposals.size(), b.proposals.size());
  EXPECT_EQ(a.proposals[3][0].box, b.proposals[3][0].box);
  EXPECT_NE(a.targets.agent_track, c.targets.agent_track);
}

TEST(GenerateSplitTest, AlternatesLabelsAndDiffersBySplit) {
  const ScenarioConfig cfg = Seeded(3);
  const auto train = GenerateSplit(cfg, "train", 10);
  const auto test = GenerateSplit(cfg, "test", 10);
  ASSERT_EQ(train.size(), 10u);
  std::set<std::string> ids;
  for (size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(train[i].positive(), i % 2 == 0);
    ids.insert(train[i].id);
  }
  EXPECT_EQ(ids.size(), 10u);
  EXPECT_NE(train[0].targets.agent_track, test[0].targets.agent_track);
}

// Monte-Carlo: features scatter around their class embedding with the
// configured spread.
TEST(SynthesizeFeaturesTest, NoiseMatchesSigma) {
  ScenarioConfig cfg = Seeded(11);
  const auto emb = ClassEmbeddings(cfg);
  ASSERT_EQ(emb.size(), static_cast<size_t>(cfg.n_classes + 1));
  for (const auto& e : emb) {
    double n = 0;
    for (double x : e) n += x * x;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
  double sum = 0, sum_sq = 0;
  size_t count = 0;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    cfg.seed = seed;
    const Scenario s = GenerateScenario(cfg, seed % 2 == 0);
    for (size_t t = 0; t < s.num_frames(); ++t) {
      for (size_t i = 0; i < s.region_feats[t].size(); ++i) {
        const auto& e = emb[s.region_classes[i]];
        for (size_t k = 0; k < e.size(); ++k) {
          const double d = s.region_feats[t][i][k] - e[k];
          sum += d;
          sum_sq += d * d;
          ++count;
        }
      }
      for (size_t k = 0; k < emb.back().size(); ++k) {
        const double d = s.agent_feats[t][k] - emb.back()[k];
        sum += d;
        sum_sq += d * d;
        ++count;
      }
    }
  }
  const double mean = sum / count;
  const double sd = std::sqrt(sum_sq / count - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(sd, cfg.noise_sigma, 0.005);
}

TEST(SynthesizeFeaturesTest, ZeroNoiseGivesEmbeddings) {
  ScenarioConfig cfg = Seeded(12);
  cfg.noise_sigma = 0.0;
  const auto emb = ClassEmbeddings(cfg);
  const Scenario s = GenerateScenario(cfg, true);
  for (size_t i = 0; i < s.region_classes.size(); ++i) {
    for (size_t k = 0; k < emb[0].size(); ++k) {
      EXPECT_NEAR(s.region_feats[0][i][k], emb[s.region_classes[i]][k], 1e-6);
    }
  }
}

TEST(SynthesizeFeaturesTest, SameRegionMoreSimilarThanOtherClass) {
  // Monte-Carlo over 120 videos with a fixed seed.
  ScenarioConfig cfg;
  double same = 0, other = 0;
  int n_same = 0, n_other = 0;
  for (uint64_t seed = 0; seed < 120; ++seed) {
    cfg.seed = seed;
    const Scenario s = GenerateScenario(cfg, seed % 2 == 0);
    for (size_t i = 0; i < s.region_classes.size(); ++i) {
      same += CosineSimilarity(s.region_feats[0][i], s.region_feats[1][i]);
      ++n_same;
      for (size_t j = 0; j < s.region_classes.size(); ++j) {
        if (s.region_classes[j] == s.region_classes[i]) continue;
        other += CosineSimilarity(s.region_feats[0][i], s.region_feats[1][j]);
        ++n_other;
      }
      EXPECT_EQ(s.region_feats[0][i].size(), static_cast<size_t>(cfg.feature_dim));
    }
  }
  EXPECT_GT(same / n_same, other / n_other);
}

TEST(SynthesizeProposalsTest, TrueBoxesOutscoreClutter) {
  ScenarioConfig cfg;
  double truth = 0, clutter = 0;
  int n_truth = 0, n_clutter = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    const Scenario s = GenerateScenario(cfg, true);
    for (const auto& frame : s.proposals) {
      for (const auto& p : frame) {
        if (p.source >= 0) {
          truth += p.score;
          ++n_truth;
        } else {
          clutter += p.score;
          ++n_clutter;
        }
      }
    }
  }
  EXPECT_GE(n_truth, 100);
  EXPECT_GT(truth / n_truth, clutter / n_clutter);
}

TEST(SynthesizeProposalsTest, EveryTrueBoxHasAJitteredProposal) {
  const ScenarioConfig cfg = Seeded(13);
  const Scenario s = GenerateScenario(cfg, true);
  for (size_t t = 0; t < s.num_frames(); ++t) {
    const auto& props = s.proposals[t];
    ASSERT_EQ(props.size(),
              static_cast<size_t>(1 + cfg.n_regions + cfg.n_distractor_proposals));
    std::set<int> sources;
    for (const auto& p : props) {
      EXPECT_GE(p.score, 0.0);
      EXPECT_LE(p.score, 1.0);
      EXPECT_EQ(p.feature.size(), static_cast<size_t>(cfg.feature_dim));
      if (p.source == 0) {
        EXPECT_GT(OracleIou(p.box, s.targets.agent_track[t]), 0.5);
      } else if (p.source > 0) {
        EXPECT_GT(OracleIou(p.box, s.region_boxes[t][p.source - 1]), 0.5);
      } else {
        EXPECT_LE(p.score, 0.5);
      }
      if (p.source >= 0) EXPECT_TRUE(sources.insert(p.source).second);
    }
    EXPECT_EQ(sources.size(), static_cast<size_t>(1 + cfg.n_regions));
  }
}

TEST(SynthesizeProposalsTest, ZeroJitterCopiesBoxesExactly) {
  ScenarioConfig cfg = Seeded(14);
  cfg.proposal_jitter = 0.0;
  cfg.n_distractor_proposals = 0;
  const Scenario s = GenerateScenario(cfg, false);
  for (size_t t = 0; t < s.num_frames(); ++t) {
    for (const auto& p : s.proposals[t]) {
      const Box& truth = p.source == 0 ? s.targets.agent_track[t]
                                       : s.region_boxes[t][p.source - 1];
      EXPECT_EQ(p.box, truth);
    }
  }
}

TEST(ScenarioTest, FramesForTrackDropsSelfOverlap) {
  const Scenario s = GenerateScenario(Seeded(15), true);
  Track on_region;
  for (size_t t = 0; t < s.num_frames(); ++t) {
    on_region.points.push_back({s.region_boxes[t][2], s.region_feats[t][2], 1.0});
  }
  std::vector<std::vector<size_t>> kept;
  const auto frames = s.FramesForTrack(on_region, 0.7, &kept);
  ASSERT_EQ(frames.size(), s.num_frames());
  for (size_t t = 0; t < frames.size(); ++t) {
    EXPECT_EQ(frames[t].num_regions(), s.region_boxes[t].size() - 1);
    EXPECT_EQ(std::count(kept[t].begin(), kept[t].end(), 2u), 0);
  }
  // Default threshold keeps everything.
  EXPECT_EQ(s.FramesForTrack(on_region)[0].num_regions(), s.region_boxes[0].size());
  // The ground-truth agent loses nothing, even at the collision frame.
  for (const auto& f : s.Frames()) EXPECT_EQ(f.num_regions(), s.region_boxes[0].size());
}

TEST(ScenarioTest, TargetsForPartialTrackShiftAccidentFrame) {
  const Scenario s = GenerateScenario(Seeded(16), true);
  Track late;
  late.start_frame = 4;
  for (size_t t = 4; t < s.num_frames(); ++t) {
    late.points.push_back({s.targets.agent_track[t], s.agent_feats[t], 1.0});
  }
  const VideoTargets t = s.TargetsForTrack(late);
  EXPECT_EQ(t.accident_frame, s.targets.accident_frame - 4);
  EXPECT_EQ(t.agent_track.size(), s.num_frames() - 4);
  EXPECT_NO_THROW(t.Validate(s.FramesForTrack(late).size()));
}

}  // namespace
}  // namespace riskrnn
