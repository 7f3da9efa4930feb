#include "riskrnn/eval.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "riskrnn/errors.h"
#include "test_util.h"

namespace riskrnn {
namespace {

// Scores on a coarse grid half the time so ties are common.
double RandomScore(std::mt19937_64& rng, bool coarse) {
  const double s = testutil::Uniform(rng, 0.0, 1.0);
  return coarse ? std::round(s * 10) / 10 : s;
}

TEST(AveragePrecisionTest, HandExamples) {
  const std::vector<ScoredItem> perfect = {{0.9, true}, {0.8, true}, {0.3, false}};
  EXPECT_EQ(AveragePrecision(perfect), 1.0);
  const std::vector<ScoredItem> mixed = {
      {0.9, true}, {0.8, false}, {0.7, true}, {0.1, false}};
  EXPECT_NEAR(AveragePrecision(mixed), (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  // A positive that was never detected halves the achievable recall.
  const std::vector<ScoredItem> one = {{0.5, true}};
  EXPECT_EQ(AveragePrecision(one, 2), 0.5);
}

TEST(AveragePrecisionTest, TiedNegativeCountsAgainstTiedPositive) {
  const std::vector<ScoredItem> tie = {{0.5, true}, {0.5, false}};
  EXPECT_EQ(AveragePrecision(tie), 0.5);
  const std::vector<ScoredItem> swapped = {{0.5, false}, {0.5, true}};
  EXPECT_EQ(AveragePrecision(swapped), 0.5);
}

TEST(AveragePrecisionTest, Errors) {
  const std::vector<ScoredItem> none = {{0.9, false}};
  EXPECT_THROW(AveragePrecision(none), MetricError);
  const std::vector<ScoredItem> nan = {{std::nan(""), true}};
  EXPECT_THROW(AveragePrecision(nan), MetricError);
}

TEST(AveragePrecisionTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const bool coarse = trial % 2 == 0;
    const int n = 1 + static_cast<int>(rng() % 40);
    std::vector<ScoredItem> items;
    std::vector<oracle::Scored> ref;
    size_t positives = 0;
    for (int i = 0; i < n; ++i) {
      const bool pos = i == 0 || rng() % 3 == 0;
      const double s = RandomScore(rng, coarse);
      items.push_back({s, pos});
      ref.push_back({s, pos});
      positives += pos;
    }
    const size_t total = positives + rng() % 3;
    EXPECT_NEAR(AveragePrecision(items, total), oracle::AveragePrecision(ref, total), 1e-12)
        << "trial " << trial;
  }
}

TEST(VideoScoresTest, MaxRules) {
  VideoScores v{std::vector<double>(10, 0.3), false, -1};
  EXPECT_EQ(VideoScore(v), 0.3);
  const TrackScores tracks[2] = {{0, {0.1, 0.4, 0.2}}, {1, {0.8, 0.1}}};
  EXPECT_EQ(MaxOverTracks(tracks, 4), (std::vector<double>{0.1, 0.8, 0.2, 0.0}));
  const std::vector<double> rising = {0.1, 0.2, 0.5, 0.9};
  EXPECT_EQ(FirstCrossing(rising, 0.5), 2);
  EXPECT_EQ(FirstCrossing(rising, 0.95), -1);
}

TEST(AttaTest, HandExamples) {
  std::vector<double> jump(20, 0.0);
  for (int t = 10; t < 20; ++t) jump[t] = 1.0;
  const VideoScores early[1] = {{jump, true, 15}};
  const auto m = EvaluateAnticipation(early);
  EXPECT_EQ(m.atta_frames, 5.0);
  EXPECT_EQ(m.average_precision, 1.0);

  std::vector<double> last(20, 0.0);
  last[15] = 1.0;
  const VideoScores late[1] = {{last, true, 15}};
  EXPECT_EQ(EvaluateAnticipation(late).atta_frames, 0.0);

  const VideoScores none[1] = {{last, false, -1}};
  EXPECT_THROW(EvaluateAnticipation(none), MetricError);
}

TEST(AttaTest, CurveIsDescendingWithRecallSteps) {
  const VideoScores videos[3] = {{{0.2, 0.9}, true, 1}, {{0.7, 0.6}, true, 1},
                                 {{0.8, 0.1}, false, -1}};
  const auto m = EvaluateAnticipation(videos);
  ASSERT_EQ(m.curve.size(), 3u);
  EXPECT_EQ(m.curve[0].threshold, 0.9);
  EXPECT_EQ(m.curve[0].recall, 0.5);
  EXPECT_EQ(m.curve[1].threshold, 0.8);
  EXPECT_EQ(m.curve[1].precision, 0.5);
  EXPECT_EQ(m.curve[2].recall, 1.0);
  EXPECT_EQ(m.curve[2].mean_tta, 0.5);
  // 0.5 * 0 + 0 + 0.5 * 0.5
  EXPECT_EQ(m.atta_frames, 0.25);
}

TEST(AttaTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 50; ++trial) {
    const bool coarse = trial % 2 == 0;
    const int n = 1 + static_cast<int>(rng() % 15);
    std::vector<VideoScores> videos;
    std::vector<oracle::Video> ref;
    std::vector<ScoredItem> items;
    std::vector<oracle::Scored> ref_items;
    for (int i = 0; i < n; ++i) {
      const bool pos = i == 0 || rng() % 2 == 0;
      const int frames = 1 + static_cast<int>(rng() % 12);
      std::vector<double> f(frames);
      for (auto& x : f) x = RandomScore(rng, coarse);
      const int T = pos ? static_cast<int>(rng() % frames) : -1;
      videos.push_back({f, pos, T});
      ref.push_back({f, pos, T});
      const double vs = *std::max_element(f.begin(), f.end());
      ref_items.push_back({vs, pos});
    }
    const auto m = EvaluateAnticipation(videos);
    size_t positives = 0;
    for (const auto& r : ref_items) positives += r.positive;
    EXPECT_NEAR(m.atta_frames, oracle::Atta(ref), 1e-12) << "trial " << trial;
    EXPECT_NEAR(m.average_precision, oracle::AveragePrecision(ref_items, positives), 1e-12);
  }
}

TEST(RegionMatchTest, GreedyOneToOne) {
  RegionFrame f;
  const Box gt{0.5, 0.5, 0.2, 0.2};
  f.ground_truth = {gt};
  f.detections = {{gt, 0.4}, {{0.51, 0.5, 0.2, 0.2}, 0.9}, {{0.1, 0.1, 0.1, 0.1}, 0.95}};
  auto items = MatchRegionFrame(f);
  ASSERT_EQ(items.size(), 3u);
  std::sort(items.begin(), items.end(),
            [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
  EXPECT_FALSE(items[0].positive);  // no overlap
  EXPECT_TRUE(items[1].positive);   // highest overlapping score wins the box
  EXPECT_FALSE(items[2].positive);  // duplicate

  // Two detections, two ground-truth boxes, each matched once.
  RegionFrame g;
  g.ground_truth = {gt, {0.2, 0.2, 0.2, 0.2}};
  g.detections = {{gt, 0.3}, {{0.2, 0.2, 0.2, 0.2}, 0.2}};
  items = MatchRegionFrame(g);
  EXPECT_TRUE(items[0].positive && items[1].positive);
}

TEST(RegionMatchTest, ThresholdIsInclusive) {
  RegionFrame f;
  f.ground_truth = {{2.5, 0.5, 5.0, 1.0}};
  f.detections = {{{1.0, 0.5, 2.0, 1.0}, 0.5}};  // IoU exactly 0.4
  EXPECT_TRUE(MatchRegionFrame(f)[0].positive);
}

TEST(RegionApTest, HandExamples) {
  const Box gt{0.5, 0.5, 0.2, 0.2};
  std::vector<RegionFrame> exact(1);
  exact[0].ground_truth = {gt};
  exact[0].detections = {{gt, 1.0}};
  EXPECT_EQ(RegionAveragePrecision(exact), 1.0);

  // IoU 0.5: same height, shifted by a third of the width.
  const Box half{0.5 + 0.2 / 3, 0.5, 0.2, 0.2};
  // IoU 0.3: shifted further.
  const double d = 0.2 * (1 - 0.6 / 1.3);
  const Box low{0.5 + d, 0.5, 0.2, 0.2};
  ASSERT_NEAR(Iou(gt, half), 0.5, 1e-12);
  ASSERT_NEAR(Iou(gt, low), 0.3, 1e-12);
  std::vector<RegionFrame> two(1);
  two[0].ground_truth = {gt};
  two[0].detections = {{half, 0.9}, {low, 0.95}};
  EXPECT_NEAR(RegionAveragePrecision(two), 0.5, 1e-15);
}

TEST(RegionApTest, PooledOverFramesAndOracleBound) {
  const Box a{0.3, 0.3, 0.2, 0.2}, b{0.7, 0.7, 0.2, 0.2}, far{0.1, 0.9, 0.1, 0.1};
  std::vector<RegionFrame> frames(2);
  frames[0].ground_truth = {a};
  frames[0].detections = {{a, 0.2}, {far, 0.9}};
  frames[1].ground_truth = {b};
  frames[1].detections = {{b, 0.8}, {far, 0.1}};
  // Ranking: far .9 (fp), b .8 (tp), a .2 (tp), far .1 (fp)
  EXPECT_NEAR(RegionAveragePrecision(frames), (0.5 + 2.0 / 3.0) / 2.0, 1e-15);
  const auto oracle_ap = OracleRegionAveragePrecision(frames);
  ASSERT_TRUE(oracle_ap.has_value());
  EXPECT_EQ(*oracle_ap, 1.0);

  std::vector<RegionFrame> missed(1);
  missed[0].ground_truth = {a};
  missed[0].detections = {{far, 0.5}};
  EXPECT_FALSE(OracleRegionAveragePrecision(missed).has_value());
  EXPECT_EQ(RegionAveragePrecision(missed), 0.0);

  std::vector<RegionFrame> empty(1);
  EXPECT_THROW(RegionAveragePrecision(empty), MetricError);
}

TEST(RegionApTest, OracleBoundsAnyScoring) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<RegionFrame> frames(4);
    for (auto& f : frames) {
      const Box g = testutil::RandomBox(rng);
      f.ground_truth = {g};
      f.detections.push_back({g, testutil::Uniform(rng, 0, 1)});
      for (int k = 0; k < 4; ++k) {
        f.detections.push_back({testutil::RandomBox(rng), testutil::Uniform(rng, 0, 1)});
      }
    }
    EXPECT_LE(RegionAveragePrecision(frames), *OracleRegionAveragePrecision(frames) + 1e-12);
  }
}

TEST(RegionApTest, PerVideoAverage) {
  const Box a{0.3, 0.3, 0.2, 0.2}, far{0.1, 0.9, 0.1, 0.1};
  std::vector<std::vector<RegionFrame>> videos(3);
  videos[0] = {RegionFrame{{{a, 0.9}}, {a}}};
  videos[1] = {RegionFrame{{{far, 0.9}, {a, 0.5}}, {a}}};
  videos[2] = {RegionFrame{{{far, 0.9}}, {}}};  // no ground truth: skipped
  EXPECT_NEAR(PerVideoRegionAveragePrecision(videos), (1.0 + 0.5) / 2, 1e-15);
}

TEST(RiskMapTest, RasterizesMeanOfCoveringBoxes) {
  const Box boxes[2] = {{0.25, 0.5, 0.5, 1.0}, {0.5, 0.5, 1.0, 1.0}};
  const double scores[2] = {1.0, 0.5};
  const RiskMap m = RasterizeRiskMap(boxes, scores, 4, 2);
  EXPECT_EQ(m.at(0, 0), 0.75);
  EXPECT_EQ(m.at(1, 1), 0.75);
  EXPECT_EQ(m.at(2, 0), 0.5);
  EXPECT_EQ(m.at(3, 1), 0.5);
  const double clamped[1] = {1.7};
  const RiskMap c = RasterizeRiskMap(std::span(boxes, 1), clamped, 4, 2);
  EXPECT_EQ(c.at(0, 0), 1.0);
  EXPECT_EQ(c.at(3, 0), 0.0);
}

TEST(RiskMapTest, SpecExamples) {
  const Box all{0.5, 0.5, 1.0, 1.0};
  const double s08[1] = {0.8};
  for (double v : RasterizeRiskMap(std::span(&all, 1), s08, 5, 3).cells) EXPECT_EQ(v, 0.8);
  const Box twice[2] = {all, all};
  const double two[2] = {0.2, 0.6};
  for (double v : RasterizeRiskMap(twice, two, 3, 3).cells) EXPECT_NEAR(v, 0.4, 1e-15);
  const RiskMap empty = RasterizeRiskMap({}, {}, 4, 4);
  EXPECT_EQ(empty.cells, std::vector<double>(16, 0.0));
}

TEST(RiskMapTest, WritesPlainPgm) {
  RiskMap m{2, 1, {0.5, 1.0}};
  std::ostringstream out;
  WritePgm(out, m);
  EXPECT_EQ(out.str(), "P2\n2 1\n255\n128 255\n");
}

}  // namespace
}  // namespace riskrnn
