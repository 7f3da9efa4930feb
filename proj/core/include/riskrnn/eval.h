#ifndef RISKRNN_EVAL_H_
#define RISKRNN_EVAL_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "riskrnn/geometry.h"

namespace riskrnn {

struct ScoredItem {
  double score = 0.0;
  bool positive = false;
};

// Area under the all-point precision/recall curve. Items sharing a score form
// one threshold step, so tied negatives always count against tied positives.
// `total_positives` defaults to the positives among `items`; pass a larger
// count when some positives were never detected. Throws MetricError when there
// are no positives or a score is not finite.
double AveragePrecision(std::span<const ScoredItem> items,
                        std::optional<size_t> total_positives = std::nullopt);

// Per-video per-frame anticipation probabilities (already max-pooled over
// candidate agent tracks).
struct VideoScores {
  std::vector<double> frame_scores;
  bool positive = false;
  int accident_frame = -1;  // positives only
};

struct TrackScores {
  int start_frame = 0;
  std::vector<double> scores;
};

// Per-frame max over tracks; frames no track covers score 0.
std::vector<double> MaxOverTracks(std::span<const TrackScores> tracks,
                                  size_t num_frames);

// Video score = max over frames.
double VideoScore(const VideoScores& video);
std::vector<ScoredItem> VideoLevelItems(std::span<const VideoScores> videos);

// First frame whose score reaches `threshold`, or -1.
int FirstCrossing(std::span<const double> frame_scores, double threshold);

// One row per distinct video score, descending.
struct CurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double mean_tta = 0.0;  // frames; over recalled positives
};

struct AnticipationMetrics {
  double average_precision = 0.0;
  double atta_frames = 0.0;
  std::vector<CurvePoint> curve;
};

// A positive is recalled at threshold g when its video score >= g; its TTA is
// max(0, T - first frame with score >= g). ATTA integrates mean TTA over the
// recall axis (recall-increment weights). Throws MetricError without
// positives.
AnticipationMetrics EvaluateAnticipation(std::span<const VideoScores> videos);

struct RegionDetection {
  Box box;
  double score = 0.0;
};

struct RegionFrame {
  std::vector<RegionDetection> detections;
  std::vector<Box> ground_truth;
};

inline constexpr double kRegionMatchIou = 0.4;

// Greedy per-frame matching: detections in descending score order each take
// the unmatched ground-truth box of highest IoU, if that IoU >= match_iou.
// Equal scores are ordered by best IoU then box coordinates, so the result
// does not depend on input order.
std::vector<ScoredItem> MatchRegionFrame(const RegionFrame& frame,
                                         double match_iou = kRegionMatchIou);

// One AP over the detections of all frames; recall is relative to the total
// ground-truth count. Throws MetricError without ground truth.
double RegionAveragePrecision(std::span<const RegionFrame> frames,
                              double match_iou = kRegionMatchIou);

// Detections re-scored 1 when they overlap ground truth at >= match_iou and
// 0 otherwise. nullopt when no detection overlaps any ground truth.
std::optional<double> OracleRegionAveragePrecision(
    std::span<const RegionFrame> frames, double match_iou = kRegionMatchIou);

// Mean of per-video region APs over videos that have ground truth.
double PerVideoRegionAveragePrecision(
    std::span<const std::vector<RegionFrame>> videos,
    double match_iou = kRegionMatchIou);

struct RiskMap {
  int width = 0;
  int height = 0;
  std::vector<double> cells;  // row-major, each in [0, 1]

  double at(int x, int y) const { return cells[static_cast<size_t>(y) * width + x]; }
};

// Cell value = mean score of the boxes covering the cell center (normalized
// image coordinates), 0 where none does. Scores are clamped to [0, 1].
RiskMap RasterizeRiskMap(std::span<const Box> boxes,
                         std::span<const double> scores, int width, int height);

// Plain PGM (P2), maxval 255, value round(255 * risk).
void WritePgm(std::ostream& out, const RiskMap& map);

}  // namespace riskrnn

#endif  // RISKRNN_EVAL_H_
