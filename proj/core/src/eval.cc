#include "riskrnn/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <tuple>

#include "riskrnn/errors.h"

namespace riskrnn {
namespace {

// Indices sorted by descending score; ties broken by index for determinism
// (ties never affect the metrics, which step over whole tie groups).
std::vector<size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double AveragePrecision(std::span<const ScoredItem> items,
                        std::optional<size_t> total_positives) {
  size_t positives = 0;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw MetricError("non-finite score in AP input");
    if (it.positive) ++positives;
  }
  const size_t total = total_positives.value_or(positives);
  if (total < positives) {
    throw MetricError("total_positives is smaller than the positive items");
  }
  if (total == 0) throw MetricError("average precision undefined without positives");

  std::vector<double> scores(items.size());
  for (size_t i = 0; i < items.size(); ++i) scores[i] = items[i].score;
  const auto order = DescendingOrder(scores);

  double ap = 0.0;
  size_t tp = 0, seen = 0;
  for (size_t k = 0; k < order.size();) {
    size_t group_tp = 0, j = k;
    while (j < order.size() && scores[order[j]] == scores[order[k]]) {
      if (items[order[j]].positive) ++group_tp;
      ++j;
    }
    tp += group_tp;
    seen += j - k;
    if (group_tp > 0) {
      ap += (static_cast<double>(group_tp) / total) *
            (static_cast<double>(tp) / seen);
    }
    k = j;
  }
  return ap;
}

std::vector<double> MaxOverTracks(std::span<const TrackScores> tracks,
                                  size_t num_frames) {
  std::vector<double> out(num_frames, 0.0);
  std::vector<bool> covered(num_frames, false);
  for (const auto& tr : tracks) {
    for (size_t k = 0; k < tr.scores.size(); ++k) {
      const size_t t = tr.start_frame + k;
      if (t >= num_frames) break;
      out[t] = covered[t] ? std::max(out[t], tr.scores[k]) : tr.scores[k];
      covered[t] = true;
    }
  }
  return out;
}

double VideoScore(const VideoScores& video) {
  if (video.frame_scores.empty()) throw MetricError("video without frame scores");
  return *std::max_element(video.frame_scores.begin(), video.frame_scores.end());
}

std::vector<ScoredItem> VideoLevelItems(std::span<const VideoScores> videos) {
  std::vector<ScoredItem> items;
  items.reserve(videos.size());
  for (const auto& v : videos) items.push_back({VideoScore(v), v.positive});
  return items;
}

int FirstCrossing(std::span<const double> frame_scores, double threshold) {
  for (size_t t = 0; t < frame_scores.size(); ++t) {
    if (frame_scores[t] >= threshold) return static_cast<int>(t);
  }
  return -1;
}

AnticipationMetrics EvaluateAnticipation(std::span<const VideoScores> videos) {
  const auto items = VideoLevelItems(videos);
  AnticipationMetrics m;
  m.average_precision = AveragePrecision(items);

  size_t total_pos = 0;
  for (const auto& it : items) total_pos += it.positive ? 1 : 0;

  std::vector<double> thresholds;
  for (const auto& it : items) thresholds.push_back(it.score);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  double prev_recall = 0.0;
  for (double g : thresholds) {
    size_t tp = 0, predicted = 0;
    double tta_sum = 0.0;
    for (size_t i = 0; i < videos.size(); ++i) {
      if (items[i].score < g) continue;
      ++predicted;
      if (!videos[i].positive) continue;
      ++tp;
      const int first = FirstCrossing(videos[i].frame_scores, g);
      tta_sum += std::max(0, videos[i].accident_frame - first);
    }
    CurvePoint p;
    p.threshold = g;
    p.precision = static_cast<double>(tp) / predicted;
    p.recall = static_cast<double>(tp) / total_pos;
    p.mean_tta = tp > 0 ? tta_sum / tp : 0.0;
    m.atta_frames += (p.recall - prev_recall) * p.mean_tta;
    prev_recall = p.recall;
    m.curve.push_back(p);
  }
  return m;
}

std::vector<ScoredItem> MatchRegionFrame(const RegionFrame& frame,
                                         double match_iou) {
  const auto& dets = frame.detections;
  const auto& gt = frame.ground_truth;
  std::vector<double> best_iou(dets.size(), 0.0);
  for (size_t d = 0; d < dets.size(); ++d) {
    for (const Box& g : gt) best_iou[d] = std::max(best_iou[d], Iou(dets[d].box, g));
  }
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Box& ba = dets[a].box;
    const Box& bb = dets[b].box;
    return std::make_tuple(-dets[a].score, -best_iou[a], ba.cx, ba.cy, ba.w, ba.h) <
           std::make_tuple(-dets[b].score, -best_iou[b], bb.cx, bb.cy, bb.w, bb.h);
  });

  std::vector<bool> taken(gt.size(), false);
  std::vector<ScoredItem> out;
  out.reserve(dets.size());
  for (size_t d : order) {
    int best = -1;
    double best_val = -1.0;
    for (size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double v = Iou(dets[d].box, gt[g]);
      if (v >= match_iou && v > best_val) {
        best = static_cast<int>(g);
        best_val = v;
      }
    }
    if (best >= 0) taken[best] = true;
    out.push_back({dets[d].score, best >= 0});
  }
  return out;
}

double RegionAveragePrecision(std::span<const RegionFrame> frames,
                              double match_iou) {
  std::vector<ScoredItem> pooled;
  size_t total_gt = 0;
  for (const auto& f : frames) {
    total_gt += f.ground_truth.size();
    const auto items = MatchRegionFrame(f, match_iou);
    pooled.insert(pooled.end(), items.begin(), items.end());
  }
  if (total_gt == 0) throw MetricError("region AP undefined without ground truth");
  return AveragePrecision(pooled, total_gt);
}

std::optional<double> OracleRegionAveragePrecision(
    std::span<const RegionFrame> frames, double match_iou) {
  std::vector<RegionFrame> oracle(frames.begin(), frames.end());
  bool any_hit = false;
  for (auto& f : oracle) {
    for (auto& d : f.detections) {
      bool hit = false;
      for (const Box& g : f.ground_truth) hit = hit || Iou(d.box, g) >= match_iou;
      d.score = hit ? 1.0 : 0.0;
      any_hit = any_hit || hit;
    }
  }
  if (!any_hit) return std::nullopt;
  return RegionAveragePrecision(oracle, match_iou);
}

double PerVideoRegionAveragePrecision(
    std::span<const std::vector<RegionFrame>> videos, double match_iou) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& v : videos) {
    size_t gt = 0;
    for (const auto& f : v) gt += f.ground_truth.size();
    if (gt == 0) continue;
    sum += RegionAveragePrecision(v, match_iou);
    ++n;
  }
  if (n == 0) throw MetricError("region AP undefined without ground truth");
  return sum / n;
}

RiskMap RasterizeRiskMap(std::span<const Box> boxes,
                         std::span<const double> scores, int width, int height) {
  if (width < 1 || height < 1) throw ContractViolation("risk map needs a grid of at least 1x1");
  if (boxes.size() != scores.size()) {
    throw ContractViolation("risk map: boxes and scores differ in length");
  }
  RiskMap map;
  map.width = width;
  map.height = height;
  map.cells.assign(static_cast<size_t>(width) * height, 0.0);
  for (int y = 0; y < height; ++y) {
    const double py = (y + 0.5) / height;
    for (int x = 0; x < width; ++x) {
      const double px = (x + 0.5) / width;
      double sum = 0.0;
      int count = 0;
      for (size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        if (px >= b.XMin() && px <= b.XMax() && py >= b.YMin() && py <= b.YMax()) {
          sum += std::clamp(scores[i], 0.0, 1.0);
          ++count;
        }
      }
      if (count > 0) map.cells[static_cast<size_t>(y) * width + x] = sum / count;
    }
  }
  return map;
}

void WritePgm(std::ostream& out, const RiskMap& map) {
  out << "P2\n" << map.width << ' ' << map.height << "\n255\n";
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (x > 0) out << ' ';
      out << static_cast<int>(std::lround(255.0 * std::clamp(map.at(x, y), 0.0, 1.0)));
    }
    out << '\n';
  }
}

}  // namespace riskrnn
