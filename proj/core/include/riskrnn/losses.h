#ifndef RISKRNN_LOSSES_H_
#define RISKRNN_LOSSES_H_

#include <span>
#include <vector>

#include "riskrnn/geometry.h"
#include "riskrnn/model.h"
#include "riskrnn/tape.h"

namespace riskrnn {

enum class VideoLabel { kNegative, kPositive };

struct VideoTargets {
  VideoLabel label = VideoLabel::kNegative;
  int accident_frame = -1;                    // T; positives only
  std::vector<Box> agent_track;               // one box per frame
  std::vector<std::vector<Box>> risky_boxes;  // per frame; empty for negatives

  bool positive() const { return label == VideoLabel::kPositive; }
  // Throws ContractViolation when inconsistent with a video of `num_frames`.
  void Validate(size_t num_frames) const;
};

struct LossOptions {
  // Region i is risky when its IoU with some risky box is strictly above this.
  double region_iou = 0.4;
  // Exponent scale in exp(-(T - t) * time_scale); 1.0 = per frame.
  double time_scale = 1.0;
};

// label_i = 1 iff max_j IoU(region_i, risky_j) > iou_threshold.
std::vector<int> RegionLabels(std::span<const Box> region_boxes,
                              std::span<const Box> risky_boxes,
                              double iou_threshold = 0.4);

// Negatives: sum over frames of -log y[0]. Positives: frames up to the
// accident frame T, each -log y[1] weighted by exp(-(T - t) * time_scale).
// `ys` holds one size-2 node per frame.
Var AnticipationLoss(Tape& tape, std::span<const Var> ys,
                     const VideoTargets& targets,
                     const LossOptions& options = {});

// Sigmoid cross-entropy summed over frames and regions: -log s for risky
// regions, -log(1 - s) otherwise, with s = sigmoid(logit). Computed from the
// logits so saturated scores keep full precision. `logits` holds one size-N
// node per frame, `labels` the matching 0/1 vectors.
Var RegionLoss(Tape& tape, std::span<const Var> logits,
               std::span<const std::vector<int>> labels);

// Smooth-L1 between each predicted transform and the one encoding
// track[t] -> track[t + K], over frames with t + K inside the track.
Var TransformLoss(Tape& tape, std::span<const Var> transforms,
                  std::span<const Box> track, int K);

// Per-frame region labels for the given frames and targets (all zero for
// negatives).
std::vector<std::vector<int>> FrameRegionLabels(
    std::span<const FrameInput> frames, const VideoTargets& targets,
    const LossOptions& options = {});

struct LossBreakdown {
  Var total;
  double transform = 0.0;
  // Index n = 0 is observed, n >= 1 imagined.
  std::vector<double> anticipation;
  std::vector<double> region;
};

// Transform loss plus, for the observed step and each imagined step, the
// lambda-weighted sum of anticipation and region losses.
// Throws ConfigError when lambdas.size() != I + 1 for the given nodes.
LossBreakdown TotalLoss(Tape& tape, std::span<const FrameNodes> nodes,
                        std::span<const FrameInput> frames,
                        const VideoTargets& targets,
                        std::span<const double> lambdas, int K,
                        const LossOptions& options = {});

}  // namespace riskrnn

#endif  // RISKRNN_LOSSES_H_
