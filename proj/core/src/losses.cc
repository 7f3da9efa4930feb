#include "riskrnn/losses.h"

#include <cmath>
#include <string>

#include "riskrnn/errors.h"
#include "riskrnn/nn.h"

namespace riskrnn {

void VideoTargets::Validate(size_t num_frames) const {
  if (agent_track.size() != num_frames) {
    throw ContractViolation("agent track has " +
                            std::to_string(agent_track.size()) +
                            " boxes for " + std::to_string(num_frames) +
                            " frames");
  }
  if (positive()) {
    if (accident_frame < 0 || static_cast<size_t>(accident_frame) >= num_frames) {
      throw ContractViolation("accident frame outside the sequence");
    }
    if (risky_boxes.size() != num_frames) {
      throw ContractViolation("positive video needs risky boxes per frame");
    }
  }
}

std::vector<int> RegionLabels(std::span<const Box> region_boxes,
                              std::span<const Box> risky_boxes,
                              double iou_threshold) {
  std::vector<int> labels(region_boxes.size(), 0);
  for (size_t i = 0; i < region_boxes.size(); ++i) {
    for (const Box& gt : risky_boxes) {
      if (Iou(region_boxes[i], gt) > iou_threshold) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

namespace {

// Frames that carry loss terms: all of a negative video, t <= T of a positive.
size_t SupervisedFrames(size_t num_frames, const VideoTargets& targets) {
  if (!targets.positive()) return num_frames;
  return std::min(num_frames, static_cast<size_t>(targets.accident_frame) + 1);
}

}  // namespace

Var AnticipationLoss(Tape& tape, std::span<const Var> ys,
                     const VideoTargets& targets, const LossOptions& options) {
  std::vector<Var> terms;
  const size_t n = SupervisedFrames(ys.size(), targets);
  for (size_t t = 0; t < n; ++t) {
    if (ys[t].size() != 2) throw ContractViolation("y must have size 2");
    if (targets.positive()) {
      const double weight = std::exp(
          -static_cast<double>(targets.accident_frame - static_cast<int>(t)) *
          options.time_scale);
      terms.push_back(Scale(NegLog(Element(ys[t], 1)), weight));
    } else {
      terms.push_back(NegLog(Element(ys[t], 0)));
    }
  }
  if (terms.empty()) return tape.Scalar(0.0);
  return AddN(terms);
}

Var RegionLoss(Tape& tape, std::span<const Var> logits,
               std::span<const std::vector<int>> labels) {
  if (logits.size() != labels.size()) {
    throw ContractViolation("RegionLoss: frame count mismatch");
  }
  std::vector<Var> terms;
  for (size_t t = 0; t < logits.size(); ++t) {
    if (logits[t].size() != labels[t].size()) {
      throw ContractViolation("RegionLoss: region count mismatch");
    }
    if (labels[t].empty()) continue;
    // Softplus(-z) for risky regions, Softplus(z) for the rest.
    std::vector<double> sign(labels[t].size());
    for (size_t i = 0; i < sign.size(); ++i) sign[i] = labels[t][i] ? -1.0 : 1.0;
    terms.push_back(SumAll(Softplus(Mul(logits[t], tape.Constant(std::move(sign))))));
  }
  if (terms.empty()) return tape.Scalar(0.0);
  return AddN(terms);
}

Var TransformLoss(Tape& tape, std::span<const Var> transforms,
                  std::span<const Box> track, int K) {
  if (K < 1) throw ConfigError("imagination horizon K must be >= 1");
  std::vector<Var> terms;
  for (size_t t = 0; t < transforms.size(); ++t) {
    if (t + K >= track.size()) break;
    const auto target = EncodeBoxTransform(track[t], track[t + K]).ToArray();
    terms.push_back(SmoothL1Loss(transforms[t], target));
  }
  if (terms.empty()) return tape.Scalar(0.0);
  return AddN(terms);
}

std::vector<std::vector<int>> FrameRegionLabels(
    std::span<const FrameInput> frames, const VideoTargets& targets,
    const LossOptions& options) {
  std::vector<std::vector<int>> labels;
  labels.reserve(frames.size());
  for (size_t t = 0; t < frames.size(); ++t) {
    if (targets.positive() && t < targets.risky_boxes.size()) {
      labels.push_back(RegionLabels(frames[t].region_boxes,
                                    targets.risky_boxes[t], options.region_iou));
    } else {
      labels.emplace_back(frames[t].num_regions(), 0);
    }
  }
  return labels;
}

LossBreakdown TotalLoss(Tape& tape, std::span<const FrameNodes> nodes,
                        std::span<const FrameInput> frames,
                        const VideoTargets& targets,
                        std::span<const double> lambdas, int K,
                        const LossOptions& options) {
  if (nodes.size() != frames.size()) {
    throw ContractViolation("TotalLoss: node/frame count mismatch");
  }
  targets.Validate(frames.size());
  const size_t steps = nodes.empty() ? 0 : nodes[0].imagined_y.size();
  if (lambdas.size() != steps + 1) {
    throw ConfigError("loss needs I+1 = " + std::to_string(steps + 1) +
                      " lambdas, got " + std::to_string(lambdas.size()));
  }
  const auto labels = FrameRegionLabels(frames, targets, options);
  const size_t supervised = SupervisedFrames(frames.size(), targets);
  const std::span<const std::vector<int>> sup_labels(labels.data(), supervised);

  LossBreakdown out;
  std::vector<Var> terms;
  for (size_t n = 0; n <= steps; ++n) {
    std::vector<Var> ys, ss;
    for (size_t t = 0; t < nodes.size(); ++t) {
      ys.push_back(n == 0 ? nodes[t].y : nodes[t].imagined_y[n - 1]);
      if (t < supervised) {
        ss.push_back(n == 0 ? nodes[t].score_logits
                            : nodes[t].imagined_score_logits[n - 1]);
      }
    }
    const Var la = AnticipationLoss(tape, ys, targets, options);
    const Var lr = RegionLoss(tape, ss, sup_labels);
    out.anticipation.push_back(la.scalar());
    out.region.push_back(lr.scalar());
    const Var task[2] = {la, lr};
    terms.push_back(Scale(AddN(task), lambdas[n]));
  }
  if (steps > 0) {
    std::vector<Var> cs;
    for (size_t t = 0; t < supervised; ++t) cs.push_back(nodes[t].transform);
    const Var lp = TransformLoss(tape, cs, targets.agent_track, K);
    out.transform = lp.scalar();
    terms.push_back(lp);
  }
  out.total = AddN(terms);
  return out;
}

}  // namespace riskrnn
