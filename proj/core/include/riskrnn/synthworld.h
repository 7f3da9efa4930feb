#ifndef RISKRNN_SYNTHWORLD_H_
#define RISKRNN_SYNTHWORLD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "riskrnn/geometry.h"
#include "riskrnn/losses.h"
#include "riskrnn/model.h"
#include "riskrnn/tracking.h"

namespace riskrnn {

struct ScenarioConfig {
  int frames_per_video = 12;
  int n_regions = 8;
  int feature_dim = 32;
  // Region classes; the first NumHazardClasses() are hazards, the rest benign.
  int n_classes = 6;
  double noise_sigma = 0.1;
  double collision_iou = 0.3;
  // Proposal box noise, relative to the source box size.
  double proposal_jitter = 0.05;
  int n_distractor_proposals = 20;
  uint64_t seed = 0;
  // Seeds the class embeddings shared by every video of a world.
  uint64_t embedding_seed = 7;
  int max_retries = 2000;

  // Throws ConfigError.
  void Validate() const;
  int NumHazardClasses() const { return n_classes >= 3 ? n_classes / 3 : 1; }
};

// One synthetic video: a single moving agent, static regions (exactly one of
// them a hazard), per-frame features and detector proposals.
struct Scenario {
  std::string id;
  VideoTargets targets;
  std::vector<std::vector<Box>> region_boxes;  // [frame][region]
  std::vector<int> region_classes;
  int hazard_region = -1;

  std::vector<std::vector<double>> agent_feats;                // [frame]
  std::vector<std::vector<std::vector<double>>> region_feats;  // [frame][region]
  std::vector<FrameProposals> proposals;                       // [frame]

  size_t num_frames() const { return targets.agent_track.size(); }
  bool positive() const { return targets.positive(); }

  // Model inputs with the ground-truth agent.
  std::vector<FrameInput> Frames() const;
  // Model inputs with `track` standing in for the agent; covers the frames
  // the track spans. A region whose box overlaps the track box at IoU above
  // `self_overlap_iou` is the tracked object itself and is left out, unless
  // that would leave the frame empty. `kept`, when given, receives the
  // surviving region indices per frame.
  std::vector<FrameInput> FramesForTrack(
      const Track& track, double self_overlap_iou = 1.0,
      std::vector<std::vector<size_t>>* kept = nullptr) const;
  // Targets with the agent track replaced (labels are shared).
  VideoTargets TargetsForTrack(const Track& track) const;
  Track GroundTruthTrack() const;
};

// Unit-norm embeddings: rows 0..n_classes-1 for regions, row n_classes for
// the agent.
std::vector<std::vector<double>> ClassEmbeddings(const ScenarioConfig& cfg);

// Geometry, labels and classes only; features and proposals stay empty.
// Positives: the agent-hazard IoU first exceeds collision_iou at the last
// frame. Negatives: it never does. Throws GenerationError when the retry
// budget runs out.
Scenario GenerateLayout(const ScenarioConfig& cfg, bool positive);

// Fills agent_feats / region_feats: class embedding + N(0, noise_sigma^2).
void SynthesizeFeatures(const ScenarioConfig& cfg, Scenario& scenario);

// Fills proposals: a jittered copy of every true box (score 0.9 + N(0, 0.05),
// clamped) plus n_distractor_proposals clutter boxes (score U[0, 0.5]),
// shuffled per frame.
void SynthesizeProposals(const ScenarioConfig& cfg, Scenario& scenario);

// Layout + features + proposals.
Scenario GenerateScenario(const ScenarioConfig& cfg, bool positive);

// `count` videos, even indices positive. Video seeds derive from
// (cfg.seed, split, index).
std::vector<Scenario> GenerateSplit(const ScenarioConfig& cfg,
                                    const std::string& split, int count);

}  // namespace riskrnn

#endif  // RISKRNN_SYNTHWORLD_H_
