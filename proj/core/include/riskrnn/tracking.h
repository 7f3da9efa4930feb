#ifndef RISKRNN_TRACKING_H_
#define RISKRNN_TRACKING_H_

#include <random>
#include <span>
#include <vector>

#include "riskrnn/geometry.h"

namespace riskrnn {

// Per-frame candidate box from a detector.
struct Proposal {
  Box box;
  double score = 0.0;  // object score in [0, 1]
  std::vector<double> feature;
  // Generator bookkeeping: 0 = agent, i + 1 = region i, -1 = clutter.
  // Never read by the tracker.
  int source = -1;
};

using FrameProposals = std::vector<Proposal>;

struct TrackPoint {
  Box box;
  std::vector<double> feature;
  double score = 0.0;
};

// Contiguous run of boxes starting at `start_frame`.
struct Track {
  int start_frame = 0;
  std::vector<TrackPoint> points;

  size_t length() const { return points.size(); }
  double MeanScore() const;
  std::vector<Box> Boxes() const;
};

struct TrackerOptions {
  int top_init = 10;
  int top_iou = 10;
  double overlap_iou = 0.7;
  // When a track is assessed, regions overlapping its box above this IoU
  // are the tracked object itself and are not scored against it.
  double self_overlap_iou = 0.7;
};

double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// Seeds one track per top-`top_init` proposal (by object score) of frame 0.
// Each transition keeps the `top_iou` next-frame proposals with the highest
// IoU against the current box, then extends with the one whose feature is
// most cosine-similar to the current feature. Ties go to the higher object
// score, then the lower proposal index. A frame without proposals ends all
// tracks.
std::vector<Track> TrackByDetection(std::span<const FrameProposals> frames,
                                    int top_init, int top_iou);

// Single-link groups over final-box IoU > overlap_iou; each group keeps its
// track with the highest mean object score (lower index on ties). Survivors
// keep their input order.
std::vector<Track> DeduplicateTracks(std::span<const Track> tracks,
                                     double overlap_iou);

// Convenience: TrackByDetection followed by DeduplicateTracks.
std::vector<Track> RunTracker(std::span<const FrameProposals> frames,
                              const TrackerOptions& options);

// Uniform over {gt} U td. Returns -1 for the ground-truth track, otherwise
// the index into `td`.
int SelectTrainingTrack(size_t num_td_tracks, std::mt19937_64& rng);
const Track& SelectTrainingTrack(const Track& gt, std::span<const Track> td,
                                 std::mt19937_64& rng);

}  // namespace riskrnn

#endif  // RISKRNN_TRACKING_H_
