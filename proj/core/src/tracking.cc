#include "riskrnn/tracking.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskrnn/errors.h"

namespace riskrnn {

double Track::MeanScore() const {
  if (points.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : points) s += p.score;
  return s / static_cast<double>(points.size());
}

std::vector<Box> Track::Boxes() const {
  std::vector<Box> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.box);
  return out;
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractViolation("cosine similarity of differing dims");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

TrackPoint PointOf(const Proposal& p) { return {p.box, p.feature, p.score}; }

}  // namespace

std::vector<Track> TrackByDetection(std::span<const FrameProposals> frames,
                                    int top_init, int top_iou) {
  if (frames.empty()) throw ContractViolation("tracking needs >= 1 frame");
  if (top_init < 1 || top_iou < 1) {
    throw ConfigError("tracker top_init and top_iou must be >= 1");
  }
  const FrameProposals& first = frames[0];
  std::vector<size_t> order(first.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return first[a].score > first[b].score;
  });
  std::vector<Track> tracks;
  for (size_t k = 0; k < order.size() && k < static_cast<size_t>(top_init); ++k) {
    Track t;
    t.points.push_back(PointOf(first[order[k]]));
    tracks.push_back(std::move(t));
  }

  for (size_t f = 1; f < frames.size(); ++f) {
    const FrameProposals& next = frames[f];
    if (next.empty()) break;
    for (Track& track : tracks) {
      const TrackPoint& cur = track.points.back();
      std::vector<size_t> cand(next.size());
      std::iota(cand.begin(), cand.end(), 0);
      std::vector<double> ious(next.size());
      for (size_t i = 0; i < next.size(); ++i) ious[i] = Iou(cur.box, next[i].box);
      auto iou_better = [&](size_t a, size_t b) {
        if (ious[a] != ious[b]) return ious[a] > ious[b];
        if (next[a].score != next[b].score) return next[a].score > next[b].score;
        return a < b;
      };
      const size_t keep = std::min(cand.size(), static_cast<size_t>(top_iou));
      std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), iou_better);
      cand.resize(keep);

      size_t best = cand[0];
      double best_cos = CosineSimilarity(cur.feature, next[best].feature);
      for (size_t k = 1; k < cand.size(); ++k) {
        const size_t i = cand[k];
        const double c = CosineSimilarity(cur.feature, next[i].feature);
        const bool better =
            c > best_cos ||
            (c == best_cos && (next[i].score > next[best].score ||
                               (next[i].score == next[best].score && i < best)));
        if (better) {
          best = i;
          best_cos = c;
        }
      }
      track.points.push_back(PointOf(next[best]));
    }
  }
  return tracks;
}

std::vector<Track> DeduplicateTracks(std::span<const Track> tracks,
                                     double overlap_iou) {
  const size_t n = tracks.size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (size_t i = 0; i < n; ++i) {
    if (tracks[i].points.empty()) continue;
    for (size_t j = i + 1; j < n; ++j) {
      if (tracks[j].points.empty()) continue;
      if (Iou(tracks[i].points.back().box, tracks[j].points.back().box) >
          overlap_iou) {
        parent[find(j)] = find(i);
      }
    }
  }
  // Best member per group root.
  std::vector<long> best(n, -1);
  for (size_t i = 0; i < n; ++i) {
    if (tracks[i].points.empty()) continue;
    const size_t r = find(i);
    if (best[r] < 0 || tracks[i].MeanScore() > tracks[best[r]].MeanScore()) {
      best[r] = static_cast<long>(i);
    }
  }
  std::vector<Track> out;
  for (size_t i = 0; i < n; ++i) {
    if (!tracks[i].points.empty() && best[find(i)] == static_cast<long>(i)) {
      out.push_back(tracks[i]);
    }
  }
  return out;
}

std::vector<Track> RunTracker(std::span<const FrameProposals> frames,
                              const TrackerOptions& options) {
  const auto raw = TrackByDetection(frames, options.top_init, options.top_iou);
  return DeduplicateTracks(raw, options.overlap_iou);
}

int SelectTrainingTrack(size_t num_td_tracks, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> pick(0, num_td_tracks);
  const size_t k = pick(rng);
  return k == 0 ? -1 : static_cast<int>(k - 1);
}

const Track& SelectTrainingTrack(const Track& gt, std::span<const Track> td,
                                 std::mt19937_64& rng) {
  const int k = SelectTrainingTrack(td.size(), rng);
  return k < 0 ? gt : td[k];
}

}  // namespace riskrnn
