#include "riskrnn/synthworld.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "riskrnn/errors.h"

namespace riskrnn {
namespace {

// Splitmix64 finalizer; used to derive independent sub-seeds.
uint64_t Mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t SubSeed(uint64_t seed, uint64_t stream) {
  return Mix(seed ^ Mix(stream));
}

constexpr uint64_t kLayoutStream = 1;
constexpr uint64_t kFeatureStream = 2;
constexpr uint64_t kProposalStream = 3;

// Minimum agent-hazard center distance in negatives, in mean box extents.
constexpr double kClearance = 2.0;

// Six significant digits; keeps dataset files compact and lets them
// round-trip exactly.
double RoundFeature(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::vector<double> NoisyEmbedding(const std::vector<double>& emb, double sigma,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> out(emb.size());
  for (size_t i = 0; i < emb.size(); ++i) {
    out[i] = RoundFeature(emb[i] + sigma * noise(rng));
  }
  return out;
}

struct SceneBounds {
  double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
  void Add(const Box& b) {
    x0 = std::min(x0, b.XMin());
    y0 = std::min(y0, b.YMin());
    x1 = std::max(x1, b.XMax());
    y1 = std::max(y1, b.YMax());
  }
};

double MaxIouBefore(const std::vector<Box>& track, const Box& hazard,
                    size_t end) {
  double m = 0.0;
  for (size_t t = 0; t < end; ++t) m = std::max(m, Iou(track[t], hazard));
  return m;
}

}  // namespace

void ScenarioConfig::Validate() const {
  if (frames_per_video < 2) throw ConfigError("scenario.frames_per_video must be >= 2");
  if (n_regions < 1) throw ConfigError("scenario.n_regions must be >= 1");
  if (feature_dim < 1) throw ConfigError("scenario.feature_dim must be >= 1");
  if (n_classes < 2) throw ConfigError("scenario.n_classes must be >= 2");
  if (!(noise_sigma >= 0.0)) throw ConfigError("scenario.noise_sigma must be >= 0");
  if (!(proposal_jitter >= 0.0)) {
    throw ConfigError("scenario.proposal_jitter must be >= 0");
  }
  if (!(collision_iou > 0.0 && collision_iou < 1.0)) {
    throw ConfigError("scenario.collision_iou must be in (0, 1)");
  }
  if (n_distractor_proposals < 0) {
    throw ConfigError("scenario.n_distractor_proposals must be >= 0");
  }
  if (max_retries < 1) throw ConfigError("scenario.max_retries must be >= 1");
}

std::vector<FrameInput> Scenario::Frames() const {
  return FramesForTrack(GroundTruthTrack());
}

std::vector<FrameInput> Scenario::FramesForTrack(
    const Track& track, double self_overlap_iou,
    std::vector<std::vector<size_t>>* kept) const {
  std::vector<FrameInput> frames;
  if (kept) kept->clear();
  for (size_t k = 0; k < track.length(); ++k) {
    const size_t t = track.start_frame + k;
    if (t >= num_frames()) break;
    FrameInput f;
    f.agent_feat = track.points[k].feature;
    f.agent_box = track.points[k].box;
    std::vector<size_t> idx;
    for (size_t i = 0; i < region_boxes[t].size(); ++i) {
      if (Iou(f.agent_box, region_boxes[t][i]) <= self_overlap_iou) idx.push_back(i);
    }
    if (idx.empty()) {
      for (size_t i = 0; i < region_boxes[t].size(); ++i) idx.push_back(i);
    }
    for (size_t i : idx) {
      f.region_feats.push_back(region_feats[t][i]);
      f.region_boxes.push_back(region_boxes[t][i]);
    }
    frames.push_back(std::move(f));
    if (kept) kept->push_back(std::move(idx));
  }
  return frames;
}

VideoTargets Scenario::TargetsForTrack(const Track& track) const {
  VideoTargets t = targets;
  t.agent_track = track.Boxes();
  if (track.start_frame != 0 || track.length() != num_frames()) {
    const size_t n = std::min(track.length(), num_frames() - track.start_frame);
    t.agent_track.resize(n);
    if (t.positive()) {
      t.risky_boxes.assign(targets.risky_boxes.begin() + track.start_frame,
                           targets.risky_boxes.begin() + track.start_frame + n);
      t.accident_frame -= track.start_frame;
    }
  }
  return t;
}

Track Scenario::GroundTruthTrack() const {
  Track t;
  for (size_t f = 0; f < num_frames(); ++f) {
    TrackPoint p;
    p.box = targets.agent_track[f];
    if (f < agent_feats.size()) p.feature = agent_feats[f];
    p.score = 1.0;
    t.points.push_back(std::move(p));
  }
  return t;
}

std::vector<std::vector<double>> ClassEmbeddings(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.embedding_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> emb(cfg.n_classes + 1);
  for (auto& e : emb) {
    e.resize(cfg.feature_dim);
    double norm = 0.0;
    for (auto& v : e) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : e) v /= norm;
  }
  return emb;
}

Scenario GenerateLayout(const ScenarioConfig& cfg, bool positive) {
  cfg.Validate();
  std::mt19937_64 rng(SubSeed(cfg.seed, kLayoutStream));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };

  const int frames = cfg.frames_per_video;
  const int last = frames - 1;
  const double thr = cfg.collision_iou;

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    // Agent walk with heading noise, in scene-local coordinates.
    const double aw = uni(0.08, 0.12), ah = uni(0.08, 0.12);
    double heading = uni(0.0, 2.0 * std::numbers::pi);
    const double speed = uni(0.025, 0.045);
    std::vector<Box> track(frames);
    double x = 0.0, y = 0.0;
    for (int t = 0; t < frames; ++t) {
      track[t] = {x, y, aw, ah};
      heading += 0.05 * normal(rng);
      x += speed * std::cos(heading);
      y += speed * std::sin(heading);
    }
    const double dx = track[last].cx - track[last - 1].cx;
    const double dy = track[last].cy - track[last - 1].cy;
    const double dn = std::hypot(dx, dy);
    const double ux = dx / dn, uy = dy / dn;

    const double hw = aw * uni(0.9, 1.3), hh = ah * uni(0.9, 1.3);
    Box hazard;
    if (positive) {
      // Slide the hazard ahead of the final agent box until the IoU drops to
      // the target value; IoU is non-increasing in the distance.
      const Box at_end = track[last];
      const double max_iou = Iou(at_end, {at_end.cx, at_end.cy, hw, hh});
      const double hi_iou = std::min(0.9 * max_iou, thr + 0.3);
      if (hi_iou <= thr + 0.05) continue;
      const double target = uni(thr + 0.05, hi_iou);
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Box h{at_end.cx + ux * mid, at_end.cy + uy * mid, hw, hh};
        if (Iou(at_end, h) > target) lo = mid; else hi = mid;
      }
      hazard = {at_end.cx + ux * lo, at_end.cy + uy * lo, hw, hh};
      if (!(Iou(at_end, hazard) > thr)) continue;
      if (MaxIouBefore(track, hazard, last) > thr) continue;
    } else {
      // The path keeps clear of the hazard: center distance at every frame of
      // at least kClearance times the mean box extent.
      const double cx = 0.5 * (track[0].cx + track[last].cx);
      const double cy = 0.5 * (track[0].cy + track[last].cy);
      hazard = {cx + uni(-0.4, 0.4), cy + uni(-0.4, 0.4), hw, hh};
      const double extent = 0.25 * (aw + ah + hw + hh);
      bool clear = true;
      for (const Box& b : track) {
        clear = clear && std::hypot(b.cx - hazard.cx, b.cy - hazard.cy) >=
                             kClearance * extent;
      }
      if (!clear || MaxIouBefore(track, hazard, frames) > thr) continue;
    }

    // Fit the agent path and hazard into the frame.
    SceneBounds sb;
    for (const auto& b : track) sb.Add(b);
    sb.Add(hazard);
    const double span_x = sb.x1 - sb.x0, span_y = sb.y1 - sb.y0;
    if (span_x > 0.96 || span_y > 0.96) continue;
    const double shift_x = uni(0.02, 0.98 - span_x) - sb.x0;
    const double shift_y = uni(0.02, 0.98 - span_y) - sb.y0;
    for (auto& b : track) {
      b.cx += shift_x;
      b.cy += shift_y;
    }
    hazard.cx += shift_x;
    hazard.cy += shift_y;

    // Benign regions: low overlap with the hazard and with each other.
    std::vector<Box> regions = {hazard};
    bool placed_all = true;
    for (int r = 1; r < cfg.n_regions && placed_all; ++r) {
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries) {
        const double w = uni(0.06, 0.2), h = uni(0.06, 0.2);
        const Box b{uni(w / 2, 1 - w / 2), uni(h / 2, 1 - h / 2), w, h};
        if (Iou(b, hazard) > 0.1) continue;
        bool ok = true;
        for (size_t k = 1; k < regions.size() && ok; ++k) {
          ok = Iou(b, regions[k]) <= 0.3;
        }
        if (!ok) continue;
        regions.push_back(b);
        placed = true;
      }
      placed_all = placed;
    }
    if (!placed_all) continue;

    // Shuffle so the hazard's slot carries no information.
    std::vector<int> order(cfg.n_regions);
    for (int i = 0; i < cfg.n_regions; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    Scenario s;
    s.targets.label = positive ? VideoLabel::kPositive : VideoLabel::kNegative;
    s.targets.accident_frame = positive ? last : -1;
    s.targets.agent_track = track;
    s.region_classes.resize(cfg.n_regions);
    std::vector<Box> shuffled(cfg.n_regions);
    const int n_hazard = cfg.NumHazardClasses();
    std::uniform_int_distribution<int> hazard_class(0, n_hazard - 1);
    std::uniform_int_distribution<int> benign_class(n_hazard, cfg.n_classes - 1);
    for (int slot = 0; slot < cfg.n_regions; ++slot) {
      const int src = order[slot];
      shuffled[slot] = regions[src];
      if (src == 0) {
        s.hazard_region = slot;
        s.region_classes[slot] = hazard_class(rng);
      } else {
        s.region_classes[slot] = benign_class(rng);
      }
    }
    s.region_boxes.assign(frames, shuffled);
    if (positive) s.targets.risky_boxes.assign(frames, {hazard});
    return s;
  }
  throw GenerationError("could not construct a " +
                        std::string(positive ? "positive" : "negative") +
                        " scenario within " + std::to_string(cfg.max_retries) +
                        " attempts (seed " + std::to_string(cfg.seed) + ")");
}

void SynthesizeFeatures(const ScenarioConfig& cfg, Scenario& s) {
  const auto emb = ClassEmbeddings(cfg);
  std::mt19937_64 rng(SubSeed(cfg.seed, kFeatureStream));
  const size_t frames = s.num_frames();
  s.agent_feats.assign(frames, {});
  s.region_feats.assign(frames, {});
  for (size_t t = 0; t < frames; ++t) {
    s.agent_feats[t] = NoisyEmbedding(emb[cfg.n_classes], cfg.noise_sigma, rng);
    for (int cls : s.region_classes) {
      s.region_feats[t].push_back(NoisyEmbedding(emb[cls], cfg.noise_sigma, rng));
    }
  }
}

void SynthesizeProposals(const ScenarioConfig& cfg, Scenario& s) {
  const auto emb = ClassEmbeddings(cfg);
  std::mt19937_64 rng(SubSeed(cfg.seed, kProposalStream));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_class(0, cfg.n_classes - 1);
  const double j = cfg.proposal_jitter;

  auto jitter = [&](const Box& b) {
    if (j == 0.0) return b;
    return Box{b.cx + j * b.w * normal(rng), b.cy + j * b.h * normal(rng),
               b.w * std::exp(j * normal(rng)), b.h * std::exp(j * normal(rng))};
  };
  auto true_score = [&] {
    return std::clamp(0.9 + 0.05 * normal(rng), 0.0, 1.0);
  };

  s.proposals.assign(s.num_frames(), {});
  for (size_t t = 0; t < s.num_frames(); ++t) {
    FrameProposals& fp = s.proposals[t];
    fp.push_back({jitter(s.targets.agent_track[t]), true_score(),
                  s.agent_feats[t], 0});
    for (size_t i = 0; i < s.region_boxes[t].size(); ++i) {
      fp.push_back({jitter(s.region_boxes[t][i]), true_score(),
                    s.region_feats[t][i], static_cast<int>(i) + 1});
    }
    for (int d = 0; d < cfg.n_distractor_proposals; ++d) {
      const Box b{unit(rng), unit(rng), 0.05 + 0.15 * unit(rng),
                  0.05 + 0.15 * unit(rng)};
      const double score = 0.5 * unit(rng);
      fp.push_back({b, score,
                    NoisyEmbedding(emb[any_class(rng)], cfg.noise_sigma, rng),
                    -1});
    }
    std::shuffle(fp.begin(), fp.end(), rng);
  }
}

Scenario GenerateScenario(const ScenarioConfig& cfg, bool positive) {
  Scenario s = GenerateLayout(cfg, positive);
  SynthesizeFeatures(cfg, s);
  SynthesizeProposals(cfg, s);
  return s;
}

std::vector<Scenario> GenerateSplit(const ScenarioConfig& cfg,
                                    const std::string& split, int count) {
  uint64_t split_hash = 1469598103934665603ULL;
  for (char c : split) {
    split_hash = (split_hash ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  }
  std::vector<Scenario> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    ScenarioConfig vc = cfg;
    vc.seed = SubSeed(cfg.seed ^ split_hash, static_cast<uint64_t>(i) + 100);
    Scenario s = GenerateScenario(vc, i % 2 == 0);
    s.id = split + "-" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace riskrnn
