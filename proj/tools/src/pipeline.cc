#include "riskrnn_cli/pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "riskrnn/adam.h"
#include "riskrnn/errors.h"
#include "riskrnn/losses.h"
#include "riskrnn/serialization.h"

namespace riskrnn::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double RiskOf(const FramePrediction& p, bool fused) {
  return fused ? p.y_fused[1] : p.y[1];
}

struct ValResult {
  double loss = kNaN;
  double map = kNaN;
};

// Loss and anticipation AP on ground-truth agent tracks.
ValResult Validate(RiskModel& model, const Dataset& val,
                   const LossOptions& loss_opts, bool fused) {
  ValResult r;
  if (val.videos.empty()) return r;
  const ModelConfig& mc = model.config();
  double total = 0.0;
  std::vector<VideoScores> scores;
  for (const Scenario& v : val.videos) {
    const auto frames = v.Frames();
    Tape tape;
    const auto nodes = model.ForwardVideo(tape, frames);
    const auto loss =
        TotalLoss(tape, nodes, frames, v.targets, mc.lambdas, mc.K, loss_opts);
    total += loss.total.scalar();
    VideoScores vs;
    vs.positive = v.positive();
    vs.accident_frame = v.targets.accident_frame;
    for (const auto& n : nodes) vs.frame_scores.push_back(RiskOf(ToPrediction(n, mc.lambdas), fused));
    scores.push_back(std::move(vs));
  }
  r.loss = total / val.videos.size();
  try {
    r.map = EvaluateAnticipation(scores).average_precision;
  } catch (const MetricError&) {
    r.map = kNaN;
  }
  return r;
}

std::string Fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

nlohmann::json MetricsJson(const VariantReport& r) {
  nlohmann::json j = {{"anticipation_map", r.anticipation_map},
                      {"atta_frames", r.atta_frames},
                      {"atta_seconds", r.atta_seconds},
                      {"region_map", r.region_map}};
  if (r.oracle_region_map) {
    j["oracle_region_map"] = *r.oracle_region_map;
  } else {
    j["oracle_region_map"] = 0.0;
    j["oracle_region_map_defined"] = false;
  }
  return j;
}

}  // namespace

void CheckDimensions(const ModelConfig& model, const Dataset& data) {
  const int f = data.scenario.feature_dim;
  if (model.d_agent != f || model.d_region != f) {
    throw ConfigError("model input widths (agent " + std::to_string(model.d_agent) +
                      ", region " + std::to_string(model.d_region) +
                      ") do not match the dataset feature width " +
                      std::to_string(f));
  }
}

TrainOutcome TrainModel(const RunConfig& config, const Dataset& train,
                        const Dataset& val, std::ostream* progress) {
  config.Validate();
  CheckDimensions(config.model, train);
  if (!val.videos.empty()) CheckDimensions(config.model, val);
  if (train.videos.empty()) throw ConfigError("training split is empty");

  RiskModel model = RiskModel::Initialize(config.model, config.train.init_seed);
  AdamOptimizer adam(AdamOptions{.lr = config.train.lr});
  std::mt19937_64 rng(config.train.seed);
  const LossOptions loss_opts{.region_iou = config.train.region_iou,
                              .time_scale = config.train.time_scale};
  const ModelConfig& mc = model.config();

  std::vector<std::vector<Track>> td(train.videos.size());
  if (config.train.track_pool != TrackPool::kGroundTruth) {
    td = TrackVideos(train, config.tracker);
    if (config.train.track_pool == TrackPool::kNegatives) {
      for (size_t v = 0; v < td.size(); ++v) {
        if (train.videos[v].positive()) td[v].clear();
      }
    }
  }
  std::vector<Track> gt;
  gt.reserve(train.videos.size());
  for (const auto& v : train.videos) gt.push_back(v.GroundTruthTrack());

  TrainOutcome out{model, {}, 0};
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<size_t> order(train.videos.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    const size_t batch = config.train.batch;
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t end = std::min(order.size(), start + batch);
      const double seed = 1.0 / static_cast<double>(end - start);
      for (size_t k = start; k < end; ++k) {
        const Scenario& v = train.videos[order[k]];
        const Track& track = SelectTrainingTrack(gt[order[k]], td[order[k]], rng);
        const auto frames =
            v.FramesForTrack(track, config.tracker.self_overlap_iou);
        const auto targets = v.TargetsForTrack(track);
        Tape tape;
        const auto nodes = model.ForwardVideo(tape, frames);
        const auto loss =
            TotalLoss(tape, nodes, frames, targets, mc.lambdas, mc.K, loss_opts);
        const double value = loss.total.scalar();
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                              ", video " + v.id);
        }
        epoch_loss += value;
        tape.Backward(loss.total, seed);
      }
      adam.Step(model.params());
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / train.videos.size();
    const ValResult vr = Validate(model, val, loss_opts, config.eval.fused);
    entry.val_loss = vr.loss;
    entry.val_map = vr.map;
    out.log.push_back(entry);
    if (progress) {
      *progress << "epoch " << epoch << "  train_loss " << Fixed(entry.train_loss, 4)
                << "  val_loss " << Fixed(entry.val_loss, 4) << "  val_map "
                << Fixed(entry.val_map, 4) << std::endl;
    }

    const double monitored = std::isnan(vr.loss) ? entry.train_loss : vr.loss;
    if (monitored < best) {
      best = monitored;
      out.model = model;
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.train.patience) {
      break;
    }
  }
  return out;
}

void WriteTrainLog(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch,train_loss,val_loss,val_map\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << FormatDouble(e.train_loss) << ','
        << FormatDouble(e.val_loss) << ',' << FormatDouble(e.val_map) << '\n';
  }
}

std::vector<std::vector<Track>> TrackVideos(const Dataset& data,
                                            const TrackerOptions& options) {
  std::vector<std::vector<Track>> out;
  out.reserve(data.videos.size());
  for (const auto& v : data.videos) out.push_back(RunTracker(v.proposals, options));
  return out;
}

VideoResult AssessVideo(RiskModel& model, const Scenario& video,
                        std::span<const Track> tracks, bool fused,
                        double self_overlap_iou) {
  VideoResult r;
  r.id = video.id;
  r.positive = video.positive();
  r.accident_frame = video.targets.accident_frame;
  r.num_tracks = tracks.size();
  const size_t n = video.num_frames();
  r.frame_scores.assign(n, 0.0);
  r.best_track.assign(n, -1);
  r.region_scores.assign(n, {});
  for (size_t k = 0; k < tracks.size(); ++k) {
    std::vector<std::vector<size_t>> kept;
    const auto frames = video.FramesForTrack(tracks[k], self_overlap_iou, &kept);
    if (frames.empty()) continue;
    const auto preds = model.Predict(frames);
    for (size_t j = 0; j < preds.size(); ++j) {
      const size_t t = tracks[k].start_frame + j;
      const double risk = RiskOf(preds[j], fused);
      if (r.best_track[t] < 0 || risk > r.frame_scores[t]) {
        r.frame_scores[t] = risk;
        r.best_track[t] = static_cast<int>(k);
        // Regions left out as the tracked object itself score zero.
        const auto& s = fused ? preds[j].scores_fused : preds[j].scores;
        r.region_scores[t].assign(video.region_boxes[t].size(), 0.0);
        for (size_t i = 0; i < kept[j].size(); ++i) {
          r.region_scores[t][kept[j][i]] = s[i];
        }
      }
    }
  }
  return r;
}

VariantReport SummarizeResults(const std::string& variant, const Dataset& data,
                               std::span<const VideoResult> results,
                               const EvalConfig& eval) {
  VariantReport rep;
  rep.variant = variant;
  std::vector<VideoScores> scores;
  std::vector<std::vector<RegionFrame>> region_videos;
  for (size_t v = 0; v < results.size(); ++v) {
    const VideoResult& r = results[v];
    scores.push_back({r.frame_scores, r.positive, r.accident_frame});
    if (!r.positive) continue;
    const Scenario& video = data.videos[v];
    std::vector<RegionFrame> frames;
    for (size_t t = 0; t < video.num_frames(); ++t) {
      RegionFrame f;
      f.ground_truth = video.targets.risky_boxes[t];
      const auto& boxes = video.region_boxes[t];
      for (size_t i = 0; i < r.region_scores[t].size(); ++i) {
        f.detections.push_back({boxes[i], r.region_scores[t][i]});
      }
      frames.push_back(std::move(f));
    }
    region_videos.push_back(std::move(frames));
  }
  const auto ant = EvaluateAnticipation(scores);
  rep.anticipation_map = ant.average_precision;
  rep.atta_frames = ant.atta_frames;
  rep.atta_seconds = ant.atta_frames / eval.fps;
  rep.curve = ant.curve;

  std::vector<RegionFrame> pooled;
  for (const auto& v : region_videos) pooled.insert(pooled.end(), v.begin(), v.end());
  rep.region_map = eval.per_video_region
                       ? PerVideoRegionAveragePrecision(region_videos)
                       : RegionAveragePrecision(pooled);
  rep.oracle_region_map = OracleRegionAveragePrecision(pooled);
  return rep;
}

nlohmann::json ReportJson(std::span<const VariantReport> reports,
                          const RunConfig& config, size_t num_videos) {
  if (reports.empty()) throw ContractViolation("report without variants");
  nlohmann::json j = MetricsJson(reports.front());
  j["variant"] = reports.front().variant;
  j["fused"] = config.eval.fused;
  j["fps"] = config.eval.fps;
  j["videos"] = num_videos;
  j["region_averaging"] = config.eval.per_video_region ? "per_video" : "pooled";
  nlohmann::json variants = nlohmann::json::object();
  for (const auto& r : reports) variants[r.variant] = MetricsJson(r);
  j["variants"] = std::move(variants);
  return j;
}

std::string FormatReportTable(std::span<const VariantReport> reports) {
  std::ostringstream os;
  os << "variant  anticipation_mAP  ATTA(frames)  ATTA(s)  region_mAP  oracle_region_mAP\n";
  for (const auto& r : reports) {
    std::string name = r.variant;
    name.resize(std::max<size_t>(name.size(), 7), ' ');
    os << name << "  " << Fixed(r.anticipation_map, 4) << "            "
       << Fixed(r.atta_frames, 3) << "         " << Fixed(r.atta_seconds, 3)
       << "    " << Fixed(r.region_map, 4) << "      "
       << (r.oracle_region_map ? Fixed(*r.oracle_region_map, 4) : "n/a") << '\n';
  }
  return os.str();
}

void WriteCurveCsv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "threshold,precision,recall,mean_tta\n";
  for (const auto& p : curve) {
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.precision) << ','
        << FormatDouble(p.recall) << ',' << FormatDouble(p.mean_tta) << '\n';
  }
}

void WriteVideoCsv(std::ostream& out, const VideoResult& r) {
  size_t regions = 0;
  for (const auto& s : r.region_scores) regions = std::max(regions, s.size());
  out << "frame,track,risk";
  for (size_t i = 0; i < regions; ++i) out << ",region_" << i;
  out << '\n';
  for (size_t t = 0; t < r.frame_scores.size(); ++t) {
    out << t << ',' << r.best_track[t] << ',' << FormatDouble(r.frame_scores[t]);
    for (size_t i = 0; i < regions; ++i) {
      out << ',';
      if (i < r.region_scores[t].size()) out << FormatDouble(r.region_scores[t][i]);
    }
    out << '\n';
  }
}

}  // namespace riskrnn::cli
