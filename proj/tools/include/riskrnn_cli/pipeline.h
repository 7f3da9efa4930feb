#ifndef RISKRNN_CLI_PIPELINE_H_
#define RISKRNN_CLI_PIPELINE_H_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskrnn/dataset_io.h"
#include "riskrnn/eval.h"
#include "riskrnn/model.h"
#include "riskrnn_cli/run_config.h"

namespace riskrnn::cli {

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without a validation split
  double val_map = 0.0;   // NaN when undefined
};

struct TrainOutcome {
  RiskModel model;
  std::vector<EpochLog> log;
  int best_epoch = 0;
};

// Throws ConfigError when the model input widths differ from the dataset's
// feature width.
void CheckDimensions(const ModelConfig& model, const Dataset& data);

// Mini-batch Adam over shuffled videos with early stopping on validation
// loss; returns the best model seen. `progress` receives one line per epoch.
// Throws TrainingError on a non-finite loss.
TrainOutcome TrainModel(const RunConfig& config, const Dataset& train,
                        const Dataset& val, std::ostream* progress);

void WriteTrainLog(std::ostream& out, std::span<const EpochLog> log);

// Tracker output for every video of a split.
std::vector<std::vector<Track>> TrackVideos(const Dataset& data,
                                            const TrackerOptions& options);

// Test-time assessment of one video over candidate agent tracks.
struct VideoResult {
  std::string id;
  bool positive = false;
  int accident_frame = -1;
  size_t num_tracks = 0;
  std::vector<double> frame_scores;  // max over tracks
  std::vector<int> best_track;       // per frame; -1 when no track covers it
  // Per frame, region risk from the best track (empty when none).
  std::vector<std::vector<double>> region_scores;
};

// Regions overlapping a track above `self_overlap_iou` are treated as the
// tracked object and score zero for that track.
VideoResult AssessVideo(RiskModel& model, const Scenario& video,
                        std::span<const Track> tracks, bool fused,
                        double self_overlap_iou);

struct VariantReport {
  std::string variant;
  double anticipation_map = 0.0;
  double atta_frames = 0.0;
  double atta_seconds = 0.0;
  double region_map = 0.0;
  std::optional<double> oracle_region_map;
  std::vector<CurvePoint> curve;
};

// Anticipation metrics over all videos; region metrics over the frames of
// positive videos.
VariantReport SummarizeResults(const std::string& variant,
                               const Dataset& data,
                               std::span<const VideoResult> results,
                               const EvalConfig& eval);

nlohmann::json ReportJson(std::span<const VariantReport> reports,
                          const RunConfig& config, size_t num_videos);
std::string FormatReportTable(std::span<const VariantReport> reports);
void WriteCurveCsv(std::ostream& out, std::span<const CurvePoint> curve);

// Per-frame CSV: frame, chosen track, anticipation probability, then one
// column per region.
void WriteVideoCsv(std::ostream& out, const VideoResult& result);

}  // namespace riskrnn::cli

#endif  // RISKRNN_CLI_PIPELINE_H_
