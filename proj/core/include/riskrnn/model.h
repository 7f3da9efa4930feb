#ifndef RISKRNN_MODEL_H_
#define RISKRNN_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskrnn/geometry.h"
#include "riskrnn/nn.h"
#include "riskrnn/params.h"
#include "riskrnn/serialization.h"
#include "riskrnn/tape.h"

namespace riskrnn {

// Ablations: R = region scoring, A = anticipation, L = recurrent memory,
// I = imagination.
enum class Variant { kRA, kRAI, kLRA, kLRAI };

std::string VariantName(Variant v);
// Accepts "RA", "RAI", "L-RA", "L-RAI". Throws ConfigError otherwise.
Variant ParseVariant(const std::string& name);

struct ModelConfig {
  int d_agent = 32;
  int d_region = 32;
  int d_u = 16;
  int h_agent = 64;
  int h_aa = 64;
  int K = 5;  // imagination horizon, frames
  int I = 1;  // imagination steps
  std::vector<double> lambdas = {0.6, 0.4};
  bool use_memory = true;
  bool use_imagination = true;

  // Throws ConfigError.
  void Validate() const;
  Variant variant() const;

  // Width of the agent code: RNN_A hidden state (memory on) or raw agent
  // feature (memory off).
  int agent_code_dim() const { return use_memory ? h_agent : d_agent; }
  // Width of the holistic vector [agent code ; pooled region feature].
  int holistic_dim() const { return agent_code_dim() + d_region; }
  // Width of the vector fed to W_y and W_c: RNN_AA output (memory on) or
  // the holistic vector.
  int readout_dim() const { return use_memory ? h_aa : holistic_dim(); }
};

// Copies `base` and sets the two flags. Turning imagination off sets I = 0
// and lambdas = {1}; turning it on from I = 0 restores I = 1 with
// lambdas = {0.6, 0.4}.
ModelConfig ConfigForVariant(Variant v, ModelConfig base = {});

ConfigEntries ModelConfigToEntries(const ModelConfig& config);
// Unknown or missing keys throw ConfigError.
ModelConfig ModelConfigFromEntries(const ConfigEntries& entries);

// One observed frame: agent appearance and box, plus N candidate regions.
struct FrameInput {
  std::vector<double> agent_feat;
  Box agent_box;
  std::vector<std::vector<double>> region_feats;
  std::vector<Box> region_boxes;

  size_t num_regions() const { return region_boxes.size(); }
};

struct ImaginedPrediction {
  Box box;
  std::array<double, 2> y{};
  std::vector<double> scores;
};

struct FramePrediction {
  std::array<double, 2> y{};  // (non-accident, accident)
  std::vector<double> scores;
  std::vector<ImaginedPrediction> imagined;  // n = 1..I
  std::array<double, 2> y_fused{};
  std::vector<double> scores_fused;
  BoxTransform transform;  // first imagination step; zero when disabled
};

// Tape handles for one frame. `imagined_*` have I entries; `transform` is
// unbound when imagination is off.
struct FrameNodes {
  Var y;       // size 2
  Var scores;        // size N
  Var score_logits;  // pre-sigmoid scores, size N
  Var pooled;        // size d_region
  std::vector<Var> imagined_y;
  std::vector<Var> imagined_scores;
  std::vector<Var> imagined_score_logits;
  std::vector<Var> imagined_boxes;
  Var transform;
};

struct RegionScoring {
  Var scores;                        // size N
  Var logits;                        // pre-sigmoid scores, size N
  std::vector<Var> region_weights;   // per-region weight vector, size d_region
};

struct AnticipationOutput {
  std::optional<LstmState> state;  // present when memory is on
  Var readout;                     // RNN_AA output, or holistic vector without memory
  Var y;                           // size 2
};

struct ImaginedLocation {
  Var transform;  // c, size 4
  Var box;        // imagined agent box, size 4
};

struct ImaginedOutcome {
  ImaginedLocation location;
  Var y;
  Var scores;
  Var score_logits;
  AnticipationOutput anticipation;
};

// Recurrent state carried between frames.
struct RecurrentState {
  std::optional<LstmState> agent;
  std::optional<LstmState> anticipation;
};

class RiskModel {
 public:
  // Validates config and that `params` holds exactly the expected matrices.
  RiskModel(ModelConfig config, ParameterStore params);

  // Copies rebind the cached parameter pointers to the new store.
  RiskModel(const RiskModel& other);
  RiskModel& operator=(const RiskModel& other);
  RiskModel(RiskModel&& other) noexcept;
  RiskModel& operator=(RiskModel&& other) noexcept;

  static RiskModel Initialize(const ModelConfig& config, uint64_t seed);
  static std::vector<ParamSpec> ParamSpecs(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Each region is scored as sigmoid(w . feature), where the weight vector w
  // comes from relu(W_f [code ; relu(W_u rel + b_u)] + b_f) and rel is the
  // region's configuration relative to `agent_box`.
  RegionScoring ScoreRegions(Var agent_code, const FrameInput& frame,
                             std::span<const Var> region_feats,
                             Var agent_box);
  // Score-weighted sum of region features.
  Var PoolRegions(Var scores, std::span<const Var> region_feats);
  // One RNN_A step on [agent feature ; agent box].
  LstmState AgentRnnStep(const LstmState& state, Var agent_feat, Var agent_box);
  // Concatenates code and pooled feature, steps RNN_AA when memory is on and
  // reads out softmax(W_y .) from its output (or the concatenation).
  AnticipationOutput AnticipateStep(const std::optional<LstmState>& state,
                                    Var agent_code, Var pooled);
  // Predicts a box transform W_c readout and applies it to `box`.
  ImaginedLocation ImagineLocation(Var readout, Var box);
  // Re-scores the frame's regions from an imagined agent box. `state` is the
  // RNN_AA state the imagined step starts from; it is not modified.
  ImaginedOutcome ImaginedReassessment(const std::optional<LstmState>& state,
                                       Var agent_code, Var readout, Var box,
                                       const FrameInput& frame,
                                       std::span<const Var> region_feats);

  RecurrentState InitialState(Tape& tape) const;
  // Processes one frame and advances `state`.
  FrameNodes ForwardFrame(Tape& tape, const FrameInput& frame,
                          RecurrentState& state);
  // Throws ContractViolation on an empty video or mismatched dims.
  std::vector<FrameNodes> ForwardVideo(Tape& tape,
                                       std::span<const FrameInput> video);

  // Forward pass on a private tape, returning plain values with fused
  // outputs.
  std::vector<FramePrediction> Predict(std::span<const FrameInput> video);

  void Save(const std::string& path) const;
  static RiskModel Load(const std::string& path);

 private:
  void BindParams();
  void CheckFrame(const FrameInput& frame) const;

  ModelConfig config_;
  ParameterStore params_;
  ParamMatrix* w_u_ = nullptr;
  ParamMatrix* b_u_ = nullptr;
  ParamMatrix* w_f_ = nullptr;
  ParamMatrix* b_f_ = nullptr;
  ParamMatrix* w_y_ = nullptr;
  ParamMatrix* w_c_ = nullptr;
  std::optional<LstmBlock> rnn_a_;
  std::optional<LstmBlock> rnn_aa_;

};

// sum_n lambdas[n] * ys[n], with ys[0] the observed prediction.
std::array<double, 2> FuseAnticipation(
    std::span<const std::array<double, 2>> ys, std::span<const double> lambdas);
std::vector<double> FuseScores(std::span<const std::vector<double>> scores,
                               std::span<const double> lambdas);

// Extracts plain values from tape nodes and applies fusion.
FramePrediction ToPrediction(const FrameNodes& nodes,
                             std::span<const double> lambdas);

}  // namespace riskrnn

#endif  // RISKRNN_MODEL_H_
