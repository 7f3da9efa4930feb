#include "riskrnn/model.h"

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "riskrnn/errors.h"

namespace riskrnn {

std::string VariantName(Variant v) {
  switch (v) {
    case Variant::kRA:
      return "RA";
    case Variant::kRAI:
      return "RAI";
    case Variant::kLRA:
      return "L-RA";
    case Variant::kLRAI:
      return "L-RAI";
  }
  return "?";
}

Variant ParseVariant(const std::string& name) {
  if (name == "RA") return Variant::kRA;
  if (name == "RAI") return Variant::kRAI;
  if (name == "L-RA") return Variant::kLRA;
  if (name == "L-RAI") return Variant::kLRAI;
  throw ConfigError("unknown variant '" + name +
                    "' (expected RA, RAI, L-RA or L-RAI)");
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("model.") + name + " must be >= 1");
  };
  positive(d_agent, "d_agent");
  positive(d_region, "d_region");
  positive(d_u, "d_u");
  positive(h_agent, "h_agent");
  positive(h_aa, "h_aa");
  positive(K, "K");
  if (I < 0) throw ConfigError("model.I must be >= 0");
  if (use_imagination != (I >= 1)) {
    throw ConfigError("model.I must be >= 1 exactly when imagination is on");
  }
  if (lambdas.size() != static_cast<size_t>(I) + 1) {
    throw ConfigError("model.lambdas must have I+1 = " + std::to_string(I + 1) +
                      " entries, got " + std::to_string(lambdas.size()));
  }
  double sum = 0.0;
  for (double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw ConfigError("model.lambdas must be non-negative");
    }
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("model.lambdas must sum to 1");
  }
}

Variant ModelConfig::variant() const {
  if (use_memory) return use_imagination ? Variant::kLRAI : Variant::kLRA;
  return use_imagination ? Variant::kRAI : Variant::kRA;
}

ModelConfig ConfigForVariant(Variant v, ModelConfig base) {
  base.use_memory = v == Variant::kLRA || v == Variant::kLRAI;
  base.use_imagination = v == Variant::kRAI || v == Variant::kLRAI;
  if (!base.use_imagination) {
    base.I = 0;
    base.lambdas = {1.0};
  } else if (base.I == 0) {
    base.I = 1;
    base.lambdas = {0.6, 0.4};
  }
  return base;
}

ConfigEntries ModelConfigToEntries(const ModelConfig& c) {
  std::ostringstream lam;
  for (size_t i = 0; i < c.lambdas.size(); ++i) {
    if (i) lam << ' ';
    lam << FormatDouble(c.lambdas[i]);
  }
  return {
      {"variant", VariantName(c.variant())},
      {"d_agent", std::to_string(c.d_agent)},
      {"d_region", std::to_string(c.d_region)},
      {"d_u", std::to_string(c.d_u)},
      {"h_agent", std::to_string(c.h_agent)},
      {"h_aa", std::to_string(c.h_aa)},
      {"K", std::to_string(c.K)},
      {"I", std::to_string(c.I)},
      {"lambdas", lam.str()},
      {"use_memory", c.use_memory ? "true" : "false"},
      {"use_imagination", c.use_imagination ? "true" : "false"},
  };
}

namespace {

int ParseInt(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("model config '" + key + "': not an integer: " + v);
  }
  return static_cast<int>(x);
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("model config '" + key + "': not a boolean: " + v);
}

}  // namespace

ModelConfig ModelConfigFromEntries(const ConfigEntries& entries) {
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : entries) kv[k] = v;
  ModelConfig c;
  auto take = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(std::string("model config missing '") + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  c.d_agent = ParseInt("d_agent", take("d_agent"));
  c.d_region = ParseInt("d_region", take("d_region"));
  c.d_u = ParseInt("d_u", take("d_u"));
  c.h_agent = ParseInt("h_agent", take("h_agent"));
  c.h_aa = ParseInt("h_aa", take("h_aa"));
  c.K = ParseInt("K", take("K"));
  c.I = ParseInt("I", take("I"));
  c.use_memory = ParseBool("use_memory", take("use_memory"));
  c.use_imagination = ParseBool("use_imagination", take("use_imagination"));
  {
    std::istringstream ss(take("lambdas"));
    c.lambdas.clear();
    std::string tok;
    while (ss >> tok) c.lambdas.push_back(std::strtod(tok.c_str(), nullptr));
  }
  if (auto it = kv.find("variant"); it != kv.end()) {
    if (ParseVariant(it->second) != c.variant()) {
      throw ConfigError("model config 'variant' disagrees with its flags");
    }
    kv.erase(it);
  }
  if (!kv.empty()) {
    throw ConfigError("unknown model config key '" + kv.begin()->first + "'");
  }
  c.Validate();
  return c;
}

// ---- RiskModel ----------------------------------------------------------------

std::vector<ParamSpec> RiskModel::ParamSpecs(const ModelConfig& c) {
  std::vector<ParamSpec> specs = {
      {"W_u", c.d_u, RelativeConfig::kSize, ParamInit::kGlorotUniform},
      {"b_u", c.d_u, 1, ParamInit::kGlorotUniform},
      {"W_f", c.d_region, c.agent_code_dim() + c.d_u,
       ParamInit::kGlorotUniform},
      {"b_f", c.d_region, 1, ParamInit::kGlorotUniform},
      {"W_y", 2, c.readout_dim(), ParamInit::kGlorotUniform},
  };
  if (c.use_imagination) {
    specs.push_back({"W_c", 4, c.readout_dim(), ParamInit::kGlorotUniform});
  }
  if (c.use_memory) {
    for (const auto& s : LstmParamSpecs("rnn_a", c.d_agent + 4, c.h_agent)) {
      specs.push_back(s);
    }
    for (const auto& s :
         LstmParamSpecs("rnn_aa", c.holistic_dim(), c.h_aa)) {
      specs.push_back(s);
    }
  }
  return specs;
}

RiskModel::RiskModel(ModelConfig config, ParameterStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.Validate();
  const auto specs = ParamSpecs(config_);
  if (params_.matrices().size() != specs.size()) {
    throw ConfigError("parameter set does not match the " +
                      VariantName(config_.variant()) + " architecture: " +
                      std::to_string(params_.matrices().size()) +
                      " matrices, expected " + std::to_string(specs.size()));
  }
  for (const auto& s : specs) {
    const ParamMatrix* m = params_.Find(s.name);
    if (!m) throw ConfigError("missing parameter '" + s.name + "'");
    if (m->rows != s.rows || m->cols != s.cols) {
      throw ConfigError("parameter '" + s.name + "' is " +
                        std::to_string(m->rows) + "x" +
                        std::to_string(m->cols) + ", expected " +
                        std::to_string(s.rows) + "x" + std::to_string(s.cols));
    }
  }
  BindParams();
}

RiskModel::RiskModel(const RiskModel& other)
    : config_(other.config_), params_(other.params_) {
  BindParams();
}

RiskModel& RiskModel::operator=(const RiskModel& other) {
  if (this != &other) {
    config_ = other.config_;
    params_ = other.params_;
    BindParams();
  }
  return *this;
}

RiskModel::RiskModel(RiskModel&& other) noexcept
    : config_(std::move(other.config_)), params_(std::move(other.params_)) {
  BindParams();
}

RiskModel& RiskModel::operator=(RiskModel&& other) noexcept {
  config_ = std::move(other.config_);
  params_ = std::move(other.params_);
  BindParams();
  return *this;
}

void RiskModel::BindParams() {
  w_u_ = params_.Find("W_u");
  b_u_ = params_.Find("b_u");
  w_f_ = params_.Find("W_f");
  b_f_ = params_.Find("b_f");
  w_y_ = params_.Find("W_y");
  w_c_ = params_.Find("W_c");
  rnn_a_.reset();
  rnn_aa_.reset();
  if (params_.Contains("rnn_a.W")) rnn_a_ = GetLstmBlock(params_, "rnn_a");
  if (params_.Contains("rnn_aa.W")) rnn_aa_ = GetLstmBlock(params_, "rnn_aa");
}

RiskModel RiskModel::Initialize(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  const auto specs = ParamSpecs(config);
  return RiskModel(config, InitParams(specs, seed));
}

void RiskModel::CheckFrame(const FrameInput& frame) const {
  if (static_cast<int>(frame.agent_feat.size()) != config_.d_agent) {
    throw ContractViolation("agent feature has " +
                            std::to_string(frame.agent_feat.size()) +
                            " dims, model expects " +
                            std::to_string(config_.d_agent));
  }
  if (frame.region_boxes.empty()) {
    throw ContractViolation("frame has no candidate regions");
  }
  if (frame.region_feats.size() != frame.region_boxes.size()) {
    throw ContractViolation("region feature/box count mismatch");
  }
  for (const auto& f : frame.region_feats) {
    if (static_cast<int>(f.size()) != config_.d_region) {
      throw ContractViolation("region feature has " + std::to_string(f.size()) +
                              " dims, model expects " +
                              std::to_string(config_.d_region));
    }
  }
  if (!frame.agent_box.IsValid()) throw ContractViolation("invalid agent box");
}

RegionScoring RiskModel::ScoreRegions(Var agent_code, const FrameInput& frame,
                                      std::span<const Var> region_feats,
                                      Var agent_box) {
  if (static_cast<int>(agent_code.size()) != config_.agent_code_dim()) {
    throw ContractViolation("agent code has " +
                            std::to_string(agent_code.size()) +
                            " dims, expected " +
                            std::to_string(config_.agent_code_dim()));
  }
  if (region_feats.size() != frame.num_regions()) {
    throw ContractViolation("region feature node count mismatch");
  }
  RegionScoring out;
  std::vector<Var> logits;
  logits.reserve(frame.num_regions());
  for (size_t i = 0; i < frame.num_regions(); ++i) {
    const Var u = RelativeConfigOf(agent_box, frame.region_boxes[i]);
    const Var embedded = Relu(Dense(*w_u_, u, b_u_));
    const Var parts[2] = {agent_code, embedded};
    const Var w_r = Relu(Dense(*w_f_, Concat(parts), b_f_));
    logits.push_back(Dot(w_r, region_feats[i]));
    out.region_weights.push_back(w_r);
  }
  out.logits = Concat(logits);
  out.scores = Sigmoid(out.logits);
  return out;
}

Var RiskModel::PoolRegions(Var scores, std::span<const Var> region_feats) {
  if (scores.size() != region_feats.size()) {
    throw ContractViolation("score count does not match region count");
  }
  std::vector<Var> weighted;
  weighted.reserve(region_feats.size());
  for (size_t i = 0; i < region_feats.size(); ++i) {
    weighted.push_back(ScaleBy(region_feats[i], Element(scores, i)));
  }
  return AddN(weighted);
}

LstmState RiskModel::AgentRnnStep(const LstmState& state, Var agent_feat,
                                  Var agent_box) {
  if (!rnn_a_) throw ContractViolation("AgentRnnStep requires memory");
  const Var parts[2] = {agent_feat, agent_box};
  return LstmStep(*rnn_a_, Concat(parts), state);
}

AnticipationOutput RiskModel::AnticipateStep(
    const std::optional<LstmState>& state, Var agent_code, Var pooled) {
  const Var parts[2] = {agent_code, pooled};
  const Var q = Concat(parts);
  AnticipationOutput out;
  if (config_.use_memory) {
    if (!state) throw ContractViolation("RNN_AA state missing");
    out.state = LstmStep(*rnn_aa_, q, *state);
    out.readout = out.state->hidden;
  } else {
    out.readout = q;
  }
  out.y = Softmax(Dense(*w_y_, out.readout));
  return out;
}

ImaginedLocation RiskModel::ImagineLocation(Var readout, Var box) {
  if (!w_c_) throw ContractViolation("ImagineLocation requires imagination");
  ImaginedLocation loc;
  loc.transform = Dense(*w_c_, readout);
  loc.box = ApplyBoxTransform(box, loc.transform);
  return loc;
}

ImaginedOutcome RiskModel::ImaginedReassessment(
    const std::optional<LstmState>& state, Var agent_code, Var readout,
    Var box, const FrameInput& frame, std::span<const Var> region_feats) {
  ImaginedOutcome out;
  out.location = ImagineLocation(readout, box);
  const RegionScoring scoring =
      ScoreRegions(agent_code, frame, region_feats, out.location.box);
  out.scores = scoring.scores;
  out.score_logits = scoring.logits;
  const Var pooled = PoolRegions(scoring.scores, region_feats);
  out.anticipation = AnticipateStep(state, agent_code, pooled);
  out.y = out.anticipation.y;
  return out;
}

RecurrentState RiskModel::InitialState(Tape& tape) const {
  RecurrentState s;
  if (config_.use_memory) {
    s.agent = ZeroLstmState(tape, config_.h_agent);
    s.anticipation = ZeroLstmState(tape, config_.h_aa);
  }
  return s;
}

FrameNodes RiskModel::ForwardFrame(Tape& tape, const FrameInput& frame,
                                   RecurrentState& state) {
  CheckFrame(frame);
  const Var agent_feat = tape.Constant(frame.agent_feat);
  const Var agent_box = BoxConstant(tape, frame.agent_box);
  std::vector<Var> region_feats;
  region_feats.reserve(frame.num_regions());
  for (const auto& f : frame.region_feats) {
    region_feats.push_back(tape.Constant(f));
  }

  Var agent_code = agent_feat;
  if (config_.use_memory) {
    state.agent = AgentRnnStep(*state.agent, agent_feat, agent_box);
    agent_code = state.agent->hidden;
  }

  FrameNodes nodes;
  const RegionScoring scoring =
      ScoreRegions(agent_code, frame, region_feats, agent_box);
  nodes.scores = scoring.scores;
  nodes.score_logits = scoring.logits;
  nodes.pooled = PoolRegions(scoring.scores, region_feats);

  // Imagined steps start from the state before this frame's update.
  const std::optional<LstmState> before = state.anticipation;
  const AnticipationOutput observed =
      AnticipateStep(before, agent_code, nodes.pooled);
  nodes.y = observed.y;

  if (config_.use_imagination) {
    std::optional<LstmState> imagined_state = before;
    Var readout = observed.readout;
    Var box = agent_box;
    for (int n = 1; n <= config_.I; ++n) {
      ImaginedOutcome step = ImaginedReassessment(
          imagined_state, agent_code, readout, box, frame, region_feats);
      if (n == 1) nodes.transform = step.location.transform;
      nodes.imagined_y.push_back(step.y);
      nodes.imagined_scores.push_back(step.scores);
      nodes.imagined_score_logits.push_back(step.score_logits);
      nodes.imagined_boxes.push_back(step.location.box);
      imagined_state = step.anticipation.state;
      readout = step.anticipation.readout;
      box = step.location.box;
    }
  }

  state.anticipation = observed.state;
  return nodes;
}

std::vector<FrameNodes> RiskModel::ForwardVideo(
    Tape& tape, std::span<const FrameInput> video) {
  if (video.empty()) throw ContractViolation("ForwardVideo on an empty video");
  RecurrentState state = InitialState(tape);
  std::vector<FrameNodes> out;
  out.reserve(video.size());
  for (const auto& frame : video) out.push_back(ForwardFrame(tape, frame, state));
  return out;
}

std::vector<FramePrediction> RiskModel::Predict(
    std::span<const FrameInput> video) {
  Tape tape;
  const auto nodes = ForwardVideo(tape, video);
  std::vector<FramePrediction> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(ToPrediction(n, config_.lambdas));
  return out;
}

void RiskModel::Save(const std::string& path) const {
  SaveParameterFile(path, ModelConfigToEntries(config_), params_);
}

RiskModel RiskModel::Load(const std::string& path) {
  ParameterFile file = LoadParameterFile(path);
  ModelConfig config = ModelConfigFromEntries(file.config);
  return RiskModel(std::move(config), std::move(file.params));
}

// ---- Fusion ---------------------------------------------------------------------

std::array<double, 2> FuseAnticipation(
    std::span<const std::array<double, 2>> ys,
    std::span<const double> lambdas) {
  if (ys.size() != lambdas.size()) {
    throw ConfigError("fusion needs one lambda per prediction");
  }
  std::array<double, 2> out{0.0, 0.0};
  for (size_t n = 0; n < ys.size(); ++n) {
    out[0] += lambdas[n] * ys[n][0];
    out[1] += lambdas[n] * ys[n][1];
  }
  return out;
}

std::vector<double> FuseScores(std::span<const std::vector<double>> scores,
                               std::span<const double> lambdas) {
  if (scores.size() != lambdas.size()) {
    throw ConfigError("fusion needs one lambda per prediction");
  }
  std::vector<double> out(scores.empty() ? 0 : scores[0].size(), 0.0);
  for (size_t n = 0; n < scores.size(); ++n) {
    if (scores[n].size() != out.size()) {
      throw ContractViolation("fusion over differing region counts");
    }
    for (size_t i = 0; i < out.size(); ++i) out[i] += lambdas[n] * scores[n][i];
  }
  return out;
}

FramePrediction ToPrediction(const FrameNodes& nodes,
                             std::span<const double> lambdas) {
  FramePrediction p;
  p.y = {nodes.y[0], nodes.y[1]};
  p.scores = nodes.scores.value();
  std::vector<std::array<double, 2>> ys = {p.y};
  std::vector<std::vector<double>> ss = {p.scores};
  for (size_t n = 0; n < nodes.imagined_y.size(); ++n) {
    ImaginedPrediction im;
    im.box = BoxValue(nodes.imagined_boxes[n]);
    im.y = {nodes.imagined_y[n][0], nodes.imagined_y[n][1]};
    im.scores = nodes.imagined_scores[n].value();
    ys.push_back(im.y);
    ss.push_back(im.scores);
    p.imagined.push_back(std::move(im));
  }
  if (nodes.transform.valid()) {
    const auto& c = nodes.transform.value();
    p.transform = {c[0], c[1], c[2], c[3]};
  }
  p.y_fused = FuseAnticipation(ys, lambdas);
  p.scores_fused = FuseScores(ss, lambdas);
  return p;
}

}  // namespace riskrnn
