#include "riskrnn/dataset_io.h"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "riskrnn/errors.h"

namespace riskrnn {
namespace {

using nlohmann::json;

json BoxJson(const Box& b) { return json::array({b.cx, b.cy, b.w, b.h}); }

Box BoxFrom(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("box must have 4 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

json ScenarioJson(const ScenarioConfig& c) {
  return {{"frames_per_video", c.frames_per_video},
          {"n_regions", c.n_regions},
          {"feature_dim", c.feature_dim},
          {"n_classes", c.n_classes},
          {"noise_sigma", c.noise_sigma},
          {"collision_iou", c.collision_iou},
          {"proposal_jitter", c.proposal_jitter},
          {"n_distractor_proposals", c.n_distractor_proposals},
          {"seed", c.seed},
          {"embedding_seed", c.embedding_seed},
          {"max_retries", c.max_retries}};
}

ScenarioConfig ScenarioFrom(const json& j) {
  ScenarioConfig c;
  c.frames_per_video = j.at("frames_per_video").get<int>();
  c.n_regions = j.at("n_regions").get<int>();
  c.feature_dim = j.at("feature_dim").get<int>();
  c.n_classes = j.at("n_classes").get<int>();
  c.noise_sigma = j.at("noise_sigma").get<double>();
  c.collision_iou = j.at("collision_iou").get<double>();
  c.proposal_jitter = j.at("proposal_jitter").get<double>();
  c.n_distractor_proposals = j.at("n_distractor_proposals").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.embedding_seed = j.at("embedding_seed").get<uint64_t>();
  c.max_retries = j.at("max_retries").get<int>();
  return c;
}

json VideoJson(const Scenario& s) {
  json frames = json::array();
  for (size_t t = 0; t < s.num_frames(); ++t) {
    json f;
    f["agent"] = {{"box", BoxJson(s.targets.agent_track[t])},
                  {"feature", s.agent_feats.at(t)}};
    json regions = json::array();
    for (size_t i = 0; i < s.region_boxes[t].size(); ++i) {
      regions.push_back({{"box", BoxJson(s.region_boxes[t][i])},
                         {"feature", s.region_feats.at(t).at(i)}});
    }
    f["regions"] = std::move(regions);
    json risky = json::array();
    if (s.positive()) {
      for (const Box& b : s.targets.risky_boxes[t]) risky.push_back(BoxJson(b));
    }
    f["risky"] = std::move(risky);
    json props = json::array();
    if (t < s.proposals.size()) {
      for (const Proposal& p : s.proposals[t]) {
        props.push_back({{"box", BoxJson(p.box)},
                         {"score", p.score},
                         {"feature", p.feature},
                         {"source", p.source}});
      }
    }
    f["proposals"] = std::move(props);
    frames.push_back(std::move(f));
  }
  return {{"id", s.id},
          {"label", s.positive() ? "positive" : "negative"},
          {"accident_frame", s.targets.accident_frame},
          {"hazard_region", s.hazard_region},
          {"region_classes", s.region_classes},
          {"frames", std::move(frames)}};
}

Scenario VideoFrom(const json& j) {
  Scenario s;
  s.id = j.at("id").get<std::string>();
  const std::string label = j.at("label").get<std::string>();
  if (label == "positive") {
    s.targets.label = VideoLabel::kPositive;
  } else if (label == "negative") {
    s.targets.label = VideoLabel::kNegative;
  } else {
    throw FormatError("unknown video label '" + label + "'");
  }
  s.targets.accident_frame = j.at("accident_frame").get<int>();
  s.hazard_region = j.at("hazard_region").get<int>();
  s.region_classes = j.at("region_classes").get<std::vector<int>>();
  for (const json& f : j.at("frames")) {
    s.targets.agent_track.push_back(BoxFrom(f.at("agent").at("box")));
    s.agent_feats.push_back(
        f.at("agent").at("feature").get<std::vector<double>>());
    std::vector<Box> boxes;
    std::vector<std::vector<double>> feats;
    for (const json& r : f.at("regions")) {
      boxes.push_back(BoxFrom(r.at("box")));
      feats.push_back(r.at("feature").get<std::vector<double>>());
    }
    s.region_boxes.push_back(std::move(boxes));
    s.region_feats.push_back(std::move(feats));
    if (s.positive()) {
      std::vector<Box> risky;
      for (const json& b : f.at("risky")) risky.push_back(BoxFrom(b));
      s.targets.risky_boxes.push_back(std::move(risky));
    }
    FrameProposals props;
    for (const json& p : f.at("proposals")) {
      props.push_back({BoxFrom(p.at("box")), p.at("score").get<double>(),
                       p.at("feature").get<std::vector<double>>(),
                       p.at("source").get<int>()});
    }
    s.proposals.push_back(std::move(props));
  }
  try {
    s.targets.Validate(s.num_frames());
  } catch (const ContractViolation& e) {
    throw FormatError("video '" + s.id + "': " + e.what());
  }
  return s;
}

}  // namespace

void WriteDataset(std::ostream& out, const Dataset& dataset) {
  json header = {{"schema", kDatasetSchema},
                 {"version", kDatasetVersion},
                 {"split", dataset.split},
                 {"count", dataset.videos.size()},
                 {"scenario", ScenarioJson(dataset.scenario)}};
  out << header.dump() << '\n';
  for (const Scenario& s : dataset.videos) out << VideoJson(s).dump() << '\n';
  if (!out) throw FormatError("failed writing dataset");
}

Dataset ReadDataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty dataset file");
  Dataset d;
  size_t count = 0;
  try {
    const json header = json::parse(line);
    if (header.value("schema", "") != kDatasetSchema) {
      throw FormatError("not a riskrnn dataset (schema mismatch)");
    }
    const int version = header.at("version").get<int>();
    if (version != kDatasetVersion) {
      throw FormatError("unsupported dataset version " + std::to_string(version));
    }
    d.split = header.at("split").get<std::string>();
    count = header.at("count").get<size_t>();
    d.scenario = ScenarioFrom(header.at("scenario"));
    size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        d.videos.push_back(VideoFrom(json::parse(line)));
      } catch (const json::exception& e) {
        throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset header: ") + e.what());
  }
  if (d.videos.size() != count) {
    throw FormatError("dataset header announces " + std::to_string(count) +
                      " videos, found " + std::to_string(d.videos.size()));
  }
  return d;
}

void SaveDataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  WriteDataset(out, dataset);
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return ReadDataset(in);
}

}  // namespace riskrnn
