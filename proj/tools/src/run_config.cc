#include "riskrnn_cli/run_config.h"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "riskrnn/errors.h"

namespace riskrnn::cli {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value,
                           const char* want) {
  throw ConfigError("invalid value '" + value + "' for " + key + " (expected " +
                    want + ")");
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& raw, const char* want) {
  const std::string v = Trim(raw);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    BadValue(key, raw, want);
  }
  return out;
}

int ParseInt(const std::string& k, const std::string& v) {
  return ParseNumber<int>(k, v, "an integer");
}
uint64_t ParseSeed(const std::string& k, const std::string& v) {
  return ParseNumber<uint64_t>(k, v, "a non-negative integer");
}
double ParseDouble(const std::string& k, const std::string& v) {
  return ParseNumber<double>(k, v, "a number");
}
bool ParseBool(const std::string& k, const std::string& raw) {
  const std::string v = Trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  BadValue(k, raw, "true or false");
}

using Setter = std::function<void(RunConfig&, const std::string& key,
                                  const std::string& value)>;

const std::vector<std::pair<std::string, Setter>>& Setters() {
  static const auto* table = new std::vector<std::pair<std::string, Setter>>{
      {"scenario.frames_per_video",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.frames_per_video = ParseInt(k, v); }},
      {"scenario.n_regions",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.n_regions = ParseInt(k, v); }},
      {"scenario.feature_dim",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.feature_dim = ParseInt(k, v); }},
      {"scenario.n_classes",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.n_classes = ParseInt(k, v); }},
      {"scenario.noise_sigma",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.noise_sigma = ParseDouble(k, v); }},
      {"scenario.collision_iou",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.collision_iou = ParseDouble(k, v); }},
      {"scenario.proposal_jitter",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.proposal_jitter = ParseDouble(k, v); }},
      {"scenario.n_distractor_proposals",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.n_distractor_proposals = ParseInt(k, v); }},
      {"scenario.seed",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.seed = ParseSeed(k, v); }},
      {"scenario.embedding_seed",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.embedding_seed = ParseSeed(k, v); }},
      {"scenario.max_retries",
       [](RunConfig& c, auto& k, auto& v) { c.scenario.max_retries = ParseInt(k, v); }},

      {"split.train", [](RunConfig& c, auto& k, auto& v) { c.split.train = ParseInt(k, v); }},
      {"split.val", [](RunConfig& c, auto& k, auto& v) { c.split.val = ParseInt(k, v); }},
      {"split.test", [](RunConfig& c, auto& k, auto& v) { c.split.test = ParseInt(k, v); }},

      {"model.variant",
       [](RunConfig& c, auto&, auto& v) {
         c.model = ConfigForVariant(ParseVariant(Trim(v)), c.model);
       }},
      {"model.d_agent", [](RunConfig& c, auto& k, auto& v) { c.model.d_agent = ParseInt(k, v); }},
      {"model.d_region", [](RunConfig& c, auto& k, auto& v) { c.model.d_region = ParseInt(k, v); }},
      {"model.d_relation", [](RunConfig& c, auto& k, auto& v) { c.model.d_u = ParseInt(k, v); }},
      {"model.h_agent", [](RunConfig& c, auto& k, auto& v) { c.model.h_agent = ParseInt(k, v); }},
      {"model.h_anticipation",
       [](RunConfig& c, auto& k, auto& v) { c.model.h_aa = ParseInt(k, v); }},
      {"model.horizon", [](RunConfig& c, auto& k, auto& v) { c.model.K = ParseInt(k, v); }},
      {"model.imagination_steps",
       [](RunConfig& c, auto& k, auto& v) { c.model.I = ParseInt(k, v); }},
      {"model.fusion_weights",
       [](RunConfig& c, auto& k, auto& v) {
         try {
           c.model.lambdas = ParseDoubleList(v);
         } catch (const ConfigError&) {
           BadValue(k, v, "a comma-separated list of numbers");
         }
       }},

      {"train.lr", [](RunConfig& c, auto& k, auto& v) { c.train.lr = ParseDouble(k, v); }},
      {"train.batch", [](RunConfig& c, auto& k, auto& v) { c.train.batch = ParseInt(k, v); }},
      {"train.epochs", [](RunConfig& c, auto& k, auto& v) { c.train.epochs = ParseInt(k, v); }},
      {"train.patience", [](RunConfig& c, auto& k, auto& v) { c.train.patience = ParseInt(k, v); }},
      {"train.seed", [](RunConfig& c, auto& k, auto& v) { c.train.seed = ParseSeed(k, v); }},
      {"train.init_seed",
       [](RunConfig& c, auto& k, auto& v) { c.train.init_seed = ParseSeed(k, v); }},
      {"train.track_pool",
       [](RunConfig& c, auto&, auto& v) { c.train.track_pool = ParseTrackPool(v); }},
      {"train.region_iou",
       [](RunConfig& c, auto& k, auto& v) { c.train.region_iou = ParseDouble(k, v); }},
      {"train.time_scale",
       [](RunConfig& c, auto& k, auto& v) { c.train.time_scale = ParseDouble(k, v); }},

      {"tracker.top_init",
       [](RunConfig& c, auto& k, auto& v) { c.tracker.top_init = ParseInt(k, v); }},
      {"tracker.top_iou",
       [](RunConfig& c, auto& k, auto& v) { c.tracker.top_iou = ParseInt(k, v); }},
      {"tracker.overlap_iou",
       [](RunConfig& c, auto& k, auto& v) { c.tracker.overlap_iou = ParseDouble(k, v); }},
      {"tracker.self_overlap_iou",
       [](RunConfig& c, auto& k, auto& v) { c.tracker.self_overlap_iou = ParseDouble(k, v); }},

      {"eval.fused", [](RunConfig& c, auto& k, auto& v) { c.eval.fused = ParseBool(k, v); }},
      {"eval.fps", [](RunConfig& c, auto& k, auto& v) { c.eval.fps = ParseDouble(k, v); }},
      {"eval.per_video_region",
       [](RunConfig& c, auto& k, auto& v) { c.eval.per_video_region = ParseBool(k, v); }},
      {"eval.riskmaps", [](RunConfig& c, auto& k, auto& v) { c.eval.riskmaps = ParseBool(k, v); }},
      {"eval.riskmap_width",
       [](RunConfig& c, auto& k, auto& v) { c.eval.riskmap_width = ParseInt(k, v); }},
      {"eval.riskmap_height",
       [](RunConfig& c, auto& k, auto& v) { c.eval.riskmap_height = ParseInt(k, v); }},

      {"paths.data_dir", [](RunConfig& c, auto&, auto& v) { c.paths.data_dir = Trim(v); }},
      {"paths.model", [](RunConfig& c, auto&, auto& v) { c.paths.model = Trim(v); }},
      {"paths.out_dir", [](RunConfig& c, auto&, auto& v) { c.paths.out_dir = Trim(v); }},
  };
  return *table;
}

}  // namespace

std::string TrackPoolName(TrackPool pool) {
  switch (pool) {
    case TrackPool::kAll: return "all";
    case TrackPool::kNegatives: return "negatives";
    case TrackPool::kGroundTruth: return "gt";
  }
  return "all";
}

TrackPool ParseTrackPool(const std::string& name) {
  for (TrackPool p : {TrackPool::kAll, TrackPool::kNegatives, TrackPool::kGroundTruth}) {
    if (TrackPoolName(p) == name) return p;
  }
  throw ConfigError("train.track_pool must be all, negatives or gt, got '" + name + "'");
}

std::vector<double> ParseDoubleList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(ParseDouble("list", item));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void RunConfig::Validate() const {
  scenario.Validate();
  model.Validate();
  if (split.train < 0 || split.val < 0 || split.test < 0) {
    throw ConfigError("split sizes must be >= 0");
  }
  if (!(train.lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (train.batch < 1) throw ConfigError("train.batch must be >= 1");
  if (train.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (train.patience < 1) throw ConfigError("train.patience must be >= 1");
  if (!(train.time_scale > 0.0)) throw ConfigError("train.time_scale must be > 0");
  if (tracker.top_init < 1 || tracker.top_iou < 1) {
    throw ConfigError("tracker.top_init and tracker.top_iou must be >= 1");
  }
  if (!(tracker.self_overlap_iou > 0.0)) {
    throw ConfigError("tracker.self_overlap_iou must be > 0");
  }
  if (!(eval.fps > 0.0)) throw ConfigError("eval.fps must be > 0");
  if (eval.riskmap_width < 1 || eval.riskmap_height < 1) {
    throw ConfigError("eval.riskmap_width/height must be >= 1");
  }
}

void ApplySetting(RunConfig& config, const std::string& key,
                  const std::string& value) {
  for (const auto& [name, setter] : Setters()) {
    if (name == key) {
      setter(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> SettingKeys() {
  std::vector<std::string> keys;
  for (const auto& [name, setter] : Setters()) keys.push_back(name);
  return keys;
}

RunConfig LoadRunConfig(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig config;
  if (!path.empty()) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("unknown config key '" + section +
                          "' (keys must sit inside a section)");
      }
      for (const auto& [key, value] : body) {
        ApplySetting(config, section + "." + key, value.data());
      }
    }
  }
  for (const auto& [key, value] : overrides) ApplySetting(config, key, value);
  config.Validate();
  return config;
}

}  // namespace riskrnn::cli
