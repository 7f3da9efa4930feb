#include "riskrnn_cli/commands.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <utility>

#include "riskrnn/dataset_io.h"
#include "riskrnn/errors.h"
#include "riskrnn/eval.h"
#include "riskrnn_cli/pipeline.h"
#include "riskrnn_cli/run_config.h"

namespace riskrnn::cli {
namespace {

namespace fs = std::filesystem;
using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Options {
  std::string config;
  std::string seed;
  std::string variant;
  std::string out;
  std::string data;
  std::vector<std::string> models;
  std::string split = "test";
  std::string video;
};

// Pulls `--section.key value` pairs out of `args`.
Overrides ExtractOverrides(std::vector<std::string>& args) {
  Overrides found;
  std::vector<std::string> rest;
  for (size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    const bool dotted = a.rfind("--", 0) == 0 &&
                        a.find('.') != std::string::npos &&
                        a.find('.') < a.find('=');
    if (!dotted) {
      rest.push_back(a);
      continue;
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      found.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else if (i + 1 < args.size()) {
      found.emplace_back(a.substr(2), args[++i]);
    } else {
      throw ConfigError("missing value for override " + a);
    }
  }
  args = std::move(rest);
  return found;
}

RunConfig BuildConfig(const Options& opt, Overrides overrides) {
  if (!opt.seed.empty()) {
    overrides.emplace_back("scenario.seed", opt.seed);
    overrides.emplace_back("train.seed", opt.seed);
  }
  if (!opt.variant.empty()) overrides.emplace_back("model.variant", opt.variant);
  return LoadRunConfig(opt.config, overrides);
}

std::string SplitPath(const std::string& dir, const std::string& split) {
  return (fs::path(dir) / (split + ".jsonl")).string();
}

void EnsureParent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream OpenOut(const fs::path& p) {
  EnsureParent(p);
  std::ofstream f(p);
  if (!f) throw FormatError("cannot open '" + p.string() + "' for writing");
  return f;
}

int CmdGenerate(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const std::string dir = opt.out.empty() ? cfg.paths.data_dir : opt.out;
  fs::create_directories(dir);
  const std::pair<const char*, int> splits[] = {
      {"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  for (const auto& [name, count] : splits) {
    Dataset d;
    d.split = name;
    d.scenario = cfg.scenario;
    d.videos = GenerateSplit(cfg.scenario, name, count);
    SaveDataset(SplitPath(dir, name), d);
    int pos = 0;
    for (const auto& v : d.videos) pos += v.positive() ? 1 : 0;
    out << name << ": " << count << " videos (" << pos << " positive, "
        << count - pos << " negative) -> " << SplitPath(dir, name) << '\n';
  }
  return kExitOk;
}

int CmdTrain(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const std::string dir = opt.data.empty() ? cfg.paths.data_dir : opt.data;
  const std::string model_path = opt.out.empty() ? cfg.paths.model : opt.out;
  const Dataset train = LoadDataset(SplitPath(dir, "train"));
  Dataset val;
  if (fs::exists(SplitPath(dir, "val"))) val = LoadDataset(SplitPath(dir, "val"));
  out << "training " << VariantName(cfg.model.variant()) << " on "
      << train.videos.size() << " videos (" << val.videos.size()
      << " validation)\n";
  const TrainOutcome result = TrainModel(cfg, train, val, &out);
  EnsureParent(model_path);
  result.model.Save(model_path);
  auto log = OpenOut(model_path + ".log.csv");
  WriteTrainLog(log, result.log);
  out << "best epoch " << result.best_epoch << "; model -> " << model_path
      << "; log -> " << model_path << ".log.csv\n";
  return kExitOk;
}

void WriteRiskMaps(const fs::path& dir, const Scenario& video,
                   const VideoResult& r, const EvalConfig& eval) {
  fs::create_directories(dir);
  for (size_t t = 0; t < r.region_scores.size(); ++t) {
    const auto& scores = r.region_scores[t];
    const auto& boxes = video.region_boxes[t];
    const RiskMap map = RasterizeRiskMap(
        std::span<const Box>(boxes.data(), scores.size()), scores,
        eval.riskmap_width, eval.riskmap_height);
    auto f = OpenOut(dir / (video.id + "_frame" + std::to_string(t) + ".pgm"));
    WritePgm(f, map);
  }
}

int CmdEval(const RunConfig& cfg, const Options& opt, std::ostream& out,
            std::ostream& err) {
  const std::string dir = opt.data.empty() ? cfg.paths.data_dir : opt.data;
  const fs::path out_dir = opt.out.empty() ? cfg.paths.out_dir : opt.out;
  std::vector<std::string> models = opt.models;
  if (models.empty()) models.push_back(cfg.paths.model);

  const Dataset test = LoadDataset(SplitPath(dir, opt.split));
  const auto tracks = TrackVideos(test, cfg.tracker);
  std::vector<VariantReport> reports;
  std::map<std::string, int> seen;
  for (const auto& path : models) {
    RiskModel model = RiskModel::Load(path);
    CheckDimensions(model.config(), test);
    std::string name = VariantName(model.config().variant());
    if (++seen[name] > 1) name += "#" + std::to_string(seen[name]);
    std::vector<VideoResult> results;
    for (size_t v = 0; v < test.videos.size(); ++v) {
      results.push_back(AssessVideo(model, test.videos[v], tracks[v], cfg.eval.fused,
                                    cfg.tracker.self_overlap_iou));
      if (cfg.eval.riskmaps) {
        WriteRiskMaps(out_dir / "riskmaps" / name, test.videos[v], results.back(),
                      cfg.eval);
      }
    }
    reports.push_back(SummarizeResults(name, test, results, cfg.eval));
    if (!reports.back().oracle_region_map) {
      err << "warning: " << name
          << ": no candidate region overlaps ground truth; oracle region mAP "
             "reported as 0\n";
    }
    auto curve = OpenOut(out_dir / ("curve_" + name + ".csv"));
    WriteCurveCsv(curve, reports.back().curve);
  }

  auto report = OpenOut(out_dir / "report.json");
  report << ReportJson(reports, cfg, test.videos.size()).dump(2) << '\n';
  out << FormatReportTable(reports);
  out << "report -> " << (out_dir / "report.json").string() << '\n';

  const VariantReport* full = nullptr;
  const VariantReport* base = nullptr;
  for (const auto& r : reports) {
    if (r.variant == "L-RAI" && !full) full = &r;
    if (r.variant == "RA" && !base) base = &r;
  }
  if (full && base) {
    if (full->anticipation_map < base->anticipation_map) {
      err << "warning: L-RAI anticipation mAP is below RA\n";
    }
    if (full->region_map < base->region_map) {
      err << "warning: L-RAI region mAP is below RA\n";
    }
  }
  return kExitOk;
}

const Scenario& FindVideo(const Dataset& d, const std::string& id) {
  for (const auto& v : d.videos) {
    if (v.id == id) return v;
  }
  throw ConfigError("video '" + id + "' not found in split '" + d.split + "'");
}

int CmdInfer(const RunConfig& cfg, const Options& opt, std::ostream& out,
             bool riskmap) {
  const std::string dir = opt.data.empty() ? cfg.paths.data_dir : opt.data;
  const std::string model_path =
      opt.models.empty() ? cfg.paths.model : opt.models.front();
  const Dataset data = LoadDataset(SplitPath(dir, opt.split));
  if (data.videos.empty()) throw ConfigError("split '" + opt.split + "' is empty");
  const Scenario& video =
      opt.video.empty() ? data.videos.front() : FindVideo(data, opt.video);
  RiskModel model = RiskModel::Load(model_path);
  CheckDimensions(model.config(), data);
  const auto tracks = RunTracker(video.proposals, cfg.tracker);
  const VideoResult r = AssessVideo(model, video, tracks, cfg.eval.fused,
                                      cfg.tracker.self_overlap_iou);

  if (riskmap) {
    const fs::path dir_out = opt.out.empty() ? fs::path(cfg.paths.out_dir) / "riskmaps"
                                             : fs::path(opt.out);
    WriteRiskMaps(dir_out, video, r, cfg.eval);
    out << "wrote " << r.region_scores.size() << " risk maps for " << video.id
        << " -> " << dir_out.string() << '\n';
    return kExitOk;
  }
  if (opt.out.empty()) {
    WriteVideoCsv(out, r);
  } else {
    auto f = OpenOut(opt.out);
    WriteVideoCsv(f, r);
  }
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& raw_args, std::ostream& out,
           std::ostream& err) {
  std::vector<std::string> args = raw_args;
  Overrides overrides;
  try {
    overrides = ExtractOverrides(args);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  CLI::App app{"Agent-centric risk assessment: generate, train, eval, infer"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", opt.config, "INI config file");
    c->add_option("--seed", opt.seed, "Seed for scenario generation and training");
  };
  auto* gen = app.add_subcommand("generate", "Write train/val/test splits");
  add_common(gen);
  gen->add_option("--out", opt.out, "Output directory (default paths.data_dir)");

  auto* train = app.add_subcommand("train", "Train one model variant");
  add_common(train);
  train->add_option("--variant", opt.variant, "RA, RAI, L-RA or L-RAI");
  train->add_option("--data", opt.data, "Dataset directory");
  train->add_option("--out", opt.out, "Model file (default paths.model)");

  auto* eval = app.add_subcommand("eval", "Evaluate models on a split");
  add_common(eval);
  eval->add_option("--model", opt.models, "Model file; repeat for several");
  eval->add_option("--data", opt.data, "Dataset directory");
  eval->add_option("--split", opt.split, "Split name (default test)");
  eval->add_option("--out", opt.out, "Output directory (default paths.out_dir)");

  CLI::App* per_video[2];
  per_video[0] = app.add_subcommand("infer", "Per-frame outputs for one video as CSV");
  per_video[1] = app.add_subcommand("riskmap", "Per-frame PGM risk maps for one video");
  for (auto* c : per_video) {
    add_common(c);
    c->add_option("--model", opt.models, "Model file");
    c->add_option("--data", opt.data, "Dataset directory");
    c->add_option("--split", opt.split, "Split name (default test)");
    c->add_option("--video", opt.video, "Video id (default: first video)");
    c->add_option("--out", opt.out, "Output file (infer) or directory (riskmap)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    const RunConfig cfg = BuildConfig(opt, overrides);
    if (gen->parsed()) return CmdGenerate(cfg, opt, out);
    if (train->parsed()) return CmdTrain(cfg, opt, out);
    if (eval->parsed()) return CmdEval(cfg, opt, out, err);
    if (per_video[0]->parsed()) return CmdInfer(cfg, opt, out, false);
    return CmdInfer(cfg, opt, out, true);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace riskrnn::cli
