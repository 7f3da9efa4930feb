#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "riskrnn/eval.h"
#include "riskrnn/geometry.h"
#include "riskrnn/losses.h"
#include "riskrnn/model.h"
#include "riskrnn/synthworld.h"
#include "riskrnn/tracking.h"

namespace riskrnn {
namespace {

Scenario BenchScenario() {
  ScenarioConfig cfg;
  cfg.seed = 17;
  return GenerateScenario(cfg, true);
}

void BM_Iou(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<Box> boxes;
  for (int i = 0; i < 1024; ++i) boxes.push_back({u(rng), u(rng), u(rng) / 3, u(rng) / 3});
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Iou(boxes[i & 1023], boxes[(i * 7 + 3) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

// One 12-frame video with 8 regions through the default L-RAI model.
void BM_Predict(benchmark::State& state) {
  const Scenario s = BenchScenario();
  const auto frames = s.Frames();
  RiskModel model = RiskModel::Initialize(ModelConfig{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(model.Predict(frames));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

// Forward, loss and backward for one training video.
void BM_TrainStep(benchmark::State& state) {
  const Scenario s = BenchScenario();
  const auto frames = s.Frames();
  RiskModel model = RiskModel::Initialize(ModelConfig{}, 1);
  const auto& c = model.config();
  for (auto _ : state) {
    Tape tape;
    const auto nodes = model.ForwardVideo(tape, frames);
    auto loss = TotalLoss(tape, nodes, frames, s.targets, c.lambdas, c.K);
    tape.Backward(loss.total);
  }
  for (auto& p : model.params().matrices()) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_RunTracker(benchmark::State& state) {
  const Scenario s = BenchScenario();
  for (auto _ : state) benchmark::DoNotOptimize(RunTracker(s.proposals, TrackerOptions{}));
}
BENCHMARK(BM_RunTracker)->Unit(benchmark::kMicrosecond);

void BM_AveragePrecision(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ScoredItem> items(state.range(0));
  for (auto& it : items) it = {u(rng), u(rng) < 0.3};
  items[0].positive = true;
  for (auto _ : state) benchmark::DoNotOptimize(AveragePrecision(items));
}
BENCHMARK(BM_AveragePrecision)->Arg(1000)->Arg(100000);

}  // namespace
}  // namespace riskrnn

BENCHMARK_MAIN();
