#ifndef RISKRNN_TESTS_TEST_UTIL_H_
#define RISKRNN_TESTS_TEST_UTIL_H_

#include <random>
#include <vector>

#include "riskrnn/geometry.h"
#include "riskrnn/model.h"

namespace testutil {

inline double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline riskrnn::Box RandomBox(std::mt19937_64& rng) {
  return {Uniform(rng, 0.1, 0.9), Uniform(rng, 0.1, 0.9), Uniform(rng, 0.05, 0.4),
          Uniform(rng, 0.05, 0.4)};
}

inline std::vector<double> RandomVector(std::mt19937_64& rng, int n,
                                        double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = Uniform(rng, -scale, scale);
  return v;
}

// A video of `frames` frames with `regions` regions and a drifting agent.
inline std::vector<riskrnn::FrameInput> RandomVideo(
    std::mt19937_64& rng, const riskrnn::ModelConfig& cfg, int frames,
    int regions) {
  std::vector<riskrnn::FrameInput> video;
  riskrnn::Box agent = RandomBox(rng);
  std::vector<riskrnn::Box> boxes;
  for (int i = 0; i < regions; ++i) boxes.push_back(RandomBox(rng));
  for (int t = 0; t < frames; ++t) {
    riskrnn::FrameInput f;
    f.agent_feat = RandomVector(rng, cfg.d_agent);
    f.agent_box = agent;
    for (int i = 0; i < regions; ++i) {
      f.region_feats.push_back(RandomVector(rng, cfg.d_region));
    }
    f.region_boxes = boxes;
    video.push_back(std::move(f));
    agent.cx += Uniform(rng, -0.03, 0.03);
    agent.cy += Uniform(rng, -0.03, 0.03);
  }
  return video;
}

inline riskrnn::ModelConfig TinyConfig() {
  riskrnn::ModelConfig c;
  c.d_agent = 8;
  c.d_region = 8;
  c.d_u = 8;
  c.h_agent = 8;
  c.h_aa = 8;
  c.K = 1;
  c.I = 1;
  c.lambdas = {0.6, 0.4};
  return c;
}

}  // namespace testutil

#endif  // RISKRNN_TESTS_TEST_UTIL_H_
