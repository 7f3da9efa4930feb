// Reference implementations used only by tests. Each one is written from the
// definition, independently of the library code it checks.
#ifndef RISKRNN_TESTS_ORACLES_H_
#define RISKRNN_TESTS_ORACLES_H_

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

struct Rect {
  double cx, cy, w, h;
};

// Overlap via corner clipping.
double Iou(const Rect& a, const Rect& b);

// One LSTM step evaluated scalar by scalar. `w` is 4H x (in + H) row-major
// with gate blocks (input, forget, candidate, output); `b` has 4H entries.
void LstmStep(const std::vector<double>& w, const std::vector<double>& b,
              const std::vector<double>& x, std::vector<double>& h,
              std::vector<double>& c);

struct Scored {
  double score;
  bool positive;
};

// Sweeps every distinct score as a threshold ("predict positive iff score >=
// threshold"), recomputing precision and recall from scratch each time, and
// sums precision times the recall gained at each threshold.
double AveragePrecision(const std::vector<Scored>& items, size_t total_positives);

struct Video {
  std::vector<double> frames;
  bool positive;
  int accident_frame;
};

// Same sweep for time-to-accident: at each threshold, recall over positives
// and the mean of max(0, T - first frame reaching the threshold) over the
// recalled ones, integrated over recall.
double Atta(const std::vector<Video>& videos);

// Bias-corrected Adam on one scalar with a fixed gradient sequence.
std::vector<double> AdamTrace(double x0, const std::vector<double>& grads,
                              double lr, double b1, double b2, double eps);

}  // namespace oracle

#endif  // RISKRNN_TESTS_ORACLES_H_
