#ifndef RISKRNN_ADAM_H_
#define RISKRNN_ADAM_H_

#include <vector>

#include "riskrnn/params.h"

namespace riskrnn {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. First and second moments live here, one slot per
// matrix in the store they were first used with; the store's layout must not
// change between steps.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamOptions options = {}) : options_(options) {}

  // Applies update number `step` (1-based) and zeroes all gradients.
  // Throws TrainingError naming the first parameter with a non-finite grad;
  // the store is left untouched in that case.
  void Step(ParameterStore& store, int step);
  // Uses an internal step counter.
  void Step(ParameterStore& store) { Step(store, ++steps_taken_); }

  const AdamOptions& options() const { return options_; }
  int steps_taken() const { return steps_taken_; }

 private:
  AdamOptions options_;
  int steps_taken_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace riskrnn

#endif  // RISKRNN_ADAM_H_
