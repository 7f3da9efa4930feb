#ifndef RISKRNN_GRADCHECK_H_
#define RISKRNN_GRADCHECK_H_

#include <functional>
#include <string>

#include "riskrnn/params.h"
#include "riskrnn/tape.h"

namespace riskrnn {

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor in |a - n| / max(|a|, |n|, floor); keeps entries whose
  // true gradient is ~0 from dominating through round-off.
  double floor = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t entries_checked = 0;
};

// Builds the scalar loss for the current parameter values on a fresh tape.
// Must be deterministic.
using LossBuilder = std::function<Var(Tape&)>;

// Compares reverse-mode gradients against central differences for every
// entry of every matrix in `store`. Parameter values are restored and grads
// zeroed on return.
GradCheckResult FiniteDiffCheck(ParameterStore& store,
                                const LossBuilder& build_loss,
                                GradCheckOptions options = {});

}  // namespace riskrnn

#endif  // RISKRNN_GRADCHECK_H_
