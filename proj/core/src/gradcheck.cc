#include "riskrnn/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace riskrnn {
namespace {

double EvalLoss(const LossBuilder& build_loss) {
  Tape tape;
  return build_loss(tape).scalar();
}

}  // namespace

GradCheckResult FiniteDiffCheck(ParameterStore& store,
                                const LossBuilder& build_loss,
                                GradCheckOptions options) {
  store.ZeroGrad();
  {
    Tape tape;
    Var loss = build_loss(tape);
    tape.Backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (const auto& m : store.matrices()) analytic.push_back(m.grad);
  store.ZeroGrad();

  GradCheckResult result;
  auto& mats = store.matrices();
  for (size_t k = 0; k < mats.size(); ++k) {
    auto& m = mats[k];
    for (size_t i = 0; i < m.size(); ++i) {
      const double saved = m.values[i];
      m.values[i] = saved + options.step;
      const double up = EvalLoss(build_loss);
      m.values[i] = saved - options.step;
      const double down = EvalLoss(build_loss);
      m.values[i] = saved;

      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[k][i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.entries_checked;
      if (rel > result.max_rel_error || result.entries_checked == 1) {
        result.max_rel_error = rel;
        result.worst_param = m.name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  store.ZeroGrad();
  return result;
}

}  // namespace riskrnn
