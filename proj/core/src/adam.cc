#include "riskrnn/adam.h"

#include <cmath>
#include <string>

#include "riskrnn/errors.h"

namespace riskrnn {

void AdamOptimizer::Step(ParameterStore& store, int step) {
  if (step < 1) throw ContractViolation("Adam step index must be >= 1");
  auto& mats = store.matrices();
  for (const auto& m : mats) {
    for (size_t i = 0; i < m.grad.size(); ++i) {
      if (!std::isfinite(m.grad[i])) {
        throw TrainingError("non-finite gradient in parameter '" + m.name +
                            "' at index " + std::to_string(i));
      }
    }
  }
  if (m_.size() != mats.size()) {
    m_.resize(mats.size());
    v_.resize(mats.size());
  }
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, step);
  const double c2 = 1.0 - std::pow(b2, step);
  for (size_t k = 0; k < mats.size(); ++k) {
    auto& p = mats[k];
    auto& m = m_[k];
    auto& v = v_[k];
    if (m.size() != p.size()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    for (size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.values[i] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
    p.ZeroGrad();
  }
}

}  // namespace riskrnn
