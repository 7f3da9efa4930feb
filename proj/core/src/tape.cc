#include "riskrnn/tape.h"

#include <algorithm>
#include <string>

#include "riskrnn/errors.h"

namespace riskrnn {

const std::vector<double>& Var::value() const { return tape->Value(id); }

double Var::scalar() const {
  const auto& v = value();
  if (v.size() != 1) {
    throw ContractViolation("scalar() on a node of size " +
                            std::to_string(v.size()));
  }
  return v[0];
}

Var Tape::Constant(std::vector<double> value) {
  return Record(std::move(value), nullptr);
}

Var Tape::Record(std::vector<double> value, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = static_cast<bool>(backward);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::Backward(Var loss, double seed) {
  if (loss.tape != this || loss.id < 0 ||
      loss.id >= static_cast<int>(nodes_.size())) {
    throw ContractViolation("loss node does not belong to this tape");
  }
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractViolation("loss node must be scalar, got size " +
                            std::to_string(nodes_[loss.id].value.size()));
  }
  for (int i = 0; i <= loss.id; ++i) {
    auto& n = nodes_[i];
    if (n.requires_grad) {
      n.grad.assign(n.value.size(), 0.0);
    } else {
      n.grad.clear();
    }
  }
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad[0] = seed;
  for (int i = loss.id; i >= 0; --i) {
    auto& n = nodes_[i];
    if (!n.requires_grad) continue;
    if (std::all_of(n.grad.begin(), n.grad.end(),
                    [](double g) { return g == 0.0; })) {
      continue;
    }
    n.backward(*this, i);
  }
}

}  // namespace riskrnn
