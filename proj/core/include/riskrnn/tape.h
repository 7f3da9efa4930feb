#ifndef RISKRNN_TAPE_H_
#define RISKRNN_TAPE_H_

#include <functional>
#include <span>
#include <vector>

namespace riskrnn {

class Tape;

// Handle to a vector-valued node on a Tape. Cheap to copy; valid for the
// lifetime of the owning tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const std::vector<double>& value() const;
  size_t size() const { return value().size(); }
  double scalar() const;  // value()[0]; the node must have size 1
  double operator[](size_t i) const { return value()[i]; }
};

// Dynamic reverse-mode differentiation record. Nodes are appended in
// evaluation order, so the node list is always topologically sorted.
// Parameter gradients are accumulated directly into ParamMatrix::grad by the
// backward closures of the ops that read them.
class Tape {
 public:
  // Receives the tape and the id of the node being back-propagated; reads
  // that node's grad and accumulates into its inputs' grads.
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(std::vector<double> value);
  Var Constant(std::span<const double> value) {
    return Constant(std::vector<double>(value.begin(), value.end()));
  }
  Var Scalar(double v) { return Constant(std::vector<double>{v}); }

  // Appends an op result. A null `backward` marks the node as not depending
  // on any parameter.
  Var Record(std::vector<double> value, BackwardFn backward);

  const std::vector<double>& Value(int id) const { return nodes_[id].value; }
  std::vector<double>& Grad(int id) { return nodes_[id].grad; }
  bool RequiresGrad(int id) const { return nodes_[id].requires_grad; }
  bool RequiresGrad(Var v) const { return nodes_[v.id].requires_grad; }

  // Seeds d(loss)/d(loss) = seed and walks the nodes once in reverse order.
  // The loss must be a size-1 node of this tape. Node grads are reset on each
  // call; parameter grads accumulate across calls.
  void Backward(Var loss, double seed = 1.0);

  size_t size() const { return nodes_.size(); }
  void Clear() { nodes_.clear(); }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace riskrnn

#endif  // RISKRNN_TAPE_H_
