#ifndef RISKRNN_NN_H_
#define RISKRNN_NN_H_

#include <array>
#include <span>
#include <vector>

#include "riskrnn/geometry.h"
#include "riskrnn/params.h"
#include "riskrnn/tape.h"

namespace riskrnn {

// Lower clamp for probabilities entering a log; the upper clamp is 1 - this.
inline constexpr double kProbClamp = 1e-12;

// ---- Dense ------------------------------------------------------------------

// W * x (+ bias). Shape mismatch throws ContractViolation.
Var Dense(ParamMatrix& weight, Var x, ParamMatrix* bias = nullptr);

// ---- Element-wise and structural ops -----------------------------------------

Var Relu(Var x);
Var Sigmoid(Var x);
Var Tanh(Var x);
Var Exp(Var x);
// Max-subtracted softmax.
Var Softmax(Var x);

Var Add(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double k);
// Vector `v` times size-1 node `s`.
Var ScaleBy(Var v, Var s);
Var Concat(std::span<const Var> parts);
Var Slice(Var x, size_t offset, size_t length);
Var Element(Var x, size_t index);
Var Dot(Var a, Var b);
// Element-wise sum of equally sized nodes.
Var AddN(std::span<const Var> parts);
// Sum of all entries, as a size-1 node.
Var SumAll(Var x);

// -log(clamp(p, kProbClamp, 1 - kProbClamp)) for a size-1 node.
Var NegLog(Var p);
// log(1 + exp(x)) element-wise, without overflow or cancellation. Sigmoid
// cross-entropy is Softplus(-z) for a positive label and Softplus(z) for a
// negative one.
Var Softplus(Var x);

// sum_k SmoothL1(c[k] - target[k]) as a size-1 node.
Var SmoothL1Loss(Var c, std::span<const double> target);

// ---- Geometry on the tape -----------------------------------------------------

// Box nodes hold (cx, cy, w, h).
Var BoxConstant(Tape& tape, const Box& b);
Box BoxValue(Var v);

// Differentiable in both the box and the transform. Throws RangeError when a
// log-scale component leaves [-kMaxLogScale, kMaxLogScale].
Var ApplyBoxTransform(Var box, Var transform);

// Nine-cue configuration of a fixed region relative to a (possibly
// differentiable) agent box. Piecewise-smooth in the agent box through IoU.
Var RelativeConfigOf(Var agent_box, const Box& region);

// ---- LSTM ----------------------------------------------------------------------

// Vanilla LSTM, no peepholes. Gate order in the stacked weight rows is input,
// forget, candidate, output. weight: (4H x (in + H)), bias: (4H x 1).
struct LstmBlock {
  ParamMatrix* weight = nullptr;
  ParamMatrix* bias = nullptr;

  int hidden_dim() const { return weight->rows / 4; }
  int input_dim() const { return weight->cols - hidden_dim(); }
};

struct LstmState {
  Var hidden;
  Var cell;
};

LstmState ZeroLstmState(Tape& tape, int hidden_dim);

// c' = f*c + i*g, h' = o*tanh(c').
LstmState LstmStep(const LstmBlock& block, Var x, const LstmState& state);

// Parameter specs "<prefix>.W" and "<prefix>.b" for one LSTM block.
std::array<ParamSpec, 2> LstmParamSpecs(const std::string& prefix,
                                        int input_dim, int hidden_dim);
LstmBlock GetLstmBlock(ParameterStore& store, const std::string& prefix);

}  // namespace riskrnn

#endif  // RISKRNN_NN_H_
