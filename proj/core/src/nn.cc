#include "riskrnn/nn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskrnn/errors.h"

namespace riskrnn {
namespace {

Tape& TapeOf(Var v) {
  if (!v.valid()) throw ContractViolation("use of an unbound Var");
  return *v.tape;
}

void CheckSameTape(Var a, Var b) {
  if (a.tape != b.tape) throw ContractViolation("Vars from different tapes");
}

void CheckSameSize(Var a, Var b, const char* op) {
  if (a.size() != b.size()) {
    throw ContractViolation(std::string(op) + ": size mismatch " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
}

double StableSigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Element-wise op with derivative expressed through input and output values.
template <typename F, typename D>
Var Unary(Var x, F f, D dfdx) {
  Tape& tape = TapeOf(x);
  const auto& xv = x.value();
  std::vector<double> out(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  if (!tape.RequiresGrad(x)) return tape.Constant(std::move(out));
  const int xid = x.id;
  return tape.Record(std::move(out), [xid, dfdx](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& xv = t.Value(xid);
    const auto& yv = t.Value(self);
    auto& gx = t.Grad(xid);
    for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * dfdx(xv[i], yv[i]);
  });
}

}  // namespace

Var Dense(ParamMatrix& weight, Var x, ParamMatrix* bias) {
  Tape& tape = TapeOf(x);
  const auto& xv = x.value();
  if (static_cast<size_t>(weight.cols) != xv.size()) {
    throw ContractViolation("Dense '" + weight.name + "': expected input of " +
                            std::to_string(weight.cols) + ", got " +
                            std::to_string(xv.size()));
  }
  if (bias && (bias->rows != weight.rows || bias->cols != 1)) {
    throw ContractViolation("Dense '" + weight.name + "': bias '" +
                            bias->name + "' shape mismatch");
  }
  std::vector<double> out(weight.rows, 0.0);
  for (int r = 0; r < weight.rows; ++r) {
    const double* row = &weight.values[static_cast<size_t>(r) * weight.cols];
    double acc = bias ? bias->values[r] : 0.0;
    for (int c = 0; c < weight.cols; ++c) acc += row[c] * xv[c];
    out[r] = acc;
  }
  ParamMatrix* w = &weight;
  const int xid = x.id;
  return tape.Record(std::move(out), [w, bias, xid](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& xv = t.Value(xid);
    const bool need_x = t.RequiresGrad(xid);
    for (int r = 0; r < w->rows; ++r) {
      const double gr = g[r];
      if (gr == 0.0) continue;
      double* grow = &w->grad[static_cast<size_t>(r) * w->cols];
      for (int c = 0; c < w->cols; ++c) grow[c] += gr * xv[c];
      if (bias) bias->grad[r] += gr;
    }
    if (need_x) {
      auto& gx = t.Grad(xid);
      for (int r = 0; r < w->rows; ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        const double* row = &w->values[static_cast<size_t>(r) * w->cols];
        for (int c = 0; c < w->cols; ++c) gx[c] += gr * row[c];
      }
    }
  });
}

Var Relu(Var x) {
  return Unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double xv, double) { return xv > 0.0 ? 1.0 : 0.0; });
}

Var Sigmoid(Var x) {
  return Unary(x, StableSigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Var Tanh(Var x) {
  return Unary(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Exp(Var x) {
  return Unary(
      x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Var Softmax(Var x) {
  Tape& tape = TapeOf(x);
  const auto& xv = x.value();
  if (xv.empty()) throw ContractViolation("Softmax of an empty vector");
  const double mx = *std::max_element(xv.begin(), xv.end());
  std::vector<double> out(xv.size());
  double z = 0.0;
  for (size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::exp(xv[i] - mx);
    z += out[i];
  }
  for (auto& o : out) o /= z;
  if (!tape.RequiresGrad(x)) return tape.Constant(std::move(out));
  const int xid = x.id;
  return tape.Record(std::move(out), [xid](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& y = t.Value(self);
    double dotgy = 0.0;
    for (size_t i = 0; i < g.size(); ++i) dotgy += g[i] * y[i];
    auto& gx = t.Grad(xid);
    for (size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - dotgy);
  });
}

Var Add(Var a, Var b) {
  CheckSameTape(a, b);
  CheckSameSize(a, b, "Add");
  Tape& tape = TapeOf(a);
  std::vector<double> out(a.value());
  const auto& bv = b.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  if (!tape.RequiresGrad(a) && !tape.RequiresGrad(b)) {
    return tape.Constant(std::move(out));
  }
  const int aid = a.id, bid = b.id;
  return tape.Record(std::move(out), [aid, bid](Tape& t, int self) {
    const auto& g = t.Grad(self);
    for (int id : {aid, bid}) {
      if (!t.RequiresGrad(id)) continue;
      auto& gi = t.Grad(id);
      for (size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  CheckSameTape(a, b);
  CheckSameSize(a, b, "Mul");
  Tape& tape = TapeOf(a);
  const auto& av = a.value();
  const auto& bv = b.value();
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  if (!tape.RequiresGrad(a) && !tape.RequiresGrad(b)) {
    return tape.Constant(std::move(out));
  }
  const int aid = a.id, bid = b.id;
  return tape.Record(std::move(out), [aid, bid](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& av = t.Value(aid);
    const auto& bv = t.Value(bid);
    if (t.RequiresGrad(aid)) {
      auto& ga = t.Grad(aid);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.RequiresGrad(bid)) {
      auto& gb = t.Grad(bid);
      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Scale(Var a, double k) {
  return Unary(
      a, [k](double v) { return k * v; }, [k](double, double) { return k; });
}

Var ScaleBy(Var v, Var s) {
  CheckSameTape(v, s);
  Tape& tape = TapeOf(v);
  const double sv = s.scalar();
  std::vector<double> out(v.value());
  for (auto& o : out) o *= sv;
  if (!tape.RequiresGrad(v) && !tape.RequiresGrad(s)) {
    return tape.Constant(std::move(out));
  }
  const int vid = v.id, sid = s.id;
  return tape.Record(std::move(out), [vid, sid](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& vv = t.Value(vid);
    const double sv = t.Value(sid)[0];
    if (t.RequiresGrad(vid)) {
      auto& gv = t.Grad(vid);
      for (size_t i = 0; i < g.size(); ++i) gv[i] += g[i] * sv;
    }
    if (t.RequiresGrad(sid)) {
      double acc = 0.0;
      for (size_t i = 0; i < g.size(); ++i) acc += g[i] * vv[i];
      t.Grad(sid)[0] += acc;
    }
  });
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("Concat of zero parts");
  Tape& tape = TapeOf(parts[0]);
  std::vector<double> out;
  std::vector<int> ids;
  bool any = false;
  for (const Var& p : parts) {
    CheckSameTape(parts[0], p);
    const auto& pv = p.value();
    out.insert(out.end(), pv.begin(), pv.end());
    ids.push_back(p.id);
    any = any || tape.RequiresGrad(p);
  }
  if (!any) return tape.Constant(std::move(out));
  return tape.Record(std::move(out), [ids](Tape& t, int self) {
    const auto& g = t.Grad(self);
    size_t off = 0;
    for (int id : ids) {
      const size_t n = t.Value(id).size();
      if (t.RequiresGrad(id)) {
        auto& gi = t.Grad(id);
        for (size_t i = 0; i < n; ++i) gi[i] += g[off + i];
      }
      off += n;
    }
  });
}

Var Slice(Var x, size_t offset, size_t length) {
  Tape& tape = TapeOf(x);
  const auto& xv = x.value();
  if (offset + length > xv.size()) {
    throw ContractViolation("Slice out of range");
  }
  std::vector<double> out(xv.begin() + offset, xv.begin() + offset + length);
  if (!tape.RequiresGrad(x)) return tape.Constant(std::move(out));
  const int xid = x.id;
  return tape.Record(std::move(out), [xid, offset](Tape& t, int self) {
    const auto& g = t.Grad(self);
    auto& gx = t.Grad(xid);
    for (size_t i = 0; i < g.size(); ++i) gx[offset + i] += g[i];
  });
}

Var Element(Var x, size_t index) { return Slice(x, index, 1); }

Var Dot(Var a, Var b) {
  CheckSameTape(a, b);
  CheckSameSize(a, b, "Dot");
  Tape& tape = TapeOf(a);
  const auto& av = a.value();
  const auto& bv = b.value();
  double acc = 0.0;
  for (size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  if (!tape.RequiresGrad(a) && !tape.RequiresGrad(b)) return tape.Scalar(acc);
  const int aid = a.id, bid = b.id;
  return tape.Record({acc}, [aid, bid](Tape& t, int self) {
    const double g = t.Grad(self)[0];
    const auto& av = t.Value(aid);
    const auto& bv = t.Value(bid);
    if (t.RequiresGrad(aid)) {
      auto& ga = t.Grad(aid);
      for (size_t i = 0; i < av.size(); ++i) ga[i] += g * bv[i];
    }
    if (t.RequiresGrad(bid)) {
      auto& gb = t.Grad(bid);
      for (size_t i = 0; i < bv.size(); ++i) gb[i] += g * av[i];
    }
  });
}

Var AddN(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("AddN of zero parts");
  Tape& tape = TapeOf(parts[0]);
  std::vector<double> out(parts[0].size(), 0.0);
  std::vector<int> ids;
  bool any = false;
  for (const Var& p : parts) {
    CheckSameTape(parts[0], p);
    CheckSameSize(parts[0], p, "AddN");
    const auto& pv = p.value();
    for (size_t i = 0; i < out.size(); ++i) out[i] += pv[i];
    ids.push_back(p.id);
    any = any || tape.RequiresGrad(p);
  }
  if (!any) return tape.Constant(std::move(out));
  return tape.Record(std::move(out), [ids](Tape& t, int self) {
    const auto& g = t.Grad(self);
    for (int id : ids) {
      if (!t.RequiresGrad(id)) continue;
      auto& gi = t.Grad(id);
      for (size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var SumAll(Var x) {
  Tape& tape = TapeOf(x);
  double acc = 0.0;
  for (double v : x.value()) acc += v;
  if (!tape.RequiresGrad(x)) return tape.Scalar(acc);
  const int xid = x.id;
  return tape.Record({acc}, [xid](Tape& t, int self) {
    const double g = t.Grad(self)[0];
    for (auto& gx : t.Grad(xid)) gx += g;
  });
}

Var NegLog(Var p) {
  if (p.size() != 1) throw ContractViolation("log loss expects a scalar");
  return Unary(
      p,
      [](double v) {
        return -std::log(std::clamp(v, kProbClamp, 1.0 - kProbClamp));
      },
      [](double v, double) {
        if (v < kProbClamp || v > 1.0 - kProbClamp) return 0.0;
        return -1.0 / v;
      });
}

Var Softplus(Var x) {
  return Unary(
      x,
      [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) { return StableSigmoid(v); });
}

Var SmoothL1Loss(Var c, std::span<const double> target) {
  Tape& tape = TapeOf(c);
  const auto& cv = c.value();
  if (cv.size() != target.size()) {
    throw ContractViolation("SmoothL1Loss: size mismatch");
  }
  std::vector<double> diff(cv.size());
  double acc = 0.0;
  for (size_t i = 0; i < cv.size(); ++i) {
    diff[i] = cv[i] - target[i];
    acc += SmoothL1(diff[i]);
  }
  if (!tape.RequiresGrad(c)) return tape.Scalar(acc);
  const int cid = c.id;
  return tape.Record({acc}, [cid, diff](Tape& t, int self) {
    const double g = t.Grad(self)[0];
    auto& gc = t.Grad(cid);
    for (size_t i = 0; i < diff.size(); ++i) gc[i] += g * SmoothL1Grad(diff[i]);
  });
}

Var BoxConstant(Tape& tape, const Box& b) {
  return tape.Constant(std::vector<double>{b.cx, b.cy, b.w, b.h});
}

Box BoxValue(Var v) {
  const auto& b = v.value();
  if (b.size() != 4) throw ContractViolation("box node must have size 4");
  return {b[0], b[1], b[2], b[3]};
}

Var ApplyBoxTransform(Var box, Var transform) {
  CheckSameTape(box, transform);
  Tape& tape = TapeOf(box);
  const Box p = BoxValue(box);
  const auto& cv = transform.value();
  if (cv.size() != 4) throw ContractViolation("transform must have size 4");
  const Box out = ApplyBoxTransform(p, BoxTransform{cv[0], cv[1], cv[2], cv[3]});
  std::vector<double> ov{out.cx, out.cy, out.w, out.h};
  if (!tape.RequiresGrad(box) && !tape.RequiresGrad(transform)) {
    return tape.Constant(std::move(ov));
  }
  const int bid = box.id, cid = transform.id;
  return tape.Record(std::move(ov), [bid, cid](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& p = t.Value(bid);
    const auto& c = t.Value(cid);
    const double ew = std::exp(c[2]);
    const double eh = std::exp(c[3]);
    if (t.RequiresGrad(bid)) {
      auto& gb = t.Grad(bid);
      gb[0] += g[0];
      gb[1] += g[1];
      gb[2] += g[0] * c[0] + g[2] * ew;
      gb[3] += g[1] * c[1] + g[3] * eh;
    }
    if (t.RequiresGrad(cid)) {
      auto& gc = t.Grad(cid);
      gc[0] += g[0] * p[2];
      gc[1] += g[1] * p[3];
      gc[2] += g[2] * ew * p[2];
      gc[3] += g[3] * eh * p[3];
    }
  });
}

namespace {

// Overlap length along one axis and its partials w.r.t. the agent center and
// size on that axis.
struct AxisOverlap {
  double len = 0.0;
  double d_center = 0.0;
  double d_size = 0.0;
};

AxisOverlap Overlap1D(double c, double s, double rc, double rs) {
  const double a0 = c - 0.5 * s, a1 = c + 0.5 * s;
  const double b0 = rc - 0.5 * rs, b1 = rc + 0.5 * rs;
  AxisOverlap o;
  o.len = std::min(a1, b1) - std::max(a0, b0);
  if (a1 < b1) {
    o.d_center += 1.0;
    o.d_size += 0.5;
  }
  if (a0 > b0) {
    o.d_center -= 1.0;
    o.d_size += 0.5;
  }
  return o;
}

}  // namespace

Var RelativeConfigOf(Var agent_box, const Box& region) {
  Tape& tape = TapeOf(agent_box);
  const Box a = BoxValue(agent_box);
  const auto rc = ComputeRelativeConfig(a, region).ToArray();
  std::vector<double> out(rc.begin(), rc.end());
  if (!tape.RequiresGrad(agent_box)) return tape.Constant(std::move(out));
  const int aid = agent_box.id;
  return tape.Record(std::move(out), [aid, region](Tape& t, int self) {
    const auto& g = t.Grad(self);
    const auto& av = t.Value(aid);
    const double x = av[0], y = av[1], w = av[2], h = av[3];
    double gx = 0.0, gy = 0.0, gw = 0.0, gh = 0.0;

    const double X = region.cx, Y = region.cy;
    const double W = region.w, H = region.h;
    // Offsets: (R - x) / w.
    const double xs[3] = {X, X - 0.5 * W, X + 0.5 * W};
    const double ys[3] = {Y, Y - 0.5 * H, Y + 0.5 * H};
    const int xi[3] = {0, 2, 4};
    const int yi[3] = {1, 3, 5};
    for (int k = 0; k < 3; ++k) {
      gx += g[xi[k]] * (-1.0 / w);
      gw += g[xi[k]] * (-(xs[k] - x) / (w * w));
      gy += g[yi[k]] * (-1.0 / h);
      gh += g[yi[k]] * (-(ys[k] - y) / (h * h));
    }
    gw += g[6] * (-W / (w * w));
    gh += g[7] * (-H / (h * h));

    if (g[8] != 0.0) {
      const AxisOverlap ox = Overlap1D(x, w, X, W);
      const AxisOverlap oy = Overlap1D(y, h, Y, H);
      if (ox.len > 0.0 && oy.len > 0.0) {
        const double inter = ox.len * oy.len;
        const double uni = w * h + W * H - inter;
        const double di_dx = ox.d_center * oy.len;
        const double di_dw = ox.d_size * oy.len;
        const double di_dy = oy.d_center * ox.len;
        const double di_dh = oy.d_size * ox.len;
        const double du_dx = -di_dx;
        const double du_dy = -di_dy;
        const double du_dw = h - di_dw;
        const double du_dh = w - di_dh;
        const double inv = 1.0 / (uni * uni);
        gx += g[8] * (di_dx * uni - inter * du_dx) * inv;
        gy += g[8] * (di_dy * uni - inter * du_dy) * inv;
        gw += g[8] * (di_dw * uni - inter * du_dw) * inv;
        gh += g[8] * (di_dh * uni - inter * du_dh) * inv;
      }
    }
    auto& ga = t.Grad(aid);
    ga[0] += gx;
    ga[1] += gy;
    ga[2] += gw;
    ga[3] += gh;
  });
}

LstmState ZeroLstmState(Tape& tape, int hidden_dim) {
  return {tape.Constant(std::vector<double>(hidden_dim, 0.0)),
          tape.Constant(std::vector<double>(hidden_dim, 0.0))};
}

LstmState LstmStep(const LstmBlock& block, Var x, const LstmState& state) {
  const int hidden = block.hidden_dim();
  if (static_cast<int>(x.size()) != block.input_dim()) {
    throw ContractViolation("LstmStep '" + block.weight->name +
                            "': expected input of " +
                            std::to_string(block.input_dim()) + ", got " +
                            std::to_string(x.size()));
  }
  if (static_cast<int>(state.hidden.size()) != hidden ||
      static_cast<int>(state.cell.size()) != hidden) {
    throw ContractViolation("LstmStep '" + block.weight->name +
                            "': state size mismatch");
  }
  const Var in[2] = {x, state.hidden};
  const Var z = Dense(*block.weight, Concat(in), block.bias);
  const Var i = Sigmoid(Slice(z, 0, hidden));
  const Var f = Sigmoid(Slice(z, hidden, hidden));
  const Var g = Tanh(Slice(z, 2 * hidden, hidden));
  const Var o = Sigmoid(Slice(z, 3 * hidden, hidden));
  const Var c = Add(Mul(f, state.cell), Mul(i, g));
  const Var h = Mul(o, Tanh(c));
  return {h, c};
}

std::array<ParamSpec, 2> LstmParamSpecs(const std::string& prefix,
                                        int input_dim, int hidden_dim) {
  return {ParamSpec{prefix + ".W", 4 * hidden_dim, input_dim + hidden_dim,
                    ParamInit::kGlorotUniform},
          ParamSpec{prefix + ".b", 4 * hidden_dim, 1, ParamInit::kLstmBias}};
}

LstmBlock GetLstmBlock(ParameterStore& store, const std::string& prefix) {
  return {&store.Get(prefix + ".W"), &store.Get(prefix + ".b")};
}

}  // namespace riskrnn
