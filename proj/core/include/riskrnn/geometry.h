#ifndef RISKRNN_GEOMETRY_H_
#define RISKRNN_GEOMETRY_H_

#include <array>

namespace riskrnn {

// Axis-aligned box, center parameterized, in frame-normalized units.
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;

  double Area() const { return w * h; }
  double XMin() const { return cx - 0.5 * w; }
  double XMax() const { return cx + 0.5 * w; }
  double YMin() const { return cy - 0.5 * h; }
  double YMax() const { return cy + 0.5 * h; }

  // w > 0, h > 0 and all fields finite.
  bool IsValid() const;

  std::array<double, 4> ToArray() const { return {cx, cy, w, h}; }
  static Box FromArray(const std::array<double, 4>& v) {
    return {v[0], v[1], v[2], v[3]};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

// Nine-cue layout of a region relative to the agent. Offsets are divided by
// the agent width (x) or height (y); corners are measured from the agent
// center.
struct RelativeConfig {
  static constexpr int kSize = 9;

  double dxc = 0.0;
  double dyc = 0.0;
  double dxmin = 0.0;
  double dymin = 0.0;
  double dxmax = 0.0;
  double dymax = 0.0;
  double dw = 1.0;
  double dh = 1.0;
  double iou = 0.0;

  std::array<double, kSize> ToArray() const {
    return {dxc, dyc, dxmin, dymin, dxmax, dymax, dw, dh, iou};
  }
};

// Offsets in agent-size units plus log size ratios.
struct BoxTransform {
  double cx_off = 0.0;
  double cy_off = 0.0;
  double cw_log = 0.0;
  double ch_log = 0.0;

  std::array<double, 4> ToArray() const {
    return {cx_off, cy_off, cw_log, ch_log};
  }
  static BoxTransform FromArray(const std::array<double, 4>& v) {
    return {v[0], v[1], v[2], v[3]};
  }
};

// |cw_log| and |ch_log| beyond this bound are rejected by ApplyBoxTransform.
inline constexpr double kMaxLogScale = 20.0;

double IntersectionArea(const Box& a, const Box& b);
double Iou(const Box& a, const Box& b);

RelativeConfig ComputeRelativeConfig(const Box& agent, const Box& region);

// (cx_off*w + cx, cy_off*h + cy, exp(cw_log)*w, exp(ch_log)*h).
// Throws RangeError when a log term exceeds kMaxLogScale in magnitude.
Box ApplyBoxTransform(const Box& p, const BoxTransform& c);

// Inverse of ApplyBoxTransform: the transform taking `from` to `to`.
BoxTransform EncodeBoxTransform(const Box& from, const Box& to);

// 0.5 z^2 for |z| < 1, |z| - 0.5 otherwise.
double SmoothL1(double z);
// Derivative of SmoothL1.
double SmoothL1Grad(double z);

}  // namespace riskrnn

#endif  // RISKRNN_GEOMETRY_H_
