#include "riskrnn/geometry.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskrnn/errors.h"

namespace riskrnn {

bool Box::IsValid() const {
  return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) &&
         std::isfinite(h) && w > 0.0 && h > 0.0;
}

double IntersectionArea(const Box& a, const Box& b) {
  const double ix = std::min(a.XMax(), b.XMax()) - std::max(a.XMin(), b.XMin());
  const double iy = std::min(a.YMax(), b.YMax()) - std::max(a.YMin(), b.YMin());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  return ix * iy;
}

double Iou(const Box& a, const Box& b) {
  const double inter = IntersectionArea(a, b);
  if (inter <= 0.0) return 0.0;
  // Areas from the same corners as the overlap, so a box against itself
  // gives exactly 1.
  const double area_a = (a.XMax() - a.XMin()) * (a.YMax() - a.YMin());
  const double area_b = (b.XMax() - b.XMin()) * (b.YMax() - b.YMin());
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

RelativeConfig ComputeRelativeConfig(const Box& agent, const Box& region) {
  RelativeConfig rc;
  rc.dxc = (region.cx - agent.cx) / agent.w;
  rc.dyc = (region.cy - agent.cy) / agent.h;
  rc.dxmin = (region.XMin() - agent.cx) / agent.w;
  rc.dymin = (region.YMin() - agent.cy) / agent.h;
  rc.dxmax = (region.XMax() - agent.cx) / agent.w;
  rc.dymax = (region.YMax() - agent.cy) / agent.h;
  rc.dw = region.w / agent.w;
  rc.dh = region.h / agent.h;
  rc.iou = Iou(agent, region);
  return rc;
}

Box ApplyBoxTransform(const Box& p, const BoxTransform& c) {
  if (!(std::abs(c.cw_log) <= kMaxLogScale) ||
      !(std::abs(c.ch_log) <= kMaxLogScale)) {
    throw RangeError("box transform log-scale out of range: cw_log=" +
                     std::to_string(c.cw_log) +
                     " ch_log=" + std::to_string(c.ch_log));
  }
  return {c.cx_off * p.w + p.cx, c.cy_off * p.h + p.cy,
          std::exp(c.cw_log) * p.w, std::exp(c.ch_log) * p.h};
}

BoxTransform EncodeBoxTransform(const Box& from, const Box& to) {
  return {(to.cx - from.cx) / from.w, (to.cy - from.cy) / from.h,
          std::log(to.w / from.w), std::log(to.h / from.h)};
}

double SmoothL1(double z) {
  const double a = std::abs(z);
  return a < 1.0 ? 0.5 * z * z : a - 0.5;
}

double SmoothL1Grad(double z) {
  if (z >= 1.0) return 1.0;
  if (z <= -1.0) return -1.0;
  return z;
}

}  // namespace riskrnn
