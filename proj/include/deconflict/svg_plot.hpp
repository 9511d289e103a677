#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "deconflict/aircraft.hpp"
#include "deconflict/geometry.hpp"
#include "deconflict/io_util.hpp"

namespace deconflict {

/// Renders an instance as a standalone SVG: the nominal circle, one group
/// per aircraft holding its separation disc, position, initial velocity
/// arrow, and (when controls are given) the resolved velocity arrow. Output
/// is built from fixed-precision strings only, so identical inputs give
/// identical bytes.
inline std::string plot_svg(const ProblemInstance& inst,
                            const std::vector<ControlDecision>* resolved =
                                nullptr) {
  constexpr double kCanvas = 800.0;
  constexpr double kArrowHours = 0.12;  // velocity arrows span v * 0.12 h

  double extent = inst.params.radius_nm;
  for (const AircraftState& a : inst.aircraft) {
    extent = std::max(extent, std::abs(a.position.x));
    extent = std::max(extent, std::abs(a.position.y));
    extent = std::max(extent, a.speed_kn * kArrowHours);
  }
  const double scale = 0.45 * kCanvas / std::max(extent * 1.2, 1.0);
  auto px = [&](double wx) { return kCanvas / 2.0 + wx * scale; };
  auto py = [&](double wy) { return kCanvas / 2.0 - wy * scale; };
  auto num = [](double v) { return format_fixed(v, 2); };

  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  constexpr int kPaletteSize = 8;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">\n";
  s += "<title>" + inst.name() + "</title>\n";
  s += "<defs>\n";
  s += "<marker id=\"tip\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" "
       "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">"
       "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"context-stroke\"/>"
       "</marker>\n";
  s += "</defs>\n";
  s += "<rect width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";
  s += "<circle class=\"ring\" cx=\"" + num(px(0)) + "\" cy=\"" + num(py(0)) +
       "\" r=\"" + num(inst.params.radius_nm * scale) +
       "\" fill=\"none\" stroke=\"#cccccc\" stroke-dasharray=\"6 6\"/>\n";

  for (int i = 0; i < inst.size(); ++i) {
    const AircraftState& a = inst.aircraft[i];
    const char* color = palette[i % kPaletteSize];
    const Vec2 v0 = a.initial_velocity();
    s += "<g class=\"ac\" id=\"ac" + std::to_string(a.id) + "\">\n";
    s += "  <circle class=\"sep\" cx=\"" + num(px(a.position.x)) +
         "\" cy=\"" + num(py(a.position.y)) + "\" r=\"" +
         num(0.5 * inst.d_nm * scale) + "\" fill=\"" + std::string(color) +
         "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    s += "  <line class=\"v0\" x1=\"" + num(px(a.position.x)) + "\" y1=\"" +
         num(py(a.position.y)) + "\" x2=\"" +
         num(px(a.position.x + v0.x * kArrowHours)) + "\" y2=\"" +
         num(py(a.position.y + v0.y * kArrowHours)) +
         "\" stroke=\"#999999\" stroke-width=\"1.5\" "
         "marker-end=\"url(#tip)\"/>\n";
    if (resolved != nullptr && i < static_cast<int>(resolved->size())) {
      const Vec2 v1 = controlled_velocity(a, (*resolved)[i]);
      s += "  <line class=\"v1\" x1=\"" + num(px(a.position.x)) +
           "\" y1=\"" + num(py(a.position.y)) + "\" x2=\"" +
           num(px(a.position.x + v1.x * kArrowHours)) + "\" y2=\"" +
           num(py(a.position.y + v1.y * kArrowHours)) + "\" stroke=\"" +
           std::string(color) +
           "\" stroke-width=\"2\" marker-end=\"url(#tip)\"/>\n";
    }
    s += "  <circle class=\"pos\" cx=\"" + num(px(a.position.x)) +
         "\" cy=\"" + num(py(a.position.y)) + "\" r=\"4\" fill=\"" +
         std::string(color) + "\"/>\n";
    s += "  <text x=\"" + num(px(a.position.x) + 6.0) + "\" y=\"" +
         num(py(a.position.y) - 6.0) +
         "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#333333\">" +
         std::to_string(a.id) + "</text>\n";
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace deconflict
