#include "gta/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "gta/errors.hpp"

namespace gta {

namespace {

constexpr double kSize = 640.0;
constexpr double kMargin = 40.0;

double px(double v) { return kMargin + v * (kSize - 2 * kMargin); }
double py(double v) { return kSize - kMargin - v * (kSize - 2 * kMargin); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string render_tour_svg(const DynamicInstance& inst, const Solution& sol) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"640\" viewBox=\"0 0 640 640\">\n";
  svg += "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" "
         "refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" "
         "orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" "
         "fill=\"black\"/></marker></defs>\n";
  svg += "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";

  // One marker per (node, time); a node keeps its hue across time and
  // recent slices are more opaque.
  const int T = inst.horizon;
  for (int i = 0; i < inst.n; ++i) {
    const int hue = static_cast<int>(360.0 * i / inst.n);
    for (int t = 0; t < T; ++t) {
      const double opacity = T > 1 ? 0.25 + 0.75 * t / (T - 1) : 1.0;
      svg += "<circle cx=\"" + fmt(px(inst.x(t, i))) + "\" cy=\"" +
             fmt(py(inst.y(t, i))) + "\" r=\"3.5\" fill=\"hsl(" +
             std::to_string(hue) + ",70%,45%)\" fill-opacity=\"" +
             fmt(opacity) + "\"";
      if (inst.is_static_node(i)) svg += " stroke=\"black\"";
      svg += "/>\n";
    }
  }

  auto clamp_t = [&](int t) { return std::min(t, T - 1); };
  for (std::size_t s = 0; s + 1 < sol.order.size(); ++s) {
    const int t0 = clamp_t(static_cast<int>(s));
    const int t1 = clamp_t(static_cast<int>(s) + 1);
    svg += "<line x1=\"" + fmt(px(inst.x(t0, sol.order[s]))) + "\" y1=\"" +
           fmt(py(inst.y(t0, sol.order[s]))) + "\" x2=\"" +
           fmt(px(inst.x(t1, sol.order[s + 1]))) + "\" y2=\"" +
           fmt(py(inst.y(t1, sol.order[s + 1]))) +
           "\" stroke=\"black\" stroke-width=\"1.2\" "
           "marker-end=\"url(#arrow)\"/>\n";
  }
  if (inst.kind == ProblemKind::TSP && sol.order.size() >= 2) {
    const int s = static_cast<int>(sol.order.size()) - 1;
    const int t0 = clamp_t(s);
    const int t1 = clamp_t(s + 1);
    svg += "<line x1=\"" + fmt(px(inst.x(t0, sol.order.back()))) + "\" y1=\"" +
           fmt(py(inst.y(t0, sol.order.back()))) + "\" x2=\"" +
           fmt(px(inst.x(t1, sol.order.front()))) + "\" y2=\"" +
           fmt(py(inst.y(t1, sol.order.front()))) +
           "\" stroke=\"black\" stroke-width=\"1.2\" "
           "marker-end=\"url(#arrow)\"/>\n";
  }

  svg += "<text x=\"40\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"16\">" +
         to_string(inst.kind) + std::to_string(inst.n) + " tour, cost " +
         fmt(sol.cost) + "</text>\n";
  if (!sol.feasible) {
    std::string why = sol.violations.empty() ? "unknown" : sol.violations[0];
    svg += "<text x=\"40\" y=\"44\" font-family=\"sans-serif\" "
           "font-size=\"14\" fill=\"red\">INFEASIBLE: " +
           why + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_tour_svg(const std::string& path, const DynamicInstance& inst,
                    const Solution& sol) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open for writing: " + path);
  out << render_tour_svg(inst, sol);
}

}  // namespace gta
