#include "uavrl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace uavrl {

namespace {

constexpr double kWidth = 640.0, kHeight = 640.0, kMargin = 48.0;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Mapper {
  double x0, x1, y0, y1;
  double sx(double x) const {
    const double span = x1 - x0;
    return kMargin + (span > 0 ? (x - x0) / span : 0.5) * (kWidth - 2 * kMargin);
  }
  double sy(double y) const {
    const double span = y1 - y0;
    return kHeight - kMargin - (span > 0 ? (y - y0) / span : 0.5) * (kHeight - 2 * kMargin);
  }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts,
                     const Mapper& m, const char* style) {
  std::string s = "<polyline fill=\"none\" ";
  s += style;
  s += " points=\"";
  for (const auto& [x, y] : pts) {
    s += num(m.sx(x)) + "," + num(m.sy(y)) + " ";
  }
  s += "\"/>\n";
  return s;
}

}  // namespace

std::string svg_flight(const std::vector<TickRow>& log) {
  if (log.empty()) throw std::invalid_argument("svg_flight: empty log");

  double x0 = log[0].state.position.x(), x1 = x0;
  double y0 = log[0].state.position.y(), y1 = y0;
  for (const TickRow& r : log) {
    x0 = std::min({x0, r.state.position.x(), r.reference.x()});
    x1 = std::max({x1, r.state.position.x(), r.reference.x()});
    y0 = std::min({y0, r.state.position.y(), r.reference.y()});
    y1 = std::max({y1, r.state.position.y(), r.reference.y()});
  }
  const double pad = std::max(1.0, 0.05 * std::max(x1 - x0, y1 - y0));
  const Mapper m{x0 - pad, x1 + pad, y0 - pad, y1 + pad};

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
      "viewBox=\"0 0 640 640\">\n";
  svg += "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";

  // One reference chord per segment: from the first logged position of
  // the segment to its (final) reference point.
  int seg = -1;
  std::size_t seg_start = 0;
  for (std::size_t i = 0; i <= log.size(); ++i) {
    if (i == log.size() || log[i].segment != seg) {
      if (seg >= 0) {
        const TickRow& a = log[seg_start];
        const TickRow& b = log[i - 1];
        svg += "<line class=\"ref\" stroke=\"#888888\" stroke-dasharray=\"4 3\" x1=\"" +
               num(m.sx(a.state.position.x())) + "\" y1=\"" +
               num(m.sy(a.state.position.y())) + "\" x2=\"" +
               num(m.sx(b.reference.x())) + "\" y2=\"" + num(m.sy(b.reference.y())) +
               "\"/>\n";
        svg += "<circle fill=\"#cc3333\" r=\"4\" cx=\"" + num(m.sx(b.reference.x())) +
               "\" cy=\"" + num(m.sy(b.reference.y())) + "\"/>\n";
      }
      if (i == log.size()) break;
      seg = log[i].segment;
      seg_start = i;
    }
  }

  std::vector<std::pair<double, double>> path;
  path.reserve(log.size());
  for (const TickRow& r : log)
    path.emplace_back(r.state.position.x(), r.state.position.y());
  svg += polyline(path, m, "stroke=\"#2255cc\" stroke-width=\"1.5\"");
  svg += "</svg>\n";
  return svg;
}

std::string svg_curve(const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& x_label, const std::string& y_label) {
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("svg_curve: empty or mismatched series");
  double x0 = x[0], x1 = x[0], y0 = y[0], y1 = y[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    x0 = std::min(x0, x[i]);
    x1 = std::max(x1, x[i]);
    y0 = std::min(y0, y[i]);
    y1 = std::max(y1, y[i]);
  }
  const Mapper m{x0, x1, y0, y1};
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
      "viewBox=\"0 0 640 640\">\n";
  svg += "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
  svg += "<line stroke=\"black\" x1=\"" + num(kMargin) + "\" y1=\"" +
         num(kHeight - kMargin) + "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" +
         num(kHeight - kMargin) + "\"/>\n";
  svg += "<line stroke=\"black\" x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) +
         "\" x2=\"" + num(kMargin) + "\" y2=\"" + num(kHeight - kMargin) + "\"/>\n";
  svg += "<text x=\"320\" y=\"630\" text-anchor=\"middle\" font-size=\"14\">" +
         x_label + "</text>\n";
  svg += "<text x=\"14\" y=\"320\" text-anchor=\"middle\" font-size=\"14\" "
         "transform=\"rotate(-90 14 320)\">" + y_label + "</text>\n";
  std::vector<std::pair<double, double>> pts;
  pts.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], y[i]);
  svg += polyline(pts, m, "stroke=\"#2255cc\" stroke-width=\"1.5\"");
  svg += "</svg>\n";
  return svg;
}

}  // namespace uavrl
