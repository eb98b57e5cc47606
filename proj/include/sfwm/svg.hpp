#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

// Minimal static SVG rendering for heatmaps and count curves. Output is a
// plain data display, deterministic byte for byte.

namespace sfwm {

namespace detail {

// dark blue -> teal -> yellow ramp
inline std::string ramp_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  auto mix = [](double a, double b, double t) { return a + (b - a) * t; };
  double r, g, b;
  if (v < 0.5) {
    const double t = v / 0.5;
    r = mix(13, 38, t);
    g = mix(8, 140, t);
    b = mix(60, 140, t);
  } else {
    const double t = (v - 0.5) / 0.5;
    r = mix(38, 250, t);
    g = mix(140, 220, t);
    b = mix(140, 40, t);
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(r), int(g), int(b));
  return buf;
}

}  // namespace detail

// Heatmap of a nonnegative matrix (rows drawn bottom-up). Cells beyond
// max_cells per side are average-pooled to keep files small.
inline std::string svg_heatmap(const Eigen::MatrixXd& values, int max_cells = 128) {
  const int rows = int(values.rows()), cols = int(values.cols());
  const int br = (rows + max_cells - 1) / max_cells;  // pooling block
  const int bc = (cols + max_cells - 1) / max_cells;
  const int pr = (rows + br - 1) / br, pc = (cols + bc - 1) / bc;
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(pr, pc);
  Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(pr, pc);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      pooled(r / br, c / bc) += values(r, c);
      cnt(r / br, c / bc) += 1.0;
    }
  pooled.array() /= cnt.array();
  const double vmax = pooled.maxCoeff();

  const int cell = 4;
  const int w = pc * cell, h = pr * cell;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                    "\" height=\"" + std::to_string(h) + "\">\n";
  for (int r = 0; r < pr; ++r)
    for (int c = 0; c < pc; ++c) {
      const double v = vmax > 0 ? pooled(r, c) / vmax : 0.0;
      out += "<rect x=\"" + std::to_string(c * cell) + "\" y=\"" +
             std::to_string((pr - 1 - r) * cell) + "\" width=\"" + std::to_string(cell) +
             "\" height=\"" + std::to_string(cell) + "\" fill=\"" + detail::ramp_color(v) +
             "\"/>\n";
    }
  out += "</svg>\n";
  return out;
}

struct CurveSeries {
  std::vector<double> y;
  std::string color = "#2060c0";
  bool points = false;  // draw markers instead of a polyline
};

// Overlaid curves on a shared x axis, auto-scaled, 640x360 canvas.
inline std::string svg_curves(const std::vector<double>& x, const std::vector<CurveSeries>& series) {
  const int w = 640, h = 360, pad = 30;
  double xmin = x.front(), xmax = x.back();
  double ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.y) {
      if (first) {
        ymin = ymax = v;
        first = false;
      }
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto X = [&](double v) { return pad + (v - xmin) / (xmax - xmin) * (w - 2 * pad); };
  auto Y = [&](double v) { return h - pad - (v - ymin) / (ymax - ymin) * (h - 2 * pad); };
  char buf[96];
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
                    "\" height=\"" + std::to_string(h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& s : series) {
    if (s.points) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n",
                      X(x[k]), Y(s.y[k]), s.color.c_str());
        out += buf;
      }
    } else {
      out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < x.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(x[k]), Y(s.y[k]));
        out += buf;
      }
      out += "\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace sfwm
