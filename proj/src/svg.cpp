#include "pesim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pesim/errors.hpp"
#include "pesim/format.hpp"

namespace pesim {

namespace {

constexpr int width = 640;
constexpr int height = 420;
constexpr int margin_left = 64;
constexpr int margin_right = 16;
constexpr int margin_top = 16;
constexpr int margin_bottom = 48;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int palette_size = 10;

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;

  double px(double x) const {
    const double span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    return margin_left + (x - x_lo) / span * (width - margin_left - margin_right);
  }
  double py(double y) const {
    const double span = y_hi > y_lo ? y_hi - y_lo : 1.0;
    return height - margin_bottom -
           (y - y_lo) / span * (height - margin_top - margin_bottom);
  }
};

std::string num(double v) {
  // trim trailing digits: tick labels do not need full precision
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::vector<double> nice_ticks(double lo, double hi, int want = 5) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / want;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step)
    ticks.push_back(v);
  return ticks;
}

void open_svg(std::string& out) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  out += std::to_string(width);
  out += "\" height=\"";
  out += std::to_string(height);
  out += "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void draw_axes(std::string& out, const Frame& frame, const std::string& x_label,
               const std::string& y_label) {
  const double x0 = frame.px(frame.x_lo);
  const double x1 = frame.px(frame.x_hi);
  const double y0 = frame.py(frame.y_lo);
  const double y1 = frame.py(frame.y_hi);
  out += "<g stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
         "\" y2=\"" + num(y0) + "\"/>\n";
  out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
         "\" y2=\"" + num(y1) + "\"/>\n";
  out += "</g>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (const double t : nice_ticks(frame.x_lo, frame.x_hi)) {
    const double x = frame.px(t);
    out += "<line stroke=\"black\" x1=\"" + num(x) + "\" y1=\"" + num(y0) +
           "\" x2=\"" + num(x) + "\" y2=\"" + num(y0 + 4) + "\"/>\n";
    out += "<text text-anchor=\"middle\" x=\"" + num(x) + "\" y=\"" +
           num(y0 + 18) + "\">" + num(t) + "</text>\n";
  }
  for (const double t : nice_ticks(frame.y_lo, frame.y_hi)) {
    const double y = frame.py(t);
    out += "<line stroke=\"black\" x1=\"" + num(x0 - 4) + "\" y1=\"" + num(y) +
           "\" x2=\"" + num(x0) + "\" y2=\"" + num(y) + "\"/>\n";
    out += "<text text-anchor=\"end\" x=\"" + num(x0 - 7) + "\" y=\"" +
           num(y + 4) + "\">" + num(t) + "</text>\n";
  }
  out += "<text text-anchor=\"middle\" x=\"" +
         num((x0 + x1) / 2) + "\" y=\"" + num(height - 10) + "\">" + x_label +
         "</text>\n";
  out += "<text text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num((y0 + y1) / 2) + ")\" x=\"14\" y=\"" + num((y0 + y1) / 2) + "\">" +
         y_label + "</text>\n";
  out += "</g>\n";
}

void draw_polyline(std::string& out, const std::vector<double>& xs,
                   const std::vector<double>& ys, const Frame& frame,
                   const char* color) {
  out += "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"";
  out += color;
  out += "\" points=\"";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ' ';
    out += num(frame.px(xs[k])) + "," + num(frame.py(ys[k]));
  }
  out += "\"/>\n";
}

}  // namespace

std::string svg_trajectory_plot(const TrajectoryXd& traj) {
  if (traj.samples.empty()) throw DegenerateInput("cannot plot an empty trajectory");
  if (traj.dimension() != 1)
    throw DimensionMismatch("trajectory plot requires one-dimensional states");

  Frame frame{traj.samples.front().t, traj.samples.back().t, 0, 0};
  frame.y_lo = traj.samples.front().positions.minCoeff();
  frame.y_hi = traj.samples.front().positions.maxCoeff();
  for (const auto& s : traj.samples) {
    frame.y_lo = std::min(frame.y_lo, s.positions.minCoeff());
    frame.y_hi = std::max(frame.y_hi, s.positions.maxCoeff());
  }
  if (frame.y_hi == frame.y_lo) frame.y_hi = frame.y_lo + 1;

  std::string out;
  open_svg(out);
  draw_axes(out, frame, "t", "x");
  const Eigen::Index agents = traj.agent_count();
  std::vector<double> ts(traj.samples.size());
  std::vector<double> xs(traj.samples.size());
  for (std::size_t k = 0; k < traj.samples.size(); ++k) ts[k] = traj.samples[k].t;
  for (Eigen::Index i = 0; i < agents; ++i) {
    for (std::size_t k = 0; k < traj.samples.size(); ++k)
      xs[k] = traj.samples[k].positions(i, 0);
    draw_polyline(out, ts, xs, frame, palette[std::size_t(i) % palette_size]);
  }
  out += "</svg>\n";
  return out;
}

std::string svg_sweep_plot(const SweepResult& result) {
  if (result.rows.empty()) throw DegenerateInput("cannot plot an empty sweep");

  std::vector<double> xs, ys;
  for (const auto& row : result.rows) {
    if (!(row.mu > 0) || !(row.mean_time > 0))
      throw DegenerateInput("sweep plot needs positive mu and times");
    xs.push_back(std::log(row.mu));
    ys.push_back(std::log(row.mean_time));
  }
  Frame frame{*std::min_element(xs.begin(), xs.end()),
              *std::max_element(xs.begin(), xs.end()),
              *std::min_element(ys.begin(), ys.end()),
              *std::max_element(ys.begin(), ys.end())};
  if (frame.x_hi == frame.x_lo) {
    frame.x_lo -= 0.5;
    frame.x_hi += 0.5;
  }
  const double pad = 0.05 * (frame.y_hi - frame.y_lo + 1e-9);
  frame.y_lo -= pad;
  frame.y_hi += pad;

  std::string out;
  open_svg(out);
  draw_axes(out, frame, "ln mu", "ln mean time");
  if (result.fit) {
    std::vector<double> fit_x{frame.x_lo, frame.x_hi};
    std::vector<double> fit_y{
        result.fit->intercept + result.fit->slope * frame.x_lo,
        result.fit->intercept + result.fit->slope * frame.x_hi};
    draw_polyline(out, fit_x, fit_y, frame, "#7f7f7f");
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    out += "<circle r=\"4\" fill=\"" + std::string(palette[0]) + "\" cx=\"" +
           num(frame.px(xs[k])) + "\" cy=\"" + num(frame.py(ys[k])) + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace pesim
