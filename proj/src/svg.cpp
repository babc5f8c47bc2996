#include "discret2di/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace d2d::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Canvas::Canvas(double width, double height) : width_(width), height_(height) {}

void Canvas::set_view(double x_min, double x_max, double y_min, double y_max) {
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
}

double Canvas::px(double x) const { return margin_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - 2 * margin_); }
double Canvas::py(double y) const { return height_ - margin_ - (y - y_min_) / (y_max_ - y_min_) * (height_ - 2 * margin_); }

void Canvas::rect(double x, double y, double w, double h, const std::string& fill, double opacity) {
  items_.push_back("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
                   "\" fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) + "\"/>");
}

void Canvas::line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                  const std::string& dash) {
  std::string item = "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
                     "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"";
  if (!dash.empty()) item += " stroke-dasharray=\"" + dash + "\"";
  items_.push_back(item + "/>");
}

void Canvas::polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& stroke,
                      double width) {
  std::string pts;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) pts += num(xs[i]) + "," + num(ys[i]) + " ";
  items_.push_back("<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
                   num(width) + "\"/>");
}

void Canvas::circle(double x, double y, double r, const std::string& fill, double opacity) {
  items_.push_back("<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill +
                   "\" fill-opacity=\"" + num(opacity) + "\"/>");
}

void Canvas::text(double x, double y, const std::string& content, int size, const std::string& anchor) {
  items_.push_back("<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
                   "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + escape(content) + "</text>");
}

std::string Canvas::str() const {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
                    num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& item : items_) out += item + "\n";
  return out + "</svg>\n";
}

std::string palette(int index) {
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kColors[((index % 10) + 10) % 10];
}

std::string timeline(const SymbolSequence& seq, double threshold, const std::vector<DiagnosisResult>& diagnoses) {
  const double width = 1200, panel = 160, margin = 50;
  Canvas canvas(width, 3 * panel + 2 * margin);
  if (seq.empty()) return canvas.str();
  const double t0 = seq.front().timestamp, t1 = seq.back().timestamp;
  auto px = [&](double t) { return margin + (t - t0) / std::max(t1 - t0, 1.0) * (width - 2 * margin); };

  int max_state = 0;
  double ll_min = threshold, ll_max = threshold;
  for (const auto& r : seq) {
    max_state = std::max(max_state, r.state.id);
    ll_min = std::min(ll_min, std::max(r.log_likelihood, threshold * 4.0));
    ll_max = std::max(ll_max, r.log_likelihood);
  }
  auto state_y = [&](int s) { return margin + panel - 10 - (panel - 20) * s / std::max(max_state, 1); };
  auto ll_y = [&](double v) {
    v = std::clamp(v, ll_min, ll_max);
    return margin + 2 * panel - 10 - (panel - 20) * (v - ll_min) / std::max(ll_max - ll_min, 1e-9);
  };

  canvas.text(margin, margin - 10, "observational state", 12);
  for (const auto& r : seq) canvas.circle(px(r.timestamp), state_y(r.state.id), 1.5, palette(r.state.id));
  canvas.text(margin, margin + panel + 12, "log-likelihood (threshold dashed)", 12);
  std::vector<double> xs, ys;
  for (const auto& r : seq) {
    xs.push_back(px(r.timestamp));
    ys.push_back(ll_y(r.log_likelihood));
  }
  canvas.polyline(xs, ys, "#1f77b4", 1.0);
  canvas.line(margin, ll_y(threshold), width - margin, ll_y(threshold), "#d62728", 1.0, "4,3");

  canvas.text(margin, margin + 2 * panel + 12, "diagnosed timestamps", 12);
  const double bar = std::max(1.0, (width - 2 * margin) / std::max<double>(static_cast<double>(seq.size()), 1.0));
  for (const auto& d : diagnoses) {
    canvas.rect(px(d.timestamp), margin + 2 * panel + 20, bar, panel - 40, "#d62728", 0.8);
  }
  return canvas.str();
}

std::string scatter(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<int>& states,
                    const std::vector<ScatterMarker>& markers,
                    const std::vector<std::vector<std::pair<double, double>>>& contours, const std::string& title) {
  Canvas canvas(700, 600);
  if (xs.empty()) return canvas.str();
  auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const double pad_x = 0.05 * (*xmax - *xmin + 1e-9), pad_y = 0.05 * (*ymax - *ymin + 1e-9);
  canvas.set_view(*xmin - pad_x, *xmax + pad_x, *ymin - pad_y, *ymax + pad_y);
  canvas.text(350, 25, title, 14, "middle");
  for (const auto& contour : contours) {
    std::vector<double> cx, cy;
    for (const auto& [x, y] : contour) {
      cx.push_back(canvas.px(x));
      cy.push_back(canvas.py(y));
    }
    canvas.polyline(cx, cy, "#4a90d9", 0.8);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    canvas.circle(canvas.px(xs[i]), canvas.py(ys[i]), 1.8, palette(i < states.size() ? states[i] : 0), 0.6);
  }
  for (const auto& m : markers) {
    canvas.circle(canvas.px(m.x), canvas.py(m.y), 5, "#d62728");
    canvas.text(canvas.px(m.x) + 7, canvas.py(m.y) - 7, m.label, 11);
  }
  return canvas.str();
}

}  // namespace d2d::svg
