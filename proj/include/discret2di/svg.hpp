#pragma once

#include <string>
#include <vector>

#include "discret2di/diagnosis.hpp"
#include "discret2di/discretization.hpp"

namespace d2d::svg {

// Minimal SVG builder with a data-to-pixel mapping for a single plot area.
class Canvas {
 public:
  Canvas(double width, double height);

  void set_view(double x_min, double x_max, double y_min, double y_max);
  double px(double x) const;
  double py(double y) const;

  void rect(double x, double y, double w, double h, const std::string& fill, double opacity = 1.0);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
            const std::string& dash = "");
  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& stroke,
                double width = 1.0);
  void circle(double x, double y, double r, const std::string& fill, double opacity = 1.0);
  void text(double x, double y, const std::string& content, int size = 12, const std::string& anchor = "start");

  std::string str() const;

 private:
  double width_, height_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1;
  double margin_ = 50;
  std::vector<std::string> items_;
};

std::string palette(int index);

// Three stacked panels: state id, log-likelihood with the threshold, and
// spans of diagnosed timestamps.
std::string timeline(const SymbolSequence& seq, double threshold, const std::vector<DiagnosisResult>& diagnoses);

struct ScatterMarker {
  double x = 0, y = 0;
  std::string label;
};

// Points colored by state, category means as labelled markers, and optional
// iso-likelihood contour segments.
std::string scatter(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<int>& states,
                    const std::vector<ScatterMarker>& markers,
                    const std::vector<std::vector<std::pair<double, double>>>& contours, const std::string& title);

}  // namespace d2d::svg
