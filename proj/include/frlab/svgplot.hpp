#pragma once

#include <Eigen/Core>
#include <sstream>
#include <string>
#include <vector>

namespace frlab {

/// Minimal SVG drawing surface; coordinates in pixels, origin top-left.
class SvgCanvas {
 public:
  SvgCanvas(int width, int height);

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                double width = 1.5);
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none");
  void circle(double cx, double cy, double r, const std::string& fill);
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start", const std::string& color = "#333");

  int width() const { return width_; }
  int height() const { return height_; }
  std::string render() const;
  void save(const std::string& path) const;

 private:
  int width_, height_;
  std::ostringstream body_;
};

/// Multi-series line chart with axes, ticks and a legend.
class SvgLineChart {
 public:
  SvgLineChart(std::string title, std::string xlabel, std::string ylabel, int width = 720,
               int height = 420);

  void add_series(const std::string& name, const std::vector<double>& xs,
                  const std::vector<double>& ys);
  /// Optional symmetric error band around the series of the same index.
  void add_band(size_t series_index, const std::vector<double>& half_widths);
  void set_y_range(double lo, double hi);

  void save(const std::string& path) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> xs, ys, band;
  };
  std::string title_, xlabel_, ylabel_;
  int width_, height_;
  std::vector<Series> series_;
  bool fixed_y_ = false;
  double y_lo_ = 0, y_hi_ = 1;
};

/// Grayscale-to-terrain shaded heatmap of a matrix (row 0 at the bottom).
void save_heatmap_svg(const std::string& path, const Eigen::MatrixXd& values,
                      const std::string& title, int cell_px = 4);

const char* plot_color(size_t index);

}  // namespace frlab
