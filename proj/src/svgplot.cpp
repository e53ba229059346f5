#include "frlab/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace frlab {

namespace {
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
}

const char* plot_color(size_t index) { return kPalette[index % 10]; }

SvgCanvas::SvgCanvas(int width, int height) : width_(width), height_(height) {}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& color,
                     double width) {
  body_ << "<line x1='" << x1 << "' y1='" << y1 << "' x2='" << x2 << "' y2='" << y2
        << "' stroke='" << color << "' stroke-width='" << width << "'/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color, double width) {
  body_ << "<polyline fill='none' stroke='" << color << "' stroke-width='" << width
        << "' points='";
  for (const auto& [x, y] : pts) body_ << x << "," << y << " ";
  body_ << "'/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke) {
  body_ << "<rect x='" << x << "' y='" << y << "' width='" << w << "' height='" << h
        << "' fill='" << fill << "' stroke='" << stroke << "'/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill) {
  body_ << "<circle cx='" << cx << "' cy='" << cy << "' r='" << r << "' fill='" << fill
        << "'/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& s, int size,
                     const std::string& anchor, const std::string& color) {
  body_ << "<text x='" << x << "' y='" << y << "' font-size='" << size
        << "' font-family='sans-serif' text-anchor='" << anchor << "' fill='" << color << "'>"
        << s << "</text>\n";
}

std::string SvgCanvas::render() const {
  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_ << "' height='" << height_
      << "' viewBox='0 0 " << width_ << " " << height_ << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << body_.str();
  out << "</svg>\n";
  return out.str();
}

void SvgCanvas::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg: cannot write " + path);
  out << render();
}

SvgLineChart::SvgLineChart(std::string title, std::string xlabel, std::string ylabel, int width,
                           int height)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
      width_(width), height_(height) {}

void SvgLineChart::add_series(const std::string& name, const std::vector<double>& xs,
                              const std::vector<double>& ys) {
  series_.push_back({name, xs, ys, {}});
}

void SvgLineChart::add_band(size_t series_index, const std::vector<double>& half_widths) {
  if (series_index < series_.size()) series_[series_index].band = half_widths;
}

void SvgLineChart::set_y_range(double lo, double hi) {
  fixed_y_ = true;
  y_lo_ = lo;
  y_hi_ = hi;
}

void SvgLineChart::save(const std::string& path) const {
  const double ml = 60, mr = 20, mt = 36, mb = 48;
  const double pw = width_ - ml - mr, ph = height_ - mt - mb;
  double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
  double ymin = std::numeric_limits<double>::max(), ymax = -ymin;
  for (const auto& s : series_) {
    for (size_t i = 0; i < s.xs.size(); ++i) {
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      double b = i < s.band.size() ? s.band[i] : 0.0;
      ymin = std::min(ymin, s.ys[i] - b);
      ymax = std::max(ymax, s.ys[i] + b);
    }
  }
  if (series_.empty() || xmin > xmax) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (fixed_y_) {
    ymin = y_lo_;
    ymax = y_hi_;
  }
  if (ymax - ymin < 1e-12) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  SvgCanvas canvas(width_, height_);
  canvas.text(width_ / 2.0, 20, title_, 14, "middle");
  canvas.line(ml, mt, ml, mt + ph, "#333");
  canvas.line(ml, mt + ph, ml + pw, mt + ph, "#333");
  for (int i = 0; i <= 5; ++i) {
    double xv = xmin + (xmax - xmin) * i / 5.0;
    double yv = ymin + (ymax - ymin) * i / 5.0;
    std::ostringstream xs, ys;
    xs.precision(3);
    ys.precision(3);
    xs << xv;
    ys << yv;
    canvas.line(px(xv), mt + ph, px(xv), mt + ph + 4, "#333");
    canvas.text(px(xv), mt + ph + 18, xs.str(), 10, "middle");
    canvas.line(ml - 4, py(yv), ml, py(yv), "#333");
    canvas.text(ml - 8, py(yv) + 4, ys.str(), 10, "end");
    canvas.line(ml, py(yv), ml + pw, py(yv), "#eee");
  }
  canvas.text(ml + pw / 2, height_ - 10, xlabel_, 12, "middle");
  canvas.text(16, mt + ph / 2, ylabel_, 12, "middle");

  for (size_t si = 0; si < series_.size(); ++si) {
    const auto& s = series_[si];
    std::string color = plot_color(si);
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < s.xs.size(); ++i) pts.emplace_back(px(s.xs[i]), py(s.ys[i]));
    canvas.polyline(pts, color);
    for (size_t i = 0; i < s.band.size() && i < s.xs.size(); ++i) {
      canvas.line(px(s.xs[i]), py(s.ys[i] - s.band[i]), px(s.xs[i]), py(s.ys[i] + s.band[i]),
                  color, 0.8);
    }
    double lx = ml + pw - 150, ly = mt + 16.0 * si + 10;
    canvas.line(lx, ly, lx + 18, ly, color, 2.0);
    canvas.text(lx + 24, ly + 4, s.name, 11);
  }
  canvas.save(path);
}

void save_heatmap_svg(const std::string& path, const Eigen::MatrixXd& values,
                      const std::string& title, int cell_px) {
  const int rows = static_cast<int>(values.rows());
  const int cols = static_cast<int>(values.cols());
  double lo = values.minCoeff(), hi = values.maxCoeff();
  if (hi - lo < 1e-12) hi = lo + 1.0;
  SvgCanvas canvas(cols * cell_px + 40, rows * cell_px + 50);
  canvas.text(20, 20, title, 13);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double t = (values(i, j) - lo) / (hi - lo);
      int r = static_cast<int>(40 + 180 * t);
      int g = static_cast<int>(60 + 140 * t);
      int b = static_cast<int>(120 + 80 * (1 - t));
      std::ostringstream color;
      color << "rgb(" << r << "," << g << "," << b << ")";
      canvas.rect(20.0 + j * cell_px, 30.0 + (rows - 1 - i) * cell_px, cell_px, cell_px,
                  color.str());
    }
  }
  std::ostringstream lo_s, hi_s;
  lo_s.precision(3);
  hi_s.precision(3);
  lo_s << "min " << lo;
  hi_s << "max " << hi;
  canvas.text(20, 30.0 + rows * cell_px + 14, lo_s.str(), 10);
  canvas.text(140, 30.0 + rows * cell_px + 14, hi_s.str(), 10);
  canvas.save(path);
}

}  // namespace frlab
