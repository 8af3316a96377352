#include "lab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lab {
namespace {

constexpr int kLeft = 70, kRight = 20, kTop = 36, kBottom = 50;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Round axis limits outward to a tick spacing.
void nice_range(double& lo, double& hi, double& step) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  step = (r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0) * mag;
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
}

void frame(std::ostringstream& o, int w, int h, const std::string& title, const std::string& xl,
           const std::string& yl) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
    << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
  o << "<text x=\"" << (kLeft + w - kRight) / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">" << esc(xl)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << (kTop + h - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (kTop + h - kBottom) / 2 << ")\">" << esc(yl) << "</text>\n";
}

}  // namespace

std::string render_svg(const LinePlot& plot, int width, int height) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const Series& s : plot.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
  double xs, ys;
  nice_range(xlo, xhi, xs);
  nice_range(ylo, yhi, ys);
  const double pw = width - kLeft - kRight, ph = height - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  auto Y = [&](double y) { return kTop + (yhi - y) / (yhi - ylo) * ph; };

  std::ostringstream o;
  frame(o, width, height, plot.title, plot.x_label, plot.y_label);
  o << "<g stroke=\"#ddd\">\n";
  for (double x = xlo; x <= xhi + 0.5 * xs; x += xs)
    o << "<line x1=\"" << px(X(x)) << "\" y1=\"" << kTop << "\" x2=\"" << px(X(x)) << "\" y2=\"" << kTop + ph
      << "\"/>\n";
  for (double y = ylo; y <= yhi + 0.5 * ys; y += ys)
    o << "<line x1=\"" << kLeft << "\" y1=\"" << px(Y(y)) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << px(Y(y))
      << "\"/>\n";
  o << "</g>\n";
  for (double x = xlo; x <= xhi + 0.5 * xs; x += xs)
    o << "<text x=\"" << px(X(x)) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << num(x)
      << "</text>\n";
  for (double y = ylo; y <= yhi + 0.5 * ys; y += ys)
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << px(Y(y) + 4) << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  int legend = 0;
  for (const Series& s : plot.series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) o << " stroke-dasharray=\"2 3\"";
    o << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << px(X(s.x[i])) << "," << px(Y(s.y[i])) << " ";
    }
    o << "\"/>\n";
    if (!s.label.empty()) {
      const double ly = kTop + 14 + 16 * legend++;
      o << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << px(ly - 4) << "\" x2=\"" << kLeft + pw - 125
        << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"2 3\"" : "") << "/>\n";
      o << "<text x=\"" << kLeft + pw - 120 << "\" y=\"" << px(ly) << "\">" << esc(s.label) << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_heatmap(const std::vector<std::vector<double>>& values, double x0, double x1, double y0,
                           double y1, const std::string& title, const std::string& x_label,
                           const std::string& y_label, int width, int height) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : values)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  const double pw = width - kLeft - kRight, ph = height - kTop - kBottom;
  std::ostringstream o;
  frame(o, width, height, title, x_label, y_label);
  const std::size_t rows = values.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t cols = values[r].size();
    const double ch = ph / static_cast<double>(rows), cw = pw / static_cast<double>(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      // Dark blue (low) to pale yellow (high).
      const double u = (values[r][c] - lo) / (hi - lo);
      const int red = static_cast<int>(20 + 235 * u), green = static_cast<int>(30 + 220 * u),
                blue = static_cast<int>(110 + 60 * (1 - u));
      char col[8];
      std::snprintf(col, sizeof col, "#%02x%02x%02x", red, green, blue);
      o << "<rect x=\"" << px(kLeft + c * cw) << "\" y=\"" << px(kTop + ph - (r + 1) * ch) << "\" width=\""
        << px(cw + 0.3) << "\" height=\"" << px(ch + 0.3) << "\" fill=\"" << col << "\"/>\n";
    }
  }
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << kLeft << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << num(x0) << "</text>\n";
  o << "<text x=\"" << kLeft + pw << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << num(x1)
    << "</text>\n";
  o << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\">" << num(y0) << "</text>\n";
  o << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";
  o << "<text x=\"" << kLeft + pw << "\" y=\"" << kTop - 6 << "\" text-anchor=\"end\">range " << num(lo) << " .. "
    << num(hi) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace lab
