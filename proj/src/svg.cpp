#include "relvar/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace relvar {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 46, kBottom = 56;

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// XML comments must not contain "--"
std::string comment_safe(std::string s) {
  std::size_t pos = 0;
  while ((pos = s.find("--", pos)) != std::string::npos) s.replace(pos, 2, "- -");
  return s;
}

std::string num(double v, const char* fmt = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) { lo = 0.0; hi = 1.0; }
    if (lo == hi) { lo -= 1.0; hi += 1.0; }
    const double pad = 0.04 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

void write_svg_plot(const std::string& file, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series,
                    const std::vector<std::string>& provenance) {
  Range xr, yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw input_error("svg: series x/y lengths differ");
    for (double v : s.x) xr.include(v);
    for (double v : s.y) yr.include(v);
  }
  xr.finish();
  yr.finish();
  const auto px = [&](double v) {
    return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight);
  };
  const auto py = [&](double v) {
    return kHeight - kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom);
  };

  std::ofstream out(file);
  if (!out) throw input_error("cannot write '" + file + "'");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  for (const auto& line : provenance) out << "<!-- " << comment_safe(line) << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << esc(title) << "</text>\n";

  // axes with five ticks per side
  out << "<g stroke=\"#444\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    out << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << num(px(fx)) << "\" y2=\"" << kHeight - kBottom + 5 << "\"/>\n";
    out << "<text x=\"" << num(px(fx)) << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#222\">" << num(fx, "%.4g")
        << "</text>\n";
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << kLeft
        << "\" y2=\"" << num(py(fy)) << "\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(fy) + 4)
        << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#222\">" << num(fy, "%.4g")
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << esc(x_label)
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << (kTop + kHeight - kBottom) / 2 << ")\">" << esc(y_label)
      << "</text>\n";

  for (const auto& s : series) {
    if (s.x.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
        << "\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
      out << num(px(s.x[j])) << "," << num(py(s.y[j])) << " ";
    }
    out << "\"/>\n";
  }

  // legend for the labelled series, stacked in the top-right corner
  double ly = kTop + 8;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    out << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kRight - 126 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    out << "<text x=\"" << kWidth - kRight - 120 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << esc(s.label) << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
  if (!out) throw input_error("short write to '" + file + "'");
}

}  // namespace relvar
