#pragma once

#include <string>
#include <vector>

#include "relvar/errors.h"

namespace relvar {

// One polyline on a shared axis.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#2266cc";
  double width = 1.2;
  bool dashed = false;
};

// Static SVG line plot: axes, ticks, legend, and the data provenance embedded
// as an XML comment.  No external assets, viewable as-is.
void write_svg_plot(const std::string& file, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series,
                    const std::vector<std::string>& provenance = {});

}  // namespace relvar
