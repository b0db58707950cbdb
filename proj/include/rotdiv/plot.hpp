#pragma once

#include <string>
#include <vector>

namespace rotdiv {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = true;
  std::vector<PlotSeries> series;
};

/// Static line plot. Non-positive y values are dropped on a log axis. The
/// output depends only on the input (no timestamps), so reruns are identical.
std::string render_svg(const PlotSpec& plot);

}  // namespace rotdiv
