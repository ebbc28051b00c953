#pragma once

#include <string>
#include <vector>

namespace xmv::cli {

struct Series {
  std::string name;
  std::vector<double> x;  // unused by bar charts
  std::vector<double> y;
};

// Grouped bars: one group per category, one bar per series. Values are
// drawn on a fixed [0, 1] axis.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& categories,
                          const std::vector<Series>& series);

// Polylines over a shared axis fitted to the finite data. Non-finite
// points are skipped.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

// Step outlines of normalized histograms sharing `edges`.
std::string histogram_svg(const std::string& title, const std::vector<double>& edges,
                          const std::vector<Series>& series);

}  // namespace xmv::cli
