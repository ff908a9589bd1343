#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace drm::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

/// Minimal SVG line chart. Non-positive values are dropped on log axes.
void write_line_chart(const std::filesystem::path& path, const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace drm::cli
