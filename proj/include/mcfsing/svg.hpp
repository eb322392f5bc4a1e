#pragma once

// Minimal SVG line and scatter plots for reports.

#include <filesystem>
#include <string>
#include <vector>

namespace mcfsing {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers_only = false;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = false;
  std::string annotation;
  std::vector<PlotSeries> series;
};

/// Non-finite samples (and non-positive ones on log axes) are skipped.
std::string render_svg(const PlotSpec& spec);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace mcfsing
