#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace locpress {

/// Locale-independent decimal with 15 significant digits.
std::string fmt15(double x);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct SvgLayer {
  std::vector<std::array<double, 2>> points;
  std::string color = "#1f77b4";
  double radius = 1.5;
  bool polyline = false;  // closed outline instead of dots
};

/// Self-contained SVG scatter/outline plot; y grows upward.
std::string render_svg(const std::vector<SvgLayer>& layers, const std::string& title, int width = 640,
                       int height = 640);

}  // namespace locpress
