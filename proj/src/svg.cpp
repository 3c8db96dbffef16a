#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "locpress/io.hpp"

namespace locpress {

std::string render_svg(const std::vector<SvgLayer>& layers, const std::string& title, int width, int height) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& layer : layers)
    for (const auto& p : layer.points) {
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double margin = 30.0;
  const double scale = (std::min(width, height) - 2 * margin) / span;
  auto X = [&](double x) { return margin + (x - xmin) * scale; };
  auto Y = [&](double y) { return height - margin - (y - ymin) * scale; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
      width, height, width, height, margin, title);
  for (const auto& layer : layers) {
    if (layer.polyline) {
      std::string pts;
      for (const auto& p : layer.points) pts += fmt::format("{:.3f},{:.3f} ", X(p[0]), Y(p[1]));
      out += fmt::format("<polygon points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>\n", pts, layer.color);
    } else {
      for (const auto& p : layer.points)
        out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{}\" fill=\"{}\"/>\n", X(p[0]), Y(p[1]),
                           layer.radius, layer.color);
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace locpress
