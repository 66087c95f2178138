#include "mindx/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mindx {

Image synthetic_ramp(int width, int height, double peak) {
  Image img(width, height, peak);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      img.at(r, c) = width > 1 ? peak * c / (width - 1) : 0.0;
    }
  }
  return img;
}

Image synthetic_shapes(int width, int height, double peak) {
  Image img(width, height, peak);
  const double cx = 0.33 * width, cy = 0.35 * height, rad = 0.2 * std::min(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double v = 0.45 + 0.1 * std::sin(3.0 * c / width);
      if (std::hypot(c - cx, r - cy) < rad) v = 0.9;
      if (c > 0.55 * width && c < 0.9 * width && r > 0.15 * height && r < 0.45 * height) v = 0.15;
      // triangle with apex at top, base along 0.9 h
      const double tr = (r - 0.55 * height) / (0.35 * height);
      if (tr >= 0.0 && tr <= 1.0 && std::fabs(c - 0.6 * width) < tr * 0.25 * width) v = 0.7;
      if (r > 0.6 * height && c < 0.3 * width) v = 0.05;
      img.at(r, c) = v * peak;
    }
  }
  return img;
}

bool is_synthetic_name(std::string_view name) {
  return name == "synthetic:ramp" || name == "synthetic:shapes";
}

Image synthetic_by_name(std::string_view name) {
  if (name == "synthetic:ramp") return synthetic_ramp(128, 128);
  if (name == "synthetic:shapes") return synthetic_shapes(128, 128);
  throw std::invalid_argument("unknown synthetic image: " + std::string(name));
}

}  // namespace mindx
