#pragma once

#include <string_view>

#include "mindx/image.hpp"

namespace mindx {

/// Horizontal ramp from 0 to peak.
Image synthetic_ramp(int width, int height, double peak = 255.0);

/// Piecewise-constant scene (disc, rectangle, triangle) on a mid-gray
/// background with a soft vertical shading band.
Image synthetic_shapes(int width, int height, double peak = 255.0);

/// Bundled 128x128 fixtures: "synthetic:ramp", "synthetic:shapes".
bool is_synthetic_name(std::string_view name);
Image synthetic_by_name(std::string_view name);

}  // namespace mindx
