#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "mindx/image.hpp"

namespace mindx {

enum class ImpulseType { SaltPepper, RandomValued };

std::string_view to_string(ImpulseType t);
ImpulseType parse_impulse_type(std::string_view s);

struct NoiseSpec {
  double peak = 255.0;
  double sigma = 0.0;          // Gaussian std, intensity units
  double impulse_ratio = 0.0;  // fraction of pixels replaced, in [0, 1]
  ImpulseType impulse_type = ImpulseType::SaltPepper;
  std::uint64_t seed = 0;
  // Replace exactly round(r*N) pixels (chosen uniformly) instead of an
  // independent Bernoulli(r) draw per pixel.
  bool exact_count = false;

  void validate() const;
};

struct Corrupted {
  Image noisy;
  PixelMask clean_mask;  // true where the pixel was not hit by an impulse
};

/// Mixed noise: y = Poisson(x) + N(0, sigma^2) off the impulse set, impulse
/// value (0/peak or Uniform[0, peak]) on it. Values are not clamped.
Corrupted corrupt(const Image& clean, const NoiseSpec& spec);

/// Linear rescale so that img.peak maps to new_peak.
Image rescale_to_peak(const Image& img, double new_peak);

}  // namespace mindx
