#include "mindx/noise.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mindx/parallel.hpp"
#include "mindx/rng.hpp"

namespace mindx {

std::string_view to_string(ImpulseType t) {
  return t == ImpulseType::SaltPepper ? "salt-pepper" : "random-valued";
}

ImpulseType parse_impulse_type(std::string_view s) {
  if (s == "salt-pepper" || s == "sp" || s == "SaltPepper") return ImpulseType::SaltPepper;
  if (s == "random-valued" || s == "rv" || s == "RandomValued") return ImpulseType::RandomValued;
  throw std::invalid_argument("unknown impulse type: " + std::string(s));
}

void NoiseSpec::validate() const {
  if (!(peak > 0.0)) throw std::invalid_argument("NoiseSpec: peak must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
  if (!(impulse_ratio >= 0.0 && impulse_ratio <= 1.0)) {
    throw std::invalid_argument("NoiseSpec: impulse_ratio must be in [0, 1]");
  }
}

Corrupted corrupt(const Image& clean, const NoiseSpec& spec) {
  spec.validate();
  for (double v : clean.pixels()) {
    if (!(v >= 0.0 && v <= spec.peak)) {
      throw std::invalid_argument("corrupt: clean pixel outside [0, peak]");
    }
  }

  const std::size_t n = clean.size();
  Rng rng(spec.seed);
  PixelMask mask(clean.width(), clean.height(), true);

  if (spec.exact_count) {
    // Partial Fisher-Yates over pixel indices.
    const auto hits = static_cast<std::size_t>(std::llround(spec.impulse_ratio * n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < hits; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (n - i));
      std::swap(idx[i], idx[j]);
      mask.set(idx[i], false);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) mask.set(i, !rng.bernoulli(spec.impulse_ratio));
  }

  Image noisy(clean.width(), clean.height(), spec.peak);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) {
      double y = static_cast<double>(rng.poisson(clean[i]));
      if (spec.sigma > 0.0) y += spec.sigma * rng.normal();
      noisy[i] = y;
    } else if (spec.impulse_type == ImpulseType::SaltPepper) {
      noisy[i] = rng.bernoulli(0.5) ? spec.peak : 0.0;
    } else {
      noisy[i] = rng.uniform(0.0, spec.peak);
    }
  }
  return {std::move(noisy), std::move(mask)};
}

Image rescale_to_peak(const Image& img, double new_peak) {
  if (!(new_peak > 0.0)) throw std::invalid_argument("rescale_to_peak: new_peak must be > 0");
  if (new_peak == img.peak()) return img;
  const double old_peak = img.peak();
  Image out(img.width(), img.height(), new_peak);
  parallel_for(static_cast<std::ptrdiff_t>(img.size()), [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = img[k] * new_peak / old_peak;
  });
  return out;
}

}  // namespace mindx
