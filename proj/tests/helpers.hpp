#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "mindx/image.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(MINDX_TEST_DATA_DIR) + "/" + name;
}

inline mindx::Image random_image(int w, int h, double lo, double hi, std::uint64_t seed,
                                 double peak = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  mindx::Image img(w, h, peak);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = dist(gen);
  return img;
}

inline mindx::PixelMask random_mask(int w, int h, double keep, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution bit(keep);
  mindx::PixelMask m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, bit(gen));
  return m;
}

inline double max_abs_diff(const mindx::Image& a, const mindx::Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
