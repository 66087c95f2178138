#include "mindx/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mindx/parallel.hpp"

namespace mindx {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
}

void check_peak(double peak) {
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw std::invalid_argument("image peak must be finite and > 0");
  }
}

}  // namespace

Image::Image(int width, int height, double peak, double fill)
    : width_(width), height_(height), peak_(peak) {
  check_dims(width, height);
  check_peak(peak);
  if (!std::isfinite(fill)) throw std::invalid_argument("non-finite fill value");
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, double peak, std::vector<double> data)
    : width_(width), height_(height), peak_(peak), data_(std::move(data)) {
  check_dims(width, height);
  check_peak(peak);
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("image data length does not match width*height");
  }
  if (!all_finite()) throw std::invalid_argument("image data contains NaN or Inf");
}

void Image::set_peak(double peak) {
  check_peak(peak);
  peak_ = peak;
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

PixelMask::PixelMask(int width, int height, bool fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill ? 1 : 0);
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double mean_squared_error(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("image dimensions differ");
  const double sum = deterministic_sum(a.size(), [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  });
  return sum / static_cast<double>(a.size());
}

double psnr(const Image& reference, const Image& estimate, double peak) {
  if (!reference.same_shape(estimate)) {
    throw std::invalid_argument("psnr: image dimensions differ");
  }
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
  if (!reference.all_finite() || !estimate.all_finite()) {
    throw std::invalid_argument("psnr: non-finite pixel");
  }
  const double mse = mean_squared_error(reference, estimate);
  if (mse == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / mse);
}

Image clamp_to_range(const Image& img, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("clamp_to_range: lo must be < hi");
  Image out = img;
  parallel_for(static_cast<std::ptrdiff_t>(out.size()), [&](std::ptrdiff_t i) {
    out[static_cast<std::size_t>(i)] = std::clamp(out[static_cast<std::size_t>(i)], lo, hi);
  });
  return out;
}

}  // namespace mindx
