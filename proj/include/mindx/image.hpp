#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mindx {

/// Grayscale plane of double intensities, row-major, with a nominal peak
/// value. Quantization only happens on export (see io.hpp).
class Image {
 public:
  Image(int width, int height, double peak, double fill = 0.0);
  Image(int width, int height, double peak, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  double peak() const { return peak_; }
  std::size_t size() const { return data_.size(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(int row, int col) const { return data_[index(row, col)]; }
  double& at(int row, int col) { return data_[index(row, col)]; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  std::span<const double> pixels() const { return data_; }
  std::span<double> pixels() { return data_; }

  void set_peak(double peak);
  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_;
  int height_;
  double peak_;
  std::vector<double> data_;
};

/// One flag per pixel; true marks membership (for Omega, "noise free").
class PixelMask {
 public:
  PixelMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
  std::size_t count() const;
  bool same_shape(const Image& img) const {
    return width_ == img.width() && height_ == img.height();
  }

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;  // not vector<bool>: kernels write in parallel
};

/// Returned by psnr() when the two images are identical.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(peak^2 / MSE) in dB. Throws std::invalid_argument on shape
/// mismatch, non-positive peak, or non-finite pixels.
double psnr(const Image& reference, const Image& estimate, double peak);

double mean_squared_error(const Image& a, const Image& b);

Image clamp_to_range(const Image& img, double lo, double hi);

}  // namespace mindx
