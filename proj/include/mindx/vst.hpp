#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mindx/image.hpp"

namespace mindx {

// Generalized Anscombe transform: 2 sqrt(y + 3/8 + sigma^2), 0 below the
// branch point.
double gat_forward(double y, double sigma);
Image gat_forward(const Image& img, double sigma);

/// (v/2)^2 - 3/8 - sigma^2, floored at 0.
double gat_inverse_algebraic(double v, double sigma);
Image gat_inverse_algebraic(const Image& img, double sigma, double peak);

/// E[gat_forward(Poisson(x) + N(0, sigma^2))], by quadrature.
/// Throws std::runtime_error when a per-term integral does not reach 1e-8
/// relative accuracy.
double gat_expectation(double x, double sigma);

/// Poisson terms kept for mean x: ceil(x + 10 sqrt(x) + 30).
std::int64_t poisson_truncation(double x);

/// Tabulated inverse of x -> gat_expectation(x, sigma): grid[k] is the
/// stabilized value for clean value values[k].
struct GatLut {
  double sigma = 0.0;
  std::vector<double> grid;
  std::vector<double> values;

  double grid_min() const { return grid.front(); }
  double grid_max() const { return grid.back(); }
  double x_max() const { return values.back(); }
  /// Throws std::invalid_argument if the table breaks its ordering invariants.
  void validate() const;
};

inline constexpr std::size_t kDefaultLutPoints = 512;
inline constexpr double kLutMinClean = 1e-3;
inline constexpr std::uint32_t kLutFormatVersion = 1;

/// Clean values {0} U logspace(1e-3, x_max, points); one expectation per
/// value, computed in parallel.
GatLut build_exact_unbiased_lut(double sigma, double x_max,
                                std::size_t points = kDefaultLutPoints);

/// Piecewise-linear lookup. Below grid_min -> 0. Above grid_max the
/// algebraic inverse is used, shifted to be continuous at grid_max.
double igat_exact_unbiased(double v, const GatLut& lut);
Image igat_exact_unbiased(const Image& img, const GatLut& lut, double peak);

// Binary layout, little-endian: "MINDXLUT", u32 version, f64 sigma,
// u64 length, f64 grid[length], f64 values[length].
std::vector<std::uint8_t> serialize_lut(const GatLut& lut);
GatLut deserialize_lut(const std::vector<std::uint8_t>& bytes);
void save_lut(const GatLut& lut, const std::filesystem::path& path);
GatLut load_lut(const std::filesystem::path& path);
std::string lut_to_csv(const GatLut& lut);

/// Process-wide memo of built tables. With a non-empty cache_dir, tables
/// are also persisted there and reloaded when sigma, length and x_max match.
const GatLut& cached_lut(double sigma, double x_max,
                         const std::filesystem::path& cache_dir = {},
                         std::size_t points = kDefaultLutPoints);

}  // namespace mindx
