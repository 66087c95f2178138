#include "mindx/median.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "mindx/parallel.hpp"

namespace mindx {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

void AmfParams::validate() const {
  if (initial_window < 3 || initial_window % 2 == 0 || max_window % 2 == 0 ||
      max_window < initial_window) {
    throw std::invalid_argument("AmfParams: windows must be odd with 3 <= initial <= max");
  }
}

AcwmfParams AcwmfParams::for_peak(double peak) {
  AcwmfParams p;
  for (auto& t : p.thresholds) t *= peak / 255.0;
  return p;
}

void AcwmfParams::validate() const {
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("AcwmfParams: window must be odd >= 3");
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    if (thresholds[k] > thresholds[k - 1]) {
      throw std::invalid_argument("AcwmfParams: thresholds must be non-increasing");
    }
  }
  if (!(s >= 0.0)) throw std::invalid_argument("AcwmfParams: s must be >= 0");
}

namespace {

void gather(const Image& img, int row, int col, int half, std::vector<double>& out) {
  out.clear();
  for (int dr = -half; dr <= half; ++dr) {
    const int r = reflect_index(row + dr, img.height());
    for (int dc = -half; dc <= half; ++dc) {
      out.push_back(img.at(r, reflect_index(col + dc, img.width())));
    }
  }
}

double median_inplace(std::vector<double>& v) {
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

Image amf(const Image& img, const AmfParams& params) {
  params.validate();
  Image out = img;
  const int h = img.height();
  const int w = img.width();
  parallel_for(h, [&](std::ptrdiff_t row_index) {
    const int row = static_cast<int>(row_index);
    std::vector<double> buf;
    buf.reserve(static_cast<std::size_t>(params.max_window * params.max_window));
    for (int col = 0; col < w; ++col) {
      const double y = img.at(row, col);
      double result = y;
      for (int win = params.initial_window; win <= params.max_window; win += 2) {
        gather(img, row, col, win / 2, buf);
        const auto [lo_it, hi_it] = std::minmax_element(buf.begin(), buf.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        const double med = median_inplace(buf);
        if (lo < med && med < hi) {
          result = (lo < y && y < hi) ? y : med;
          break;
        }
        if (win + 2 > params.max_window) result = med;
      }
      out.at(row, col) = result;
    }
  });
  return out;
}

Image acwmf(const Image& img, const AcwmfParams& params) {
  params.validate();
  Image out = img;
  const int h = img.height();
  const int w = img.width();
  const int half = params.window / 2;
  parallel_for(h, [&](std::ptrdiff_t row_index) {
    const int row = static_cast<int>(row_index);
    std::vector<double> window;
    std::vector<double> weighted;
    std::vector<double> deviations;
    for (int col = 0; col < w; ++col) {
      const double y = img.at(row, col);
      gather(img, row, col, half, window);

      weighted = window;
      const double m0 = median_inplace(weighted);

      deviations.resize(window.size());
      for (std::size_t i = 0; i < window.size(); ++i) deviations[i] = std::fabs(window[i] - m0);
      const double mad = median_inplace(deviations);

      bool replace = std::fabs(m0 - y) > params.s * mad + params.thresholds[0];
      for (int k = 1; k < 4 && !replace; ++k) {
        // Center weight 2k+1: the center appears 2k extra times.
        weighted = window;
        weighted.insert(weighted.end(), static_cast<std::size_t>(2 * k), y);
        const double mk = median_inplace(weighted);
        replace = std::fabs(mk - y) > params.s * mad + params.thresholds[static_cast<std::size_t>(k)];
      }
      out.at(row, col) = replace ? m0 : y;
    }
  });
  return out;
}

Image impulse_filter(const Image& img, ImpulseType impulse_type) {
  return impulse_type == ImpulseType::SaltPepper ? amf(img)
                                                 : acwmf(img, AcwmfParams::for_peak(img.peak()));
}

Image init_outlier_field(const Image& img, ImpulseType impulse_type) {
  const Image filtered = impulse_filter(img, impulse_type);
  Image z(img.width(), img.height(), img.peak());
  parallel_for(static_cast<std::ptrdiff_t>(img.size()), [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    z[k] = std::fabs(filtered[k] - img[k]);
  });
  return z;
}

}  // namespace mindx
