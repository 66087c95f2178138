#include "mindx/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mindx::reference {

namespace {

int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

std::vector<double> sorted_window(const Image& img, int row, int col, int half) {
  std::vector<double> v;
  for (int dr = -half; dr <= half; ++dr) {
    for (int dc = -half; dc <= half; ++dc) {
      v.push_back(img.at(mirror(row + dr, img.height()), mirror(col + dc, img.width())));
    }
  }
  std::sort(v.begin(), v.end());
  return v;
}

double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

GradField grad(const Image& img) {
  GradField g(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const std::size_t i = img.index(r, c);
      if (c < img.width() - 1) g.gx[i] = img.at(r, c + 1) - img.at(r, c);
      if (r < img.height() - 1) g.gy[i] = img.at(r + 1, c) - img.at(r, c);
    }
  }
  return g;
}

Image div(const GradField& field) {
  const int w = field.width;
  const int h = field.height;
  Image out(w, h, 1.0);
  auto px = [&](int r, int c) { return field.gx[static_cast<std::size_t>(r * w + c)]; };
  auto py = [&](int r, int c) { return field.gy[static_cast<std::size_t>(r * w + c)]; };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double dx = 0.0, dy = 0.0;
      if (c < w - 1) dx += px(r, c);
      if (c > 0) dx -= px(r, c - 1);
      if (r < h - 1) dy += py(r, c);
      if (r > 0) dy -= py(r - 1, c);
      out.at(r, c) = dx + dy;
    }
  }
  return out;
}

GradField prox_tv_dual_shrink(const GradField& t, double lambda1, double rho) {
  GradField out(t.width, t.height);
  const double a = lambda1 * rho;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double norm = std::hypot(t.gx[i], t.gy[i]);
    const double denom = std::max(a, norm);
    const double factor = denom > 0.0 ? a / denom : 0.0;
    out.gx[i] = t.gx[i] - factor * t.gx[i];
    out.gy[i] = t.gy[i] - factor * t.gy[i];
  }
  return out;
}

Image prox_data(const Image& t, const Image& y_tilde, const PixelMask& mask, double tau) {
  Image out = t;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (mask[i]) out[i] = (2.0 * tau / (2.0 * tau + 1.0)) * y_tilde[i] + (1.0 / (2.0 * tau + 1.0)) * t[i];
  }
  return out;
}

Image amf(const Image& img, const AmfParams& params) {
  Image out = img;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const double y = img.at(r, c);
      for (int win = params.initial_window; win <= params.max_window; win += 2) {
        const auto v = sorted_window(img, r, c, win / 2);
        const double lo = v.front(), hi = v.back(), med = v[v.size() / 2];
        if (med > lo && med < hi) {
          out.at(r, c) = (y > lo && y < hi) ? y : med;
          break;
        }
        out.at(r, c) = med;
      }
    }
  }
  return out;
}

Image acwmf(const Image& img, const AcwmfParams& params) {
  Image out = img;
  const int half = params.window / 2;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const double y = img.at(r, c);
      const auto window = sorted_window(img, r, c, half);
      const double m0 = window[window.size() / 2];
      std::vector<double> dev;
      for (double v : window) dev.push_back(std::fabs(v - m0));
      const double mad = sorted_median(dev);
      bool replace = false;
      for (int k = 0; k < 4; ++k) {
        std::vector<double> weighted = window;
        for (int e = 0; e < 2 * k; ++e) weighted.push_back(y);
        const double mk = sorted_median(weighted);
        if (std::fabs(mk - y) > params.s * mad + params.thresholds[static_cast<std::size_t>(k)]) {
          replace = true;
        }
      }
      out.at(r, c) = replace ? m0 : y;
    }
  }
  return out;
}

Image gat_forward(const Image& img, double sigma) {
  const double peak_shift = img.peak() + 0.375 + sigma * sigma;
  Image out(img.width(), img.height(), 2.0 * std::sqrt(peak_shift));
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double a = img[i] + 0.375 + sigma * sigma;
    out[i] = a > 0.0 ? 2.0 * std::sqrt(a) : 0.0;
  }
  return out;
}

}  // namespace mindx::reference
