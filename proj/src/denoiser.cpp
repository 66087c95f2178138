#include "mindx/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mindx/median.hpp"
#include "mindx/parallel.hpp"

namespace mindx {

std::string_view to_string(DenoiserKind k) {
  switch (k) {
    case DenoiserKind::Identity: return "identity";
    case DenoiserKind::GaussianBlur: return "gaussian-blur";
    case DenoiserKind::PatchTransform: return "patch-transform";
  }
  return "?";
}

DenoiserKind parse_denoiser_kind(std::string_view s) {
  if (s == "identity") return DenoiserKind::Identity;
  if (s == "gaussian-blur") return DenoiserKind::GaussianBlur;
  if (s == "patch-transform") return DenoiserKind::PatchTransform;
  throw std::invalid_argument("unknown denoiser kind: " + std::string(s));
}

void DenoiserSpec::validate() const {
  if (!(strength >= 0.0)) throw std::invalid_argument("DenoiserSpec: strength must be >= 0");
  if (kind == DenoiserKind::PatchTransform) {
    if (patch_size < 3 || patch_size % 2 == 0) {
      throw std::invalid_argument("DenoiserSpec: patch_size must be odd >= 3");
    }
    if (search_radius < 0 || max_matches < 1 || ref_stride < 1) {
      throw std::invalid_argument("DenoiserSpec: invalid block-matching parameters");
    }
  }
}

namespace {

Image gaussian_blur(const Image& img, double stddev) {
  if (stddev == 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * stddev)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (stddev * stddev));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (auto& v : kernel) v /= total;

  const int h = img.height();
  const int w = img.width();
  Image tmp(w, h, img.peak());
  parallel_for(h, [&](std::ptrdiff_t r) {
    const int row = static_cast<int>(r);
    for (int col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] * img.at(row, reflect_index(col + i, w));
      }
      tmp.at(row, col) = acc;
    }
  });
  Image out(w, h, img.peak());
  parallel_for(h, [&](std::ptrdiff_t r) {
    const int row = static_cast<int>(r);
    for (int col = 0; col < w; ++col) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(reflect_index(row + i, h), col);
      }
      out.at(row, col) = acc;
    }
  });
  return out;
}

// Orthonormal DCT-II basis, row k = frequency k.
std::vector<double> dct_matrix(int n) {
  std::vector<double> m(static_cast<std::size_t>(n * n));
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      m[static_cast<std::size_t>(k * n + i)] =
          scale * std::cos(std::numbers::pi * (i + 0.5) * k / n);
    }
  }
  return m;
}

std::vector<int> reference_positions(int extent, int patch, int stride) {
  std::vector<int> pos;
  const int last = extent - patch;
  for (int p = 0; p <= last; p += stride) pos.push_back(p);
  if (pos.back() != last) pos.push_back(last);
  return pos;
}

struct GroupEstimate {
  std::vector<std::pair<int, int>> positions;  // (row, col) of each patch
  std::vector<double> pixels;                  // patches, each patch_size^2, row-major
  double weight = 0.0;
};

class PatchTransformDenoiser {
 public:
  PatchTransformDenoiser(const Image& img, const DenoiserSpec& spec)
      : img_(img), spec_(spec), p_(spec.patch_size), patch_basis_(dct_matrix(spec.patch_size)) {
    group_basis_.resize(static_cast<std::size_t>(spec.max_matches) + 1);
    for (int n = 1; n <= spec.max_matches; ++n) group_basis_[static_cast<std::size_t>(n)] = dct_matrix(n);
  }

  Image run() const {
    const int h = img_.height();
    const int w = img_.width();
    const auto rows = reference_positions(h, p_, spec_.ref_stride);
    const auto cols = reference_positions(w, p_, spec_.ref_stride);
    const std::size_t refs = rows.size() * cols.size();

    std::vector<GroupEstimate> groups(refs);
    parallel_for_dynamic(static_cast<std::ptrdiff_t>(refs), [&](std::ptrdiff_t i) {
      const auto k = static_cast<std::size_t>(i);
      groups[k] = process(rows[k / cols.size()], cols[k % cols.size()]);
    });

    // Serial aggregation in reference order keeps the output bit-stable.
    std::vector<double> num(img_.size(), 0.0);
    std::vector<double> den(img_.size(), 0.0);
    const std::size_t area = static_cast<std::size_t>(p_ * p_);
    for (const auto& g : groups) {
      for (std::size_t m = 0; m < g.positions.size(); ++m) {
        const auto [r0, c0] = g.positions[m];
        for (int r = 0; r < p_; ++r) {
          for (int c = 0; c < p_; ++c) {
            const std::size_t idx = img_.index(r0 + r, c0 + c);
            num[idx] += g.weight * g.pixels[m * area + static_cast<std::size_t>(r * p_ + c)];
            den[idx] += g.weight;
          }
        }
      }
    }
    Image out(w, h, img_.peak());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = den[i] > 0.0 ? num[i] / den[i] : img_[i];
    return out;
  }

 private:
  double distance(int r0, int c0, int r1, int c1) const {
    double d = 0.0;
    for (int r = 0; r < p_; ++r) {
      for (int c = 0; c < p_; ++c) {
        const double diff = img_.at(r0 + r, c0 + c) - img_.at(r1 + r, c1 + c);
        d += diff * diff;
      }
    }
    return d;
  }

  GroupEstimate process(int ref_row, int ref_col) const {
    const int h = img_.height();
    const int w = img_.width();
    const int rad = spec_.search_radius;

    std::vector<std::pair<double, std::pair<int, int>>> candidates;
    for (int r = std::max(0, ref_row - rad); r <= std::min(h - p_, ref_row + rad); ++r) {
      for (int c = std::max(0, ref_col - rad); c <= std::min(w - p_, ref_col + rad); ++c) {
        if (r == ref_row && c == ref_col) continue;
        candidates.push_back({distance(ref_row, ref_col, r, c), {r, c}});
      }
    }
    const std::size_t keep =
        std::min(candidates.size(), static_cast<std::size_t>(spec_.max_matches - 1));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end());

    GroupEstimate g;
    g.positions.push_back({ref_row, ref_col});
    for (std::size_t i = 0; i < keep; ++i) g.positions.push_back(candidates[i].second);

    const int n = static_cast<int>(g.positions.size());
    const std::size_t area = static_cast<std::size_t>(p_ * p_);
    std::vector<double> data(area * static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      const auto [r0, c0] = g.positions[static_cast<std::size_t>(m)];
      for (int r = 0; r < p_; ++r) {
        for (int c = 0; c < p_; ++c) {
          data[static_cast<std::size_t>(m) * area + static_cast<std::size_t>(r * p_ + c)] =
              img_.at(r0 + r, c0 + c);
        }
      }
    }

    std::vector<double> coeffs = forward(data, n);
    const double threshold = spec_.threshold_factor * spec_.strength;
    std::size_t retained = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      // The group DC term carries the mean and is always kept.
      if (i == 0) {
        ++retained;
        continue;
      }
      if (std::fabs(coeffs[i]) < threshold) {
        coeffs[i] = 0.0;
      } else {
        ++retained;
      }
    }
    g.pixels = inverse(coeffs, n);
    g.weight = 1.0 / (1.0 + static_cast<double>(retained));
    return g;
  }

  // 2D DCT on each patch, then a DCT along the group axis. Coefficient
  // layout: [group frequency][patch frequency row][patch frequency col].
  std::vector<double> forward(const std::vector<double>& data, int n) const {
    const std::size_t area = static_cast<std::size_t>(p_ * p_);
    std::vector<double> spatial(data.size());
    std::vector<double> tmp(area);
    for (int m = 0; m < n; ++m) {
      const double* x = &data[static_cast<std::size_t>(m) * area];
      double* y = &spatial[static_cast<std::size_t>(m) * area];
      transform2d(x, tmp.data(), y, false);
    }
    return along_group(spatial, n, false);
  }

  std::vector<double> inverse(const std::vector<double>& coeffs, int n) const {
    const std::vector<double> spatial = along_group(coeffs, n, true);
    const std::size_t area = static_cast<std::size_t>(p_ * p_);
    std::vector<double> out(spatial.size());
    std::vector<double> tmp(area);
    for (int m = 0; m < n; ++m) {
      transform2d(&spatial[static_cast<std::size_t>(m) * area], tmp.data(),
                  &out[static_cast<std::size_t>(m) * area], true);
    }
    return out;
  }

  // forward: Y = C X C^T; inverse: X = C^T Y C.
  void transform2d(const double* x, double* tmp, double* y, bool inverse) const {
    const auto& cm = patch_basis_;
    auto coef = [&](int a, int b) {
      return inverse ? cm[static_cast<std::size_t>(b * p_ + a)] : cm[static_cast<std::size_t>(a * p_ + b)];
    };
    for (int i = 0; i < p_; ++i) {
      for (int j = 0; j < p_; ++j) {
        double s = 0.0;
        for (int k = 0; k < p_; ++k) s += coef(i, k) * x[k * p_ + j];
        tmp[i * p_ + j] = s;
      }
    }
    for (int i = 0; i < p_; ++i) {
      for (int j = 0; j < p_; ++j) {
        double s = 0.0;
        for (int k = 0; k < p_; ++k) s += tmp[i * p_ + k] * coef(j, k);
        y[i * p_ + j] = s;
      }
    }
  }

  std::vector<double> along_group(const std::vector<double>& in, int n, bool inverse) const {
    const auto& gm = group_basis_[static_cast<std::size_t>(n)];
    const std::size_t area = static_cast<std::size_t>(p_ * p_);
    std::vector<double> out(in.size(), 0.0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double c = inverse ? gm[static_cast<std::size_t>(b * n + a)] : gm[static_cast<std::size_t>(a * n + b)];
        const double* src = &in[static_cast<std::size_t>(b) * area];
        double* dst = &out[static_cast<std::size_t>(a) * area];
        for (std::size_t e = 0; e < area; ++e) dst[e] += c * src[e];
      }
    }
    return out;
  }

  const Image& img_;
  const DenoiserSpec& spec_;
  int p_;
  std::vector<double> patch_basis_;
  std::vector<std::vector<double>> group_basis_;
};

}  // namespace

Image denoise(const Image& img, const DenoiserSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DenoiserKind::Identity:
      return img;
    case DenoiserKind::GaussianBlur:
      return gaussian_blur(img, spec.strength);
    case DenoiserKind::PatchTransform:
      if (img.width() < spec.patch_size || img.height() < spec.patch_size) {
        throw std::invalid_argument("denoise: image smaller than patch_size");
      }
      return PatchTransformDenoiser(img, spec).run();
  }
  throw std::logic_error("denoise: unhandled kind");
}

}  // namespace mindx
